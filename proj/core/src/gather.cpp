#include "asymdag/gather.hpp"

#include <algorithm>

namespace asymdag {

std::string variant_name(GatherVariant v) {
    switch (v) {
        case GatherVariant::Threshold: return "threshold";
        case GatherVariant::Naive: return "naive";
        case GatherVariant::Asymmetric: return "asymmetric";
    }
    return "?";
}

std::optional<GatherVariant> parse_variant(const std::string& s) {
    if (s == "threshold") return GatherVariant::Threshold;
    if (s == "naive") return GatherVariant::Naive;
    if (s == "asymmetric") return GatherVariant::Asymmetric;
    return std::nullopt;
}

GatherProcess::GatherProcess(ProcessId self, const TrustConfig* trust, GatherConfig cfg)
    : self_(self), trust_(trust), cfg_(cfg) {
    if (cfg_.variant != GatherVariant::Asymmetric && cfg_.rounds < 2)
        throw ConfigError("gather needs at least 2 rounds");
    uint32_t k = rounds();
    values_.assign(k + 1, ValueMap{});
    senders_.assign(k + 1, ProcessSet(trust_->n()));
    fired_.assign(k + 1, false);
    seen_s_ = seen_t_ = acks_ = readies_ = confirms_ = qualified_t_ = ProcessSet(trust_->n());
    if (cfg_.variant == GatherVariant::Threshold) {
        for (const auto& coll : trust_->fps.per_process)
            for (const auto& f : coll) threshold_f_ = std::max(threshold_f_, f.count());
    }
}

bool GatherProcess::quorum_of_senders(const ProcessSet& senders) const {
    if (cfg_.variant == GatherVariant::Threshold)
        return senders.count() >= trust_->n() - threshold_f_;
    return is_satisfied(trust_->qs.per_process[self_], senders);
}

bool GatherProcess::values_known(const ValueMap& values) const {
    const ValueMap& s = values_[1];
    for (const auto& [pid, digest] : values) {
        auto it = s.find(pid);
        if (it == s.end() || it->second != digest) return false;
    }
    return true;
}

void GatherProcess::merge(ValueMap& into, const ValueMap& from) {
    for (const auto& [pid, digest] : from) into.try_emplace(pid, digest);
}

void GatherProcess::snapshot(uint32_t round, const ValueMap& v) {
    snapshots_.emplace(round, v);
}

bool GatherProcess::sent_final_set() const {
    if (cfg_.variant == GatherVariant::Asymmetric) return sent_t_;
    return fired_[rounds() - 1];
}

bool GatherProcess::phase_consumed(uint32_t phase) const {
    if (cfg_.variant == GatherVariant::Asymmetric) {
        if (phase <= 1) return sent_dist_s_;
        if (phase == 2) return sent_t_;      // DistributeS feeds T until then
        return delivered_;                   // DistributeT feeds delivery
    }
    if (phase >= rounds()) return delivered_;
    return fired_[std::max<uint32_t>(phase, 1)];
}

std::vector<Outgoing> GatherProcess::on_input(ProcessId proposer, uint64_t digest) {
    values_[1].try_emplace(proposer, digest);
    senders_[1].insert(proposer);
    return evaluate();
}

std::vector<Outgoing> GatherProcess::on_set(ProcessId src, const GatherSetMsg& msg,
                                            std::vector<std::string>* notes) {
    auto note = [&](const std::string& s) {
        if (notes) notes->push_back(s);
    };
    if (cfg_.variant == GatherVariant::Asymmetric) {
        if (msg.round == 2 && !msg.final_round) {
            if (sent_t_) {
                note("DistributeS ignored, T already sent");
                return {};
            }
            if (seen_s_.contains(src)) return {};
            seen_s_.insert(src);
            pending_s_.emplace(src, *msg.values);
        } else if (msg.final_round) {
            if (seen_t_.contains(src)) return {};
            seen_t_.insert(src);
            pending_t_.emplace(src, *msg.values);
        } else {
            note("gather set message for unknown round " + std::to_string(msg.round));
            return {};
        }
        return evaluate();
    }
    // Threshold / naive: unconditional merge, distinct-sender counting.
    if (msg.round < 2 || msg.round > rounds()) {
        note("gather set message for unknown round " + std::to_string(msg.round));
        return {};
    }
    merge(values_[msg.round], *msg.values);
    senders_[msg.round].insert(src);
    return evaluate();
}

std::vector<Outgoing> GatherProcess::on_ctl(ProcessId src, const GatherCtlMsg& msg) {
    if (cfg_.variant != GatherVariant::Asymmetric) return {};
    switch (msg.kind) {
        case GatherCtlMsg::Kind::Ack: acks_.insert(src); break;
        case GatherCtlMsg::Kind::Ready: readies_.insert(src); break;
        case GatherCtlMsg::Kind::Confirm: confirms_.insert(src); break;
    }
    return evaluate();
}

std::vector<Outgoing> GatherProcess::evaluate() {
    std::vector<Outgoing> out;
    const uint32_t k = rounds();

    if (cfg_.variant != GatherVariant::Asymmetric) {
        for (uint32_t r = 1; r <= k; ++r) {
            if (fired_[r] || !quorum_of_senders(senders_[r])) continue;
            fired_[r] = true;
            snapshot(r, values_[r]);
            if (r < k) {
                out.push_back(Outgoing{kBroadcastAll,
                                       GatherSetMsg{r + 1, r + 1 == k, share_values(values_[r])}});
            } else {
                delivered_ = true;
                output_ = values_[r];
            }
        }
        return out;
    }

    // Asymmetric variant (constant-round).
    if (!sent_dist_s_ && is_satisfied(trust_->qs.per_process[self_], senders_[1])) {
        sent_dist_s_ = true;
        snapshot(1, values_[1]);
        out.push_back(Outgoing{kBroadcastAll, GatherSetMsg{2, false, share_values(values_[1])}});
    }

    // Buffered DistributeS sets become mergeable once their inputs have all
    // been arb-delivered here.
    if (!sent_t_) {
        for (auto it = pending_s_.begin(); it != pending_s_.end();) {
            if (values_known(it->second)) {
                merge(t_set_, it->second);
                out.push_back(Outgoing{it->first, GatherCtlMsg{GatherCtlMsg::Kind::Ack}});
                it = pending_s_.erase(it);
            } else {
                ++it;
            }
        }
    }

    if (!sent_ready_ && is_satisfied(trust_->qs.per_process[self_], acks_)) {
        sent_ready_ = true;
        out.push_back(Outgoing{kBroadcastAll, GatherCtlMsg{GatherCtlMsg::Kind::Ready}});
    }
    if (!sent_confirm_by_ready_ && is_satisfied(trust_->qs.per_process[self_], readies_)) {
        sent_confirm_by_ready_ = true;
        out.push_back(Outgoing{kBroadcastAll, GatherCtlMsg{GatherCtlMsg::Kind::Confirm}});
    }
    if (!sent_confirm_by_kernel_ && is_satisfied(trust_->ks.per_process[self_], confirms_)) {
        sent_confirm_by_kernel_ = true;
        out.push_back(Outgoing{kBroadcastAll, GatherCtlMsg{GatherCtlMsg::Kind::Confirm}});
    }
    if (!sent_t_ && is_satisfied(trust_->qs.per_process[self_], confirms_)) {
        sent_t_ = true;
        snapshot(2, t_set_);
        out.push_back(Outgoing{kBroadcastAll, GatherSetMsg{3, true, share_values(t_set_)}});
        pending_s_.clear();
    }

    if (!delivered_) {
        for (auto it = pending_t_.begin(); it != pending_t_.end();) {
            if (values_known(it->second)) {
                merge(u_set_, it->second);
                qualified_t_.insert(it->first);
                it = pending_t_.erase(it);
            } else {
                ++it;
            }
        }
        if (is_satisfied(trust_->qs.per_process[self_], qualified_t_)) {
            delivered_ = true;
            output_ = u_set_;
            snapshot(3, u_set_);
        }
    }
    return out;
}

CoreReport common_core_report(const std::map<ProcessId, ValueMap>& outputs,
                              const std::map<ProcessId, ValueMap>& s_sets,
                              const TrustConfig& trust, const ProcessSet& actual_faulty) {
    ProcessSet guild = maximal_guild(trust.qs, trust.fps, actual_faulty);
    CoreReport report;
    for (ProcessId g : guild.members()) {
        auto it = outputs.find(g);
        if (it == outputs.end())
            throw ConfigError("core report: outputs do not cover guild member " +
                              std::to_string(g + 1));
        report.per_process_outputs.emplace(g, it->second);
    }
    auto contained = [](const ValueMap& sub, const ValueMap& super) {
        for (const auto& [pid, digest] : sub) {
            auto it = super.find(pid);
            if (it == super.end() || it->second != digest) return false;
        }
        return true;
    };
    for (ProcessId owner : guild.members()) {
        auto it = s_sets.find(owner);
        if (it == s_sets.end()) continue;
        bool in_all = true;
        for (const auto& [pid, u] : report.per_process_outputs) {
            if (!contained(it->second, u)) {
                in_all = false;
                break;
            }
        }
        if (in_all) report.candidate_cores.emplace_back(owner, it->second);
    }
    return report;
}

}  // namespace asymdag

#include "asymdag/simnet.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace asymdag {

namespace {

struct Pending {
    uint64_t seq = 0;
    uint64_t send_step = 0;
    ProcessId src = 0, dst = 0;
    ProtocolMessage msg;
};

struct PendingOrder {
    bool operator()(const Pending& a, const Pending& b) const {
        return std::tie(a.send_step, a.src, a.dst, a.seq) <
               std::tie(b.send_step, b.src, b.dst, b.seq);
    }
};

Bytes input_payload(ProcessId p, uint32_t pad) {
    std::string s = "value:" + std::to_string(p + 1);
    while (s.size() < pad) s += '.';
    return bytes_of(s);
}

Bytes alt_payload(const Bytes& original) {
    Bytes alt = original;
    const std::string tag = "~alt";
    alt.insert(alt.end(), tag.begin(), tag.end());
    return alt;
}

class Simulator {
public:
    Simulator(const Scenario& scenario, TraceLevel level)
        : scenario_(scenario),
          level_(level),
          trust_(resolve_trust(scenario.trust)),
          rng_(splitmix64(scenario.seed ^ 0x73696d6e65740000ull)),
          gate_(CoinConfig{scenario.seed, trust_.n()}) {
        scenario_.validate(trust_);
        n_ = trust_.n();
        faulty_ = scenario_.faulty_set(n_);
        guild_ = maximal_guild(trust_.qs, trust_.fps, faulty_);
        budget_ = scenario_.fairness_budget ? scenario_.fairness_budget
                                            : uint64_t{10} * n_ * n_;
        quorum_union_.reserve(n_);
        for (uint32_t i = 0; i < n_; ++i) {
            ProcessSet u(n_);
            for (const auto& q : trust_.qs.per_process[i]) u |= q;
            quorum_union_.push_back(u);
        }
    }

    RunResult run() {
        setup();
        while (pending_count_ > 0 && step_ < scenario_.max_steps) {
            ++step_;
            Pending p = pick();
            --pending_count_;
            if (level_ == TraceLevel::Full)
                event(TraceEvent::Kind::Deliver, p.src, p.dst,
                      describe_message(p.msg, final_round_));
            dispatch(p);
            if (scenario_.schedule == Scenario::Schedule::QuorumOnly) {
                reclassify(p.dst);
                if ((step_ & 0xff) == 0) release_overdue();
            }
            if (scenario_.protocol == Scenario::Protocol::DagRider && !stop_issued_)
                check_workload_done();
        }

        RunResult result;
        result.scenario = scenario_;
        result.trust = trust_;
        result.quiescent = pending_count_ == 0;
        result.truncated = !result.quiescent;
        result.steps = step_;
        result.forced_releases = forced_;
        result.faulty = faulty_;
        result.guild = guild_;
        result.events = std::move(events_);
        result.hosts = std::move(hosts_);
        result.coin_queries = gate_.queries();
        result.coin_opened_at = gate_.opened_at();
        result.trace_text = render(result);
        return result;
    }

private:
    void event(TraceEvent::Kind kind, ProcessId a, ProcessId b, std::string detail) {
        events_.push_back(TraceEvent{step_, kind, a, b, std::move(detail)});
    }

    bool is_crashed(ProcessId p) const {
        auto it = scenario_.behavior.find(p);
        return it != scenario_.behavior.end() &&
               it->second.kind == ByzBehavior::Kind::Crash && step_ >= it->second.param;
    }

    void setup() {
        for (uint32_t p = 0; p < n_; ++p) {
            auto host = std::make_unique<SimHost>();
            host->id = p;
            host->arb = std::make_unique<ArbProcess>(p, &trust_);
            if (scenario_.protocol == Scenario::Protocol::Gather) {
                host->gather = std::make_unique<GatherProcess>(
                    p, &trust_, GatherConfig{scenario_.variant, scenario_.rounds});
            } else if (scenario_.protocol == Scenario::Protocol::DagRider) {
                host->rider = std::make_unique<DagRiderProcess>(
                    p, &trust_, CoinConfig{scenario_.seed, n_});
            }
            hosts_.push_back(std::move(host));
        }
        gather_delivery_logged_.assign(n_, false);
        final_round_ = scenario_.protocol == Scenario::Protocol::Gather
                           ? (scenario_.variant == GatherVariant::Asymmetric ? 3
                                                                             : scenario_.rounds)
                           : 0;

        if (scenario_.protocol == Scenario::Protocol::DagRider) {
            expected_blocks_.clear();
            for (uint32_t p = 0; p < n_; ++p) {
                if (faulty_.contains(p)) continue;
                for (uint32_t k = 0; k < scenario_.workload; ++k)
                    expected_blocks_.insert(
                        fnv64(bytes_of("block:" + std::to_string(p + 1) + ":" + std::to_string(k))));
            }
            delivered_expected_.assign(n_, {});
            for (uint32_t p = 0; p < n_; ++p) {
                for (uint32_t k = 0; k < scenario_.workload; ++k)
                    hosts_[p]->rider->aa_broadcast(
                        bytes_of("block:" + std::to_string(p + 1) + ":" + std::to_string(k)));
                auto sr = hosts_[p]->rider->start();
                handle_step_result(p, sr);
            }
        } else {
            for (uint32_t p = 0; p < n_; ++p) {
                Bytes payload = input_payload(p, scenario_.payload_bytes);
                hosts_[p]->expected_input_digest = fnv64(payload);
                InstanceLabel label{InstanceLabel::Tag::Input, p, 0};
                auto outs = hosts_[p]->arb->broadcast(label, share_bytes(std::move(payload)));
                for (const auto& o : outs) enqueue(p, o);
            }
        }
    }

    // --- outbound path -----------------------------------------------------

    void enqueue(ProcessId src, const Outgoing& o) {
        auto bit = scenario_.behavior.find(src);
        uint64_t at = step_;
        if (bit != scenario_.behavior.end()) {
            const ByzBehavior& b = bit->second;
            if (b.kind == ByzBehavior::Kind::Mute) return;
            if (b.kind == ByzBehavior::Kind::Crash && step_ >= b.param) return;
            if (b.kind == ByzBehavior::Kind::Delay) at += b.param;
        }
        bool equivocate = bit != scenario_.behavior.end() &&
                          bit->second.kind == ByzBehavior::Kind::EquivocateInputs;

        auto push_one = [&](ProcessId dst) {
            ProtocolMessage msg = o.msg;
            if (equivocate && dst >= n_ / 2) {
                if (auto* am = std::get_if<ArbMsg>(&msg);
                    am && am->phase == ArbMsg::Phase::Send &&
                    am->instance.tag == InstanceLabel::Tag::Input) {
                    Bytes alt = alt_payload(*am->payload);
                    am->digest = fnv64(alt);
                    am->payload = share_bytes(std::move(alt));
                }
            }
            if (level_ == TraceLevel::Full)
                event(TraceEvent::Kind::Send, src, dst, describe_message(msg, final_round_));
            Pending p{seq_++, at, src, dst, std::move(msg)};
            ++pending_count_;
            add_pending(std::move(p));
        };
        if (o.dst == kBroadcastAll) {
            for (uint32_t dst = 0; dst < n_; ++dst) push_one(dst);
        } else {
            push_one(o.dst);
        }
    }

    void add_pending(Pending p) {
        if (scenario_.schedule == Scenario::Schedule::Random) {
            random_pool_.push_back(std::move(p));
        } else if (scenario_.schedule == Scenario::Schedule::QuorumOnly && deferred(p)) {
            deferred_[p.dst].push_back(std::move(p));
        } else {
            ordered_.insert(std::move(p));
        }
    }

    // --- quorum-only deferral ----------------------------------------------

    bool quorum_member(ProcessId dst, ProcessId src) const {
        return quorum_union_[dst].contains(src);
    }

    bool deferred(const Pending& p) const {
        const SimHost& host = *hosts_[p.dst];
        if (const auto* am = std::get_if<ArbMsg>(&p.msg)) {
            if (am->phase != ArbMsg::Phase::Ready) return false;
            ProcessId subject = am->instance.sender;
            if (quorum_member(p.dst, subject)) return false;
            if (am->instance.tag == InstanceLabel::Tag::Input) {
                if (host.gather) return !host.gather->phase_consumed(1);
                auto it = host.arb->instances().find(am->instance);
                return it == host.arb->instances().end() || !it->second.delivered;
            }
            if (host.rider) return host.rider->current_round() <= am->instance.seq;
            return false;
        }
        if (const auto* gm = std::get_if<GatherSetMsg>(&p.msg)) {
            if (!host.gather || quorum_member(p.dst, p.src)) return false;
            uint32_t phase = gm->final_round ? final_round_ : gm->round;
            return !host.gather->phase_consumed(phase);
        }
        return false;
    }

    void reclassify(ProcessId dst) {
        auto it = deferred_.find(dst);
        if (it == deferred_.end()) return;
        auto& bucket = it->second;
        for (auto b = bucket.begin(); b != bucket.end();) {
            if (!deferred(*b)) {
                ordered_.insert(std::move(*b));
                b = bucket.erase(b);
            } else {
                ++b;
            }
        }
        if (bucket.empty()) deferred_.erase(it);
    }

    void release_overdue() {
        for (auto it = deferred_.begin(); it != deferred_.end();) {
            auto& bucket = it->second;
            for (auto b = bucket.begin(); b != bucket.end();) {
                if (step_ - b->send_step > budget_) {
                    ++forced_;
                    ordered_.insert(std::move(*b));
                    b = bucket.erase(b);
                } else {
                    ++b;
                }
            }
            it = bucket.empty() ? deferred_.erase(it) : std::next(it);
        }
    }

    // --- scheduling ---------------------------------------------------------

    Pending take_ordered(std::set<Pending, PendingOrder>::iterator it) {
        Pending p = *it;
        ordered_.erase(it);
        return p;
    }

    Pending pick() {
        switch (scenario_.schedule) {
            case Scenario::Schedule::Random: {
                size_t idx = static_cast<size_t>(rng_.next_below(random_pool_.size()));
                std::swap(random_pool_[idx], random_pool_.back());
                Pending p = std::move(random_pool_.back());
                random_pool_.pop_back();
                return p;
            }
            case Scenario::Schedule::Scripted: {
                while (script_cursor_ < scenario_.script.size()) {
                    auto [src, dst] = scenario_.script[script_cursor_];
                    auto match = std::find_if(ordered_.begin(), ordered_.end(),
                                              [src = src, dst = dst](const Pending& p) {
                                                  return p.src == src && p.dst == dst;
                                              });
                    if (match == ordered_.end()) break;
                    ++script_cursor_;
                    return take_ordered(match);
                }
                return take_ordered(ordered_.begin());
            }
            case Scenario::Schedule::RoundRobin:
                return take_ordered(ordered_.begin());
            case Scenario::Schedule::QuorumOnly: {
                if (!ordered_.empty()) return take_ordered(ordered_.begin());
                // Everything is deferred: forced release keeps links reliable.
                auto best_bucket = deferred_.end();
                size_t best_index = 0;
                const Pending* best = nullptr;
                PendingOrder less;
                for (auto it = deferred_.begin(); it != deferred_.end(); ++it) {
                    for (size_t i = 0; i < it->second.size(); ++i) {
                        const Pending& cand = it->second[i];
                        if (!best || less(cand, *best)) {
                            best = &cand;
                            best_bucket = it;
                            best_index = i;
                        }
                    }
                }
                ++forced_;
                Pending p = std::move(best_bucket->second[best_index]);
                best_bucket->second.erase(best_bucket->second.begin() + best_index);
                if (best_bucket->second.empty()) deferred_.erase(best_bucket);
                event(TraceEvent::Kind::Note, p.dst, 0, "fairness fallback released a deferral");
                return p;
            }
        }
        throw ConfigError("unreachable schedule");
    }

    // --- inbound path --------------------------------------------------------

    void dispatch(const Pending& p) {
        SimHost& host = *hosts_[p.dst];
        if (is_crashed(p.dst)) {
            if (level_ == TraceLevel::Full)
                event(TraceEvent::Kind::Note, p.dst, 0, "delivery dropped: process crashed");
            return;
        }
        if (const auto* am = std::get_if<ArbMsg>(&p.msg)) {
            auto res = host.arb->on_message(p.src, *am);
            for (const auto& o : res.out) enqueue(p.dst, o);
            for (const auto& d : res.delivered) {
                event(TraceEvent::Kind::ArbDeliver, p.dst, d.instance.sender,
                      "inst=" + d.instance.to_string() + " digest=" + hex64(d.digest));
                route_arb_delivery(p.dst, d);
            }
            return;
        }
        if (const auto* gm = std::get_if<GatherSetMsg>(&p.msg)) {
            if (!host.gather) return;
            std::vector<std::string> notes;
            auto outs = host.gather->on_set(p.src, *gm, &notes);
            for (auto& note : notes) event(TraceEvent::Kind::Note, p.dst, 0, std::move(note));
            for (const auto& o : outs) enqueue(p.dst, o);
            log_gather_delivery(p.dst);
            return;
        }
        if (const auto* gc = std::get_if<GatherCtlMsg>(&p.msg)) {
            if (!host.gather) return;
            auto outs = host.gather->on_ctl(p.src, *gc);
            for (const auto& o : outs) enqueue(p.dst, o);
            log_gather_delivery(p.dst);
            return;
        }
        if (const auto* wc = std::get_if<WaveCtlMsg>(&p.msg)) {
            if (!host.rider) return;
            auto sr = host.rider->on_control(p.src, *wc);
            handle_step_result(p.dst, sr);
            return;
        }
    }

    void route_arb_delivery(ProcessId p, const ArbDelivery& d) {
        SimHost& host = *hosts_[p];
        if (d.instance.tag == InstanceLabel::Tag::Input && host.gather) {
            auto outs = host.gather->on_input(d.instance.sender, d.digest);
            for (const auto& o : outs) enqueue(p, o);
            log_gather_delivery(p);
        } else if (d.instance.tag == InstanceLabel::Tag::Vertex && host.rider) {
            auto sr = host.rider->on_vertex_delivered(d.instance.sender, d.instance.seq,
                                                      *d.payload);
            handle_step_result(p, sr);
        }
    }

    void log_gather_delivery(ProcessId p) {
        SimHost& host = *hosts_[p];
        if (host.gather && host.gather->delivered() && !gather_delivery_logged_[p]) {
            gather_delivery_logged_[p] = true;
            event(TraceEvent::Kind::GatherDeliver, p, 0,
                  "size=" + std::to_string(host.gather->output().size()) +
                      " digest=" + hex64(value_map_digest(host.gather->output())));
        }
    }

    void handle_step_result(ProcessId p, const DagRiderProcess::StepResult& sr) {
        for (const auto& note : sr.notes) event(TraceEvent::Kind::Note, p, 0, note);
        for (uint32_t r : sr.completed_rounds) {
            if (level_ == TraceLevel::Full)
                event(TraceEvent::Kind::RoundDone, p, 0, "round=" + std::to_string(r));
            if (r > 0 && r % 4 == 0 && guild_.contains(p)) gate_.open(r / 4, step_);
        }
        for (const auto& c : sr.commits)
            event(TraceEvent::Kind::Commit, p, 0,
                  "wave=" + std::to_string(c.wave) + " leader=" + c.leader.to_string());
        for (const auto& d : sr.delivered) {
            event(TraceEvent::Kind::AaDeliver, p, d.vertex.source,
                  "wave=" + std::to_string(d.wave) + " pos=" + std::to_string(d.position) +
                      " src=" + std::to_string(d.vertex.source + 1) +
                      " round=" + std::to_string(d.vertex.round) +
                      " block=" + hex64(fnv64(d.block)) + " filler=" + (d.filler ? "1" : "0"));
            if (!d.filler) {
                uint64_t digest = fnv64(d.block);
                if (expected_blocks_.count(digest)) delivered_expected_[p].insert(digest);
            }
        }
        for (const auto& [label, payload] : sr.broadcasts) {
            auto outs = hosts_[p]->arb->broadcast(label, payload);
            for (const auto& o : outs) enqueue(p, o);
        }
        for (const auto& o : sr.out) enqueue(p, o);
    }

    void check_workload_done() {
        for (ProcessId g : guild_.members())
            if (delivered_expected_[g].size() != expected_blocks_.size()) return;
        stop_issued_ = true;
        event(TraceEvent::Kind::Note, 0, 0, "workload delivered everywhere: draining");
        for (auto& host : hosts_)
            if (host->rider) host->rider->stop_proposing();
    }

    std::string render(const RunResult& result) const { return render_trace(result, level_); }

    Scenario scenario_;
    TraceLevel level_;
    TrustConfig trust_;
    uint32_t n_ = 0;
    Rng rng_;
    CoinGate gate_;
    ProcessSet faulty_, guild_;
    std::vector<ProcessSet> quorum_union_;
    uint64_t budget_ = 0;

    std::vector<std::unique_ptr<SimHost>> hosts_;
    std::vector<bool> gather_delivery_logged_;
    uint32_t final_round_ = 0;

    std::set<Pending, PendingOrder> ordered_;
    std::vector<Pending> random_pool_;
    std::map<ProcessId, std::deque<Pending>> deferred_;
    size_t pending_count_ = 0;
    uint64_t seq_ = 0;
    uint64_t step_ = 0;
    uint64_t forced_ = 0;
    size_t script_cursor_ = 0;

    std::set<uint64_t> expected_blocks_;
    std::vector<std::set<uint64_t>> delivered_expected_;
    bool stop_issued_ = false;

    std::vector<TraceEvent> events_;
};

}  // namespace

RunResult run(const Scenario& scenario, TraceLevel level) {
    Simulator sim(scenario, level);
    return sim.run();
}

std::map<ProcessId, ValueMap> RunResult::gather_outputs(bool guild_only) const {
    std::map<ProcessId, ValueMap> out;
    for (const auto& host : hosts) {
        if (!host->gather || !host->gather->delivered()) continue;
        if (guild_only && !guild.contains(host->id)) continue;
        out.emplace(host->id, host->gather->output());
    }
    return out;
}

std::map<ProcessId, ValueMap> RunResult::gather_s_sets() const {
    std::map<ProcessId, ValueMap> out;
    for (const auto& host : hosts) {
        if (!host->gather) continue;
        auto it = host->gather->round_snapshots().find(1);
        if (it != host->gather->round_snapshots().end()) out.emplace(host->id, it->second);
    }
    return out;
}

std::string render_trace(const RunResult& result, TraceLevel level) {
    std::ostringstream out;
    out << "trace-v1 scenario=" << hex64(result.scenario.digest())
        << " seed=" << result.scenario.seed << "\n";
    if (level != TraceLevel::Summary) {
        for (const auto& e : result.events) {
            if (level == TraceLevel::Outputs &&
                (e.kind == TraceEvent::Kind::Send || e.kind == TraceEvent::Kind::Deliver ||
                 e.kind == TraceEvent::Kind::RoundDone))
                continue;
            out << "s=" << e.step << " ";
            switch (e.kind) {
                case TraceEvent::Kind::Send:
                    out << "send src=" << (e.a + 1) << " dst=" << (e.b + 1) << " " << e.detail;
                    break;
                case TraceEvent::Kind::Deliver:
                    out << "recv src=" << (e.a + 1) << " dst=" << (e.b + 1) << " " << e.detail;
                    break;
                case TraceEvent::Kind::Note:
                    out << "note p=" << (e.a + 1) << " " << e.detail;
                    break;
                case TraceEvent::Kind::ArbDeliver:
                    out << "arb-deliver p=" << (e.a + 1) << " " << e.detail;
                    break;
                case TraceEvent::Kind::GatherDeliver:
                    out << "gather-deliver p=" << (e.a + 1) << " " << e.detail;
                    break;
                case TraceEvent::Kind::AaDeliver:
                    out << "aa-deliver p=" << (e.a + 1) << " " << e.detail;
                    break;
                case TraceEvent::Kind::Commit:
                    out << "commit p=" << (e.a + 1) << " " << e.detail;
                    break;
                case TraceEvent::Kind::RoundDone:
                    out << "round-done p=" << (e.a + 1) << " " << e.detail;
                    break;
                case TraceEvent::Kind::CoinQuery:
                    out << "coin-query " << e.detail;
                    break;
            }
            out << "\n";
        }
    }
    out << "end quiescent=" << (result.quiescent ? 1 : 0)
        << " truncated=" << (result.truncated ? 1 : 0) << " steps=" << result.steps
        << " forced=" << result.forced_releases << "\n";
    out << "summary deliveries";
    for (const auto& host : result.hosts) {
        size_t count = 0;
        if (host->gather) {
            count = host->gather->delivered() ? host->gather->output().size() : 0;
        } else if (host->rider) {
            count = host->rider->delivery_log().size();
        } else {
            for (const auto& [label, st] : host->arb->instances())
                if (st.delivered) ++count;
        }
        out << " " << count;
    }
    out << "\n";
    if (result.scenario.protocol == Scenario::Protocol::DagRider) {
        out << "summary decided-waves";
        for (const auto& host : result.hosts) out << " " << host->rider->decided_wave();
        out << "\n";
    }
    return out.str();
}

}  // namespace asymdag

#include "asymdag/trace_check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace asymdag {

namespace {

Verdict pass(const std::string& name) { return Verdict{name, true, ""}; }
Verdict fail(const std::string& name, const std::string& detail) {
    return Verdict{name, false, detail};
}

Verdict check_quiescence(const RunResult& r) {
    if (r.quiescent) return pass("quiescence");
    return fail("quiescence", "truncated at step " + std::to_string(r.steps));
}

Verdict check_arb_consistency(const RunResult& r) {
    std::map<InstanceLabel, std::pair<ProcessId, uint64_t>> first;
    for (const auto& host : r.hosts) {
        if (!r.guild.contains(host->id)) continue;
        for (const auto& [label, st] : host->arb->instances()) {
            if (!st.delivered) continue;
            auto [it, inserted] = first.try_emplace(label, host->id, st.delivered_digest);
            if (!inserted && it->second.second != st.delivered_digest)
                return fail("arb-consistency",
                            "instance " + label.to_string() + ": p" +
                                std::to_string(it->second.first + 1) + " delivered " +
                                hex64(it->second.second) + " but p" +
                                std::to_string(host->id + 1) + " delivered " +
                                hex64(st.delivered_digest));
        }
    }
    return pass("arb-consistency");
}

Verdict check_arb_totality(const RunResult& r) {
    if (!r.quiescent) return fail("arb-totality", "run truncated; totality not evaluable");
    std::map<InstanceLabel, ProcessId> delivered_somewhere;
    for (const auto& host : r.hosts) {
        if (!r.guild.contains(host->id)) continue;
        for (const auto& [label, st] : host->arb->instances())
            if (st.delivered) delivered_somewhere.try_emplace(label, host->id);
    }
    for (const auto& [label, witness] : delivered_somewhere) {
        for (ProcessId g : r.guild.members()) {
            const auto& inst = r.hosts[g]->arb->instances();
            auto it = inst.find(label);
            if (it == inst.end() || !it->second.delivered)
                return fail("arb-totality", "instance " + label.to_string() + " delivered by p" +
                                                std::to_string(witness + 1) + " but not by p" +
                                                std::to_string(g + 1));
        }
    }
    return pass("arb-totality");
}

Verdict check_arb_validity(const RunResult& r) {
    if (r.scenario.protocol == Scenario::Protocol::DagRider)
        return pass("arb-validity");  // inputs are vertices; covered by aa-validity
    if (!r.quiescent) return fail("arb-validity", "run truncated");
    for (uint32_t p = 0; p < r.trust.n(); ++p) {
        if (r.faulty.contains(p)) continue;
        InstanceLabel label{InstanceLabel::Tag::Input, p, 0};
        for (ProcessId g : r.guild.members()) {
            const auto& inst = r.hosts[g]->arb->instances();
            auto it = inst.find(label);
            if (it == inst.end() || !it->second.delivered)
                return fail("arb-validity", "input of correct p" + std::to_string(p + 1) +
                                                " not delivered by guild member p" +
                                                std::to_string(g + 1));
            if (it->second.delivered_digest != r.hosts[p]->expected_input_digest)
                return fail("arb-validity", "input of correct p" + std::to_string(p + 1) +
                                                " delivered with a different payload at p" +
                                                std::to_string(g + 1));
        }
    }
    return pass("arb-validity");
}

Verdict check_arb_integrity(const RunResult& r) {
    // The per-instance delivered flag is monotone; duplicate deliveries would
    // show up as repeated arb-deliver events.
    std::map<std::pair<ProcessId, std::string>, int> counts;
    for (const auto& e : r.events) {
        if (e.kind != TraceEvent::Kind::ArbDeliver) continue;
        auto key = std::make_pair(e.a, e.detail.substr(0, e.detail.find(" digest=")));
        if (++counts[key] > 1)
            return fail("arb-integrity", "p" + std::to_string(e.a + 1) +
                                             " delivered twice: " + e.detail);
    }
    return pass("arb-integrity");
}

Verdict check_common_core(const RunResult& r) {
    if (!r.quiescent) return fail("common-core", "run truncated");
    // The property quantifies over executions with a guild.
    if (r.guild.empty()) return Verdict{"common-core", true, "vacuous: no guild"};
    auto outputs = r.gather_outputs(true);
    auto s_sets = r.gather_s_sets();
    for (ProcessId g : r.guild.members())
        if (!outputs.count(g))
            return fail("common-core",
                        "guild member p" + std::to_string(g + 1) + " did not deliver");
    auto report = common_core_report(outputs, s_sets, r.trust, r.faulty);
    if (report.has_core()) return pass("common-core");
    return fail("common-core", "no candidate core among " +
                                   std::to_string(s_sets.size()) + " distributed S sets");
}

Verdict check_gather_validity(const RunResult& r) {
    ProcessSet wise = classify(r.trust.fps, r.faulty).wise;
    for (const auto& [p, output] : r.gather_outputs(true)) {
        for (const auto& [proposer, digest] : output) {
            if (!wise.contains(proposer)) continue;
            if (digest != r.hosts[proposer]->expected_input_digest)
                return fail("gather-validity",
                            "p" + std::to_string(p + 1) + " output holds (" +
                                std::to_string(proposer + 1) + ", " + hex64(digest) +
                                ") but the wise proposer sent " +
                                hex64(r.hosts[proposer]->expected_input_digest));
        }
    }
    return pass("gather-validity");
}

Verdict check_gather_agreement(const RunResult& r) {
    std::map<ProcessId, std::pair<ProcessId, uint64_t>> seen;
    for (const auto& [p, output] : r.gather_outputs(true)) {
        for (const auto& [proposer, digest] : output) {
            auto [it, inserted] = seen.try_emplace(proposer, p, digest);
            if (!inserted && it->second.second != digest)
                return fail("gather-agreement",
                            "proposer " + std::to_string(proposer + 1) + ": p" +
                                std::to_string(it->second.first + 1) + " has " +
                                hex64(it->second.second) + ", p" + std::to_string(p + 1) +
                                " has " + hex64(digest));
        }
    }
    return pass("gather-agreement");
}

std::vector<const DagRiderProcess*> guild_riders(const RunResult& r) {
    std::vector<const DagRiderProcess*> out;
    for (ProcessId g : r.guild.members())
        if (r.hosts[g]->rider) out.push_back(r.hosts[g]->rider.get());
    return out;
}

Verdict check_total_order(const RunResult& r) {
    if (!r.quiescent) return fail("total-order", "run truncated");
    auto riders = guild_riders(r);
    if (riders.size() < 2) return pass("total-order");
    const auto& ref = riders.front()->delivery_log();
    for (size_t i = 1; i < riders.size(); ++i) {
        const auto& other = riders[i]->delivery_log();
        size_t m = std::min(ref.size(), other.size());
        for (size_t k = 0; k < m; ++k) {
            if (!(ref[k].vertex == other[k].vertex))
                return fail("total-order",
                            "divergence at index " + std::to_string(k) + ": p" +
                                std::to_string(riders.front()->self() + 1) + " delivered " +
                                ref[k].vertex.to_string() + ", p" +
                                std::to_string(riders[i]->self() + 1) + " delivered " +
                                other[k].vertex.to_string());
        }
        if (ref.size() != other.size())
            return fail("total-order", "p" + std::to_string(riders.front()->self() + 1) +
                                           " delivered " + std::to_string(ref.size()) +
                                           " vertices but p" +
                                           std::to_string(riders[i]->self() + 1) + " delivered " +
                                           std::to_string(other.size()));
    }
    return pass("total-order");
}

Verdict check_aa_agreement(const RunResult& r) {
    if (!r.quiescent) return fail("aa-agreement", "run truncated");
    std::map<VertexId, ProcessId> seen;
    auto riders = guild_riders(r);
    for (const auto* rider : riders)
        for (const auto& d : rider->delivery_log()) seen.try_emplace(d.vertex, rider->self());
    for (const auto& [vid, witness] : seen) {
        for (const auto* rider : riders) {
            bool found = false;
            for (const auto& d : rider->delivery_log())
                if (d.vertex == vid) { found = true; break; }
            if (!found)
                return fail("aa-agreement", "vertex " + vid.to_string() + " delivered by p" +
                                                std::to_string(witness + 1) + " but not by p" +
                                                std::to_string(rider->self() + 1));
        }
    }
    return pass("aa-agreement");
}

Verdict check_aa_integrity(const RunResult& r) {
    for (const auto& host : r.hosts) {
        if (!host->rider) continue;
        std::set<VertexId> seen;
        for (const auto& d : host->rider->delivery_log())
            if (!seen.insert(d.vertex).second)
                return fail("aa-integrity", "p" + std::to_string(host->id + 1) +
                                                " delivered vertex " + d.vertex.to_string() +
                                                " twice");
    }
    return pass("aa-integrity");
}

Verdict check_aa_validity(const RunResult& r) {
    if (!r.quiescent) return fail("aa-validity", "run truncated");
    std::set<uint64_t> expected;
    for (uint32_t p = 0; p < r.trust.n(); ++p) {
        if (r.faulty.contains(p)) continue;
        for (uint32_t k = 0; k < r.scenario.workload; ++k)
            expected.insert(
                fnv64(bytes_of("block:" + std::to_string(p + 1) + ":" + std::to_string(k))));
    }
    for (const auto* rider : guild_riders(r)) {
        std::set<uint64_t> got;
        for (const auto& d : rider->delivery_log())
            if (!d.filler) got.insert(fnv64(d.block));
        for (uint64_t digest : expected)
            if (!got.count(digest))
                return fail("aa-validity", "a correct block (digest " + hex64(digest) +
                                               ") is missing from p" +
                                               std::to_string(rider->self() + 1));
    }
    return pass("aa-validity");
}

Verdict check_leader_reachability(const RunResult& r) {
    // Committed leaders must agree per wave, and each later leader must reach
    // every earlier one through a strong path.
    std::map<uint32_t, VertexId> leaders;
    for (const auto* rider : guild_riders(r)) {
        for (const auto& c : rider->commits()) {
            auto [it, inserted] = leaders.try_emplace(c.wave, c.leader);
            if (!inserted && !(it->second == c.leader))
                return fail("leader-reachability",
                            "two leaders committed for wave " + std::to_string(c.wave));
        }
    }
    for (auto later = leaders.begin(); later != leaders.end(); ++later) {
        for (auto earlier = leaders.begin(); earlier != later; ++earlier) {
            bool checked = false;
            for (const auto* rider : guild_riders(r)) {
                const Dag& dag = rider->dag();
                if (!dag.contains(later->second) || !dag.contains(earlier->second)) continue;
                checked = true;
                if (!dag.strong_path(later->second, earlier->second))
                    return fail("leader-reachability",
                                "no strong path from wave " + std::to_string(later->first) +
                                    " leader to wave " + std::to_string(earlier->first) +
                                    " leader in DAG of p" + std::to_string(rider->self() + 1));
            }
            if (!checked)
                return fail("leader-reachability",
                            "no guild DAG contains both committed leaders of waves " +
                                std::to_string(earlier->first) + " and " +
                                std::to_string(later->first));
        }
    }
    return pass("leader-reachability");
}

Verdict check_coin_gating(const RunResult& r) {
    for (const auto& q : r.coin_queries) {
        if (!q.allowed) continue;  // denials are the gate working
        auto it = r.coin_opened_at.find(q.wave);
        if (it == r.coin_opened_at.end() || q.step < it->second)
            return fail("coin-gating", "adversary learned wave " + std::to_string(q.wave) +
                                           " leader at step " + std::to_string(q.step) +
                                           " before the reveal gate opened");
    }
    return pass("coin-gating");
}

}  // namespace

std::vector<std::string> default_properties(Scenario::Protocol protocol) {
    switch (protocol) {
        case Scenario::Protocol::Arb:
            return {"quiescence", "arb-consistency", "arb-totality", "arb-validity",
                    "arb-integrity"};
        case Scenario::Protocol::Gather:
            return {"quiescence",       "arb-consistency", "arb-totality",
                    "arb-validity",     "arb-integrity",   "common-core",
                    "gather-validity",  "gather-agreement"};
        case Scenario::Protocol::DagRider:
            return {"quiescence",   "total-order",        "aa-agreement",
                    "aa-integrity", "aa-validity",        "arb-consistency",
                    "arb-integrity", "leader-reachability", "coin-gating"};
    }
    return {};
}

std::vector<Verdict> check_trace(const RunResult& result,
                                 const std::vector<std::string>& properties) {
    std::vector<Verdict> verdicts;
    for (const auto& name : properties) {
        if (name == "quiescence") verdicts.push_back(check_quiescence(result));
        else if (name == "arb-consistency") verdicts.push_back(check_arb_consistency(result));
        else if (name == "arb-totality") verdicts.push_back(check_arb_totality(result));
        else if (name == "arb-validity") verdicts.push_back(check_arb_validity(result));
        else if (name == "arb-integrity") verdicts.push_back(check_arb_integrity(result));
        else if (name == "common-core") verdicts.push_back(check_common_core(result));
        else if (name == "gather-validity") verdicts.push_back(check_gather_validity(result));
        else if (name == "gather-agreement") verdicts.push_back(check_gather_agreement(result));
        else if (name == "total-order") verdicts.push_back(check_total_order(result));
        else if (name == "aa-agreement") verdicts.push_back(check_aa_agreement(result));
        else if (name == "aa-integrity") verdicts.push_back(check_aa_integrity(result));
        else if (name == "aa-validity") verdicts.push_back(check_aa_validity(result));
        else if (name == "leader-reachability")
            verdicts.push_back(check_leader_reachability(result));
        else if (name == "coin-gating") verdicts.push_back(check_coin_gating(result));
        else throw ConfigError("unknown property: " + name);
    }
    return verdicts;
}

bool all_pass(const std::vector<Verdict>& verdicts) {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

Verdict check_total_order_text(const std::string& trace_text) {
    std::map<ProcessId, std::vector<std::string>> sequences;
    std::istringstream in(trace_text);
    std::string line;
    while (std::getline(in, line)) {
        auto pos = line.find("aa-deliver p=");
        if (pos == std::string::npos) continue;
        size_t start = pos + 13;
        size_t space = line.find(' ', start);
        ProcessId p = static_cast<ProcessId>(std::stoul(line.substr(start, space - start)) - 1);
        auto src = line.find("src=", space);
        if (src == std::string::npos) continue;
        sequences[p].push_back(line.substr(src));
    }
    if (sequences.size() < 2) return pass("total-order");
    auto it = sequences.begin();
    const auto& ref = it->second;
    ProcessId ref_p = it->first;
    for (++it; it != sequences.end(); ++it) {
        size_t m = std::min(ref.size(), it->second.size());
        for (size_t k = 0; k < m; ++k) {
            if (ref[k] != it->second[k])
                return fail("total-order", "first divergence at index " + std::to_string(k) +
                                               " between p" + std::to_string(ref_p + 1) +
                                               " and p" + std::to_string(it->first + 1));
        }
        if (ref.size() != it->second.size())
            return fail("total-order",
                        "length mismatch between p" + std::to_string(ref_p + 1) + " and p" +
                            std::to_string(it->first + 1) + " after index " + std::to_string(m));
    }
    return pass("total-order");
}

DagStats dag_stats(const RunResult& r) {
    DagStats stats;
    stats.every_guild_member_committed = true;
    // Expected real blocks; the commit cycle that completes them at a process
    // is conditioned by the stop rule (length-biased) and is excluded along
    // with the final cycle.
    std::set<uint64_t> expected;
    for (uint32_t p = 0; p < r.trust.n(); ++p) {
        if (r.faulty.contains(p)) continue;
        for (uint32_t k = 0; k < r.scenario.workload; ++k)
            expected.insert(
                fnv64(bytes_of("block:" + std::to_string(p + 1) + ":" + std::to_string(k))));
    }
    for (ProcessId g : r.guild.members()) {
        const auto* rider = r.hosts[g]->rider.get();
        if (!rider) continue;
        stats.total_commits += rider->commit_count();
        if (rider->commit_count() == 0) {
            stats.every_guild_member_committed = false;
            continue;
        }
        uint32_t coverage_wave = 0;
        std::set<uint64_t> seen;
        for (const auto& d : rider->delivery_log()) {
            if (!d.filler && expected.count(fnv64(d.block))) seen.insert(fnv64(d.block));
            if (!expected.empty() && seen.size() == expected.size()) {
                coverage_wave = d.wave;
                break;
            }
        }
        // The commit event that released the covering delivery is the first
        // one at or past that wave.
        const auto& commits = rider->commits();
        size_t covering_event = commits.size();
        for (size_t i = 0; i < commits.size(); ++i) {
            if (coverage_wave > 0 && commits[i].wave >= coverage_wave) {
                covering_event = i;
                break;
            }
        }
        uint32_t prev = 0;
        for (size_t i = 0; i + 1 < commits.size(); ++i) {
            if (i != covering_event) stats.cycles.push_back(commits[i].wave - prev);
            prev = commits[i].wave;
        }
    }
    if (!stats.cycles.empty()) {
        double sum = 0;
        for (uint32_t c : stats.cycles) sum += c;
        stats.waves_per_commit = sum / static_cast<double>(stats.cycles.size());
    } else {
        // Too few commits for unbiased cycles; fall back to the censored
        // ratio so short runs still report something.
        double sum = 0;
        size_t count = 0;
        for (ProcessId g : r.guild.members()) {
            const auto* rider = r.hosts[g]->rider.get();
            if (rider && rider->commit_count() > 0) {
                sum += static_cast<double>(rider->decided_wave()) /
                       static_cast<double>(rider->commit_count());
                ++count;
            }
        }
        if (count) stats.waves_per_commit = sum / static_cast<double>(count);
    }
    return stats;
}

MeanBound one_sided_upper95(const std::vector<double>& samples) {
    MeanBound b;
    b.count = samples.size();
    if (samples.empty()) return b;
    double sum = 0;
    for (double x : samples) sum += x;
    b.mean = sum / static_cast<double>(samples.size());
    if (samples.size() < 2) {
        b.upper95 = b.mean;
        return b;
    }
    double ss = 0;
    for (double x : samples) ss += (x - b.mean) * (x - b.mean);
    double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
    // z quantile; with n = 200 the normal approximation is appropriate.
    b.upper95 = b.mean + 1.6449 * sd / std::sqrt(static_cast<double>(samples.size()));
    return b;
}

}  // namespace asymdag

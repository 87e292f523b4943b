#pragma once

#include "asymdag/simnet.hpp"

namespace asymdag {

struct Verdict {
    std::string property;
    bool pass = false;
    std::string detail;  // counterexample pointer on failure
};

/// Known property names:
///   quiescence, arb-consistency, arb-totality, arb-validity, arb-integrity,
///   common-core, gather-validity, gather-agreement,
///   total-order, aa-agreement, aa-integrity, aa-validity,
///   leader-reachability, coin-gating
/// Unknown names raise ConfigError.
std::vector<Verdict> check_trace(const RunResult& result,
                                 const std::vector<std::string>& properties);

/// The default suite for the scenario's protocol.
std::vector<std::string> default_properties(Scenario::Protocol protocol);

bool all_pass(const std::vector<Verdict>& verdicts);

/// Text-level total-order check over aa-deliver records, usable on trace
/// files (including hand-corrupted ones). Reports the first divergence.
Verdict check_total_order_text(const std::string& trace_text);

/// Per-run commit statistics for the expected-waves bound. Cycle lengths are
/// the wave gaps between consecutive commit events per guild process; each
/// process's final cycle is dropped because the workload stop rule conditions
/// on it (length bias).
struct DagStats {
    double waves_per_commit = 0;   // mean of the unbiased cycles below
    std::vector<uint32_t> cycles;  // non-final complete cycle lengths
    uint64_t total_commits = 0;
    bool every_guild_member_committed = false;
};
DagStats dag_stats(const RunResult& result);

/// Sample mean and its one-sided 95% upper confidence bound.
struct MeanBound {
    double mean = 0;
    double upper95 = 0;
    size_t count = 0;
};
MeanBound one_sided_upper95(const std::vector<double>& samples);

}  // namespace asymdag

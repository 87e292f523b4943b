#pragma once

#include <memory>
#include <optional>

#include "asymdag/abroadcast.hpp"
#include "asymdag/dagrider.hpp"
#include "asymdag/scenario.hpp"

namespace asymdag {

struct TraceEvent {
    enum class Kind {
        Send,
        Deliver,
        Note,
        ArbDeliver,
        GatherDeliver,
        AaDeliver,
        Commit,
        RoundDone,
        CoinQuery
    };
    uint64_t step = 0;
    Kind kind = Kind::Note;
    ProcessId a = 0;  // source / owning process
    ProcessId b = 0;  // destination where applicable
    std::string detail;
};

enum class TraceLevel { Full, Outputs, Summary };

/// One simulated process: the broadcast layer plus the protocol under test.
struct SimHost {
    ProcessId id = 0;
    std::unique_ptr<ArbProcess> arb;
    std::unique_ptr<GatherProcess> gather;
    std::unique_ptr<DagRiderProcess> rider;
    uint64_t expected_input_digest = 0;  // the value this process proposes
    bool crashed = false;
};

struct RunResult {
    Scenario scenario;
    TrustConfig trust;
    bool quiescent = false;
    bool truncated = false;
    uint64_t steps = 0;
    uint64_t forced_releases = 0;  // fairness fallback uses
    ProcessSet faulty;
    ProcessSet guild;
    std::vector<TraceEvent> events;
    std::string trace_text;
    std::vector<std::unique_ptr<SimHost>> hosts;
    std::vector<CoinGate::QueryLog> coin_queries;
    std::map<uint32_t, uint64_t> coin_opened_at;  // wave -> step

    /// Gather outputs of delivered processes (optionally guild only).
    std::map<ProcessId, ValueMap> gather_outputs(bool guild_only = true) const;
    /// DistributeS snapshots (round-1 sets) of processes that sent one.
    std::map<ProcessId, ValueMap> gather_s_sets() const;
};

/// Deterministic discrete-event run of the scenario. Identical scenarios
/// produce byte-identical traces.
RunResult run(const Scenario& scenario, TraceLevel level = TraceLevel::Full);

std::string render_trace(const RunResult& result, TraceLevel level);

}  // namespace asymdag

#pragma once

#include <iosfwd>

#include "asymdag/gather.hpp"
#include "asymdag/trust.hpp"

namespace asymdag {

struct ByzBehavior {
    enum class Kind { Crash, Mute, EquivocateInputs, Delay };
    Kind kind = Kind::Crash;
    uint64_t param = 0;  // crash step, or delay added to every send
};

/// Declarative simulation input. Runs are pure functions of a Scenario; the
/// digest of the canonical serialization goes into the trace header.
struct Scenario {
    std::string trust = "counterexample30";

    enum class Protocol { Arb, Gather, DagRider };
    Protocol protocol = Protocol::Gather;
    GatherVariant variant = GatherVariant::Asymmetric;
    uint32_t rounds = 3;  // naive/threshold gather round count

    std::vector<ProcessId> faulty;  // 0-based, sorted
    std::map<ProcessId, ByzBehavior> behavior;

    enum class Schedule { RoundRobin, Random, QuorumOnly, Scripted };
    Schedule schedule = Schedule::RoundRobin;
    std::vector<std::pair<ProcessId, ProcessId>> script;

    uint64_t seed = 0;
    uint32_t workload = 1;       // dagrider: blocks per process
    uint32_t payload_bytes = 0;  // pad gather inputs up to this size
    uint64_t max_steps = 2000000;
    uint64_t fairness_budget = 0;  // 0 -> default 10 * n^2

    std::string serialize() const;
    uint64_t digest() const;

    static Scenario parse(std::istream& in);
    static Scenario load_file(const std::string& path);

    /// The built-in reproduction scenario: counterexample30 trust, no faults,
    /// quorum-only schedule, chosen gather variant.
    static Scenario counterexample(GatherVariant v, uint32_t k_rounds = 3, uint64_t seed = 1);

    ProcessSet faulty_set(uint32_t n) const;
    /// Structural validation against the resolved trust; throws ConfigError.
    void validate(const TrustConfig& trust_cfg) const;
};

std::string protocol_name(Scenario::Protocol p);
std::string schedule_name(Scenario::Schedule s);

}  // namespace asymdag

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "asymdag/process_set.hpp"

namespace asymdag {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-process collections of fail-prone sets. Stored as maximal antichains;
/// the star closure (all subsets) is realized by subset predicates instead of
/// being materialized.
struct FailProneSystem {
    uint32_t n = 0;
    std::vector<std::vector<ProcessSet>> per_process;  // per_process[i] nonempty

    static FailProneSystem from_sets(uint32_t n, std::vector<std::vector<ProcessSet>> sets);
    /// All f-sized subsets of P for every process.
    static FailProneSystem threshold(uint32_t n, uint32_t f);

    void validate() const;  // throws ConfigError on malformed input
};

/// Per-process quorum collections, stored as minimal antichains.
struct QuorumSystem {
    uint32_t n = 0;
    std::vector<std::vector<ProcessSet>> per_process;

    const std::vector<ProcessSet>& quorums_of(ProcessId i) const { return per_process[i]; }
    /// Size of the smallest quorum of any process, c(Q).
    uint32_t smallest_quorum_size() const;
};

struct KernelSystem {
    uint32_t n = 0;
    std::vector<std::vector<ProcessSet>> per_process;  // minimal kernels
};

struct Classification {
    ProcessSet faulty;
    ProcessSet naive;
    ProcessSet wise;
};

/// A concrete refutation of the B3 condition: F_i + F_j + F_ij covers P.
struct B3Witness {
    ProcessId i = 0, j = 0;
    ProcessSet f_i, f_j, f_ij;
    std::string to_string() const;
};

struct QuorumConsistencyWitness {
    ProcessId i = 0, j = 0;
    ProcessSet q_i, q_j, f_ij;
};
struct QuorumAvailabilityWitness {
    ProcessId i = 0;
    ProcessSet f_i;
};

struct QuorumVerifyReport {
    bool consistency = false;
    bool availability = false;
    std::optional<QuorumConsistencyWitness> consistency_witness;
    std::optional<QuorumAvailabilityWitness> availability_witness;
    bool ok() const { return consistency && availability; }
};

/// True iff no pair of fail-prone sets plus a common fail-prone subset covers
/// P. F_ij ranges over maximal elements of F_i* n F_j*; the covering condition
/// is monotone in F_ij, so that restriction is sound.
bool check_b3(const FailProneSystem& fps);
/// Witness-returning form; nullopt means the condition holds.
std::optional<B3Witness> find_b3_violation(const FailProneSystem& fps);

/// Q_i = { P \ F_i : F_i in F_i }, reduced to minimal sets.
/// Throws ConfigError carrying the witness text when B3 fails.
QuorumSystem canonical_quorums(const FailProneSystem& fps);

QuorumVerifyReport verify_quorum_system(const QuorumSystem& qs, const FailProneSystem& fps);

/// All minimal hitting sets of the quorums of process i, by exact
/// branch-and-bound enumeration.
std::vector<ProcessSet> kernels(const QuorumSystem& qs, ProcessId i);
KernelSystem kernel_system(const QuorumSystem& qs);

Classification classify(const FailProneSystem& fps, const ProcessSet& actual_faulty);

/// Greatest fixed point: start from the wise processes, drop any process with
/// no quorum inside the current set, repeat until stable. Empty result means
/// no guild exists.
ProcessSet maximal_guild(const QuorumSystem& qs, const FailProneSystem& fps,
                         const ProcessSet& actual_faulty);

/// Q_i |= marked: some quorum of the list is fully inside `marked`.
bool is_satisfied(const std::vector<ProcessSet>& quorums_of_i, const ProcessSet& marked);

/// True iff `candidate` is a subset of some fail-prone set of process i
/// (membership in the star closure F_i*).
bool in_star(const FailProneSystem& fps, ProcessId i, const ProcessSet& candidate);

}  // namespace asymdag

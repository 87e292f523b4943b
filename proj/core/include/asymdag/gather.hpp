#pragma once

#include <optional>

#include "asymdag/message.hpp"
#include "asymdag/trust.hpp"

namespace asymdag {

enum class GatherVariant { Threshold, Naive, Asymmetric };

std::string variant_name(GatherVariant v);
std::optional<GatherVariant> parse_variant(const std::string& s);

struct GatherConfig {
    GatherVariant variant = GatherVariant::Asymmetric;
    uint32_t rounds = 3;  // naive/threshold round count; >= 2
};

/// One gather participant. Inputs arrive through the reliable broadcast layer
/// (the host feeds arb deliveries in); set and control messages are handled
/// here directly.
///
/// The three variants share the S/T/U merging structure:
///  - threshold: round advance counts n-f distinct senders,
///  - naive: round advance waits for a full quorum of senders, k rounds,
///  - asymmetric: constant-round variant with Ack/Ready/Confirm gating and
///    subset wait-conditions on received sets.
class GatherProcess {
public:
    GatherProcess(ProcessId self, const TrustConfig* trust, GatherConfig cfg);

    /// Input value of some proposer, delivered by the broadcast layer.
    std::vector<Outgoing> on_input(ProcessId proposer, uint64_t digest);
    std::vector<Outgoing> on_set(ProcessId src, const GatherSetMsg& msg,
                                 std::vector<std::string>* notes = nullptr);
    std::vector<Outgoing> on_ctl(ProcessId src, const GatherCtlMsg& msg);

    bool delivered() const { return delivered_; }
    const ValueMap& output() const { return output_; }
    bool sent_final_set() const;  // DistributeT (or the k-th round message)

    /// Set contents frozen when each phase guard fired: 1 -> S at the
    /// DistributeS send, ..., rounds() -> the delivered output. These are the
    /// membership matrices the counterexample goldens compare against.
    const std::map<uint32_t, ValueMap>& round_snapshots() const { return snapshots_; }
    uint32_t rounds() const { return cfg_.variant == GatherVariant::Asymmetric ? 3 : cfg_.rounds; }

    /// True once the guard consuming messages of the given phase can no
    /// longer be influenced by them (quorum-only schedule introspection).
    /// Phase 1 covers broadcast-layer input deliveries; phases 2..rounds()
    /// cover the corresponding set messages.
    bool phase_consumed(uint32_t phase) const;

    ProcessId self() const { return self_; }

private:
    std::vector<Outgoing> evaluate();
    bool quorum_of_senders(const ProcessSet& senders) const;
    bool values_known(const ValueMap& values) const;
    void merge(ValueMap& into, const ValueMap& from);
    void snapshot(uint32_t round, const ValueMap& v);

    ProcessId self_;
    const TrustConfig* trust_;
    GatherConfig cfg_;
    uint32_t threshold_f_ = 0;

    // Round-indexed sets. values_[1] is S; the last one is delivered as U.
    std::vector<ValueMap> values_;
    std::vector<ProcessSet> senders_;
    std::vector<bool> fired_;

    // Asymmetric-variant state.
    bool sent_dist_s_ = false;
    bool sent_ready_ = false;
    bool sent_confirm_by_ready_ = false;
    bool sent_confirm_by_kernel_ = false;
    bool sent_t_ = false;
    ValueMap t_set_;
    ValueMap u_set_;
    std::map<ProcessId, ValueMap> pending_s_;  // subset wait-condition buffers
    std::map<ProcessId, ValueMap> pending_t_;
    ProcessSet seen_s_, seen_t_;  // dedupe per sender
    ProcessSet acks_, readies_, confirms_, qualified_t_;

    bool delivered_ = false;
    ValueMap output_;
    std::map<uint32_t, ValueMap> snapshots_;
};

/// Common-core candidates: a guild member's
/// distributed S set qualifies iff it is contained in every guild output.
struct CoreReport {
    std::map<ProcessId, ValueMap> per_process_outputs;
    std::vector<std::pair<ProcessId, ValueMap>> candidate_cores;
    bool has_core() const { return !candidate_cores.empty(); }
};

CoreReport common_core_report(const std::map<ProcessId, ValueMap>& outputs,
                              const std::map<ProcessId, ValueMap>& s_sets,
                              const TrustConfig& trust, const ProcessSet& actual_faulty);

}  // namespace asymdag

#pragma once

#include <vector>

#include "asymdag/message.hpp"
#include "asymdag/trust.hpp"

namespace asymdag {

struct ProtocolMisuse : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArbDelivery {
    InstanceLabel instance;
    BytesPtr payload;
    uint64_t digest = 0;
};

/// Asymmetric reliable broadcast (Bracha generalized to quorums/kernels):
/// echo on the sender's SEND, ready on an echo quorum, ready amplification on
/// a ready kernel, delivery on a ready quorum. One state machine per process;
/// instances are multiplexed by (sender, label).
class ArbProcess {
public:
    ArbProcess(ProcessId self, const TrustConfig* trust) : self_(self), trust_(trust) {}

    /// SEND(payload) to all. Throws ProtocolMisuse if the caller is not the
    /// labelled sender or already broadcast under this label.
    std::vector<Outgoing> broadcast(const InstanceLabel& label, BytesPtr payload);

    struct HandleResult {
        std::vector<Outgoing> out;
        std::vector<ArbDelivery> delivered;
    };
    HandleResult on_message(ProcessId src, const ArbMsg& msg);

    /// Monotone per-instance flags; exposed for invariant checks.
    struct InstanceState {
        bool broadcast_called = false;
        bool sent_echo = false;
        bool sent_ready = false;
        bool delivered = false;
        uint64_t delivered_digest = 0;
        std::map<uint64_t, ProcessSet> echoes;
        std::map<uint64_t, ProcessSet> readies;
        std::map<uint64_t, BytesPtr> payloads;
    };
    const std::map<InstanceLabel, InstanceState>& instances() const { return instances_; }
    ProcessId self() const { return self_; }

private:
    InstanceState& state_of(const InstanceLabel& label);
    void evaluate(const InstanceLabel& label, InstanceState& st, HandleResult& result);

    ProcessId self_;
    const TrustConfig* trust_;
    std::map<InstanceLabel, InstanceState> instances_;
};

}  // namespace asymdag

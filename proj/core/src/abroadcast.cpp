#include "asymdag/abroadcast.hpp"

namespace asymdag {

ArbProcess::InstanceState& ArbProcess::state_of(const InstanceLabel& label) {
    return instances_[label];
}

std::vector<Outgoing> ArbProcess::broadcast(const InstanceLabel& label, BytesPtr payload) {
    if (label.sender != self_)
        throw ProtocolMisuse("arb-broadcast: caller is not the labelled sender");
    InstanceState& st = state_of(label);
    if (st.broadcast_called)
        throw ProtocolMisuse("arb-broadcast: duplicate broadcast for " + label.to_string());
    st.broadcast_called = true;
    uint64_t d = fnv64(*payload);
    return {Outgoing{kBroadcastAll, ArbMsg{ArbMsg::Phase::Send, label, std::move(payload), d}}};
}

void ArbProcess::evaluate(const InstanceLabel& label, InstanceState& st, HandleResult& result) {
    const auto& quorums = trust_->qs.per_process[self_];
    const auto& kernel_sets = trust_->ks.per_process[self_];

    if (!st.sent_ready) {
        for (const auto& [digest, voters] : st.echoes) {
            if (is_satisfied(quorums, voters)) {
                st.sent_ready = true;
                result.out.push_back(Outgoing{
                    kBroadcastAll,
                    ArbMsg{ArbMsg::Phase::Ready, label, st.payloads.at(digest), digest}});
                break;
            }
        }
    }
    if (!st.sent_ready) {
        // Amplification: a kernel of readies means some quorum already echoed.
        for (const auto& [digest, voters] : st.readies) {
            if (is_satisfied(kernel_sets, voters)) {
                st.sent_ready = true;
                result.out.push_back(Outgoing{
                    kBroadcastAll,
                    ArbMsg{ArbMsg::Phase::Ready, label, st.payloads.at(digest), digest}});
                break;
            }
        }
    }
    if (!st.delivered) {
        for (const auto& [digest, voters] : st.readies) {
            if (is_satisfied(quorums, voters)) {
                st.delivered = true;
                st.delivered_digest = digest;
                result.delivered.push_back(ArbDelivery{label, st.payloads.at(digest), digest});
                break;
            }
        }
    }
}

ArbProcess::HandleResult ArbProcess::on_message(ProcessId src, const ArbMsg& msg) {
    HandleResult result;
    InstanceState& st = state_of(msg.instance);
    if (msg.payload) st.payloads.emplace(msg.digest, msg.payload);

    switch (msg.phase) {
        case ArbMsg::Phase::Send:
            // The link layer authenticates src, so a SEND whose source is not
            // the labelled sender is a forgery attempt and is dropped.
            if (src != msg.instance.sender) return result;
            if (!st.sent_echo) {
                st.sent_echo = true;
                result.out.push_back(Outgoing{
                    kBroadcastAll, ArbMsg{ArbMsg::Phase::Echo, msg.instance, msg.payload,
                                          msg.digest}});
            }
            break;
        case ArbMsg::Phase::Echo: {
            auto [it, inserted] = st.echoes.try_emplace(msg.digest, ProcessSet(trust_->n()));
            it->second.insert(src);
            break;
        }
        case ArbMsg::Phase::Ready: {
            auto [it, inserted] = st.readies.try_emplace(msg.digest, ProcessSet(trust_->n()));
            it->second.insert(src);
            break;
        }
    }
    evaluate(msg.instance, st, result);
    return result;
}

}  // namespace asymdag

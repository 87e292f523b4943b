#include "asymdag/dagrider.hpp"

#include <algorithm>

namespace asymdag {

namespace {
const std::string kFillerPrefix = "~filler:";
}

Bytes filler_block(ProcessId source, uint32_t round) {
    return bytes_of(kFillerPrefix + std::to_string(source + 1) + ":" + std::to_string(round));
}

bool is_filler_block(const Bytes& block) {
    return block.size() >= kFillerPrefix.size() &&
           std::equal(kFillerPrefix.begin(), kFillerPrefix.end(), block.begin());
}

DagRiderProcess::DagRiderProcess(ProcessId self, const TrustConfig* trust, CoinConfig coin)
    : self_(self), trust_(trust), coin_(coin), dag_(trust->n()) {
    for (uint32_t p = 0; p < trust_->n(); ++p) dag_.insert(genesis_vertex(p));
}

DagRiderProcess::StepResult DagRiderProcess::start() {
    StepResult result;
    advance(result);
    return result;
}

Vertex DagRiderProcess::create_vertex(uint32_t round) {
    Vertex v;
    v.source = self_;
    v.round = round;
    if (!blocks_to_propose_.empty()) {
        v.block = std::move(blocks_to_propose_.front());
        blocks_to_propose_.pop_front();
    } else {
        v.block = filler_block(self_, round);
        v.filler = true;
    }
    for (const auto& [id, u] : dag_.at_round(round - 1)) v.strong_edges.push_back(id);

    // Weak edges to every earlier vertex not already reachable; visited is the
    // closure of the strong edges, expanded as weak edges are added.
    std::set<VertexId> visited;
    auto absorb = [&](const VertexId& root) {
        for (const VertexId& id : dag_.reachable_from(root)) visited.insert(id);
    };
    for (const auto& e : v.strong_edges) absorb(e);
    if (round >= 3) {
        for (uint32_t r = round - 2; r >= 1; --r) {
            for (const auto& [id, u] : dag_.at_round(r)) {
                if (!visited.count(id)) {
                    v.weak_edges.push_back(id);
                    absorb(id);
                }
            }
        }
    }
    return seal_vertex(std::move(v));
}

void DagRiderProcess::eval_control(StepResult& result) {
    ControlEpoch& c = control_.try_emplace(epoch_, ControlEpoch{ProcessSet(trust_->n()),
                                                                ProcessSet(trust_->n()),
                                                                ProcessSet(trust_->n())})
                          .first->second;
    const auto& quorums = trust_->qs.per_process[self_];
    const auto& kernel_sets = trust_->ks.per_process[self_];
    if (!c.sent_ready && is_satisfied(quorums, c.acks)) {
        c.sent_ready = true;
        result.out.push_back(
            Outgoing{kBroadcastAll, WaveCtlMsg{WaveCtlMsg::Kind::Ready, epoch_}});
    }
    if (!c.sent_confirm_on_ready_quorum && is_satisfied(quorums, c.readies)) {
        c.sent_confirm_on_ready_quorum = true;
        result.out.push_back(
            Outgoing{kBroadcastAll, WaveCtlMsg{WaveCtlMsg::Kind::Confirm, epoch_}});
    }
    if (!c.sent_confirm_on_kernel && is_satisfied(kernel_sets, c.confirms)) {
        c.sent_confirm_on_kernel = true;
        result.out.push_back(
            Outgoing{kBroadcastAll, WaveCtlMsg{WaveCtlMsg::Kind::Confirm, epoch_}});
    }
    if (!c.sent_confirm_on_quorum && is_satisfied(quorums, c.confirms)) {
        c.sent_confirm_on_quorum = true;
        t_ready_ = true;
        result.out.push_back(
            Outgoing{kBroadcastAll, WaveCtlMsg{WaveCtlMsg::Kind::Confirm, epoch_}});
    }
}

void DagRiderProcess::advance(StepResult& result) {
    bool changed = true;
    while (changed) {
        changed = false;

        // Drain causally complete buffered vertices for rounds up to round_.
        for (auto it = buffer_.begin(); it != buffer_.end();) {
            bool ready = it->round <= round_;
            if (ready) {
                for (const auto& e : it->strong_edges)
                    if (!dag_.contains(e)) { ready = false; break; }
            }
            if (ready) {
                for (const auto& e : it->weak_edges)
                    if (!dag_.contains(e)) { ready = false; break; }
            }
            if (ready) {
                dag_.insert(std::move(*it));
                it = buffer_.erase(it);
                changed = true;
            } else {
                ++it;
            }
        }

        eval_control(result);

        if (!is_satisfied(trust_->qs.per_process[self_], dag_.sources_at(round_))) continue;

        uint32_t mod = round_ % 4;
        if (mod == 2 && !t_ready_) continue;

        if (mod == 0 && round_ > 0) wave_ready(round_ / 4, result);
        result.completed_rounds.push_back(round_);
        if (mod == 2) {
            t_ready_ = false;
            control_.erase(control_.begin(), control_.upper_bound(epoch_));
            ++epoch_;
        }
        ++round_;
        if (!done_) {
            Vertex v = create_vertex(round_);
            InstanceLabel label{InstanceLabel::Tag::Vertex, self_, round_};
            result.broadcasts.emplace_back(label, share_bytes(serialize_vertex(v)));
        }
        changed = true;
    }
}

void DagRiderProcess::wave_ready(uint32_t wave, StepResult& result) {
    ++waves_evaluated_;
    ProcessId leader_pid = choose_leader(coin_, wave);
    const Vertex* leader = dag_.vertex_by_source(wave_to_round(wave, 1), leader_pid);
    if (!leader) {
        result.notes.push_back("wave " + std::to_string(wave) + " skipped: leader p" +
                               std::to_string(leader_pid + 1) + " vertex absent");
        return;
    }

    // Commit rule: some own quorum whose round-4 vertices all have strong
    // paths to the leader.
    const auto& round4 = dag_.at_round(wave_to_round(wave, 4));
    ProcessSet supporters(trust_->n());
    for (const auto& [id, v] : round4)
        if (dag_.strong_path(id, leader->id())) supporters.insert(id.source);
    if (!is_satisfied(trust_->qs.per_process[self_], supporters)) {
        result.notes.push_back("wave " + std::to_string(wave) +
                               " skipped: no quorum with strong paths to leader");
        return;
    }

    std::vector<const Vertex*> stack{leader};
    const Vertex* cur = leader;
    for (uint32_t w = wave - 1; w > decided_wave_; --w) {
        const Vertex* prev = dag_.vertex_by_source(wave_to_round(w, 1), choose_leader(coin_, w));
        if (prev && dag_.strong_path(cur->id(), prev->id())) {
            stack.push_back(prev);
            cur = prev;
        }
    }
    decided_wave_ = wave;
    commits_.push_back(CommitEvent{wave, leader->id()});
    order_vertices(stack, result);
}

void DagRiderProcess::order_vertices(const std::vector<const Vertex*>& stack,
                                     StepResult& result) {
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
        const Vertex* leader = *it;
        uint32_t wave = (leader->round + 3) / 4;
        std::vector<VertexId> batch;
        for (const VertexId& id : dag_.reachable_from(leader->id())) {
            if (id.round >= 1 && !delivered_vertices_.count(id)) batch.push_back(id);
        }
        std::sort(batch.begin(), batch.end(), [](const VertexId& a, const VertexId& b) {
            return std::tie(a.round, a.source, a.digest) < std::tie(b.round, b.source, b.digest);
        });
        uint32_t pos = 0;
        for (const VertexId& id : batch) {
            const Vertex* v = dag_.find(id);
            delivered_vertices_.insert(id);
            BlockDelivery d{wave, pos++, id, v->block, v->filler};
            deliveries_.push_back(d);
            result.delivered.push_back(std::move(d));
        }
    }
}

DagRiderProcess::StepResult DagRiderProcess::on_vertex_delivered(ProcessId sender, uint32_t round,
                                                                 const Bytes& payload) {
    StepResult result;
    auto parsed = deserialize_vertex(payload);
    if (!parsed) {
        result.notes.push_back("vertex from p" + std::to_string(sender + 1) +
                               " dropped: malformed payload");
        return result;
    }
    Vertex v = std::move(*parsed);
    bool valid = v.source == sender && v.round == round && round >= 1;
    if (valid) {
        for (const auto& e : v.strong_edges)
            if (e.round + 1 != v.round) { valid = false; break; }
    }
    // Admission: the strong edges must contain an entire quorum of the
    // source's own quorum system.
    if (valid && !is_satisfied(trust_->qs.per_process[v.source],
                               v.strong_edge_sources(trust_->n())))
        valid = false;
    if (valid) {
        buffer_.push_back(std::move(v));
    } else {
        result.notes.push_back("vertex " + std::to_string(sender + 1) + "@" +
                               std::to_string(round) + " dropped: quorum reference check failed");
    }
    if (round % 4 == 2) {
        result.out.push_back(
            Outgoing{sender, WaveCtlMsg{WaveCtlMsg::Kind::Ack, (round + 2) / 4}});
    }
    advance(result);
    return result;
}

DagRiderProcess::StepResult DagRiderProcess::on_control(ProcessId src, const WaveCtlMsg& msg) {
    StepResult result;
    if (msg.epoch < epoch_) {
        result.notes.push_back("stale wave control (epoch " + std::to_string(msg.epoch) +
                               " < " + std::to_string(epoch_) + ") ignored");
        return result;
    }
    ControlEpoch& c = control_.try_emplace(msg.epoch, ControlEpoch{ProcessSet(trust_->n()),
                                                                   ProcessSet(trust_->n()),
                                                                   ProcessSet(trust_->n())})
                          .first->second;
    switch (msg.kind) {
        case WaveCtlMsg::Kind::Ack: c.acks.insert(src); break;
        case WaveCtlMsg::Kind::Ready: c.readies.insert(src); break;
        case WaveCtlMsg::Kind::Confirm: c.confirms.insert(src); break;
    }
    advance(result);
    return result;
}

}  // namespace asymdag

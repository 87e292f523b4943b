#pragma once

#include <deque>
#include <set>

#include "asymdag/coin.hpp"
#include "asymdag/dag.hpp"
#include "asymdag/message.hpp"
#include "asymdag/trust.hpp"

namespace asymdag {

inline uint32_t wave_to_round(uint32_t wave, uint32_t k) { return 4 * (wave - 1) + k; }

struct CommitEvent {
    uint32_t wave = 0;
    VertexId leader;
};

struct BlockDelivery {
    uint32_t wave = 0;      // wave whose commit released the vertex
    uint32_t position = 0;  // index within that wave's delivery batch
    VertexId vertex;
    Bytes block;
    bool filler = false;
};

/// Asymmetric DAG-based atomic broadcast: one deterministic state machine per
/// process. Vertices travel through the reliable broadcast layer; this class
/// receives them post-delivery and produces control messages, new vertex
/// broadcasts, commits and ordered block deliveries.
class DagRiderProcess {
public:
    DagRiderProcess(ProcessId self, const TrustConfig* trust, CoinConfig coin);

    void aa_broadcast(Bytes block) { blocks_to_propose_.push_back(std::move(block)); }

    struct StepResult {
        std::vector<Outgoing> out;
        // Vertex broadcasts to hand to the arb layer: (label, payload).
        std::vector<std::pair<InstanceLabel, BytesPtr>> broadcasts;
        std::vector<BlockDelivery> delivered;
        std::vector<CommitEvent> commits;
        std::vector<uint32_t> completed_rounds;  // quorum guard fires
        std::vector<std::string> notes;
    };

    StepResult start();
    StepResult on_vertex_delivered(ProcessId sender, uint32_t round, const Bytes& payload);
    StepResult on_control(ProcessId src, const WaveCtlMsg& msg);

    /// Drain mode: stop creating vertices; pending rounds still advance and
    /// commits still run so laggards converge before quiescence.
    void stop_proposing() { done_ = true; }

    ProcessId self() const { return self_; }
    uint32_t current_round() const { return round_; }
    uint32_t decided_wave() const { return decided_wave_; }
    uint64_t waves_evaluated() const { return waves_evaluated_; }
    uint64_t commit_count() const { return commits_.size(); }
    const std::vector<CommitEvent>& commits() const { return commits_; }
    const std::vector<BlockDelivery>& delivery_log() const { return deliveries_; }
    const Dag& dag() const { return dag_; }
    size_t buffered() const { return buffer_.size(); }
    size_t pending_blocks() const { return blocks_to_propose_.size(); }

private:
    void advance(StepResult& result);
    void eval_control(StepResult& result);
    Vertex create_vertex(uint32_t round);
    void wave_ready(uint32_t wave, StepResult& result);
    void order_vertices(const std::vector<const Vertex*>& stack, StepResult& result);

    ProcessId self_;
    const TrustConfig* trust_;
    CoinConfig coin_;

    uint32_t round_ = 0;
    Dag dag_;
    std::vector<Vertex> buffer_;  // arrival order; drained when causally complete
    std::deque<Bytes> blocks_to_propose_;
    std::set<VertexId> delivered_vertices_;
    uint32_t decided_wave_ = 0;
    bool t_ready_ = false;
    bool done_ = false;

    struct ControlEpoch {
        ProcessSet acks, readies, confirms;
        bool sent_ready = false;
        bool sent_confirm_on_ready_quorum = false;
        bool sent_confirm_on_kernel = false;
        bool sent_confirm_on_quorum = false;
    };
    uint32_t epoch_ = 1;
    std::map<uint32_t, ControlEpoch> control_;

    uint64_t waves_evaluated_ = 0;
    std::vector<CommitEvent> commits_;
    std::vector<BlockDelivery> deliveries_;
};

/// Marker block minted when the propose queue is empty, so round liveness
/// never depends on workload.
Bytes filler_block(ProcessId source, uint32_t round);
bool is_filler_block(const Bytes& block);

}  // namespace asymdag

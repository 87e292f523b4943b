#pragma once

#include <compare>
#include <map>
#include <optional>
#include <vector>

#include "asymdag/message.hpp"
#include "asymdag/process_set.hpp"

namespace asymdag {

struct VertexId {
    ProcessId source = 0;
    uint32_t round = 0;
    uint64_t digest = 0;
    auto operator<=>(const VertexId&) const = default;
    std::string to_string() const {
        return std::to_string(source + 1) + "@" + std::to_string(round) + "/" + hex64(digest);
    }
};

struct Vertex {
    ProcessId source = 0;
    uint32_t round = 0;
    Bytes block;
    bool filler = false;
    std::vector<VertexId> strong_edges;  // all reference round-1
    std::vector<VertexId> weak_edges;    // rounds <= round-2
    uint64_t digest = 0;                 // over the serialized content

    VertexId id() const { return VertexId{source, round, digest}; }
    ProcessSet strong_edge_sources(uint32_t n) const;
};

Bytes serialize_vertex(const Vertex& v);
std::optional<Vertex> deserialize_vertex(const Bytes& bytes);
/// Computes the content digest and returns the finished vertex.
Vertex seal_vertex(Vertex v);

/// Round-indexed vertex store with reachability queries. A vertex is inserted
/// only when its whole causal history is already present, which advance()
/// enforces via the buffer.
class Dag {
public:
    explicit Dag(uint32_t n) : n_(n) {}

    bool contains(const VertexId& id) const;
    const Vertex* find(const VertexId& id) const;
    void insert(Vertex v);

    const std::map<VertexId, Vertex>& at_round(uint32_t round) const;
    /// Sources that have a vertex in the given round.
    ProcessSet sources_at(uint32_t round) const;
    const Vertex* vertex_by_source(uint32_t round, ProcessId source) const;
    uint32_t max_round() const { return rounds_.empty() ? 0 : rounds_.rbegin()->first; }

    /// Reachability from `from` to `to` along strong+weak edges (path) or
    /// strong edges only (strong_path). Reflexive by definition.
    bool path(const VertexId& from, const VertexId& to) const;
    bool strong_path(const VertexId& from, const VertexId& to) const;

    std::vector<VertexId> reachable_from(const VertexId& from) const;

    /// Text adjacency listing, stable order, for golden tests and debugging.
    std::string adjacency_text() const;

    uint32_t capacity() const { return n_; }
    const std::map<uint32_t, std::map<VertexId, Vertex>>& rounds() const { return rounds_; }

private:
    bool reach(const VertexId& from, const VertexId& to, bool strong_only) const;

    uint32_t n_;
    std::map<uint32_t, std::map<VertexId, Vertex>> rounds_;
};

/// The well-known round-0 vertex of each process (empty block, no edges).
Vertex genesis_vertex(ProcessId source);

}  // namespace asymdag

#include "asymdag/dag.hpp"

#include <deque>
#include <set>
#include <sstream>

namespace asymdag {

namespace {

void put_u32(Bytes& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_u64(Bytes& b, uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
bool get_u32(const Bytes& b, size_t& pos, uint32_t& v) {
    if (pos + 4 > b.size()) return false;
    v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[pos + i]) << (8 * i);
    pos += 4;
    return true;
}
bool get_u64(const Bytes& b, size_t& pos, uint64_t& v) {
    if (pos + 8 > b.size()) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[pos + i]) << (8 * i);
    pos += 8;
    return true;
}
void put_id(Bytes& b, const VertexId& id) {
    put_u32(b, id.source);
    put_u32(b, id.round);
    put_u64(b, id.digest);
}
bool get_id(const Bytes& b, size_t& pos, VertexId& id) {
    return get_u32(b, pos, id.source) && get_u32(b, pos, id.round) && get_u64(b, pos, id.digest);
}

Bytes serialize_content(const Vertex& v) {
    Bytes b;
    put_u32(b, v.source);
    put_u32(b, v.round);
    b.push_back(v.filler ? 1 : 0);
    put_u32(b, static_cast<uint32_t>(v.block.size()));
    b.insert(b.end(), v.block.begin(), v.block.end());
    put_u32(b, static_cast<uint32_t>(v.strong_edges.size()));
    for (const auto& e : v.strong_edges) put_id(b, e);
    put_u32(b, static_cast<uint32_t>(v.weak_edges.size()));
    for (const auto& e : v.weak_edges) put_id(b, e);
    return b;
}

}  // namespace

ProcessSet Vertex::strong_edge_sources(uint32_t n) const {
    ProcessSet s(n);
    for (const auto& e : strong_edges) s.insert(e.source);
    return s;
}

Vertex seal_vertex(Vertex v) {
    v.digest = fnv64(serialize_content(v));
    return v;
}

Bytes serialize_vertex(const Vertex& v) { return serialize_content(v); }

std::optional<Vertex> deserialize_vertex(const Bytes& bytes) {
    Vertex v;
    size_t pos = 0;
    uint32_t block_len = 0, n_strong = 0, n_weak = 0;
    if (!get_u32(bytes, pos, v.source) || !get_u32(bytes, pos, v.round)) return std::nullopt;
    if (pos >= bytes.size()) return std::nullopt;
    v.filler = bytes[pos++] != 0;
    if (!get_u32(bytes, pos, block_len) || pos + block_len > bytes.size()) return std::nullopt;
    v.block.assign(bytes.begin() + pos, bytes.begin() + pos + block_len);
    pos += block_len;
    if (!get_u32(bytes, pos, n_strong)) return std::nullopt;
    v.strong_edges.resize(n_strong);
    for (auto& e : v.strong_edges)
        if (!get_id(bytes, pos, e)) return std::nullopt;
    if (!get_u32(bytes, pos, n_weak)) return std::nullopt;
    v.weak_edges.resize(n_weak);
    for (auto& e : v.weak_edges)
        if (!get_id(bytes, pos, e)) return std::nullopt;
    if (pos != bytes.size()) return std::nullopt;
    v.digest = fnv64(bytes);
    return v;
}

Vertex genesis_vertex(ProcessId source) {
    Vertex v;
    v.source = source;
    v.round = 0;
    return seal_vertex(v);
}

bool Dag::contains(const VertexId& id) const { return find(id) != nullptr; }

const Vertex* Dag::find(const VertexId& id) const {
    auto rit = rounds_.find(id.round);
    if (rit == rounds_.end()) return nullptr;
    auto vit = rit->second.find(id);
    return vit == rit->second.end() ? nullptr : &vit->second;
}

void Dag::insert(Vertex v) {
    VertexId id = v.id();
    rounds_[id.round].emplace(id, std::move(v));
}

const std::map<VertexId, Vertex>& Dag::at_round(uint32_t round) const {
    static const std::map<VertexId, Vertex> empty;
    auto it = rounds_.find(round);
    return it == rounds_.end() ? empty : it->second;
}

ProcessSet Dag::sources_at(uint32_t round) const {
    ProcessSet s(n_);
    for (const auto& [id, v] : at_round(round)) s.insert(id.source);
    return s;
}

const Vertex* Dag::vertex_by_source(uint32_t round, ProcessId source) const {
    for (const auto& [id, v] : at_round(round))
        if (id.source == source) return &v;
    return nullptr;
}

bool Dag::reach(const VertexId& from, const VertexId& to, bool strong_only) const {
    if (from == to) return true;
    if (to.round >= from.round) return false;
    std::set<VertexId> visited{from};
    std::deque<VertexId> frontier{from};
    while (!frontier.empty()) {
        VertexId cur = frontier.front();
        frontier.pop_front();
        const Vertex* v = find(cur);
        if (!v) continue;
        auto expand = [&](const std::vector<VertexId>& edges) {
            for (const auto& e : edges) {
                if (e == to) return true;
                if (e.round > to.round && visited.insert(e).second) frontier.push_back(e);
            }
            return false;
        };
        if (expand(v->strong_edges)) return true;
        if (!strong_only && expand(v->weak_edges)) return true;
    }
    return false;
}

bool Dag::path(const VertexId& from, const VertexId& to) const { return reach(from, to, false); }
bool Dag::strong_path(const VertexId& from, const VertexId& to) const {
    return reach(from, to, true);
}

std::string Dag::adjacency_text() const {
    std::ostringstream out;
    for (const auto& [round, layer] : rounds_) {
        for (const auto& [id, v] : layer) {
            out << id.to_string() << " strong[";
            bool first = true;
            for (const auto& e : v.strong_edges) {
                out << (first ? "" : " ") << e.to_string();
                first = false;
            }
            out << "] weak[";
            first = true;
            for (const auto& e : v.weak_edges) {
                out << (first ? "" : " ") << e.to_string();
                first = false;
            }
            out << "]" << (v.filler ? " filler" : "") << "\n";
        }
    }
    return out.str();
}

std::vector<VertexId> Dag::reachable_from(const VertexId& from) const {
    std::vector<VertexId> out;
    std::set<VertexId> visited{from};
    std::deque<VertexId> frontier{from};
    out.push_back(from);
    while (!frontier.empty()) {
        VertexId cur = frontier.front();
        frontier.pop_front();
        const Vertex* v = find(cur);
        if (!v) continue;
        for (const auto& edges : {&v->strong_edges, &v->weak_edges}) {
            for (const auto& e : *edges) {
                if (visited.insert(e).second) {
                    frontier.push_back(e);
                    out.push_back(e);
                }
            }
        }
    }
    return out;
}

}  // namespace asymdag

#include "doctest.h"

#include <sstream>

#include "asymdag/dagrider.hpp"
#include "asymdag/simnet.hpp"
#include "asymdag/trace_check.hpp"

using namespace asymdag;

namespace {

std::vector<VertexId> genesis_ids(uint32_t n) {
    std::vector<VertexId> ids;
    for (uint32_t p = 0; p < n; ++p) ids.push_back(genesis_vertex(p).id());
    return ids;
}

Vertex make_vertex(ProcessId source, uint32_t round, std::vector<VertexId> strong,
                   std::vector<VertexId> weak = {}) {
    Vertex v;
    v.source = source;
    v.round = round;
    v.block = bytes_of("blk:" + std::to_string(source) + ":" + std::to_string(round));
    v.strong_edges = std::move(strong);
    v.weak_edges = std::move(weak);
    return seal_vertex(std::move(v));
}

}  // namespace

TEST_CASE("path and strong path queries") {
    Dag dag(4);
    for (uint32_t p = 0; p < 4; ++p) dag.insert(genesis_vertex(p));
    auto g = genesis_ids(4);
    Vertex a = make_vertex(0, 1, {g[0], g[1], g[2]});
    Vertex b = make_vertex(1, 1, {g[1], g[2], g[3]});
    dag.insert(a);
    dag.insert(b);
    Vertex c = make_vertex(2, 2, {a.id(), b.id()});
    dag.insert(c);
    // Weak-only reachability: d strongly references only c, weakly b.
    Vertex d = make_vertex(3, 3, {c.id()}, {b.id()});
    dag.insert(d);

    CHECK(dag.strong_path(c.id(), a.id()));   // direct strong edge
    CHECK(dag.path(c.id(), a.id()));
    CHECK(dag.strong_path(c.id(), g[1]));     // two strong hops
    CHECK(dag.path(d.id(), b.id()));          // via the weak edge
    CHECK(dag.strong_path(d.id(), b.id()));   // also strongly via c
    Vertex lone = make_vertex(3, 1, {g[0], g[1], g[3]});
    dag.insert(lone);
    CHECK_FALSE(dag.path(c.id(), lone.id()));       // disconnected
    CHECK_FALSE(dag.strong_path(c.id(), lone.id()));
    CHECK(dag.path(c.id(), c.id()));  // reflexive
    // Weak edge gives path but not strong path when no strong route exists.
    Vertex e = make_vertex(0, 3, {c.id()}, {lone.id()});
    dag.insert(e);
    CHECK(dag.path(e.id(), lone.id()));
    CHECK_FALSE(dag.strong_path(e.id(), lone.id()));
}

TEST_CASE("vertex serialization round trip") {
    auto g = genesis_ids(4);
    Vertex v = make_vertex(2, 1, {g[0], g[1], g[2]}, {});
    auto bytes = serialize_vertex(v);
    auto back = deserialize_vertex(bytes);
    REQUIRE(back.has_value());
    CHECK(back->id() == v.id());
    CHECK(back->block == v.block);
    CHECK(back->strong_edges == v.strong_edges);
    Bytes corrupt = bytes;
    corrupt.pop_back();
    CHECK_FALSE(deserialize_vertex(corrupt).has_value());
}

TEST_CASE("fresh process: genesis completes, wave 0 skipped, round-1 vertex") {
    TrustConfig trust = threshold_trust(4, 1);
    DagRiderProcess rider(0, &trust, CoinConfig{1, 4});
    rider.aa_broadcast(bytes_of("b1"));
    auto sr = rider.start();
    CHECK(rider.current_round() == 1);
    CHECK(rider.decided_wave() == 0);
    CHECK(rider.waves_evaluated() == 0);  // waveReady(0) is not a wave
    REQUIRE(sr.broadcasts.size() == 1);
    CHECK(sr.broadcasts[0].first.seq == 1);
    auto v = deserialize_vertex(*sr.broadcasts[0].second);
    REQUIRE(v.has_value());
    CHECK(v->round == 1);
    CHECK(v->strong_edges.size() == 4);  // the full genesis layer
    CHECK(v->block == bytes_of("b1"));
}

TEST_CASE("round-2 vertex delivery: buffered plus Ack; round-3 gets no Ack") {
    TrustConfig trust = counterexample30();
    DagRiderProcess rider(0, &trust, CoinConfig{1, 30});
    (void)rider.start();
    auto g = genesis_ids(30);
    // A round-2 vertex from p5 whose strong edges cover Q_5 = {2,6,10,11,12,20}.
    std::vector<VertexId> round1;
    for (ProcessId p : {1u, 5u, 9u, 10u, 11u, 19u})
        round1.push_back(make_vertex(p, 1, {g.begin(), g.begin() + 30}).id());
    Vertex v2 = make_vertex(4, 2, round1);
    size_t before = rider.buffered();
    auto sr = rider.on_vertex_delivered(4, 2, serialize_vertex(v2));
    CHECK(rider.buffered() == before + 1);
    bool acked = false;
    for (const auto& o : sr.out)
        if (auto* w = std::get_if<WaveCtlMsg>(&o.msg);
            w && w->kind == WaveCtlMsg::Kind::Ack && o.dst == 4 && w->epoch == 1)
            acked = true;
    CHECK(acked);

    // Strong edges covering no quorum of the source: dropped with a note.
    std::vector<VertexId> weak_cover{round1[0], round1[1]};
    Vertex bad = make_vertex(4, 2, weak_cover);
    before = rider.buffered();
    sr = rider.on_vertex_delivered(4, 2, serialize_vertex(bad));
    CHECK(rider.buffered() == before);
    REQUIRE(!sr.notes.empty());
    CHECK(sr.notes[0].find("dropped") != std::string::npos);

    // A valid round-3 vertex is buffered without an Ack.
    std::vector<VertexId> round2{v2.id()};
    for (ProcessId p : {1u, 5u, 9u, 10u, 11u}) round2.push_back(make_vertex(p, 2, round1).id());
    Vertex v3 = make_vertex(4, 3, round2);
    sr = rider.on_vertex_delivered(4, 3, serialize_vertex(v3));
    for (const auto& o : sr.out) CHECK(std::get_if<WaveCtlMsg>(&o.msg) == nullptr);
}

TEST_CASE("round-2 gate: quorum alone does not advance without tReady") {
    TrustConfig trust = threshold_trust(4, 1);
    DagRiderProcess rider(0, &trust, CoinConfig{1, 4});
    auto sr = rider.start();
    REQUIRE(rider.current_round() == 1);
    auto g = genesis_ids(4);

    // Own vertex comes back through the broadcast layer, plus two peers.
    (void)rider.on_vertex_delivered(0, 1, *sr.broadcasts[0].second);
    std::vector<Vertex> r1;
    for (ProcessId p : {1u, 2u, 3u}) r1.push_back(make_vertex(p, 1, {g[0], g[1], g[2], g[3]}));
    (void)rider.on_vertex_delivered(1, 1, serialize_vertex(r1[0]));
    auto sr2 = rider.on_vertex_delivered(2, 1, serialize_vertex(r1[1]));
    CHECK(rider.current_round() == 2);  // quorum of round-1 vertices reached
    REQUIRE(!sr2.broadcasts.empty());

    // Round-2 vertices from peers: quorum satisfied, but tReady is false.
    std::vector<VertexId> r1_ids{deserialize_vertex(*sr.broadcasts[0].second)->id(),
                                 r1[0].id(), r1[1].id()};
    (void)rider.on_vertex_delivered(0, 2, *sr2.broadcasts[0].second);
    for (ProcessId p : {1u, 2u}) {
        Vertex v = make_vertex(p, 2, r1_ids);
        (void)rider.on_vertex_delivered(p, 2, serialize_vertex(v));
    }
    CHECK(rider.current_round() == 2);  // gate holds

    // Control exchange: acks -> Ready, readies -> Confirm, kernel of confirms
    // amplifies, quorum of confirms sets tReady.
    auto collect_kinds = [](const DagRiderProcess::StepResult& r) {
        std::vector<WaveCtlMsg::Kind> kinds;
        for (const auto& o : r.out)
            if (auto* w = std::get_if<WaveCtlMsg>(&o.msg)) kinds.push_back(w->kind);
        return kinds;
    };
    (void)rider.on_control(0, WaveCtlMsg{WaveCtlMsg::Kind::Ack, 1});
    (void)rider.on_control(1, WaveCtlMsg{WaveCtlMsg::Kind::Ack, 1});
    auto sr3 = rider.on_control(2, WaveCtlMsg{WaveCtlMsg::Kind::Ack, 1});
    auto kinds = collect_kinds(sr3);
    CHECK(std::count(kinds.begin(), kinds.end(), WaveCtlMsg::Kind::Ready) == 1);

    (void)rider.on_control(0, WaveCtlMsg{WaveCtlMsg::Kind::Ready, 1});
    (void)rider.on_control(1, WaveCtlMsg{WaveCtlMsg::Kind::Ready, 1});
    auto sr4 = rider.on_control(2, WaveCtlMsg{WaveCtlMsg::Kind::Ready, 1});
    kinds = collect_kinds(sr4);
    CHECK(std::count(kinds.begin(), kinds.end(), WaveCtlMsg::Kind::Confirm) == 1);

    // Two confirms form a kernel (f+1): amplification fires once.
    (void)rider.on_control(1, WaveCtlMsg{WaveCtlMsg::Kind::Confirm, 1});
    auto sr5 = rider.on_control(2, WaveCtlMsg{WaveCtlMsg::Kind::Confirm, 1});
    kinds = collect_kinds(sr5);
    CHECK(std::count(kinds.begin(), kinds.end(), WaveCtlMsg::Kind::Confirm) == 1);

    // Third confirm: quorum reached, tReady set, the r=2 gate opens.
    auto sr6 = rider.on_control(3, WaveCtlMsg{WaveCtlMsg::Kind::Confirm, 1});
    CHECK(rider.current_round() == 3);
    bool round3_broadcast = false;
    for (const auto& [label, payload] : sr6.broadcasts)
        if (label.seq == 3) round3_broadcast = true;
    CHECK(round3_broadcast);
}

TEST_CASE("stale wave control messages are ignored with a note") {
    TrustConfig trust = threshold_trust(4, 1);
    DagRiderProcess rider(0, &trust, CoinConfig{1, 4});
    (void)rider.start();
    auto sr = rider.on_control(1, WaveCtlMsg{WaveCtlMsg::Kind::Ack, 0});
    REQUIRE(!sr.notes.empty());
    CHECK(sr.notes[0].find("stale") != std::string::npos);
}

TEST_CASE("filler blocks are marked and detected") {
    CHECK(is_filler_block(filler_block(3, 7)));
    CHECK_FALSE(is_filler_block(bytes_of("block:1:0")));
}

TEST_CASE("small dagrider run: threshold n=4, no faults") {
    Scenario s;
    s.protocol = Scenario::Protocol::DagRider;
    s.trust = "threshold:4:1";
    s.schedule = Scenario::Schedule::RoundRobin;
    s.workload = 3;
    s.seed = 4242;
    auto result = run(s, TraceLevel::Outputs);
    REQUIRE(result.quiescent);
    auto verdicts = check_trace(result, default_properties(Scenario::Protocol::DagRider));
    for (const auto& v : verdicts) {
        INFO(v.property, ": ", v.detail);
        CHECK(v.pass);
    }
    // Causal completeness: every vertex in every DAG has its references there.
    for (const auto& host : result.hosts) {
        const Dag& dag = host->rider->dag();
        for (const auto& [round, layer] : dag.rounds()) {
            for (const auto& [id, v] : layer) {
                for (const auto& e : v.strong_edges) CHECK(dag.contains(e));
                for (const auto& e : v.weak_edges) CHECK(dag.contains(e));
            }
        }
    }
    // DAG convergence at quiescence across the guild, up to the shortest
    // frontier: every vertex one guild member holds is held by all.
    uint32_t min_round = UINT32_MAX;
    for (ProcessId g : result.guild.members())
        min_round = std::min(min_round, result.hosts[g]->rider->current_round());
    for (ProcessId g1 : result.guild.members()) {
        for (ProcessId g2 : result.guild.members()) {
            const Dag& a = result.hosts[g1]->rider->dag();
            const Dag& b = result.hosts[g2]->rider->dag();
            for (uint32_t r = 1; r + 1 < min_round; ++r) {
                for (const auto& [id, v] : a.at_round(r)) CHECK(b.contains(id));
            }
        }
    }
}

TEST_CASE("dagrider with a crashed and a mute member") {
    for (auto kind : {ByzBehavior::Kind::Crash, ByzBehavior::Kind::Mute}) {
        Scenario s;
        s.protocol = Scenario::Protocol::DagRider;
        s.trust = "threshold:4:1";
        s.faulty = {3};
        s.behavior[3] = ByzBehavior{kind, kind == ByzBehavior::Kind::Crash ? uint64_t{60} : uint64_t{0}};
        s.schedule = Scenario::Schedule::Random;
        s.workload = 2;
        s.seed = 99;
        auto result = run(s, TraceLevel::Outputs);
        REQUIRE(result.quiescent);
        auto verdicts = check_trace(result, default_properties(Scenario::Protocol::DagRider));
        for (const auto& v : verdicts) {
            INFO(v.property, ": ", v.detail);
            CHECK(v.pass);
        }
    }
}

TEST_CASE("DAG adjacency export is stable and equal across the guild") {
    Scenario s;
    s.protocol = Scenario::Protocol::DagRider;
    s.trust = "threshold:4:1";
    s.schedule = Scenario::Schedule::RoundRobin;
    s.workload = 2;
    s.seed = 5;
    auto result = run(s, TraceLevel::Outputs);
    REQUIRE(result.quiescent);
    std::vector<std::string> listings;
    uint32_t min_round = UINT32_MAX;
    for (ProcessId g : result.guild.members())
        min_round = std::min(min_round, result.hosts[g]->rider->current_round());
    for (ProcessId g : result.guild.members())
        listings.push_back(result.hosts[g]->rider->dag().adjacency_text());
    REQUIRE(!listings.empty());
    CHECK(listings[0].find("strong[") != std::string::npos);
    // Converged DAGs render identically line-for-line on common rounds.
    auto common_prefix = [&](const std::string& text) {
        std::istringstream in(text);
        std::string line, out;
        while (std::getline(in, line)) {
            auto at = line.find('@');
            uint32_t round = static_cast<uint32_t>(
                std::stoul(line.substr(at + 1, line.find('/') - at - 1)));
            if (round + 1 < min_round) out += line + "\n";
        }
        return out;
    };
    for (size_t i = 1; i < listings.size(); ++i)
        CHECK(common_prefix(listings[i]) == common_prefix(listings[0]));
}

TEST_CASE("dagrider on counterexample30: one seeded run") {
    Scenario s;
    s.protocol = Scenario::Protocol::DagRider;
    s.trust = "counterexample30";
    s.schedule = Scenario::Schedule::Random;
    s.workload = 1;
    s.seed = 7;
    s.max_steps = 4000000;
    auto result = run(s, TraceLevel::Outputs);
    REQUIRE(result.quiescent);
    auto verdicts = check_trace(result, default_properties(Scenario::Protocol::DagRider));
    for (const auto& v : verdicts) {
        INFO(v.property, ": ", v.detail);
        CHECK(v.pass);
    }
    auto stats = dag_stats(result);
    CHECK(stats.total_commits > 0);
    MESSAGE("waves/commit on counterexample30: ", stats.waves_per_commit);
}

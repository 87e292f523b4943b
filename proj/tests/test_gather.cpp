#include "doctest.h"

#include <set>

#include "asymdag/gather.hpp"
#include "asymdag/simnet.hpp"
#include "asymdag/trace_check.hpp"
#include "support/oracles.hpp"

using namespace asymdag;

namespace {

std::set<int> keys_of(const ValueMap& v) {
    std::set<int> out;
    for (const auto& [pid, digest] : v) out.insert(static_cast<int>(pid));
    return out;
}

std::string golden(const std::string& name) {
    return std::string(ASYMDAG_GOLDEN_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("golden matrices agree with the quorum-union recursion") {
    auto rounds = oracle::ce30_recursion(3);
    auto s_rows = oracle::load_fixture(golden("ce30_round1_s_sets.txt"));
    auto t_rows = oracle::load_fixture(golden("ce30_round2_t_sets.txt"));
    auto u_rows = oracle::load_fixture(golden("ce30_round3_u_sets.txt"));
    for (int i = 0; i < 30; ++i) {
        CHECK(rounds[0][i] == s_rows[i]);
        CHECK(rounds[1][i] == t_rows[i]);
        CHECK(rounds[2][i] == u_rows[i]);
    }
    // Row spot checks: process 1's T set is 1..12,16..20 and
    // its U set is 1..27.
    std::set<int> t1;
    for (int v : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 16, 17, 18, 19, 20}) t1.insert(v - 1);
    CHECK(t_rows[0] == t1);
    std::set<int> u1;
    for (int v = 1; v <= 27; ++v) u1.insert(v - 1);
    CHECK(u_rows[0] == u1);
}

TEST_CASE("naive gather on counterexample30 reproduces the golden matrices") {
    auto result = run(Scenario::counterexample(GatherVariant::Naive, 3), TraceLevel::Outputs);
    REQUIRE(result.quiescent);
    CHECK(result.forced_releases == 0);

    auto s_rows = oracle::load_fixture(golden("ce30_round1_s_sets.txt"));
    auto t_rows = oracle::load_fixture(golden("ce30_round2_t_sets.txt"));
    auto u_rows = oracle::load_fixture(golden("ce30_round3_u_sets.txt"));
    for (uint32_t p = 0; p < 30; ++p) {
        const auto& snaps = result.hosts[p]->gather->round_snapshots();
        REQUIRE(snaps.count(1));
        REQUIRE(snaps.count(2));
        REQUIRE(snaps.count(3));
        CHECK(keys_of(snaps.at(1)) == s_rows[p]);
        CHECK(keys_of(snaps.at(2)) == t_rows[p]);
        CHECK(keys_of(snaps.at(3)) == u_rows[p]);
    }

    // No candidate core: the exact outcome of the appendix execution.
    auto report = common_core_report(result.gather_outputs(), result.gather_s_sets(),
                                     result.trust, result.faulty);
    CHECK(report.candidate_cores.empty());
    CHECK(oracle::ce30_candidates(3).empty());
}

TEST_CASE("naive gather with k=4 rounds reaches a common core") {
    auto result = run(Scenario::counterexample(GatherVariant::Naive, 4), TraceLevel::Outputs);
    REQUIRE(result.quiescent);
    auto report = common_core_report(result.gather_outputs(), result.gather_s_sets(),
                                     result.trust, result.faulty);
    CHECK(report.has_core());
    // The oracle recursion agrees, and the simulated candidates match it.
    auto expected = oracle::ce30_candidates(4);
    CHECK(!expected.empty());
    std::set<int> got;
    for (const auto& [owner, core] : report.candidate_cores) got.insert(static_cast<int>(owner));
    CHECK(got == expected);
}

TEST_CASE("asymmetric gather on counterexample30 under the exploit schedule") {
    auto result = run(Scenario::counterexample(GatherVariant::Asymmetric, 3),
                      TraceLevel::Outputs);
    REQUIRE(result.quiescent);
    auto outputs = result.gather_outputs();
    REQUIRE(outputs.size() == 30);
    auto report = common_core_report(outputs, result.gather_s_sets(), result.trust,
                                     result.faulty);
    CHECK(report.has_core());
    // Common core property: some guild member's distributed S set inside
    // every guild output.
    for (const auto& [owner, core] : report.candidate_cores) {
        for (const auto& [p, u] : outputs) {
            for (const auto& [pid, digest] : core) {
                auto it = u.find(pid);
                REQUIRE(it != u.end());
                CHECK(it->second == digest);
            }
        }
    }
    auto verdicts = check_trace(result, default_properties(Scenario::Protocol::Gather));
    for (const auto& v : verdicts) {
        INFO(v.property, ": ", v.detail);
        CHECK(v.pass);
    }
}

TEST_CASE("every guild member distributes its T set at quiescence") {
    // In every asymmetric execution with a guild, at least one guild process
    // sends DistributeT, and at quiescence all of them have.
    for (uint64_t seed : {3ull, 9ull, 27ull}) {
        Scenario s;
        s.protocol = Scenario::Protocol::Gather;
        s.variant = GatherVariant::Asymmetric;
        s.trust = "counterexample30";
        s.schedule = Scenario::Schedule::Random;
        s.seed = seed;
        auto result = run(s, TraceLevel::Outputs);
        REQUIRE(result.quiescent);
        size_t sent = 0;
        for (ProcessId g : result.guild.members())
            if (result.hosts[g]->gather->sent_final_set()) ++sent;
        CHECK(sent >= 1);
        CHECK(sent == result.guild.count());
    }
}

TEST_CASE("threshold gather n=4: a full common core under round-robin") {
    // Guards fire at exactly n-f senders and the delivered set is the union
    // at that moment, so each U holds at least the n-f = 3 common values.
    Scenario s;
    s.protocol = Scenario::Protocol::Gather;
    s.variant = GatherVariant::Threshold;
    s.rounds = 3;
    s.trust = "threshold:4:1";
    s.schedule = Scenario::Schedule::RoundRobin;
    auto result = run(s, TraceLevel::Outputs);
    REQUIRE(result.quiescent);
    auto outputs = result.gather_outputs();
    REQUIRE(outputs.size() == 4);
    for (const auto& [p, u] : outputs) CHECK(u.size() >= 3);
    auto report = common_core_report(outputs, result.gather_s_sets(), result.trust,
                                     result.faulty);
    REQUIRE(report.has_core());
    CHECK(report.candidate_cores.front().second.size() >= 3);
    auto verdicts = check_trace(result, {"gather-validity", "gather-agreement"});
    for (const auto& v : verdicts) CHECK(v.pass);
}

TEST_CASE("asymmetric gather handles faults that keep a guild") {
    Scenario s;
    s.protocol = Scenario::Protocol::Gather;
    s.variant = GatherVariant::Asymmetric;
    s.trust = "threshold:7:2";
    s.faulty = {5, 6};
    s.behavior[5] = ByzBehavior{ByzBehavior::Kind::Mute, 0};
    s.behavior[6] = ByzBehavior{ByzBehavior::Kind::Crash, 40};
    s.schedule = Scenario::Schedule::Random;
    s.seed = 77;
    auto result = run(s, TraceLevel::Outputs);
    REQUIRE(result.quiescent);
    auto verdicts = check_trace(result, {"common-core", "gather-validity", "gather-agreement"});
    for (const auto& v : verdicts) {
        INFO(v.property, ": ", v.detail);
        CHECK(v.pass);
    }
}

TEST_CASE("gather validity under an equivocating proposer") {
    Scenario s;
    s.protocol = Scenario::Protocol::Gather;
    s.variant = GatherVariant::Asymmetric;
    s.trust = "threshold:4:1";
    s.faulty = {3};
    s.behavior[3] = ByzBehavior{ByzBehavior::Kind::EquivocateInputs, 0};
    s.schedule = Scenario::Schedule::Random;
    s.seed = 13;
    auto result = run(s, TraceLevel::Outputs);
    REQUIRE(result.quiescent);
    auto verdicts = check_trace(result, {"gather-validity", "gather-agreement", "common-core"});
    for (const auto& v : verdicts) {
        INFO(v.property, ": ", v.detail);
        CHECK(v.pass);
    }
}

TEST_CASE("subset wait-condition: early DistributeS is buffered, not dropped") {
    TrustConfig trust = threshold_trust(4, 1);
    GatherProcess g(0, &trust, GatherConfig{GatherVariant::Asymmetric, 3});
    ValueMap foreign{{1, 111}, {2, 222}, {3, 333}};
    auto outs = g.on_set(1, GatherSetMsg{2, false, share_values(foreign)});
    CHECK(outs.empty());  // nothing known yet: no ack
    (void)g.on_input(1, 111);
    (void)g.on_input(2, 222);
    outs = g.on_input(3, 333);
    // The buffered set now merges; the Ack to p2 must be among the outputs.
    bool acked = false;
    for (const auto& o : outs)
        if (auto* c = std::get_if<GatherCtlMsg>(&o.msg);
            c && c->kind == GatherCtlMsg::Kind::Ack && o.dst == 1)
            acked = true;
    CHECK(acked);
}

TEST_CASE("late DistributeS after sending T is ignored without ack") {
    TrustConfig trust = threshold_trust(4, 1);
    GatherProcess g(0, &trust, GatherConfig{GatherVariant::Asymmetric, 3});
    for (ProcessId p = 0; p < 4; ++p) (void)g.on_input(p, 1000 + p);
    // Drive confirms to force the DistributeT send.
    for (ProcessId p = 0; p < 3; ++p)
        (void)g.on_ctl(p, GatherCtlMsg{GatherCtlMsg::Kind::Confirm});
    REQUIRE(g.sent_final_set());
    std::vector<std::string> notes;
    auto outs = g.on_set(2, GatherSetMsg{2, false, share_values(ValueMap{{0, 1000}})}, &notes);
    CHECK(outs.empty());
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].find("ignored") != std::string::npos);
}

TEST_CASE("unknown round set messages are noted and ignored") {
    TrustConfig trust = threshold_trust(4, 1);
    GatherProcess g(0, &trust, GatherConfig{GatherVariant::Naive, 3});
    std::vector<std::string> notes;
    auto outs = g.on_set(1, GatherSetMsg{9, false, share_values(ValueMap{})}, &notes);
    CHECK(outs.empty());
    CHECK(notes.size() == 1);
}

TEST_CASE("double ag-propose is rejected at the broadcast layer") {
    TrustConfig trust = threshold_trust(4, 1);
    ArbProcess arb(2, &trust);
    InstanceLabel label{InstanceLabel::Tag::Input, 2, 0};
    (void)arb.broadcast(label, share_bytes(bytes_of("x")));
    CHECK_THROWS_AS((void)arb.broadcast(label, share_bytes(bytes_of("x"))), ProtocolMisuse);
}

TEST_CASE("single-process system: core is the process's own value") {
    std::vector<std::vector<ProcessSet>> coll{{ProcessSet(1)}};
    auto trust = make_trust("solo", FailProneSystem::from_sets(1, std::move(coll)));
    std::map<ProcessId, ValueMap> outputs{{0, ValueMap{{0, 42}}}};
    std::map<ProcessId, ValueMap> s_sets{{0, ValueMap{{0, 42}}}};
    auto report = common_core_report(outputs, s_sets, trust, ProcessSet(1));
    REQUIRE(report.candidate_cores.size() == 1);
    CHECK(report.candidate_cores[0].second.at(0) == 42);
}

TEST_CASE("stretch experiment: naive 3-round gather always finds a core below 16 processes") {
    // Quorum consistency alone suffices at small scale; the 30-process
    // construction is the smallest known failure. Randomized check, not an
    // invariant of the protocol.
    Rng rng(0x5712e7c4);
    for (int iter = 0; iter < 40; ++iter) {
        uint32_t n = 4 + static_cast<uint32_t>(rng.next_below(7));
        auto trust = make_trust("rnd", oracle::random_b3_system(n, rng));
        std::string path = "/tmp/asymdag_stretch_trust.txt";
        {
            std::ofstream out(path);
            out << format_trust(trust);
        }
        Scenario s;
        s.protocol = Scenario::Protocol::Gather;
        s.variant = GatherVariant::Naive;
        s.rounds = 3;
        s.trust = path;
        s.schedule = Scenario::Schedule::Random;
        s.seed = rng.next();
        auto result = run(s, TraceLevel::Summary);
        REQUIRE(result.quiescent);
        auto report = common_core_report(result.gather_outputs(), result.gather_s_sets(),
                                         result.trust, result.faulty);
        INFO("n=", n, " seed=", s.seed);
        CHECK(report.has_core());
    }
}

TEST_CASE("delay-pattern faults do not break gather properties") {
    Scenario s;
    s.protocol = Scenario::Protocol::Gather;
    s.variant = GatherVariant::Asymmetric;
    s.trust = "threshold:4:1";
    s.faulty = {3};
    s.behavior[3] = ByzBehavior{ByzBehavior::Kind::Delay, 500};
    s.schedule = Scenario::Schedule::Random;
    s.seed = 21;
    auto result = run(s, TraceLevel::Outputs);
    REQUIRE(result.quiescent);
    auto verdicts = check_trace(result, {"common-core", "gather-validity", "gather-agreement"});
    for (const auto& v : verdicts) {
        INFO(v.property, ": ", v.detail);
        CHECK(v.pass);
    }
}

TEST_CASE("randomized asymmetric gather: core, validity, agreement") {
    Rng rng(20250809);
    int runs = 0;
    for (int iter = 0; iter < 25; ++iter) {
        uint32_t n = 4 + static_cast<uint32_t>(rng.next_below(7));
        auto fps = oracle::random_b3_system(n, rng);
        auto trust = make_trust("random", std::move(fps));
        ProcessSet faulty = oracle::random_guild_failure(trust, rng);
        Scenario s;
        s.protocol = Scenario::Protocol::Gather;
        s.variant = GatherVariant::Asymmetric;
        s.trust = "memory";  // placeholder, replaced below
        s.schedule = Scenario::Schedule::Random;
        s.seed = rng.next();
        for (ProcessId p : faulty.members()) {
            s.faulty.push_back(p);
            s.behavior[p] = ByzBehavior{ByzBehavior::Kind::Mute, 0};
        }
        // Round-trip the trust through the file format so the scenario stays
        // self-contained.
        std::string path = "/tmp/asymdag_random_trust_" + std::to_string(iter) + ".txt";
        {
            std::ofstream out(path);
            out << format_trust(trust);
        }
        s.trust = path;
        auto result = run(s, TraceLevel::Outputs);
        REQUIRE(result.quiescent);
        auto verdicts =
            check_trace(result, {"common-core", "gather-validity", "gather-agreement"});
        for (const auto& v : verdicts) {
            INFO("n=", n, " seed=", s.seed, " ", v.property, ": ", v.detail);
            CHECK(v.pass);
        }
        ++runs;
    }
    CHECK(runs == 25);
}

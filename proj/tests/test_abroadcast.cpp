#include "doctest.h"

#include <array>
#include <unordered_set>

#include "asymdag/abroadcast.hpp"
#include "asymdag/simnet.hpp"
#include "asymdag/trace_check.hpp"

using namespace asymdag;

namespace {

InstanceLabel input_of(ProcessId p) { return InstanceLabel{InstanceLabel::Tag::Input, p, 0}; }

}  // namespace

TEST_CASE("broadcast emits one SEND per process") {
    TrustConfig trust = threshold_trust(4, 1);
    ArbProcess arb(0, &trust);
    auto outs = arb.broadcast(input_of(0), share_bytes(bytes_of("hello")));
    REQUIRE(outs.size() == 1);
    CHECK(outs[0].dst == kBroadcastAll);
    CHECK(std::get<ArbMsg>(outs[0].msg).phase == ArbMsg::Phase::Send);
}

TEST_CASE("duplicate broadcast on the same label is a protocol misuse") {
    TrustConfig trust = threshold_trust(4, 1);
    ArbProcess arb(1, &trust);
    (void)arb.broadcast(input_of(1), share_bytes(bytes_of("x")));
    CHECK_THROWS_AS((void)arb.broadcast(input_of(1), share_bytes(bytes_of("y"))),
                    ProtocolMisuse);
    CHECK_THROWS_AS((void)arb.broadcast(input_of(0), share_bytes(bytes_of("y"))),
                    ProtocolMisuse);
}

TEST_CASE("forged SEND from a non-sender is dropped") {
    TrustConfig trust = threshold_trust(4, 1);
    ArbProcess arb(0, &trust);
    Bytes payload = bytes_of("fake");
    ArbMsg forged{ArbMsg::Phase::Send, input_of(2), share_bytes(payload), fnv64(payload)};
    auto res = arb.on_message(1, forged);  // src 1 claims sender 2
    CHECK(res.out.empty());
    CHECK(res.delivered.empty());
}

TEST_CASE("threshold n=4 happy path: echo, ready, deliver") {
    // Drive one receiver by hand: SEND from 3, echoes from a quorum, readies
    // from a quorum.
    TrustConfig trust = threshold_trust(4, 1);
    ArbProcess arb(0, &trust);
    Bytes payload = bytes_of("b");
    uint64_t d = fnv64(payload);
    auto send = ArbMsg{ArbMsg::Phase::Send, input_of(3), share_bytes(payload), d};
    auto res = arb.on_message(3, send);
    REQUIRE(res.out.size() == 1);
    CHECK(std::get<ArbMsg>(res.out[0].msg).phase == ArbMsg::Phase::Echo);

    auto echo = ArbMsg{ArbMsg::Phase::Echo, input_of(3), share_bytes(payload), d};
    (void)arb.on_message(0, echo);
    (void)arb.on_message(1, echo);
    res = arb.on_message(2, echo);  // third echo completes a quorum
    REQUIRE(res.out.size() == 1);
    CHECK(std::get<ArbMsg>(res.out[0].msg).phase == ArbMsg::Phase::Ready);

    auto ready = ArbMsg{ArbMsg::Phase::Ready, input_of(3), share_bytes(payload), d};
    (void)arb.on_message(0, ready);
    (void)arb.on_message(1, ready);
    res = arb.on_message(3, ready);
    REQUIRE(res.delivered.size() == 1);
    CHECK(res.delivered[0].digest == d);
    // No second delivery on further readies.
    res = arb.on_message(2, ready);
    CHECK(res.delivered.empty());
}

TEST_CASE("kernel of readies amplifies before any echo quorum") {
    TrustConfig trust = threshold_trust(4, 1);
    ArbProcess arb(0, &trust);
    Bytes payload = bytes_of("amp");
    uint64_t d = fnv64(payload);
    auto ready = ArbMsg{ArbMsg::Phase::Ready, input_of(3), share_bytes(payload), d};
    auto res = arb.on_message(1, ready);
    CHECK(res.out.empty());  // one ready is below the f+1 kernel
    res = arb.on_message(2, ready);
    REQUIRE(res.out.size() == 1);
    CHECK(std::get<ArbMsg>(res.out[0].msg).phase == ArbMsg::Phase::Ready);
}

// Exhaustive search over every adversarial delivery order at n=4 (threshold
// f=1) with an equivocating sender p4. The faulty sender splits SEND, ECHO
// and READY between payloads b and b'; the three correct processes run the
// real state machine. Memoized DFS walks the full schedule tree.
namespace {

struct SearchMsg {
    ProcessId src, dst;
    ArbMsg msg;
};

class ExhaustiveSearch {
public:
    explicit ExhaustiveSearch(const TrustConfig* trust) : trust_(trust) {
        payload_b_ = share_bytes(bytes_of("b"));
        payload_b2_ = share_bytes(bytes_of("b'"));
        db_ = fnv64(*payload_b_);
        db2_ = fnv64(*payload_b2_);
    }

    struct Outcome {
        bool consistency = true;
        bool integrity = true;
        bool totality = true;
        size_t states = 0;
        size_t leaves = 0;
        bool complete = false;
    };

    Outcome explore(size_t state_cap) {
        std::vector<ArbProcess> procs{ArbProcess(0, trust_), ArbProcess(1, trust_),
                                      ArbProcess(2, trust_)};
        std::vector<SearchMsg> pending;
        auto inject = [&](ArbMsg::Phase phase, BytesPtr payload, uint64_t digest,
                          std::initializer_list<ProcessId> dsts) {
            for (ProcessId dst : dsts)
                pending.push_back(SearchMsg{3, dst, ArbMsg{phase, input_of(3), payload, digest}});
        };
        inject(ArbMsg::Phase::Send, payload_b_, db_, {0, 1});
        inject(ArbMsg::Phase::Send, payload_b2_, db2_, {2});
        inject(ArbMsg::Phase::Echo, payload_b_, db_, {0, 1});
        inject(ArbMsg::Phase::Echo, payload_b2_, db2_, {2});
        inject(ArbMsg::Phase::Ready, payload_b_, db_, {0, 1});
        inject(ArbMsg::Phase::Ready, payload_b2_, db2_, {2});
        cap_ = state_cap;
        dfs(procs, pending);
        outcome_.complete = outcome_.states < cap_;
        return outcome_;
    }

private:
    uint64_t encode(const std::vector<ArbProcess>& procs,
                    const std::vector<SearchMsg>& pending, uint64_t seed) const {
        uint64_t h = seed;
        auto mix = [&](uint64_t v) { h = splitmix64(h ^ v); };
        for (const auto& p : procs) {
            auto it = p.instances().find(input_of(3));
            if (it == p.instances().end()) {
                mix(0x11);
                continue;
            }
            const auto& st = it->second;
            mix(st.sent_echo | (st.sent_ready << 1) | (st.delivered << 2));
            mix(st.delivered_digest);
            for (const auto& [d, voters] : st.echoes) { mix(d); mix(voters.bits()); }
            mix(0x22);
            for (const auto& [d, voters] : st.readies) { mix(d); mix(voters.bits()); }
        }
        std::vector<uint64_t> keys;
        for (const auto& m : pending)
            keys.push_back(splitmix64((uint64_t{m.src} << 40) ^ (uint64_t{m.dst} << 32) ^
                                      (static_cast<uint64_t>(m.msg.phase) << 56) ^ m.msg.digest));
        std::sort(keys.begin(), keys.end());
        for (uint64_t k : keys) mix(k);
        return h;
    }

    void check_state(const std::vector<ArbProcess>& procs, bool quiescent) {
        uint64_t seen = 0;
        bool any = false, all = true;
        for (const auto& p : procs) {
            auto it = p.instances().find(input_of(3));
            if (it == p.instances().end() || !it->second.delivered) {
                all = false;
                continue;
            }
            if (any && it->second.delivered_digest != seen) outcome_.consistency = false;
            seen = it->second.delivered_digest;
            any = true;
        }
        if (quiescent) {
            ++outcome_.leaves;
            if (any && !all) outcome_.totality = false;
        }
    }

    void dfs(std::vector<ArbProcess> procs, std::vector<SearchMsg> pending) {
        if (outcome_.states >= cap_) return;
        uint64_t k1 = encode(procs, pending, 0x9e3779b97f4a7c15ull);
        uint64_t k2 = encode(procs, pending, 0xd1b54a32d192ed03ull);
        if (!visited_.insert((static_cast<unsigned __int128>(k1) << 64) | k2).second) return;
        ++outcome_.states;
        check_state(procs, pending.empty());
        if (!outcome_.consistency || !outcome_.integrity) return;

        std::unordered_set<uint64_t> branched;
        for (size_t i = 0; i < pending.size(); ++i) {
            uint64_t key = splitmix64((uint64_t{pending[i].src} << 40) ^
                                      (uint64_t{pending[i].dst} << 32) ^
                                      (static_cast<uint64_t>(pending[i].msg.phase) << 56) ^
                                      pending[i].msg.digest);
            if (!branched.insert(key).second) continue;  // identical message
            auto next_procs = procs;
            auto next_pending = pending;
            SearchMsg m = next_pending[i];
            next_pending.erase(next_pending.begin() + i);
            auto res = next_procs[m.dst].on_message(m.src, m.msg);
            if (res.delivered.size() > 1) outcome_.integrity = false;
            for (const auto& o : res.out)
                for (ProcessId dst = 0; dst < 3; ++dst)
                    next_pending.push_back(
                        SearchMsg{m.dst, dst, std::get<ArbMsg>(o.msg)});
            dfs(std::move(next_procs), std::move(next_pending));
            if (!outcome_.consistency || !outcome_.integrity) return;
        }
    }

    const TrustConfig* trust_;
    BytesPtr payload_b_, payload_b2_;
    uint64_t db_ = 0, db2_ = 0;
    std::unordered_set<unsigned __int128> visited_;
    Outcome outcome_;
    size_t cap_ = 0;
};

}  // namespace

TEST_CASE("exhaustive schedule search: equivocating sender, n=4 threshold") {
    TrustConfig trust = threshold_trust(4, 1);
    ExhaustiveSearch search(&trust);
    auto outcome = search.explore(3000000);
    CHECK(outcome.complete);
    CHECK(outcome.consistency);
    CHECK(outcome.integrity);
    CHECK(outcome.totality);
    CHECK(outcome.leaves > 0);
    MESSAGE("explored states: ", outcome.states, ", quiescent leaves: ", outcome.leaves);
}

TEST_CASE("counterexample30 arb run: all guild members deliver") {
    Scenario s;
    s.protocol = Scenario::Protocol::Arb;
    s.trust = "counterexample30";
    s.schedule = Scenario::Schedule::RoundRobin;
    s.seed = 5;
    auto result = run(s, TraceLevel::Outputs);
    REQUIRE(result.quiescent);
    auto verdicts = check_trace(result, default_properties(Scenario::Protocol::Arb));
    for (const auto& v : verdicts) {
        INFO(v.property, ": ", v.detail);
        CHECK(v.pass);
    }
    // Totality of the guild: every process delivered every input.
    for (const auto& host : result.hosts) {
        size_t delivered = 0;
        for (const auto& [label, st] : host->arb->instances())
            if (st.delivered) ++delivered;
        CHECK(delivered == 30);
    }
}

TEST_CASE("randomized equivocation runs under simnet") {
    for (uint64_t seed : {11ull, 17ull, 23ull}) {
        Scenario s;
        s.protocol = Scenario::Protocol::Arb;
        s.trust = "threshold:4:1";
        s.faulty = {3};
        s.behavior[3] = ByzBehavior{ByzBehavior::Kind::EquivocateInputs, 0};
        s.schedule = Scenario::Schedule::Random;
        s.seed = seed;
        auto result = run(s, TraceLevel::Outputs);
        REQUIRE(result.quiescent);
        auto verdicts =
            check_trace(result, {"arb-consistency", "arb-integrity", "arb-totality"});
        for (const auto& v : verdicts) {
            INFO(v.property, " seed ", seed, ": ", v.detail);
            CHECK(v.pass);
        }
    }
}

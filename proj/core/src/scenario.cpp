#include "asymdag/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace asymdag {

std::string protocol_name(Scenario::Protocol p) {
    switch (p) {
        case Scenario::Protocol::Arb: return "arb";
        case Scenario::Protocol::Gather: return "gather";
        case Scenario::Protocol::DagRider: return "dagrider";
    }
    return "?";
}

std::string schedule_name(Scenario::Schedule s) {
    switch (s) {
        case Scenario::Schedule::RoundRobin: return "round-robin";
        case Scenario::Schedule::Random: return "random";
        case Scenario::Schedule::QuorumOnly: return "quorum-only";
        case Scenario::Schedule::Scripted: return "scripted";
    }
    return "?";
}

namespace {

std::string behavior_text(const ByzBehavior& b) {
    switch (b.kind) {
        case ByzBehavior::Kind::Crash: return "crash " + std::to_string(b.param);
        case ByzBehavior::Kind::Mute: return "mute";
        case ByzBehavior::Kind::EquivocateInputs: return "equivocate";
        case ByzBehavior::Kind::Delay: return "delay " + std::to_string(b.param);
    }
    return "?";
}

}  // namespace

std::string Scenario::serialize() const {
    std::ostringstream out;
    out << "protocol " << protocol_name(protocol) << "\n";
    if (protocol == Protocol::Gather) {
        out << "variant " << variant_name(variant) << "\n";
        if (variant != GatherVariant::Asymmetric) out << "rounds " << rounds << "\n";
    }
    out << "trust " << trust << "\n";
    if (!faulty.empty()) {
        out << "faulty";
        for (ProcessId p : faulty) out << " " << (p + 1);
        out << "\n";
        for (const auto& [p, b] : behavior)
            out << "behavior " << (p + 1) << " " << behavior_text(b) << "\n";
    }
    out << "schedule " << schedule_name(schedule) << "\n";
    for (const auto& [src, dst] : script)
        out << "script " << (src + 1) << " " << (dst + 1) << "\n";
    out << "seed " << seed << "\n";
    if (protocol == Protocol::DagRider) out << "workload " << workload << "\n";
    if (payload_bytes) out << "payload-bytes " << payload_bytes << "\n";
    out << "max-steps " << max_steps << "\n";
    if (fairness_budget) out << "fairness-budget " << fairness_budget << "\n";
    return out.str();
}

uint64_t Scenario::digest() const { return fnv64(serialize()); }

Scenario Scenario::parse(std::istream& in) {
    Scenario s;
    s.max_steps = 2000000;
    std::string raw;
    size_t lineno = 0;
    bool saw_protocol = false;
    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream ss(raw);
        std::string key;
        if (!(ss >> key)) continue;
        auto fail = [&](const std::string& what) -> ConfigError {
            return ConfigError("scenario line " + std::to_string(lineno) + ": " + what);
        };
        if (key == "protocol") {
            std::string v;
            ss >> v;
            if (v == "arb") s.protocol = Protocol::Arb;
            else if (v == "gather") s.protocol = Protocol::Gather;
            else if (v == "dagrider") s.protocol = Protocol::DagRider;
            else throw fail("unknown protocol '" + v + "'");
            saw_protocol = true;
        } else if (key == "variant") {
            std::string v;
            ss >> v;
            auto parsed = parse_variant(v);
            if (!parsed) throw fail("unknown gather variant '" + v + "'");
            s.variant = *parsed;
        } else if (key == "rounds") {
            if (!(ss >> s.rounds) || s.rounds < 2) throw fail("rounds must be >= 2");
        } else if (key == "trust") {
            ss >> s.trust;
        } else if (key == "faulty") {
            int v;
            while (ss >> v) {
                if (v < 1) throw fail("faulty indices are 1-based");
                s.faulty.push_back(static_cast<ProcessId>(v - 1));
            }
            std::sort(s.faulty.begin(), s.faulty.end());
        } else if (key == "behavior") {
            int p;
            std::string kind;
            if (!(ss >> p >> kind)) throw fail("behavior needs '<process> <kind>'");
            ByzBehavior b;
            if (kind == "crash") {
                b.kind = ByzBehavior::Kind::Crash;
                if (!(ss >> b.param)) throw fail("crash needs a step");
            } else if (kind == "mute") {
                b.kind = ByzBehavior::Kind::Mute;
            } else if (kind == "equivocate") {
                b.kind = ByzBehavior::Kind::EquivocateInputs;
            } else if (kind == "delay") {
                b.kind = ByzBehavior::Kind::Delay;
                if (!(ss >> b.param)) throw fail("delay needs an amount");
            } else {
                throw fail("unknown behavior '" + kind + "'");
            }
            s.behavior[static_cast<ProcessId>(p - 1)] = b;
        } else if (key == "schedule") {
            std::string v;
            ss >> v;
            if (v == "round-robin") s.schedule = Schedule::RoundRobin;
            else if (v == "random") s.schedule = Schedule::Random;
            else if (v == "quorum-only") s.schedule = Schedule::QuorumOnly;
            else if (v == "scripted") s.schedule = Schedule::Scripted;
            else throw fail("unknown schedule '" + v + "'");
        } else if (key == "script") {
            int a, b;
            if (!(ss >> a >> b) || a < 1 || b < 1) throw fail("script needs '<src> <dst>'");
            s.script.emplace_back(static_cast<ProcessId>(a - 1), static_cast<ProcessId>(b - 1));
        } else if (key == "seed") {
            if (!(ss >> s.seed)) throw fail("bad seed");
        } else if (key == "workload") {
            if (!(ss >> s.workload)) throw fail("bad workload");
        } else if (key == "payload-bytes") {
            if (!(ss >> s.payload_bytes)) throw fail("bad payload-bytes");
        } else if (key == "max-steps") {
            if (!(ss >> s.max_steps) || s.max_steps == 0) throw fail("bad max-steps");
        } else if (key == "fairness-budget") {
            if (!(ss >> s.fairness_budget)) throw fail("bad fairness-budget");
        } else {
            throw fail("unknown directive '" + key + "'");
        }
    }
    if (!saw_protocol) throw ConfigError("scenario is missing a protocol line");
    return s;
}

Scenario Scenario::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    return parse(in);
}

Scenario Scenario::counterexample(GatherVariant v, uint32_t k_rounds, uint64_t seed) {
    Scenario s;
    s.trust = "counterexample30";
    s.protocol = Protocol::Gather;
    s.variant = v;
    s.rounds = k_rounds;
    s.schedule = Schedule::QuorumOnly;
    s.seed = seed;
    // The exploit schedule must hold its deferrals for the whole run; the
    // empty-eligible fallback alone keeps links reliable.
    s.fairness_budget = uint64_t{1} << 40;
    return s;
}

ProcessSet Scenario::faulty_set(uint32_t n) const {
    ProcessSet f(n);
    for (ProcessId p : faulty) {
        if (p >= n) throw ConfigError("faulty process index out of range");
        f.insert(p);
    }
    return f;
}

void Scenario::validate(const TrustConfig& trust_cfg) const {
    const uint32_t n = trust_cfg.n();
    ProcessSet f = faulty_set(n);
    for (const auto& [p, b] : behavior) {
        if (!f.contains(p))
            throw ConfigError("behavior given for process " + std::to_string(p + 1) +
                              " which is not in the faulty set");
        if (b.kind == ByzBehavior::Kind::EquivocateInputs && protocol == Protocol::DagRider)
            throw ConfigError("equivocate-inputs applies to arb/gather scenarios only");
    }
    if (schedule == Schedule::QuorumOnly) {
        for (uint32_t i = 0; i < n; ++i)
            if (trust_cfg.qs.per_process[i].size() != 1)
                throw ConfigError(
                    "quorum-only schedule requires single-quorum (canonical) systems");
    }
    if (schedule == Schedule::Scripted && script.empty())
        throw ConfigError("scripted schedule needs script lines");
    if (protocol == Protocol::Gather && variant != GatherVariant::Asymmetric && rounds < 2)
        throw ConfigError("gather rounds must be >= 2");
}

}  // namespace asymdag

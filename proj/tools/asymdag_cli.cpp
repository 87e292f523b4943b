// Command-line front door: quorum analysis, gather runs, counterexample
// reproduction, consensus simulation batches and trace checking.
//
// Exit codes: 0 success, 1 property failure, 2 configuration error.

#include <atomic>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "asymdag/simnet.hpp"
#include "asymdag/trace_check.hpp"

using namespace asymdag;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFail = 1;
constexpr int kExitConfig = 2;

enum class Format { Human, Records };

struct SeedRange {
    uint64_t lo = 0, hi = 0;  // inclusive
};

SeedRange parse_seeds(const std::string& text) {
    auto dots = text.find("..");
    SeedRange r;
    if (dots == std::string::npos) {
        r.lo = r.hi = std::stoull(text);
    } else {
        r.lo = std::stoull(text.substr(0, dots));
        r.hi = std::stoull(text.substr(dots + 2));
    }
    if (r.hi < r.lo) throw ConfigError("seed range is empty: " + text);
    return r;
}

uint64_t default_seed() {
    if (const char* env = std::getenv("ASYMDAG_SEED")) return std::stoull(env);
    return 1;
}

void print_sets(const std::string& label, const std::vector<ProcessSet>& sets, Format fmt) {
    std::cout << label;
    for (const auto& s : sets) std::cout << " " << s.to_string(fmt == Format::Human ? 1 : 0);
    std::cout << "\n";
}

// Membership matrix, one row per process, 1-based by default.
void print_matrix(const std::string& title, uint32_t n,
                  const std::map<ProcessId, ValueMap>& rows, Format fmt) {
    std::cout << "# " << title << "\n";
    uint32_t base = fmt == Format::Human ? 1 : 0;
    for (uint32_t p = 0; p < n; ++p) {
        std::cout << (p + base) << ":";
        auto it = rows.find(p);
        if (it != rows.end())
            for (const auto& [pid, digest] : it->second) std::cout << " " << (pid + base);
        std::cout << "\n";
    }
}

std::map<ProcessId, ValueMap> snapshots_at(const RunResult& result, uint32_t round) {
    std::map<ProcessId, ValueMap> rows;
    for (const auto& host : result.hosts) {
        if (!host->gather) continue;
        auto it = host->gather->round_snapshots().find(round);
        if (it != host->gather->round_snapshots().end()) rows.emplace(host->id, it->second);
    }
    return rows;
}

int report_verdicts(const std::vector<Verdict>& verdicts) {
    bool ok = true;
    for (const auto& v : verdicts) {
        std::cout << (v.pass ? "pass " : "FAIL ") << v.property;
        if (!v.detail.empty()) std::cout << ": " << v.detail;
        std::cout << "\n";
        ok &= v.pass;
    }
    return ok ? kExitOk : kExitPropertyFail;
}

struct BatchStats {
    std::vector<double> waves_per_commit;
    uint64_t runs = 0, truncated = 0, property_failures = 0;
    uint64_t deliveries = 0, commits = 0;
};

int run_seed_batch(Scenario base, SeedRange seeds, size_t jobs, Format fmt, bool per_seed) {
    std::vector<uint64_t> all_seeds;
    for (uint64_t s = seeds.lo; s <= seeds.hi; ++s) all_seeds.push_back(s);
    std::vector<std::string> lines(all_seeds.size());
    std::vector<DagStats> stats(all_seeds.size());
    std::vector<bool> pass(all_seeds.size(), false);
    std::vector<bool> truncated(all_seeds.size(), false);
    std::vector<uint64_t> deliveries(all_seeds.size(), 0);

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= all_seeds.size()) return;
            Scenario s = base;
            s.seed = all_seeds[i];
            auto result = run(s, TraceLevel::Outputs);
            auto verdicts = check_trace(result, default_properties(s.protocol));
            pass[i] = all_pass(verdicts);
            truncated[i] = result.truncated;
            if (s.protocol == Scenario::Protocol::DagRider) stats[i] = dag_stats(result);
            for (const auto& host : result.hosts)
                if (host->rider) deliveries[i] += host->rider->delivery_log().size();
            std::string line = "seed=" + std::to_string(all_seeds[i]) +
                               (result.truncated ? " truncated" : " quiescent");
            if (s.protocol == Scenario::Protocol::DagRider)
                line += " waves/commit=" + std::to_string(stats[i].waves_per_commit) +
                        " commits=" + std::to_string(stats[i].total_commits);
            for (const auto& v : verdicts)
                if (!v.pass) line += " FAIL:" + v.property;
            lines[i] = line;
        }
    };
    size_t workers = std::max<size_t>(1, std::min(jobs, all_seeds.size()));
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    BatchStats agg;
    for (size_t i = 0; i < all_seeds.size(); ++i) {
        ++agg.runs;
        if (truncated[i]) ++agg.truncated;
        if (!pass[i]) ++agg.property_failures;
        if (base.protocol == Scenario::Protocol::DagRider && stats[i].total_commits > 0)
            agg.waves_per_commit.push_back(stats[i].waves_per_commit);
        agg.commits += stats[i].total_commits;
        agg.deliveries += deliveries[i];
        if (per_seed) std::cout << lines[i] << "\n";
    }
    std::cout << "runs=" << agg.runs << " truncated=" << agg.truncated
              << " property-failures=" << agg.property_failures;
    if (base.protocol == Scenario::Protocol::DagRider) {
        auto bound = one_sided_upper95(agg.waves_per_commit);
        std::cout << " mean-waves-per-commit=" << bound.mean
                  << " upper95=" << bound.upper95 << " deliveries=" << agg.deliveries;
    }
    std::cout << "\n";
    (void)fmt;
    return (agg.property_failures == 0 && agg.truncated == 0) ? kExitOk : kExitPropertyFail;
}

Scenario scenario_from_flags(const std::string& scenario_file, const std::string& trust,
                             const std::string& protocol, const std::string& variant,
                             uint32_t rounds, uint32_t workload, const std::string& schedule) {
    if (!scenario_file.empty()) {
        Scenario s = Scenario::load_file(scenario_file);
        return s;
    }
    Scenario s;
    s.trust = trust;
    if (protocol == "arb") s.protocol = Scenario::Protocol::Arb;
    else if (protocol == "gather") s.protocol = Scenario::Protocol::Gather;
    else if (protocol == "dagrider") s.protocol = Scenario::Protocol::DagRider;
    else throw ConfigError("unknown protocol: " + protocol);
    if (auto v = parse_variant(variant)) s.variant = *v;
    else throw ConfigError("unknown variant: " + variant);
    s.rounds = rounds;
    s.workload = workload;
    if (schedule == "round-robin") s.schedule = Scenario::Schedule::RoundRobin;
    else if (schedule == "random") s.schedule = Scenario::Schedule::Random;
    else if (schedule == "quorum-only") s.schedule = Scenario::Schedule::QuorumOnly;
    else throw ConfigError("unknown schedule: " + schedule);
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"asymmetric-trust quorum and DAG consensus toolbox"};
    app.require_subcommand(1);

    std::string trust_arg = "counterexample30";
    std::string scenario_arg;
    std::string variant_arg = "asymmetric";
    std::string schedule_arg = "random";
    std::string seeds_arg = std::to_string(default_seed());
    std::string format_arg = "human";
    std::string trace_arg;
    std::string out_arg;
    std::string protocol_arg = "dagrider";
    uint32_t rounds_arg = 3;
    uint32_t workload_arg = 1;
    int process_arg = 0;
    std::vector<int> faulty_arg;
    size_t jobs_arg = std::thread::hardware_concurrency();

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--format", format_arg, "human|records")
            ->check(CLI::IsMember({"human", "records"}));
    };

    auto* check_b3_cmd = app.add_subcommand("check-b3", "B3 condition verdict for a trust file");
    check_b3_cmd->add_option("--trust", trust_arg, "trust file or builtin");
    add_common(check_b3_cmd);

    auto* quorums_cmd = app.add_subcommand("quorums", "canonical quorum system");
    quorums_cmd->add_option("--trust", trust_arg, "trust file or builtin");
    add_common(quorums_cmd);

    auto* kernels_cmd = app.add_subcommand("kernels", "minimal kernels per process");
    kernels_cmd->add_option("--trust", trust_arg, "trust file or builtin");
    kernels_cmd->add_option("--process", process_arg, "1-based process (0 = all)");
    add_common(kernels_cmd);

    auto* guild_cmd = app.add_subcommand("guild", "classification and maximal guild");
    guild_cmd->add_option("--trust", trust_arg, "trust file or builtin");
    guild_cmd->add_option("--faulty", faulty_arg, "actually faulty processes, 1-based");
    add_common(guild_cmd);

    auto* gather_cmd = app.add_subcommand("gather-run", "run one gather scenario");
    gather_cmd->add_option("--scenario", scenario_arg, "scenario file");
    gather_cmd->add_option("--trust", trust_arg, "trust file or builtin");
    gather_cmd->add_option("--variant", variant_arg, "threshold|naive|asymmetric");
    gather_cmd->add_option("--rounds", rounds_arg, "naive/threshold round count");
    gather_cmd->add_option("--schedule", schedule_arg, "round-robin|random|quorum-only");
    gather_cmd->add_option("--seeds", seeds_arg, "seed or a..b range");
    gather_cmd->add_option("--trace-out", out_arg, "write the full trace to a file");
    add_common(gather_cmd);

    auto* ce_cmd = app.add_subcommand("counterexample",
                                      "run the built-in 30-process reproduction");
    ce_cmd->add_option("--variant", variant_arg, "threshold|naive|asymmetric");
    ce_cmd->add_option("--rounds", rounds_arg, "naive round count k");
    ce_cmd->add_option("--seeds", seeds_arg, "seed");
    ce_cmd->add_option("--trace-out", out_arg, "write the full trace to a file");
    add_common(ce_cmd);

    auto* consensus_cmd = app.add_subcommand("consensus-run", "dagrider stats over seeds");
    consensus_cmd->add_option("--scenario", scenario_arg, "scenario file");
    consensus_cmd->add_option("--trust", trust_arg, "trust file or builtin");
    consensus_cmd->add_option("--workload", workload_arg, "blocks per process");
    consensus_cmd->add_option("--schedule", schedule_arg, "round-robin|random");
    consensus_cmd->add_option("--seeds", seeds_arg, "seed or a..b range");
    consensus_cmd->add_option("--dag-out", out_arg,
                              "write the first guild member's DAG adjacency (single seed)");
    add_common(consensus_cmd);

    auto* batch_cmd = app.add_subcommand("batch", "fan a scenario out across workers");
    batch_cmd->add_option("--scenario", scenario_arg, "scenario file");
    batch_cmd->add_option("--trust", trust_arg, "trust file or builtin");
    batch_cmd->add_option("--protocol", protocol_arg, "arb|gather|dagrider");
    batch_cmd->add_option("--variant", variant_arg, "gather variant");
    batch_cmd->add_option("--rounds", rounds_arg, "naive round count");
    batch_cmd->add_option("--workload", workload_arg, "blocks per process");
    batch_cmd->add_option("--schedule", schedule_arg, "schedule policy");
    batch_cmd->add_option("--seeds", seeds_arg, "seed range a..b");
    batch_cmd->add_option("--jobs", jobs_arg, "parallel workers");
    add_common(batch_cmd);

    auto* trace_cmd = app.add_subcommand("trace-check", "re-run a scenario and check a trace");
    trace_cmd->add_option("--scenario", scenario_arg, "scenario file")->required();
    trace_cmd->add_option("--trace", trace_arg, "golden trace file to compare against");
    add_common(trace_cmd);

    CLI11_PARSE(app, argc, argv);
    Format fmt = format_arg == "records" ? Format::Records : Format::Human;

    try {
        if (check_b3_cmd->parsed()) {
            auto fps = resolve_fail_prone(trust_arg);
            if (auto witness = find_b3_violation(fps)) {
                std::cout << "B3: VIOLATED " << witness->to_string() << "\n";
                return kExitPropertyFail;
            }
            std::cout << "B3: OK\n";
            return kExitOk;
        }
        if (quorums_cmd->parsed()) {
            auto trust = resolve_trust(trust_arg);
            for (uint32_t i = 0; i < trust.n(); ++i)
                print_sets("quorums[" + std::to_string(i + 1) + "] =",
                           trust.qs.per_process[i], fmt);
            auto report = verify_quorum_system(trust.qs, trust.fps);
            std::cout << "consistency=" << report.consistency
                      << " availability=" << report.availability << "\n";
            return report.ok() ? kExitOk : kExitPropertyFail;
        }
        if (kernels_cmd->parsed()) {
            auto trust = resolve_trust(trust_arg);
            uint32_t lo = 0, hi = trust.n() - 1;
            if (process_arg > 0) lo = hi = static_cast<uint32_t>(process_arg - 1);
            for (uint32_t i = lo; i <= hi; ++i)
                print_sets("kernels[" + std::to_string(i + 1) + "] =", trust.ks.per_process[i],
                           fmt);
            return kExitOk;
        }
        if (guild_cmd->parsed()) {
            auto trust = resolve_trust(trust_arg);
            ProcessSet faulty(trust.n());
            for (int p : faulty_arg) {
                if (p < 1 || static_cast<uint32_t>(p) > trust.n())
                    throw ConfigError("faulty index out of range");
                faulty.insert(static_cast<ProcessId>(p - 1));
            }
            auto c = classify(trust.fps, faulty);
            uint32_t base = fmt == Format::Human ? 1 : 0;
            std::cout << "faulty = " << c.faulty.to_string(base) << "\n";
            std::cout << "naive  = " << c.naive.to_string(base) << "\n";
            std::cout << "wise   = " << c.wise.to_string(base) << "\n";
            auto guild = maximal_guild(trust.qs, trust.fps, faulty);
            std::cout << "maximal-guild = " << guild.to_string(base) << "\n";
            return kExitOk;
        }
        if (gather_cmd->parsed() || ce_cmd->parsed()) {
            SeedRange seeds = parse_seeds(seeds_arg);
            bool seeds_given = gather_cmd->count("--seeds") || ce_cmd->count("--seeds");
            Scenario s;
            if (ce_cmd->parsed()) {
                auto v = parse_variant(variant_arg);
                if (!v) throw ConfigError("unknown variant: " + variant_arg);
                s = Scenario::counterexample(*v, rounds_arg, seeds.lo);
            } else {
                s = scenario_from_flags(scenario_arg, trust_arg, "gather", variant_arg,
                                        rounds_arg, 1, schedule_arg);
                // A scenario file's own seed wins unless --seeds is explicit.
                if (seeds_given || scenario_arg.empty()) s.seed = seeds.lo;
            }
            auto result = run(s, out_arg.empty() ? TraceLevel::Outputs : TraceLevel::Full);
            if (!out_arg.empty()) {
                std::ofstream out(out_arg);
                out << result.trace_text;
            }
            uint32_t k = s.variant == GatherVariant::Asymmetric ? 3 : s.rounds;
            for (uint32_t r = 1; r <= k; ++r) {
                std::string title = "round " + std::to_string(r) + " sets" +
                                    (r == 1 ? " (S)" : r == k ? " (U)" : r == 2 ? " (T)" : "");
                print_matrix(title, result.trust.n(), snapshots_at(result, r), fmt);
            }
            auto report = common_core_report(result.gather_outputs(), result.gather_s_sets(),
                                             result.trust, result.faulty);
            std::cout << "candidate-cores =";
            uint32_t base = fmt == Format::Human ? 1 : 0;
            for (const auto& [owner, core] : report.candidate_cores)
                std::cout << " " << (owner + base);
            std::cout << (report.candidate_cores.empty() ? " (empty)" : "") << "\n";
            // The common-core property is guaranteed only by the asymmetric
            // variant; the naive reproduction is judged on the empty core.
            std::vector<std::string> props{"quiescence",      "arb-consistency",
                                           "arb-totality",    "arb-validity",
                                           "arb-integrity",   "gather-validity",
                                           "gather-agreement"};
            if (s.variant == GatherVariant::Asymmetric) props.push_back("common-core");
            int rc = report_verdicts(check_trace(result, props));
            if (s.variant == GatherVariant::Naive && ce_cmd->parsed()) {
                bool expect_empty = s.rounds == 3;
                bool empty = report.candidate_cores.empty();
                std::cout << (expect_empty ? "expected empty core: " : "expected a core: ")
                          << (empty == expect_empty ? "confirmed" : "NOT confirmed") << "\n";
                if (empty != expect_empty) return kExitPropertyFail;
            }
            return rc;
        }
        if (consensus_cmd->parsed() || batch_cmd->parsed()) {
            SeedRange seeds = parse_seeds(seeds_arg);
            std::string protocol = consensus_cmd->parsed() ? "dagrider" : protocol_arg;
            Scenario s = scenario_from_flags(scenario_arg, trust_arg, protocol, variant_arg,
                                             rounds_arg, workload_arg, schedule_arg);
            if (!scenario_arg.empty() && !consensus_cmd->count("--seeds") &&
                !batch_cmd->count("--seeds"))
                seeds = SeedRange{s.seed, s.seed};
            if (consensus_cmd->parsed() && !out_arg.empty() && seeds.lo == seeds.hi) {
                s.seed = seeds.lo;
                auto result = run(s, TraceLevel::Outputs);
                for (ProcessId g : result.guild.members()) {
                    if (result.hosts[g]->rider) {
                        std::ofstream out(out_arg);
                        out << result.hosts[g]->rider->dag().adjacency_text();
                        break;
                    }
                }
            }
            size_t jobs = batch_cmd->parsed() ? std::max<size_t>(1, jobs_arg) : 1;
            return run_seed_batch(s, seeds, jobs, fmt, consensus_cmd->parsed());
        }
        if (trace_cmd->parsed()) {
            Scenario s = Scenario::load_file(scenario_arg);
            auto result = run(s, TraceLevel::Full);
            auto verdicts = check_trace(result, default_properties(s.protocol));
            verdicts.push_back(check_total_order_text(result.trace_text));
            if (!trace_arg.empty()) {
                std::ifstream in(trace_arg);
                if (!in) throw ConfigError("cannot open trace file: " + trace_arg);
                std::stringstream buf;
                buf << in.rdbuf();
                bool identical = buf.str() == result.trace_text;
                verdicts.push_back(Verdict{"trace-identical", identical,
                                           identical ? "" : "re-run differs from the file"});
                auto file_order = check_total_order_text(buf.str());
                file_order.property = "file-total-order";
                verdicts.push_back(file_order);
            }
            return report_verdicts(verdicts);
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}

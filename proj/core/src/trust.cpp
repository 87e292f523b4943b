#include "asymdag/trust.hpp"

#include <array>
#include <fstream>
#include <sstream>

namespace asymdag {

namespace {

// Single-quorum table of the 30-process counterexample, 1-based members.
constexpr std::array<std::array<int, 6>, 30> kCounterexampleQuorums{{
    {1, 2, 3, 4, 5, 16},   {1, 6, 7, 8, 9, 17},   {1, 2, 3, 4, 5, 18},
    {1, 6, 7, 8, 9, 19},   {2, 6, 10, 11, 12, 20}, {4, 8, 11, 13, 15, 21},
    {4, 8, 11, 13, 15, 22}, {5, 9, 12, 14, 15, 23}, {5, 9, 12, 14, 15, 24},
    {4, 8, 11, 13, 15, 25}, {1, 6, 7, 8, 9, 26},   {2, 6, 10, 11, 12, 27},
    {3, 7, 10, 13, 14, 28}, {3, 7, 10, 13, 14, 29}, {5, 9, 12, 14, 15, 30},
    {1, 2, 3, 4, 5, 16},   {1, 2, 3, 4, 5, 16},   {1, 2, 3, 4, 5, 16},
    {1, 2, 3, 4, 5, 16},   {1, 6, 7, 8, 9, 27},   {1, 6, 7, 8, 9, 27},
    {1, 6, 7, 8, 9, 20},   {2, 6, 10, 11, 12, 30}, {2, 6, 10, 11, 12, 30},
    {1, 6, 7, 8, 9, 22},   {1, 2, 3, 4, 5, 16},   {1, 6, 7, 8, 9, 27},
    {1, 2, 3, 4, 5, 16},   {1, 2, 3, 4, 5, 29},   {2, 6, 10, 11, 12, 30},
}};

}  // namespace

TrustConfig make_trust(std::string name, FailProneSystem fps) {
    TrustConfig t;
    t.name = std::move(name);
    t.fps = std::move(fps);
    t.qs = canonical_quorums(t.fps);
    t.ks = kernel_system(t.qs);
    return t;
}

TrustConfig counterexample30() {
    const uint32_t n = 30;
    std::vector<std::vector<ProcessSet>> fail_prone(n);
    for (uint32_t i = 0; i < n; ++i) {
        ProcessSet quorum(n);
        for (int member : kCounterexampleQuorums[i]) quorum.insert(static_cast<ProcessId>(member - 1));
        fail_prone[i] = {quorum.complement()};
    }
    return make_trust("counterexample30", FailProneSystem::from_sets(n, std::move(fail_prone)));
}

TrustConfig threshold_trust(uint32_t n, uint32_t f) {
    return make_trust("threshold:" + std::to_string(n) + ":" + std::to_string(f),
                      FailProneSystem::threshold(n, f));
}

namespace {

struct LineError : ConfigError {
    LineError(size_t line, const std::string& what)
        : ConfigError("line " + std::to_string(line) + ": " + what) {}
};

// Parses "{a b c}" starting at stream position; 1-based members.
ProcessSet parse_set(std::istringstream& ss, uint32_t n, size_t line) {
    std::string tok;
    if (!(ss >> tok) || tok.empty() || tok.front() != '{')
        throw LineError(line, "expected '{' to open a process set");
    ProcessSet out(n);
    // Allow both "{1 2 3}" and "{ 1 2 3 }".
    std::string rest = tok.substr(1);
    bool closed = false;
    while (true) {
        if (!rest.empty()) {
            if (rest.back() == '}') {
                rest.pop_back();
                closed = true;
            }
            if (!rest.empty()) {
                size_t pos = 0;
                int v = std::stoi(rest, &pos);
                if (pos != rest.size()) throw LineError(line, "bad member '" + rest + "'");
                if (v < 1 || static_cast<uint32_t>(v) > n)
                    throw LineError(line, "process index " + std::to_string(v) + " out of range");
                out.insert(static_cast<ProcessId>(v - 1));
            }
        }
        if (closed) break;
        if (!(ss >> rest)) throw LineError(line, "unterminated process set");
    }
    return out;
}

std::vector<ProcessSet> threshold_sets(uint32_t n, uint32_t f, size_t line) {
    if (f >= n) throw LineError(line, "threshold f must be < n");
    try {
        return FailProneSystem::threshold(n, f).per_process[0];
    } catch (const ConfigError& e) {
        throw LineError(line, e.what());
    }
}

}  // namespace

FailProneSystem parse_fail_prone(std::istream& in) {
    std::string raw;
    size_t lineno = 0;
    uint32_t n = 0;
    std::vector<std::vector<ProcessSet>> per_process;
    std::vector<bool> covered;

    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream ss(raw);
        std::string key;
        if (!(ss >> key)) continue;

        if (key == "n") {
            if (n != 0) throw LineError(lineno, "duplicate n");
            int v = 0;
            if (!(ss >> v) || v < 1 || v > 64) throw LineError(lineno, "n must be in [1, 64]");
            n = static_cast<uint32_t>(v);
            per_process.assign(n, {});
            covered.assign(n, false);
        } else if (key == "process" || key == "all") {
            if (n == 0) throw LineError(lineno, "n must come first");
            uint32_t lo = 0, hi = n - 1;
            if (key == "process") {
                int idx = 0;
                if (!(ss >> idx) || idx < 1 || static_cast<uint32_t>(idx) > n)
                    throw LineError(lineno, "bad process index");
                lo = hi = static_cast<uint32_t>(idx - 1);
            }
            std::string mode;
            if (!(ss >> mode)) throw LineError(lineno, "expected 'threshold' or 'failprone'");
            std::vector<ProcessSet> sets;
            if (mode == "threshold") {
                int f = -1;
                if (!(ss >> f) || f < 0) throw LineError(lineno, "bad threshold value");
                sets = threshold_sets(n, static_cast<uint32_t>(f), lineno);
            } else if (mode == "failprone") {
                while (ss.rdbuf()->in_avail() || ss.peek() != EOF) {
                    std::streampos before = ss.tellg();
                    std::string probe;
                    if (!(ss >> probe)) break;
                    ss.seekg(before);
                    sets.push_back(parse_set(ss, n, lineno));
                }
                if (sets.empty()) throw LineError(lineno, "failprone needs at least one set");
            } else {
                throw LineError(lineno, "unknown mode '" + mode + "'");
            }
            for (uint32_t i = lo; i <= hi; ++i) {
                if (covered[i])
                    throw LineError(lineno, "process " + std::to_string(i + 1) + " already defined");
                per_process[i] = sets;
                covered[i] = true;
            }
        } else {
            throw LineError(lineno, "unknown directive '" + key + "'");
        }
    }
    if (n == 0) throw ConfigError("trust config is empty (missing n)");
    for (uint32_t i = 0; i < n; ++i)
        if (!covered[i])
            throw ConfigError("process " + std::to_string(i + 1) + " has no trust assumption");
    return FailProneSystem::from_sets(n, std::move(per_process));
}

FailProneSystem resolve_fail_prone(const std::string& name_or_path) {
    if (name_or_path == "counterexample30") return counterexample30().fps;
    if (name_or_path.rfind("threshold:", 0) == 0) {
        auto rest = name_or_path.substr(10);
        auto colon = rest.find(':');
        if (colon == std::string::npos)
            throw ConfigError("threshold trust needs the form threshold:<n>:<f>");
        return FailProneSystem::threshold(
            static_cast<uint32_t>(std::stoul(rest.substr(0, colon))),
            static_cast<uint32_t>(std::stoul(rest.substr(colon + 1))));
    }
    std::ifstream in(name_or_path);
    if (!in) throw ConfigError("cannot open trust file: " + name_or_path);
    return parse_fail_prone(in);
}

TrustConfig parse_trust(std::istream& in, const std::string& name) {
    return make_trust(name, parse_fail_prone(in));
}

TrustConfig load_trust_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trust file: " + path);
    return parse_trust(in, path);
}

TrustConfig resolve_trust(const std::string& name_or_path) {
    if (name_or_path == "counterexample30") return counterexample30();
    if (name_or_path.rfind("threshold:", 0) == 0) {
        auto rest = name_or_path.substr(10);
        auto colon = rest.find(':');
        if (colon == std::string::npos)
            throw ConfigError("threshold trust needs the form threshold:<n>:<f>");
        return threshold_trust(static_cast<uint32_t>(std::stoul(rest.substr(0, colon))),
                               static_cast<uint32_t>(std::stoul(rest.substr(colon + 1))));
    }
    return load_trust_file(name_or_path);
}

std::string format_trust(const TrustConfig& trust) {
    std::ostringstream out;
    out << "n " << trust.n() << "\n";
    for (uint32_t i = 0; i < trust.n(); ++i) {
        out << "process " << (i + 1) << " failprone";
        for (const auto& f : trust.fps.per_process[i]) out << " " << f.to_string();
        out << "\n";
    }
    return out.str();
}

}  // namespace asymdag

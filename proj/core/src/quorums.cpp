#include "asymdag/quorums.hpp"

#include <algorithm>
#include <unordered_set>

namespace asymdag {

std::vector<ProcessSet> maximal_antichain(std::vector<ProcessSet> sets) {
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    std::vector<ProcessSet> out;
    for (const auto& s : sets) {
        bool dominated = false;
        for (const auto& t : sets) {
            if (s != t && s.is_subset_of(t)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) out.push_back(s);
    }
    return out;
}

std::vector<ProcessSet> minimal_antichain(std::vector<ProcessSet> sets) {
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    std::vector<ProcessSet> out;
    for (const auto& s : sets) {
        bool dominates = false;
        for (const auto& t : sets) {
            if (s != t && t.is_subset_of(s)) {
                dominates = true;
                break;
            }
        }
        if (!dominates) out.push_back(s);
    }
    return out;
}

FailProneSystem FailProneSystem::from_sets(uint32_t n, std::vector<std::vector<ProcessSet>> sets) {
    FailProneSystem fps;
    fps.n = n;
    fps.per_process.reserve(sets.size());
    for (auto& coll : sets) fps.per_process.push_back(maximal_antichain(std::move(coll)));
    fps.validate();
    return fps;
}

FailProneSystem FailProneSystem::threshold(uint32_t n, uint32_t f) {
    if (n == 0 || n > 64) throw ConfigError("process count must be in [1, 64]");
    if (f >= n) throw ConfigError("threshold f must be < n");
    std::vector<ProcessSet> sets;
    if (f == 0) {
        sets.push_back(ProcessSet(n));
    } else {
        // All f-sized subsets, enumerated in mask order.
        uint64_t limit = (n >= 64) ? ~uint64_t{0} : ((uint64_t{1} << n) - 1);
        for (uint64_t m = 0; m <= limit; ++m) {
            if (std::popcount(m) == static_cast<int>(f)) sets.push_back(ProcessSet::from_bits(n, m));
            if (m == limit) break;
        }
    }
    FailProneSystem fps;
    fps.n = n;
    fps.per_process.assign(n, sets);
    fps.validate();
    return fps;
}

void FailProneSystem::validate() const {
    if (n == 0 || n > 64) throw ConfigError("process count must be in [1, 64]");
    if (per_process.size() != n) throw ConfigError("fail-prone system has wrong length");
    ProcessSet all = ProcessSet::full(n);
    for (uint32_t i = 0; i < n; ++i) {
        if (per_process[i].empty())
            throw ConfigError("fail-prone collection of process " + std::to_string(i + 1) +
                              " is empty");
        for (const auto& f : per_process[i]) {
            if (f == all)
                throw ConfigError("fail-prone set of process " + std::to_string(i + 1) +
                                  " contains all of P");
        }
    }
}

uint32_t QuorumSystem::smallest_quorum_size() const {
    uint32_t best = 64;
    for (const auto& coll : per_process)
        for (const auto& q : coll) best = std::min(best, q.count());
    return best;
}

std::string B3Witness::to_string() const {
    return "i=" + std::to_string(i + 1) + " j=" + std::to_string(j + 1) + " F_i=" +
           f_i.to_string() + " F_j=" + f_j.to_string() + " F_ij=" + f_ij.to_string();
}

namespace {

// Maximal elements of F_i* n F_j*, computed as maximal sets of the form
// F n F' over the stored antichains.
std::vector<ProcessSet> maximal_common_star(const std::vector<ProcessSet>& fi,
                                            const std::vector<ProcessSet>& fj, uint32_t n) {
    std::vector<ProcessSet> inter;
    inter.reserve(fi.size() * fj.size());
    std::unordered_set<uint64_t> seen;
    for (const auto& a : fi)
        for (const auto& b : fj) {
            uint64_t bits = (a & b).bits();
            if (seen.insert(bits).second) inter.push_back(ProcessSet::from_bits(n, bits));
        }
    return maximal_antichain(std::move(inter));
}

bool any_superset(const std::vector<ProcessSet>& coll, const ProcessSet& s) {
    for (const auto& f : coll)
        if (s.is_subset_of(f)) return true;
    return false;
}

}  // namespace

bool in_star(const FailProneSystem& fps, ProcessId i, const ProcessSet& candidate) {
    return any_superset(fps.per_process[i], candidate);
}

std::optional<B3Witness> find_b3_violation(const FailProneSystem& fps) {
    fps.validate();
    const uint32_t n = fps.n;
    ProcessSet all = ProcessSet::full(n);
    // The condition depends only on the two collections, so processes with
    // identical collections are checked once (threshold systems collapse to a
    // single pair).
    std::vector<uint32_t> rep;
    for (uint32_t i = 0; i < n; ++i) {
        bool found = false;
        for (uint32_t r : rep)
            if (fps.per_process[r] == fps.per_process[i]) { found = true; break; }
        if (!found) rep.push_back(i);
    }
    for (size_t a = 0; a < rep.size(); ++a) {
        for (size_t b = a; b < rep.size(); ++b) {
            uint32_t i = rep[a], j = rep[b];
            // A covering F_ij exists iff the residue P \ (F_i u F_j) lies in
            // both star closures; the residue itself is then a witness.
            for (const auto& fi : fps.per_process[i]) {
                for (const auto& fj : fps.per_process[j]) {
                    ProcessSet residue = all - (fi | fj);
                    if (any_superset(fps.per_process[i], residue) &&
                        any_superset(fps.per_process[j], residue)) {
                        return B3Witness{i, j, fi, fj, residue};
                    }
                }
            }
        }
    }
    return std::nullopt;
}

bool check_b3(const FailProneSystem& fps) { return !find_b3_violation(fps).has_value(); }

QuorumSystem canonical_quorums(const FailProneSystem& fps) {
    if (auto w = find_b3_violation(fps))
        throw ConfigError("fail-prone system violates B3: " + w->to_string());
    QuorumSystem qs;
    qs.n = fps.n;
    qs.per_process.reserve(fps.n);
    for (uint32_t i = 0; i < fps.n; ++i) {
        std::vector<ProcessSet> quorums;
        quorums.reserve(fps.per_process[i].size());
        for (const auto& f : fps.per_process[i]) quorums.push_back(f.complement());
        qs.per_process.push_back(minimal_antichain(std::move(quorums)));
    }
    return qs;
}

QuorumVerifyReport verify_quorum_system(const QuorumSystem& qs, const FailProneSystem& fps) {
    fps.validate();
    if (qs.n != fps.n || qs.per_process.size() != fps.n)
        throw ConfigError("quorum system dimensions do not match fail-prone system");
    QuorumVerifyReport report;
    report.consistency = true;
    report.availability = true;

    for (uint32_t i = 0; i < qs.n && report.consistency; ++i) {
        for (uint32_t j = i; j < qs.n && report.consistency; ++j) {
            auto common = maximal_common_star(fps.per_process[i], fps.per_process[j], fps.n);
            for (const auto& qi : qs.per_process[i]) {
                for (const auto& qj : qs.per_process[j]) {
                    ProcessSet inter = qi & qj;
                    for (const auto& fij : common) {
                        if (inter.is_subset_of(fij)) {
                            report.consistency = false;
                            report.consistency_witness = QuorumConsistencyWitness{i, j, qi, qj, fij};
                            break;
                        }
                    }
                    if (!report.consistency) break;
                }
                if (!report.consistency) break;
            }
        }
    }

    for (uint32_t i = 0; i < qs.n; ++i) {
        for (const auto& fi : fps.per_process[i]) {
            bool found = false;
            for (const auto& qi : qs.per_process[i]) {
                if (!qi.intersects(fi)) {
                    found = true;
                    break;
                }
            }
            if (!found) {
                report.availability = false;
                report.availability_witness = QuorumAvailabilityWitness{i, fi};
                return report;
            }
        }
        if (qs.per_process[i].empty()) {
            report.availability = false;
            report.availability_witness = QuorumAvailabilityWitness{i, ProcessSet(qs.n)};
            return report;
        }
    }
    return report;
}

namespace {

void enumerate_hitting_sets(const std::vector<ProcessSet>& quorums, uint32_t n,
                            ProcessSet chosen, ProcessSet forbidden, size_t next_quorum,
                            std::vector<ProcessSet>& out) {
    // Find the first quorum not yet hit.
    size_t q = next_quorum;
    while (q < quorums.size() && quorums[q].intersects(chosen)) ++q;
    if (q == quorums.size()) {
        // chosen hits everything; minimality: every member must own a quorum
        // that no other member hits.
        for (ProcessId p : chosen.members()) {
            ProcessSet without = chosen;
            without.erase(p);
            bool needed = false;
            for (const auto& quorum : quorums) {
                if (!quorum.intersects(without)) {
                    needed = true;
                    break;
                }
            }
            if (!needed) return;
        }
        out.push_back(chosen);
        return;
    }
    // Branch on the members of the first unhit quorum. `forbidden` carries the
    // members already branched over, so each hitting set appears once.
    ProcessSet branchable = quorums[q] - forbidden;
    for (ProcessId p : branchable.members()) {
        ProcessSet next = chosen;
        next.insert(p);
        enumerate_hitting_sets(quorums, n, next, forbidden, q + 1, out);
        forbidden.insert(p);
    }
}

}  // namespace

std::vector<ProcessSet> kernels(const QuorumSystem& qs, ProcessId i) {
    const auto& quorums = qs.per_process[i];
    if (quorums.empty()) throw ConfigError("process has no quorums");
    std::vector<ProcessSet> out;
    enumerate_hitting_sets(quorums, qs.n, ProcessSet(qs.n), ProcessSet(qs.n), 0, out);
    std::sort(out.begin(), out.end());
    return out;
}

KernelSystem kernel_system(const QuorumSystem& qs) {
    KernelSystem ks;
    ks.n = qs.n;
    ks.per_process.reserve(qs.n);
    for (uint32_t i = 0; i < qs.n; ++i) ks.per_process.push_back(kernels(qs, i));
    return ks;
}

Classification classify(const FailProneSystem& fps, const ProcessSet& actual_faulty) {
    Classification c{ProcessSet(fps.n), ProcessSet(fps.n), ProcessSet(fps.n)};
    c.faulty = actual_faulty;
    for (uint32_t i = 0; i < fps.n; ++i) {
        if (actual_faulty.contains(i)) continue;
        if (in_star(fps, i, actual_faulty))
            c.wise.insert(i);
        else
            c.naive.insert(i);
    }
    return c;
}

ProcessSet maximal_guild(const QuorumSystem& qs, const FailProneSystem& fps,
                         const ProcessSet& actual_faulty) {
    ProcessSet current = classify(fps, actual_faulty).wise;
    bool changed = true;
    while (changed && !current.empty()) {
        changed = false;
        for (ProcessId p : current.members()) {
            if (!is_satisfied(qs.per_process[p], current)) {
                current.erase(p);
                changed = true;
            }
        }
    }
    return current;
}

bool is_satisfied(const std::vector<ProcessSet>& quorums_of_i, const ProcessSet& marked) {
    for (const auto& q : quorums_of_i)
        if (q.is_subset_of(marked)) return true;
    return false;
}

}  // namespace asymdag

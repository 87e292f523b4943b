#pragma once

#include <iosfwd>
#include <string>

#include "asymdag/quorums.hpp"

namespace asymdag {

/// A complete trust assumption: fail-prone system plus its quorum and kernel
/// systems. Quorums default to the canonical construction.
struct TrustConfig {
    std::string name;  // builtin name or file path, for trace headers
    FailProneSystem fps;
    QuorumSystem qs;
    KernelSystem ks;

    uint32_t n() const { return fps.n; }
};

TrustConfig make_trust(std::string name, FailProneSystem fps);

/// The 30-process single-quorum system of the gather counterexample.
/// Fail-prone sets are the complements of the quorums.
TrustConfig counterexample30();
/// Uniform threshold assumption: every process tolerates any f failures.
TrustConfig threshold_trust(uint32_t n, uint32_t f);

/// Trust file grammar (1-based indices, '#' comments):
///   n <count>
///   process <i> threshold <f>
///   process <i> failprone {a b c} {d e} ...
///   all threshold <f>
/// Every process must be covered exactly once.
/// The fail-prone parse succeeds for systems that violate B3, so the checker
/// can report a witness; building a full TrustConfig requires B3.
FailProneSystem parse_fail_prone(std::istream& in);
FailProneSystem resolve_fail_prone(const std::string& name_or_path);

TrustConfig parse_trust(std::istream& in, const std::string& name);
TrustConfig load_trust_file(const std::string& path);
/// Resolves builtin names (counterexample30, threshold:<n>:<f>) before
/// falling back to the filesystem.
TrustConfig resolve_trust(const std::string& name_or_path);

std::string format_trust(const TrustConfig& trust);

}  // namespace asymdag

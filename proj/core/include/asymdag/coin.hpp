#pragma once

#include <map>
#include <string>

#include "asymdag/digest.hpp"
#include "asymdag/process_set.hpp"

namespace asymdag {

/// Simulated asymmetric common coin: a pseudorandom function of (seed, wave),
/// identical at every process. Cryptographic strength is explicitly out of
/// scope; the simulator provides the trusted seed.
struct CoinConfig {
    uint64_t seed = 0;
    uint32_t n = 0;
};

ProcessId choose_leader(const CoinConfig& cfg, uint32_t wave);

/// Reveal gate: the adversary may learn a wave's leader only after the first
/// maximal-guild process finishes the wave's fourth round. Protocol queries
/// are not gated; they happen at exactly that completion.
class CoinGate {
public:
    explicit CoinGate(CoinConfig cfg) : cfg_(cfg) {}

    void open(uint32_t wave, uint64_t step) { opened_.try_emplace(wave, step); }
    bool is_open(uint32_t wave) const { return opened_.count(wave) != 0; }

    struct QueryResult {
        bool allowed = false;
        ProcessId leader = 0;
    };
    /// Adversary-side query; denials are recorded for the trace checks.
    QueryResult adversary_query(uint32_t wave, uint64_t step);

    struct QueryLog {
        uint64_t step;
        uint32_t wave;
        bool allowed;
    };
    const std::vector<QueryLog>& queries() const { return log_; }
    const std::map<uint32_t, uint64_t>& opened_at() const { return opened_; }

private:
    CoinConfig cfg_;
    std::map<uint32_t, uint64_t> opened_;
    std::vector<QueryLog> log_;
};

}  // namespace asymdag

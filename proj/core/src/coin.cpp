#include "asymdag/coin.hpp"

namespace asymdag {

ProcessId choose_leader(const CoinConfig& cfg, uint32_t wave) {
    // Two mixing rounds of splitmix64; rejection keeps the draw unbiased.
    uint64_t x = splitmix64(cfg.seed ^ splitmix64(0xc01f00d5ull + wave));
    uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % cfg.n) - 1;
    while (x > limit) x = splitmix64(x);
    return static_cast<ProcessId>(x % cfg.n);
}

CoinGate::QueryResult CoinGate::adversary_query(uint32_t wave, uint64_t step) {
    bool allowed = is_open(wave);
    log_.push_back(QueryLog{step, wave, allowed});
    if (!allowed) return {false, 0};
    return {true, choose_leader(cfg_, wave)};
}

}  // namespace asymdag

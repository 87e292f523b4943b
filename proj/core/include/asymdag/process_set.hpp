#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace asymdag {

// 0-based process index. Configuration files use 1-based indices and
// convert on load.
using ProcessId = uint32_t;

/// Fixed-capacity membership set over process indices, capacity <= 64.
/// One machine word, so subset/union/intersection are single ops.
class ProcessSet {
public:
    ProcessSet() = default;
    explicit ProcessSet(uint32_t n) : n_(n) {}
    ProcessSet(uint32_t n, std::initializer_list<ProcessId> members) : n_(n) {
        for (ProcessId p : members) insert(p);
    }

    static ProcessSet full(uint32_t n) {
        ProcessSet s(n);
        s.bits_ = (n >= 64) ? ~uint64_t{0} : ((uint64_t{1} << n) - 1);
        return s;
    }
    static ProcessSet from_bits(uint32_t n, uint64_t bits) {
        ProcessSet s(n);
        s.bits_ = bits;
        return s;
    }

    uint32_t capacity() const { return n_; }
    uint64_t bits() const { return bits_; }
    bool empty() const { return bits_ == 0; }
    uint32_t count() const { return static_cast<uint32_t>(std::popcount(bits_)); }

    bool contains(ProcessId p) const { return (bits_ >> p) & 1; }
    void insert(ProcessId p) { bits_ |= uint64_t{1} << p; }
    void erase(ProcessId p) { bits_ &= ~(uint64_t{1} << p); }

    bool is_subset_of(const ProcessSet& o) const { return (bits_ & ~o.bits_) == 0; }
    bool intersects(const ProcessSet& o) const { return (bits_ & o.bits_) != 0; }

    ProcessSet operator|(const ProcessSet& o) const { return from_bits(n_, bits_ | o.bits_); }
    ProcessSet operator&(const ProcessSet& o) const { return from_bits(n_, bits_ & o.bits_); }
    ProcessSet operator-(const ProcessSet& o) const { return from_bits(n_, bits_ & ~o.bits_); }
    ProcessSet& operator|=(const ProcessSet& o) { bits_ |= o.bits_; return *this; }
    ProcessSet& operator&=(const ProcessSet& o) { bits_ &= o.bits_; return *this; }

    ProcessSet complement() const { return full(n_) - *this; }

    bool operator==(const ProcessSet& o) const { return bits_ == o.bits_ && n_ == o.n_; }
    bool operator!=(const ProcessSet& o) const { return !(*this == o); }
    bool operator<(const ProcessSet& o) const { return bits_ < o.bits_; }

    std::vector<ProcessId> members() const {
        std::vector<ProcessId> out;
        out.reserve(count());
        uint64_t b = bits_;
        while (b) {
            out.push_back(static_cast<ProcessId>(std::countr_zero(b)));
            b &= b - 1;
        }
        return out;
    }

    /// "{1 2 5}" with the given index base (1-based in human-facing output).
    std::string to_string(uint32_t base = 1) const {
        std::string s = "{";
        bool first = true;
        for (ProcessId p : members()) {
            if (!first) s += ' ';
            s += std::to_string(p + base);
            first = false;
        }
        s += '}';
        return s;
    }

private:
    uint32_t n_ = 0;
    uint64_t bits_ = 0;
};

/// Antichain reduction: keep only sets that are maximal under inclusion.
std::vector<ProcessSet> maximal_antichain(std::vector<ProcessSet> sets);
/// Antichain reduction: keep only sets that are minimal under inclusion.
std::vector<ProcessSet> minimal_antichain(std::vector<ProcessSet> sets);

}  // namespace asymdag

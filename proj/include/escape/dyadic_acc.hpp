#pragma once

#include "escape/errors.hpp"

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace escape {

// Exact accumulator for sums of dyadic weights 2^-L (L >= 1).  The sum is
// kept normalized — every level holds at most one bit, carries ripple toward
// smaller L — so `min_level() > T` decides `sum < 2^-T` exactly: a normalized
// finite sum of bits at levels > T is strictly below 2^-T.
class DyadicAcc {
public:
    explicit DyadicAcc(size_t max_level)
        : words_((max_level >> 6) + 2, 0), min_hint_(words_.size()) {}

    void add(size_t level) {
        while (test(level)) {
            flip(level);
            if (level == 0)
                throw InvariantBroken("dyadic accumulator exceeded 1");
            --level;
        }
        if (level == 0)
            throw InvariantBroken("dyadic accumulator reached 1");
        flip(level);
        min_hint_ = std::min(min_hint_, level >> 6);
    }

    // Requires the accumulated sum to contain at least 2^-level; borrows by
    // rewriting 2^-L' as the run of bits (L', level], exactly.
    void sub(size_t level) {
        size_t l = level;
        while (!test(l)) {
            flip(l);
            if (l == 0)
                throw InvariantBroken("dyadic accumulator went negative");
            --l;
        }
        flip(l);
    }

    // Smallest set level; SIZE_MAX when the sum is zero.
    size_t min_level() const {
        size_t w = min_hint_;
        while (w < words_.size() && words_[w] == 0)
            ++w;
        min_hint_ = w;
        if (w == words_.size())
            return SIZE_MAX;
        return (w << 6) + static_cast<size_t>(std::countr_zero(words_[w]));
    }

    bool empty() const { return min_level() == SIZE_MAX; }

    bool operator==(const DyadicAcc& other) const {
        return words_ == other.words_;
    }

private:
    bool test(size_t level) const {
        return (words_[level >> 6] >> (level & 63)) & 1;
    }
    void flip(size_t level) { words_[level >> 6] ^= 1ULL << (level & 63); }

    std::vector<uint64_t> words_;
    mutable size_t min_hint_;
};

} // namespace escape

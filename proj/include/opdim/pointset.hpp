#pragma once

#include <bit>
#include <boost/container/small_vector.hpp>
#include <cstdint>
#include <functional>
#include <vector>

#include "opdim/structure.hpp"

namespace opdim {

/// A subset of universe^k for a finite structure, as a bitset over the
/// row-major tuple codes (code order = lexicographic tuple order).
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::size_t extent, bool full = false) : extent_(extent), words_((extent + 63) / 64, 0) {
        if (full) {
            for (auto& w : words_) w = ~std::uint64_t{0};
            trim();
        }
    }

    std::size_t extent() const { return extent_; }

    bool contains(std::size_t code) const { return (words_[code >> 6] >> (code & 63)) & 1u; }
    void insert(std::size_t code) { words_[code >> 6] |= std::uint64_t{1} << (code & 63); }
    void erase(std::size_t code) { words_[code >> 6] &= ~(std::uint64_t{1} << (code & 63)); }

    bool empty() const {
        for (auto w : words_)
            if (w) return false;
        return true;
    }
    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    PointSet& operator&=(const PointSet& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }
    PointSet& operator|=(const PointSet& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    /// Set difference.
    PointSet& operator-=(const PointSet& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
        return *this;
    }
    friend PointSet operator&(PointSet a, const PointSet& b) { return a &= b; }
    friend PointSet operator|(PointSet a, const PointSet& b) { return a |= b; }
    friend PointSet operator-(PointSet a, const PointSet& b) { return a -= b; }

    PointSet complement() const {
        PointSet c = *this;
        for (auto& w : c.words_) w = ~w;
        c.trim();
        return c;
    }

    bool intersects(const PointSet& o) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & o.words_[i]) return true;
        return false;
    }
    bool subset_of(const PointSet& o) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~o.words_[i]) return false;
        return true;
    }

    /// Members in increasing code order.
    std::vector<std::size_t> members() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < words_.size(); ++i) {
            std::uint64_t w = words_[i];
            while (w) {
                out.push_back(i * 64 + static_cast<std::size_t>(std::countr_zero(w)));
                w &= w - 1;
            }
        }
        return out;
    }

    std::size_t hash() const {
        std::uint64_t h = 1469598103934665603ull ^ extent_;
        for (auto w : words_) {
            h ^= w;
            h *= 1099511628211ull;
            h ^= h >> 29;
        }
        return static_cast<std::size_t>(h);
    }

    friend bool operator==(const PointSet& a, const PointSet& b) {
        return a.extent_ == b.extent_ && a.words_ == b.words_;
    }
    friend bool operator<(const PointSet& a, const PointSet& b) {
        if (a.extent_ != b.extent_) return a.extent_ < b.extent_;
        return std::lexicographical_compare(a.words_.begin(), a.words_.end(), b.words_.begin(), b.words_.end());
    }

private:
    void trim() {
        if (extent_ % 64 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (extent_ % 64)) - 1;
    }

    std::size_t extent_ = 0;
    boost::container::small_vector<std::uint64_t, 2> words_;
};

struct PointSetHash {
    std::size_t operator()(const PointSet& s) const { return s.hash(); }
};

/// Row-major coding of tuples over a universe of size `base`.
struct TupleCoder {
    std::size_t base = 0;
    std::size_t arity = 0;

    std::size_t extent() const {
        std::size_t e = 1;
        for (std::size_t i = 0; i < arity; ++i) e *= base;
        return e;
    }
    std::size_t encode(const Tuple& t) const {
        std::size_t c = 0;
        for (auto v : t) c = c * base + v;
        return c;
    }
    Tuple decode(std::size_t code) const {
        Tuple t(arity);
        for (std::size_t i = arity; i-- > 0;) {
            t[i] = code % base;
            code /= base;
        }
        return t;
    }
};

} // namespace opdim

#ifndef LATFLUX_BITSET_HPP
#define LATFLUX_BITSET_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace latflux {

// Fixed-universe dynamic bit-set used for extents, intents and order rows.
class BitSet {
public:
    BitSet() = default;
    explicit BitSet(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}
    BitSet(std::size_t size, std::initializer_list<std::size_t> members) : BitSet(size) {
        for (auto m : members) set(m);
    }

    static BitSet full(std::size_t size) {
        BitSet b(size);
        for (std::size_t i = 0; i < size; ++i) b.set(i);
        return b;
    }

    std::size_t size() const noexcept { return size_; }

    bool test(std::size_t i) const {
        check(i);
        return (words_[i >> 6] >> (i & 63)) & 1U;
    }
    void set(std::size_t i, bool value = true) {
        check(i);
        if (value)
            words_[i >> 6] |= (std::uint64_t{1} << (i & 63));
        else
            words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
    }
    void reset(std::size_t i) { set(i, false); }

    std::size_t count() const noexcept {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }
    bool none() const noexcept {
        for (auto w : words_)
            if (w) return false;
        return true;
    }
    bool any() const noexcept { return !none(); }

    bool is_subset_of(const BitSet& other) const {
        same_size(other);
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~other.words_[i]) return false;
        return true;
    }
    bool intersects(const BitSet& other) const {
        same_size(other);
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & other.words_[i]) return true;
        return false;
    }

    BitSet& operator&=(const BitSet& o) {
        same_size(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }
    BitSet& operator|=(const BitSet& o) {
        same_size(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    BitSet& operator^=(const BitSet& o) {
        same_size(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
        return *this;
    }
    // Set difference.
    BitSet& operator-=(const BitSet& o) {
        same_size(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
        return *this;
    }
    friend BitSet operator&(BitSet a, const BitSet& b) { return a &= b; }
    friend BitSet operator|(BitSet a, const BitSet& b) { return a |= b; }
    friend BitSet operator^(BitSet a, const BitSet& b) { return a ^= b; }
    friend BitSet operator-(BitSet a, const BitSet& b) { return a -= b; }

    BitSet complement() const {
        BitSet r(size_);
        for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = ~words_[i];
        r.trim();
        return r;
    }

    // Members in ascending order.
    std::vector<std::size_t> members() const {
        std::vector<std::size_t> out;
        out.reserve(count());
        for_each([&](std::size_t i) { out.push_back(i); });
        return out;
    }

    template <class F>
    void for_each(F&& f) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                const int tz = std::countr_zero(bits);
                f(w * 64 + static_cast<std::size_t>(tz));
                bits &= bits - 1;
            }
        }
    }

    // Smallest member, or size() when empty.
    std::size_t first() const noexcept {
        for (std::size_t w = 0; w < words_.size(); ++w)
            if (words_[w]) return w * 64 + static_cast<std::size_t>(std::countr_zero(words_[w]));
        return size_;
    }

    friend bool operator==(const BitSet& a, const BitSet& b) = default;

    // Total order used for map keys; not the lectic order.
    friend bool operator<(const BitSet& a, const BitSet& b) {
        if (a.size_ != b.size_) return a.size_ < b.size_;
        return a.words_ < b.words_;
    }

    std::size_t hash() const noexcept {
        std::size_t h = size_;
        for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }

private:
    void check(std::size_t i) const {
        if (i >= size_) throw std::out_of_range("BitSet index out of range");
    }
    void same_size(const BitSet& o) const {
        if (o.size_ != size_) throw std::invalid_argument("BitSet size mismatch");
    }
    void trim() {
        if (size_ % 64 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }

    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

// Lectic comparison: a < b iff the smallest element of a XOR b lies in b.
inline bool lectic_less(const BitSet& a, const BitSet& b) {
    const BitSet diff = a ^ b;
    const std::size_t i = diff.first();
    return i < diff.size() && b.test(i);
}

struct BitSetHash {
    std::size_t operator()(const BitSet& b) const noexcept { return b.hash(); }
};

} // namespace latflux

#endif // LATFLUX_BITSET_HPP

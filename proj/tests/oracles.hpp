// Exhaustive reference implementations for the order-dimension code.
// Exponential; meant for posets of at most eight elements.
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <latflux/dimdraw.hpp>

namespace oracles {

using latflux::ElementPair;
using latflux::OrderMatrix;
using latflux::incomparable_pairs;
using latflux::is_partial_order;
using latflux::transitive_closure;

inline void linear_extensions_rec(const OrderMatrix& m, std::vector<std::size_t>& prefix, std::vector<bool>& used,
                           std::vector<std::vector<std::size_t>>& out) {
    const std::size_t n = m.size();
    if (prefix.size() == n) {
        out.push_back(prefix);
        return;
    }
    for (std::size_t e = 0; e < n; ++e) {
        if (used[e]) continue;
        bool ready = true;
        for (std::size_t b = 0; b < n && ready; ++b)
            if (b != e && m[b][e] && !used[b]) ready = false;
        if (!ready) continue;
        used[e] = true;
        prefix.push_back(e);
        linear_extensions_rec(m, prefix, used, out);
        prefix.pop_back();
        used[e] = false;
    }
}

inline std::vector<std::vector<std::size_t>> all_linear_extensions(const OrderMatrix& m) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> prefix;
    std::vector<bool> used(m.size(), false);
    linear_extensions_rec(m, prefix, used, out);
    return out;
}

// bit p set iff pair p (a<b) has a before b
inline std::vector<std::uint64_t> orientation_masks(const OrderMatrix& m, const std::vector<ElementPair>& inc) {
    std::vector<std::uint64_t> masks;
    for (const auto& ext : all_linear_extensions(m)) {
        std::vector<std::size_t> pos(m.size());
        for (std::size_t p = 0; p < ext.size(); ++p) pos[ext[p]] = p;
        std::uint64_t mask = 0;
        for (std::size_t p = 0; p < inc.size(); ++p)
            if (pos[inc[p].first] < pos[inc[p].second]) mask |= std::uint64_t{1} << p;
        masks.push_back(mask);
    }
    return masks;
}

inline bool brute_two_dimensional(const OrderMatrix& m) {
    const auto inc = incomparable_pairs(m);
    const auto masks = orientation_masks(m, inc);
    const std::uint64_t full = inc.empty() ? 0 : (~std::uint64_t{0} >> (64 - inc.size()));
    std::set<std::uint64_t> seen(masks.begin(), masks.end());
    for (auto mk : masks)
        if (seen.count(~mk & full)) return true;
    return false;
}

struct BruteExtension {
    std::size_t k = 0;
    std::set<std::vector<ElementPair>> sets;
};

inline BruteExtension brute_minimal_extension(const OrderMatrix& m) {
    const auto inc = incomparable_pairs(m);
    const auto masks = orientation_masks(m, inc);
    const std::uint64_t full = inc.empty() ? 0 : (~std::uint64_t{0} >> (64 - inc.size()));
    BruteExtension out;
    out.k = inc.size() + 1;
    for (auto a : masks)
        for (auto b : masks) {
            const std::uint64_t agree = ~(a ^ b) & full;
            const auto k = static_cast<std::size_t>(std::popcount(agree));
            if (k > out.k) continue;
            if (k < out.k) {
                out.k = k;
                out.sets.clear();
            }
            std::vector<ElementPair> t;
            for (std::size_t p = 0; p < inc.size(); ++p) {
                if (!(agree >> p & 1)) continue;
                if (a >> p & 1)
                    t.emplace_back(inc[p].first, inc[p].second);
                else
                    t.emplace_back(inc[p].second, inc[p].first);
            }
            std::sort(t.begin(), t.end());
            out.sets.insert(t);
        }
    return out;
}

inline OrderMatrix random_poset(std::mt19937& rng, std::size_t n, double p) {
    std::bernoulli_distribution edge(p);
    OrderMatrix m(n, std::vector<bool>(n, false));
    for (std::size_t a = 0; a < n; ++a) {
        m[a][a] = true;
        for (std::size_t b = a + 1; b < n; ++b) m[a][b] = edge(rng);
    }
    transitive_closure(m);
    // scramble labels so the index order is not a linear extension
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    OrderMatrix q(n, std::vector<bool>(n, false));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) q[perm[a]][perm[b]] = m[a][b];
    return q;
}

inline bool is_lattice(const OrderMatrix& m) {
    const std::size_t n = m.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            std::vector<std::size_t> ub;
            for (std::size_t c = 0; c < n; ++c)
                if (m[a][c] && m[b][c]) ub.push_back(c);
            bool has_least = false;
            for (auto c : ub)
                if (std::all_of(ub.begin(), ub.end(), [&](std::size_t d) { return m[c][d]; })) has_least = true;
            if (!has_least) return false;
        }
    return true;
}

inline std::vector<bool> canonical_form(const OrderMatrix& m) {
    const std::size_t n = m.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<bool> best;
    do {
        std::vector<bool> code;
        code.reserve(n * n);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) code.push_back(m[perm[a]][perm[b]]);
        if (best.empty() || code < best) best = code;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// All lattices with n elements up to isomorphism.
inline std::vector<OrderMatrix> small_lattices(std::size_t n) {
    if (n == 0) return {};
    if (n == 1) return {OrderMatrix{{true}}};
    const std::size_t inner = n - 2;
    std::vector<ElementPair> slots;
    for (std::size_t a = 0; a < inner; ++a)
        for (std::size_t b = a + 1; b < inner; ++b) slots.emplace_back(a, b);
    std::set<std::vector<bool>> seen;
    std::vector<OrderMatrix> out;
    for (std::uint32_t mask = 0; mask < (1u << slots.size()); ++mask) {
        OrderMatrix m(n, std::vector<bool>(n, false));
        for (std::size_t a = 0; a < n; ++a) {
            m[a][a] = true;
            m[0][a] = true;
            m[a][n - 1] = true;
        }
        for (std::size_t s = 0; s < slots.size(); ++s)
            if (mask >> s & 1) m[slots[s].first + 1][slots[s].second + 1] = true;
        if (!is_partial_order(m) || !is_lattice(m)) continue;
        if (seen.insert(canonical_form(m)).second) out.push_back(m);
    }
    return out;
}

inline OrderMatrix with_added(OrderMatrix m, const std::vector<ElementPair>& t) {
    for (const auto& [a, b] : t) m[a][b] = true;
    transitive_closure(m);
    return m;
}

} // namespace oracles

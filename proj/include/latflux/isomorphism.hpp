#ifndef LATFLUX_ISOMORPHISM_HPP
#define LATFLUX_ISOMORPHISM_HPP

#include <algorithm>
#include <cstddef>
#include <optional>
#include <tuple>
#include <vector>

#include "lattice.hpp"

namespace latflux {

namespace detail {

// Invariant per node used to prune candidate images: rank, cover degrees,
// and the sizes of the up- and down-sets.
inline std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, std::size_t>>
node_signatures(const ConceptLattice& lat) {
    const auto r = rank(lat);
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, std::size_t>> sig;
    for (std::size_t i = 0; i < lat.size(); ++i)
        sig.emplace_back(r[i], lat.upper_covers(i).size(), lat.lower_covers(i).size(), lat.up_set(i).count(),
                         lat.down_set(i).count());
    return sig;
}

} // namespace detail

/// An order isomorphism a -> b (image of each concept of a), if one exists.
inline std::optional<std::vector<std::size_t>> find_isomorphism(const ConceptLattice& a, const ConceptLattice& b) {
    const std::size_t n = a.size();
    if (n != b.size() || a.covers().size() != b.covers().size()) return std::nullopt;
    const auto sa = detail::node_signatures(a);
    const auto sb = detail::node_signatures(b);
    {
        auto x = sa, y = sb;
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        if (x != y) return std::nullopt;
    }
    std::vector<std::size_t> map(n, n);
    std::vector<bool> used(n, false);
    // Assign in index order (a linear extension of >=, top first).
    auto consistent = [&](std::size_t u, std::size_t img) {
        for (std::size_t v = 0; v < u; ++v) {
            const std::size_t w = map[v];
            if (a.leq(u, v) != b.leq(img, w) || a.leq(v, u) != b.leq(w, img)) return false;
        }
        return true;
    };
    auto search = [&](auto&& self, std::size_t u) -> bool {
        if (u == n) return true;
        for (std::size_t img = 0; img < n; ++img) {
            if (used[img] || sa[u] != sb[img] || !consistent(u, img)) continue;
            used[img] = true;
            map[u] = img;
            if (self(self, u + 1)) return true;
            used[img] = false;
        }
        map[u] = n;
        return false;
    };
    if (!search(search, 0)) return std::nullopt;
    return map;
}

inline bool isomorphic(const ConceptLattice& a, const ConceptLattice& b) { return find_isomorphism(a, b).has_value(); }

} // namespace latflux

#endif // LATFLUX_ISOMORPHISM_HPP

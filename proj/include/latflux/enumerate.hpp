#ifndef LATFLUX_ENUMERATE_HPP
#define LATFLUX_ENUMERATE_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "context.hpp"
#include "lattice.hpp"

namespace latflux {

/// One lattice of the four-meet-irreducible family.  `family` has bit s set
/// iff the attribute subset s (bit i = attribute i) is an intent.
struct EnumeratedLattice {
    std::string id; // "lattice-001" ...
    std::uint16_t family = 0;
    FormalContext context;
    ConceptLattice lattice;
};

namespace detail {

inline bool intersection_closed(std::uint32_t family) {
    for (unsigned a = 0; a < 16; ++a) {
        if (!(family >> a & 1)) continue;
        for (unsigned b = a + 1; b < 16; ++b)
            if ((family >> b & 1) && !(family >> (a & b) & 1)) return false;
    }
    return true;
}

inline std::uint16_t permute_family(std::uint16_t family, const std::array<unsigned, 4>& perm) {
    std::uint16_t out = 0;
    for (unsigned s = 0; s < 16; ++s) {
        if (!(family >> s & 1)) continue;
        unsigned t = 0;
        for (unsigned i = 0; i < 4; ++i)
            if (s >> i & 1) t |= 1u << perm[i];
        out = static_cast<std::uint16_t>(out | (1u << t));
    }
    return out;
}

inline std::uint16_t canonical_family(std::uint16_t family) {
    std::array<unsigned, 4> perm{0, 1, 2, 3};
    std::uint16_t best = family;
    do {
        best = std::min(best, permute_family(family, perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace detail

/// Context whose intents are exactly the sets of an intersection-closed
/// family on attributes a..d.  Objects are the intents that are not an
/// intersection of strictly larger ones.
inline FormalContext context_of_family(std::uint16_t family) {
    const std::vector<std::string> attrs{"a", "b", "c", "d"};
    std::vector<std::string> objects;
    std::vector<std::vector<bool>> rows;
    for (unsigned s = 0; s < 15; ++s) {
        if (!(family >> s & 1)) continue;
        unsigned meet = 15;
        for (unsigned t = 0; t < 16; ++t)
            if ((family >> t & 1) && t != s && (t & s) == s) meet &= t;
        if (meet == s) continue; // intersection of its proper supersets
        std::vector<bool> row(4);
        for (unsigned i = 0; i < 4; ++i) row[i] = (s >> i & 1) != 0;
        objects.push_back("g" + std::to_string(objects.size() + 1));
        rows.push_back(row);
    }
    return FormalContext(objects, attrs, rows);
}

/// All lattices with exactly four meet-irreducible elements, one per
/// isomorphism class, ordered by (concept count, canonical family mask).
inline std::vector<EnumeratedLattice> enumerate_four_meet_irreducible_lattices() {
    std::vector<std::uint16_t> canon;
    for (std::uint32_t rest = 0; rest < (1u << 15); ++rest) {
        const std::uint32_t family = rest | (1u << 15); // the full set is always an intent
        if (!detail::intersection_closed(family)) continue;
        // attribute closures: smallest intent containing each attribute
        std::array<unsigned, 4> closure{};
        for (unsigned i = 0; i < 4; ++i) {
            closure[i] = 15;
            for (unsigned s = 0; s < 16; ++s)
                if ((family >> s & 1) && (s >> i & 1)) closure[i] &= s;
        }
        bool distinct = true;
        for (unsigned i = 0; i < 4; ++i)
            for (unsigned j = i + 1; j < 4; ++j) distinct &= closure[i] != closure[j];
        if (!distinct) continue;
        // meet-irreducible intents: exactly one maximal proper subset in the family
        unsigned irreducible = 0;
        bool matches = true;
        for (unsigned s = 0; s < 16 && matches; ++s) {
            if (!(family >> s & 1)) continue;
            unsigned lower = 0;
            for (unsigned t = 0; t < 16; ++t) {
                if (!(family >> t & 1) || t == s || (t & s) != t) continue;
                bool maximal = true;
                for (unsigned u = 0; u < 16 && maximal; ++u)
                    if ((family >> u & 1) && u != s && u != t && (u & s) == u && (u & t) == t) maximal = false;
                lower += maximal;
            }
            if (lower == 1) {
                ++irreducible;
                matches = std::find(closure.begin(), closure.end(), s) != closure.end();
            }
        }
        if (!matches || irreducible != 4) continue;
        canon.push_back(detail::canonical_family(static_cast<std::uint16_t>(family)));
    }
    std::sort(canon.begin(), canon.end(), [](std::uint16_t a, std::uint16_t b) {
        const int ca = std::popcount(a), cb = std::popcount(b);
        return ca != cb ? ca < cb : a < b;
    });
    canon.erase(std::unique(canon.begin(), canon.end()), canon.end());

    std::vector<EnumeratedLattice> out;
    out.reserve(canon.size());
    for (std::uint16_t f : canon) {
        EnumeratedLattice e;
        char buf[32];
        std::snprintf(buf, sizeof buf, "lattice-%03zu", out.size() + 1);
        e.id = buf;
        e.family = f;
        e.context = context_of_family(f);
        e.lattice = compute_lattice(e.context);
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace latflux

#endif // LATFLUX_ENUMERATE_HPP

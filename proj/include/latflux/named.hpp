#ifndef LATFLUX_NAMED_HPP
#define LATFLUX_NAMED_HPP

#include <cstddef>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "context.hpp"
#include "lattice.hpp"

namespace latflux {

/// A finite poset given by named elements and its order matrix.
struct FinitePoset {
    std::vector<std::string> names;
    std::vector<std::vector<bool>> leq;

    std::size_t size() const noexcept { return names.size(); }
    std::size_t index(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        throw std::out_of_range("no element " + name);
    }
};

/// Builds a poset from cover chains written one per line, e.g. "bot a b top"
/// meaning bot < a < b < top as consecutive covers.
inline FinitePoset poset_from_chains(const std::string& chains) {
    FinitePoset p;
    std::map<std::string, std::size_t> id;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    auto intern = [&](const std::string& s) {
        auto [it, fresh] = id.emplace(s, p.names.size());
        if (fresh) p.names.push_back(s);
        return it->second;
    };
    std::istringstream lines(chains);
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream words(line);
        std::string w, prev;
        bool first = true;
        while (words >> w) {
            const std::size_t cur = intern(w);
            if (!first) edges.emplace_back(id.at(prev), cur);
            prev = w;
            first = false;
        }
    }
    const std::size_t n = p.names.size();
    p.leq.assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) p.leq[i][i] = true;
    for (auto [a, b] : edges) p.leq[a][b] = true;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (p.leq[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (p.leq[k][j]) p.leq[i][j] = true;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (p.leq[i][j] && p.leq[j][i]) throw InputError("cover chains contain a cycle");
    return p;
}

/// Concept index of each poset element when the poset is a lattice whose
/// standard context was built with standard_context_of_order.
inline std::vector<std::size_t> element_concepts(const FinitePoset& p, const ConceptLattice& lat) {
    const FormalContext& ctx = lat.context();
    std::vector<std::size_t> out(p.size());
    for (std::size_t e = 0; e < p.size(); ++e) {
        BitSet extent(ctx.object_count());
        for (std::size_t g = 0; g < ctx.object_count(); ++g)
            if (p.leq[p.index(ctx.objects()[g].substr(1))][e]) extent.set(g);
        auto idx = lat.index_of_extent(extent);
        if (!idx) throw InputError("poset element " + p.names[e] + " has no concept");
        out[e] = *idx;
    }
    return out;
}

inline FormalContext context_of_poset(const FinitePoset& p) { return standard_context_of_order(p.leq, p.names); }

namespace contexts {

inline FormalContext from_rows(std::vector<std::string> objects, std::vector<std::string> attributes,
                               const std::vector<std::string>& rows) {
    std::vector<std::vector<bool>> inc;
    for (const auto& r : rows) {
        std::vector<bool> row;
        for (char c : r) row.push_back(c == 'x' || c == 'X');
        inc.push_back(std::move(row));
    }
    return FormalContext(std::move(objects), std::move(attributes), inc);
}

inline FormalContext dwarf_planets() {
    return from_rows({"Ceres", "Makemake", "Eris", "Heumea", "Pluto"},
                     {"Non-Spherical", "Atmosphere", "Trans-Neptunian", "One Moon"},
                     {"xx..", "x.xx", ".xxx", "x.x.", ".xx."});
}

/// g_i I m_j iff i != j.
inline FormalContext contranominal(std::size_t n) {
    std::vector<std::string> g, m;
    std::vector<std::vector<bool>> inc(n, std::vector<bool>(n));
    for (std::size_t i = 0; i < n; ++i) {
        g.push_back("g" + std::to_string(i + 1));
        m.push_back("m" + std::to_string(i + 1));
        for (std::size_t j = 0; j < n; ++j) inc[i][j] = i != j;
    }
    return FormalContext(g, m, inc);
}

/// g_i I m_j iff i == j.  Its lattice is M_n (for n >= 3).
inline FormalContext nominal(std::size_t n) {
    std::vector<std::string> g, m;
    std::vector<std::vector<bool>> inc(n, std::vector<bool>(n));
    for (std::size_t i = 0; i < n; ++i) {
        g.push_back("g" + std::to_string(i + 1));
        m.push_back("m" + std::to_string(i + 1));
        inc[i][i] = true;
    }
    return FormalContext(g, m, inc);
}

/// g_i I m_j iff i < j; an (n+1)-element chain.
inline FormalContext chain(std::size_t n) {
    std::vector<std::string> g, m;
    std::vector<std::vector<bool>> inc(n, std::vector<bool>(n));
    for (std::size_t i = 0; i < n; ++i) {
        g.push_back("g" + std::to_string(i + 1));
        m.push_back("m" + std::to_string(i + 1));
        for (std::size_t j = 0; j < n; ++j) inc[i][j] = i < j;
    }
    return FormalContext(g, m, inc);
}

inline FormalContext b2() { return contranominal(2); }
inline FormalContext b3() { return contranominal(3); }
inline FormalContext m3() { return nominal(3); }
inline FormalContext m4() { return nominal(4); }

inline FormalContext n5() { return context_of_poset(poset_from_chains("0 a b 1\n0 c 1")); }

inline const char* fm3_chains() {
    return "bot x u q k g d a top\n"
           "bot z w t p j f c top\n"
           "bot y u\n"
           "y w\n"
           "x v r l h e a\n"
           "z v s o i e c\n"
           "u r m h d\n"
           "w r n h\n"
           "q l g\n"
           "t n j\n"
           "s m i\n"
           "h f b\n"
           "d b top\n";
}

/// The free modular lattice on three generators (28 elements).
inline FinitePoset fm3_poset() { return poset_from_chains(fm3_chains()); }
inline FormalContext fm3() { return context_of_poset(fm3_poset()); }

} // namespace contexts

} // namespace latflux

#endif // LATFLUX_NAMED_HPP

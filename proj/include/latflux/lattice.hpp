#ifndef LATFLUX_LATTICE_HPP
#define LATFLUX_LATTICE_HPP

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bitset.hpp"
#include "context.hpp"
#include "geometry.hpp"
#include "layout.hpp"

namespace latflux {

struct Concept {
    BitSet extent;
    BitSet intent;
    friend bool operator==(const Concept&, const Concept&) = default;
};

using Cover = std::pair<std::size_t, std::size_t>; // (lower, upper)

/// Concept lattice with concepts in lectic order of their intents, so the
/// top concept is index 0 and the bottom concept is the last index.
class ConceptLattice {
public:
    ConceptLattice() = default;

    std::size_t size() const noexcept { return concepts_.size(); }
    const Concept& concept_at(std::size_t i) const { return concepts_.at(i); }
    const std::vector<Concept>& concepts() const noexcept { return concepts_; }
    const FormalContext& context() const noexcept { return context_; }

    bool leq(std::size_t u, std::size_t v) const { return up_[u].test(v); }
    bool less(std::size_t u, std::size_t v) const { return u != v && up_[u].test(v); }
    bool comparable(std::size_t u, std::size_t v) const { return leq(u, v) || leq(v, u); }
    // Concepts >= u, and concepts <= v.
    const BitSet& up_set(std::size_t u) const { return up_.at(u); }
    const BitSet& down_set(std::size_t v) const { return down_.at(v); }

    const std::vector<Cover>& covers() const noexcept { return covers_; }
    const std::vector<std::size_t>& upper_covers(std::size_t u) const { return upper_.at(u); }
    const std::vector<std::size_t>& lower_covers(std::size_t v) const { return lower_.at(v); }
    bool is_cover(std::size_t u, std::size_t v) const {
        const auto& uc = upper_.at(u);
        return std::find(uc.begin(), uc.end(), v) != uc.end();
    }

    const BitSet& meet_irreducible() const noexcept { return meet_irr_; }
    const BitSet& join_irreducible() const noexcept { return join_irr_; }
    std::size_t object_concept(std::size_t g) const { return object_concept_.at(g); }
    std::size_t attribute_concept(std::size_t m) const { return attribute_concept_.at(m); }
    std::size_t top() const noexcept { return 0; }
    std::size_t bottom() const noexcept { return concepts_.empty() ? 0 : concepts_.size() - 1; }

    std::size_t join(std::size_t u, std::size_t v) const {
        const BitSet common = up_[u] & up_[v];
        return extreme(common, true);
    }
    std::size_t meet(std::size_t u, std::size_t v) const {
        const BitSet common = down_[u] & down_[v];
        return extreme(common, false);
    }

    std::optional<std::size_t> index_of_intent(const BitSet& intent) const {
        auto it = by_intent_.find(intent);
        if (it == by_intent_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<std::size_t> index_of_extent(const BitSet& extent) const {
        return index_of_intent(context_.derive_objects(extent));
    }

    friend ConceptLattice compute_lattice(const FormalContext& ctx);

private:
    // Least element of `set` (for joins) or greatest (for meets).
    std::size_t extreme(const BitSet& set, bool least) const {
        std::size_t best = size();
        set.for_each([&](std::size_t c) {
            if (best == size()) {
                best = c;
                return;
            }
            if (least ? leq(c, best) : leq(best, c)) best = c;
        });
        return best;
    }

    FormalContext context_;
    std::vector<Concept> concepts_;
    std::vector<BitSet> up_;
    std::vector<BitSet> down_;
    std::vector<Cover> covers_;
    std::vector<std::vector<std::size_t>> upper_;
    std::vector<std::vector<std::size_t>> lower_;
    BitSet meet_irr_;
    BitSet join_irr_;
    std::vector<std::size_t> object_concept_;
    std::vector<std::size_t> attribute_concept_;
    std::unordered_map<BitSet, std::size_t, BitSetHash> by_intent_;
};

/// All intents of `ctx` in lectic order (NextClosure).
inline std::vector<BitSet> lectic_intents(const FormalContext& ctx) {
    const std::size_t n = ctx.attribute_count();
    std::vector<BitSet> out;
    BitSet current = ctx.close_intent(BitSet(n));
    out.push_back(current);
    const BitSet all = BitSet::full(n);
    while (current != all) {
        bool advanced = false;
        for (std::size_t k = n; k-- > 0;) {
            if (current.test(k)) {
                current.reset(k);
                continue;
            }
            BitSet candidate = current;
            candidate.set(k);
            candidate = ctx.close_intent(candidate);
            // Accept when the closure adds nothing below k.
            const BitSet added = candidate - current;
            if (added.first() >= k) {
                current = std::move(candidate);
                advanced = true;
                break;
            }
        }
        if (!advanced) break;
        out.push_back(current);
    }
    return out;
}

inline ConceptLattice compute_lattice(const FormalContext& ctx) {
    ConceptLattice lat;
    lat.context_ = ctx;
    for (auto& intent : lectic_intents(ctx)) {
        BitSet extent = ctx.derive_attributes(intent);
        lat.concepts_.push_back({std::move(extent), std::move(intent)});
    }
    const std::size_t n = lat.concepts_.size();
    for (std::size_t i = 0; i < n; ++i) lat.by_intent_.emplace(lat.concepts_[i].intent, i);

    lat.up_.assign(n, BitSet(n));
    lat.down_.assign(n, BitSet(n));
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            if (lat.concepts_[u].extent.is_subset_of(lat.concepts_[v].extent)) {
                lat.up_[u].set(v);
                lat.down_[v].set(u);
            }

    lat.upper_.assign(n, {});
    lat.lower_.assign(n, {});
    for (std::size_t u = 0; u < n; ++u) {
        BitSet strictly_above = lat.up_[u];
        strictly_above.reset(u);
        strictly_above.for_each([&](std::size_t v) {
            BitSet between = strictly_above & lat.down_[v];
            between.reset(v);
            if (between.none()) {
                lat.covers_.emplace_back(u, v);
                lat.upper_[u].push_back(v);
                lat.lower_[v].push_back(u);
            }
        });
    }

    lat.meet_irr_ = BitSet(n);
    lat.join_irr_ = BitSet(n);
    for (std::size_t c = 0; c < n; ++c) {
        if (lat.upper_[c].size() == 1) lat.meet_irr_.set(c);
        if (lat.lower_[c].size() == 1) lat.join_irr_.set(c);
    }

    const std::size_t nobj = ctx.object_count();
    const std::size_t natt = ctx.attribute_count();
    lat.object_concept_.resize(nobj);
    for (std::size_t g = 0; g < nobj; ++g) {
        lat.object_concept_[g] = lat.by_intent_.at(ctx.row(g));
    }
    lat.attribute_concept_.resize(natt);
    for (std::size_t m = 0; m < natt; ++m) {
        BitSet single(natt);
        single.set(m);
        lat.attribute_concept_[m] = lat.by_intent_.at(ctx.close_intent(single));
    }
    return lat;
}

/// rank(bottom) = 0, rank(v) = 1 + max rank over lower covers.
inline std::vector<std::size_t> rank(const ConceptLattice& lat) {
    const std::size_t n = lat.size();
    std::vector<std::size_t> r(n, 0);
    // Concepts are in lectic intent order, which is a linear extension of >=;
    // walking backwards visits lower covers first.
    for (std::size_t i = n; i-- > 0;) {
        std::size_t best = 0;
        bool has_lower = false;
        for (auto l : lat.lower_covers(i)) {
            best = std::max(best, r[l] + 1);
            has_lower = true;
        }
        r[i] = has_lower ? best : 0;
    }
    return r;
}

/// Standard context (J(L), M(L), <=) of the concept lattice, keeping the
/// names of the first object / attribute generating each irreducible.
inline FormalContext reduce_context(const FormalContext& ctx) {
    const ConceptLattice lat = compute_lattice(ctx);
    std::vector<std::size_t> objs;
    std::vector<std::string> obj_names;
    std::vector<std::size_t> seen_obj_concepts;
    for (std::size_t g = 0; g < ctx.object_count(); ++g) {
        const std::size_t c = lat.object_concept(g);
        if (!lat.join_irreducible().test(c)) continue;
        if (std::find(seen_obj_concepts.begin(), seen_obj_concepts.end(), c) != seen_obj_concepts.end()) continue;
        seen_obj_concepts.push_back(c);
        objs.push_back(c);
        obj_names.push_back(ctx.objects()[g]);
    }
    std::vector<std::size_t> atts;
    std::vector<std::string> att_names;
    for (std::size_t m = 0; m < ctx.attribute_count(); ++m) {
        const std::size_t c = lat.attribute_concept(m);
        if (!lat.meet_irreducible().test(c)) continue;
        if (std::find(atts.begin(), atts.end(), c) != atts.end()) continue;
        atts.push_back(c);
        att_names.push_back(ctx.attributes()[m]);
    }
    std::vector<std::vector<bool>> inc(objs.size(), std::vector<bool>(atts.size()));
    for (std::size_t i = 0; i < objs.size(); ++i)
        for (std::size_t j = 0; j < atts.size(); ++j) inc[i][j] = lat.leq(objs[i], atts[j]);
    return FormalContext(std::move(obj_names), std::move(att_names), inc);
}

/// Standard context of a finite lattice given by its order matrix
/// (leq[i][j] true iff i <= j). Element names become "j<i>" / "m<i>".
inline FormalContext standard_context_of_order(const std::vector<std::vector<bool>>& leq,
                                               const std::vector<std::string>& names = {}) {
    const std::size_t n = leq.size();
    auto label = [&](std::size_t i) { return names.empty() ? std::to_string(i) : names.at(i); };
    std::vector<std::size_t> lower_count(n, 0), upper_count(n, 0);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) {
            if (u == v || !leq[u][v]) continue;
            bool cover = true;
            for (std::size_t z = 0; z < n && cover; ++z)
                if (z != u && z != v && leq[u][z] && leq[z][v]) cover = false;
            if (cover) {
                ++upper_count[u];
                ++lower_count[v];
            }
        }
    std::vector<std::size_t> J, M;
    for (std::size_t i = 0; i < n; ++i) {
        if (lower_count[i] == 1) J.push_back(i);
        if (upper_count[i] == 1) M.push_back(i);
    }
    std::vector<std::string> gn, mn;
    for (auto j : J) gn.push_back("j" + label(j));
    for (auto m : M) mn.push_back("m" + label(m));
    std::vector<std::vector<bool>> inc(J.size(), std::vector<bool>(M.size()));
    for (std::size_t a = 0; a < J.size(); ++a)
        for (std::size_t b = 0; b < M.size(); ++b) inc[a][b] = leq[J[a]][M[b]];
    return FormalContext(std::move(gn), std::move(mn), inc);
}

struct ValidityReport {
    bool covers_increasing = true;
    bool nodes_separated = true;
    bool edges_clear = true;
    double min_cover_rise = std::numeric_limits<double>::infinity();
    double min_node_distance = std::numeric_limits<double>::infinity();
    double min_conflict_distance = std::numeric_limits<double>::infinity();
    std::vector<Cover> inverted_covers;
    std::vector<std::pair<std::size_t, std::size_t>> clashing_nodes;
    // (node, index into covers())
    std::vector<std::pair<std::size_t, std::size_t>> node_edge_conflicts;

    bool valid() const noexcept { return covers_increasing && nodes_separated && edges_clear; }
};

/// Line-diagram validity: strictly rising covers, pairwise node distance at
/// least min_gap, and every node at least min_gap from each non-incident edge.
inline ValidityReport validate_line_diagram(const ConceptLattice& lat, const Layout& layout, double min_gap = 1e-6) {
    if (layout.size() != lat.size()) throw std::invalid_argument("layout does not cover the lattice");
    ValidityReport rep;
    const std::size_t n = lat.size();
    for (const auto& [lo, hi] : lat.covers()) {
        const double rise = layout.point(hi).y - layout.point(lo).y;
        rep.min_cover_rise = std::min(rep.min_cover_rise, rise);
        if (!(rise > 0.0)) {
            rep.covers_increasing = false;
            rep.inverted_covers.emplace_back(lo, hi);
        }
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const double d = norm(layout.point(a) - layout.point(b));
            rep.min_node_distance = std::min(rep.min_node_distance, d);
            if (!(d >= min_gap)) {
                rep.nodes_separated = false;
                rep.clashing_nodes.emplace_back(a, b);
            }
        }
    const auto& covers = lat.covers();
    for (std::size_t e = 0; e < covers.size(); ++e) {
        const auto [lo, hi] = covers[e];
        const Vec2 w1 = layout.point(lo), w2 = layout.point(hi);
        if (norm(w2 - w1) == 0.0) continue; // already reported as a node clash
        for (std::size_t v = 0; v < n; ++v) {
            if (v == lo || v == hi) continue;
            const double d = conflict_distance(layout.point(v), w1, w2);
            rep.min_conflict_distance = std::min(rep.min_conflict_distance, d);
            if (!(d >= min_gap)) {
                rep.edges_clear = false;
                rep.node_edge_conflicts.emplace_back(v, e);
            }
        }
    }
    return rep;
}

} // namespace latflux

#endif // LATFLUX_LATTICE_HPP

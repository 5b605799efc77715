#ifndef LATFLUX_DIMDRAW_HPP
#define LATFLUX_DIMDRAW_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "additive.hpp"
#include "lattice.hpp"
#include "layout.hpp"
#include "sat.hpp"

namespace latflux {

/// Reflexive order relation given as a matrix: leq[a][b] iff a <= b.
using OrderMatrix = std::vector<std::vector<bool>>;

inline OrderMatrix order_matrix(const ConceptLattice& lat) {
    OrderMatrix m(lat.size(), std::vector<bool>(lat.size(), false));
    for (std::size_t a = 0; a < lat.size(); ++a)
        for (std::size_t b = 0; b < lat.size(); ++b) m[a][b] = lat.leq(a, b);
    return m;
}

/// Reflexive, antisymmetric and transitive.
inline bool is_partial_order(const OrderMatrix& m) {
    const std::size_t n = m.size();
    for (const auto& row : m)
        if (row.size() != n) return false;
    for (std::size_t a = 0; a < n; ++a) {
        if (!m[a][a]) return false;
        for (std::size_t b = 0; b < n; ++b) {
            if (a != b && m[a][b] && m[b][a]) return false;
            if (!m[a][b]) continue;
            for (std::size_t c = 0; c < n; ++c)
                if (m[b][c] && !m[a][c]) return false;
        }
    }
    return true;
}

inline void transitive_closure(OrderMatrix& m) {
    const std::size_t n = m.size();
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t a = 0; a < n; ++a)
            if (m[a][k])
                for (std::size_t b = 0; b < n; ++b)
                    if (m[k][b]) m[a][b] = true;
}

using ElementPair = std::pair<std::size_t, std::size_t>;

/// Unordered incomparable pairs (a < b as indices), ascending.
inline std::vector<ElementPair> incomparable_pairs(const OrderMatrix& m) {
    std::vector<ElementPair> out;
    for (std::size_t a = 0; a < m.size(); ++a)
        for (std::size_t b = a + 1; b < m.size(); ++b)
            if (!m[a][b] && !m[b][a]) out.emplace_back(a, b);
    return out;
}
inline std::vector<ElementPair> incomparable_pairs(const ConceptLattice& lat) {
    return incomparable_pairs(order_matrix(lat));
}

/// A family of linear extensions; extensions[i] lists elements bottom first.
struct Realizer {
    std::vector<std::vector<std::size_t>> extensions;

    std::size_t arity() const noexcept { return extensions.size(); }
    /// position of every element in extension i
    std::vector<std::size_t> ranks(std::size_t i) const {
        const auto& e = extensions.at(i);
        std::vector<std::size_t> r(e.size());
        for (std::size_t p = 0; p < e.size(); ++p) r[e[p]] = p;
        return r;
    }
};

inline bool is_linear_extension(const OrderMatrix& m, const std::vector<std::size_t>& ext) {
    const std::size_t n = m.size();
    if (ext.size() != n) return false;
    std::vector<std::size_t> pos(n, n);
    for (std::size_t p = 0; p < n; ++p) {
        if (ext[p] >= n || pos[ext[p]] != n) return false;
        pos[ext[p]] = p;
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (a != b && m[a][b] && pos[a] > pos[b]) return false;
    return true;
}

/// Order cut out by the extensions: a <= b iff a precedes b in all of them.
inline OrderMatrix intersection_order(const Realizer& r, std::size_t n) {
    OrderMatrix m(n, std::vector<bool>(n, true));
    for (std::size_t i = 0; i < r.arity(); ++i) {
        const auto rk = r.ranks(i);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                if (rk[a] > rk[b]) m[a][b] = false;
    }
    return m;
}

inline bool realizes(const Realizer& r, const OrderMatrix& m) {
    for (const auto& e : r.extensions)
        if (!is_linear_extension(m, e)) return false;
    return r.arity() > 0 && intersection_order(r, m.size()) == m;
}

struct ExtensionResult {
    std::vector<ElementPair> added; // T, ordered pairs (lower, upper), ascending
    Realizer realizer;              // arity 2, realizes (L, <= u T)
    bool minimal = false;           // false when the budget ran out first
    bool budget_exceeded = false;
    std::size_t k() const noexcept { return added.size(); }
};

/// Budget for the satisfiability search, in conflicts per solver call.
/// Negative means unlimited.
struct SearchBudget {
    std::int64_t conflicts = -1;
};

namespace detail {

// Two extensions encoded by one orientation variable per incomparable pair
// and extension: x = "a before b" for a < b as indices.
class TwoExtensionEncoding {
public:
    TwoExtensionEncoding(const OrderMatrix& m, bool independent) : m_(m), pairs_(incomparable_pairs(m)) {
        if (!is_partial_order(m)) throw std::invalid_argument("relation is not a partial order");
        const std::size_t n = m.size();
        index_.assign(n, std::vector<int>(n, -1));
        for (std::size_t p = 0; p < pairs_.size(); ++p) index_[pairs_[p].first][pairs_[p].second] = static_cast<int>(p);
        for (std::size_t p = 0; p < pairs_.size(); ++p) x_.push_back(cnf_.new_var());
        if (independent) {
            for (std::size_t p = 0; p < pairs_.size(); ++p) y_.push_back(cnf_.new_var());
        } else {
            for (int v : x_) y_.push_back(-v);
        }
        transitivity(x_);
        transitivity(y_);
        if (independent) {
            for (std::size_t p = 0; p < pairs_.size(); ++p) {
                const int up = cnf_.new_var(), down = cnf_.new_var();
                // up <-> x & y ; down <-> !x & !y
                cnf_.add({-up, x_[p]});
                cnf_.add({-up, y_[p]});
                cnf_.add({up, -x_[p], -y_[p]});
                cnf_.add({-down, -x_[p]});
                cnf_.add({-down, -y_[p]});
                cnf_.add({down, x_[p], y_[p]});
                t_.push_back(up);
                t_pair_.emplace_back(pairs_[p].first, pairs_[p].second);
                t_.push_back(down);
                t_pair_.emplace_back(pairs_[p].second, pairs_[p].first);
            }
        }
    }

    const sat::Cnf& cnf() const noexcept { return cnf_; }
    sat::Cnf& cnf() noexcept { return cnf_; }
    const std::vector<ElementPair>& pairs() const noexcept { return pairs_; }
    const std::vector<int>& x() const noexcept { return x_; }
    const std::vector<int>& y() const noexcept { return y_; }
    const std::vector<int>& t() const noexcept { return t_; }
    const std::vector<ElementPair>& t_pairs() const noexcept { return t_pair_; }

    Realizer realizer(const std::vector<bool>& model) const {
        return Realizer{{extension(x_, model), extension(y_, model)}};
    }
    std::vector<ElementPair> added(const std::vector<bool>& model) const {
        std::vector<ElementPair> out;
        for (std::size_t i = 0; i < t_.size(); ++i)
            if (model[static_cast<std::size_t>(t_[i])]) out.push_back(t_pair_[i]);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    static constexpr int kTrue = 0x7fffffff;
    static constexpr int kFalse = -0x7fffffff;

    // literal for "a before b" in the extension described by vars
    int lit(const std::vector<int>& vars, std::size_t a, std::size_t b) const {
        if (m_[a][b]) return kTrue;
        if (m_[b][a]) return kFalse;
        return a < b ? vars[static_cast<std::size_t>(index_[a][b])] : -vars[static_cast<std::size_t>(index_[b][a])];
    }

    void transitivity(const std::vector<int>& vars) {
        const std::size_t n = m_.size();
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                if (b == a) continue;
                const int ab = lit(vars, a, b);
                if (ab == kFalse) continue;
                for (std::size_t c = 0; c < n; ++c) {
                    if (c == a || c == b) continue;
                    const int bc = lit(vars, b, c);
                    const int ac = lit(vars, a, c);
                    if (bc == kFalse || ac == kTrue) continue;
                    std::vector<int> clause;
                    if (ab != kTrue) clause.push_back(-ab);
                    if (bc != kTrue) clause.push_back(-bc);
                    if (ac != kFalse) clause.push_back(ac);
                    cnf_.add(std::move(clause));
                }
            }
    }

    std::vector<std::size_t> extension(const std::vector<int>& vars, const std::vector<bool>& model) const {
        const std::size_t n = m_.size();
        std::vector<std::pair<std::size_t, std::size_t>> below(n); // (#predecessors, element)
        for (std::size_t a = 0; a < n; ++a) {
            below[a].second = a;
            for (std::size_t b = 0; b < n; ++b) {
                if (a == b) continue;
                const int l = lit(vars, b, a);
                const bool before = l == kTrue || (l != kFalse && (l > 0 ? model[static_cast<std::size_t>(l)]
                                                                        : !model[static_cast<std::size_t>(-l)]));
                if (before) ++below[a].first;
            }
        }
        std::sort(below.begin(), below.end());
        std::vector<std::size_t> out;
        for (const auto& [count, e] : below) out.push_back(e);
        return out;
    }

    OrderMatrix m_;
    std::vector<ElementPair> pairs_;
    std::vector<std::vector<int>> index_;
    sat::Cnf cnf_;
    std::vector<int> x_, y_, t_;
    std::vector<ElementPair> t_pair_;
};

// Greedy lexicographic minimisation of the selected t literals: walk t in
// order and keep each one that still admits a model.  `model` must satisfy
// the solver's clauses on entry.
inline std::optional<std::vector<bool>> lexicographic_model(sat::Solver& solver, const std::vector<int>& t,
                                                            std::size_t k, std::vector<bool> model,
                                                            std::int64_t budget) {
    std::vector<int> assumptions;
    std::size_t chosen = 0;
    for (int v : t) {
        if (chosen == k) {
            assumptions.push_back(-v);
            continue;
        }
        if (model[static_cast<std::size_t>(v)]) {
            assumptions.push_back(v);
            ++chosen;
            continue;
        }
        assumptions.push_back(v);
        const sat::Result r = solver.solve(assumptions, budget);
        if (r == sat::Result::Unknown) return std::nullopt;
        if (r == sat::Result::Sat) {
            model = solver.model();
            ++chosen;
        } else {
            assumptions.back() = -v;
        }
    }
    const sat::Result r = solver.solve(assumptions, budget);
    if (r != sat::Result::Sat) return std::nullopt;
    return solver.model();
}

} // namespace detail

/// Two linear extensions whose intersection is the order, or nullopt when
/// the order dimension exceeds two.
inline std::optional<Realizer> is_two_dimensional(const OrderMatrix& m) {
    detail::TwoExtensionEncoding enc(m, false);
    sat::Solver solver(enc.cnf());
    if (solver.solve() != sat::Result::Sat) return std::nullopt;
    return enc.realizer(solver.model());
}
inline std::optional<Realizer> is_two_dimensional(const ConceptLattice& lat) {
    return is_two_dimensional(order_matrix(lat));
}

/// CNF whose models are pairs of linear extensions agreeing on at most k
/// incomparable pairs (k < 0: no bound).  For external solvers.
inline sat::Cnf extension_cnf(const OrderMatrix& m, int k) {
    detail::TwoExtensionEncoding enc(m, true);
    sat::Cnf cnf = enc.cnf();
    if (k >= 0) sat::at_most_k(cnf, enc.t(), static_cast<std::size_t>(k));
    return cnf;
}

/// Decodes a model of extension_cnf(m, k) into an extension.
inline ExtensionResult decode_extension_model(const OrderMatrix& m, const std::vector<bool>& model) {
    detail::TwoExtensionEncoding enc(m, true);
    if (model.size() <= static_cast<std::size_t>(enc.cnf().num_vars)) throw std::invalid_argument("model too short");
    ExtensionResult r;
    r.added = enc.added(model);
    r.realizer = enc.realizer(model);
    return r;
}

/// Smallest set T of incomparable pairs such that (L, <= u T) has order
/// dimension at most two; ties broken towards the lexicographically smallest
/// T.  The search starts from any pair of linear extensions and tightens the
/// bound until it becomes unsatisfiable.
inline ExtensionResult minimal_extension(const OrderMatrix& m, SearchBudget budget = {}) {
    detail::TwoExtensionEncoding enc(m, true);
    ExtensionResult best;
    {
        sat::Solver solver(enc.cnf());
        if (solver.solve({}, budget.conflicts) != sat::Result::Sat)
            throw std::runtime_error("no pair of linear extensions found");
        best.added = enc.added(solver.model());
        best.realizer = enc.realizer(solver.model());
    }
    std::vector<bool> best_model;
    std::size_t k = best.added.size();
    for (;;) {
        if (k == 0) {
            best.minimal = true;
            break;
        }
        sat::Cnf cnf = enc.cnf();
        sat::at_most_k(cnf, enc.t(), k - 1);
        sat::Solver solver(cnf);
        const sat::Result r = solver.solve({}, budget.conflicts);
        if (r == sat::Result::Unknown) {
            best.budget_exceeded = true;
            return best;
        }
        if (r == sat::Result::Unsat) {
            best.minimal = true;
            break;
        }
        best.added = enc.added(solver.model());
        best.realizer = enc.realizer(solver.model());
        k = best.added.size();
    }

    // canonical representative of size k
    sat::Cnf cnf = enc.cnf();
    sat::at_most_k(cnf, enc.t(), k);
    sat::Solver solver(cnf);
    if (solver.solve({}, budget.conflicts) != sat::Result::Sat) {
        best.budget_exceeded = true;
        return best;
    }
    const auto lex = detail::lexicographic_model(solver, enc.t(), k, solver.model(), budget.conflicts);
    if (!lex) {
        best.budget_exceeded = true;
        return best;
    }
    best.added = enc.added(*lex);
    best.realizer = enc.realizer(*lex);
    return best;
}
inline ExtensionResult minimal_extension(const ConceptLattice& lat, SearchBudget budget = {}) {
    return minimal_extension(order_matrix(lat), budget);
}

/// All distinct T of size exactly k making the order two-dimensional,
/// ascending.  k must be the minimum; larger k would also list supersets.
inline std::vector<std::vector<ElementPair>> enumerate_minimal_extensions(const OrderMatrix& m, std::size_t k,
                                                                          SearchBudget budget = {}) {
    detail::TwoExtensionEncoding enc(m, true);
    sat::Cnf cnf = enc.cnf();
    sat::at_most_k(cnf, enc.t(), k);
    sat::Solver solver(cnf);
    std::vector<std::vector<ElementPair>> out;
    for (;;) {
        const sat::Result r = solver.solve({}, budget.conflicts);
        if (r == sat::Result::Unknown) throw std::runtime_error("extension enumeration exceeded its budget");
        if (r == sat::Result::Unsat) break;
        std::vector<int> block;
        for (int v : enc.t())
            if (solver.model_value(v)) block.push_back(-v);
        const auto t = enc.added(solver.model());
        if (t.size() == k) out.push_back(t);
        if (block.empty()) break;
        solver.add_clause(block);
    }
    std::sort(out.begin(), out.end());
    return out;
}
inline std::vector<std::vector<ElementPair>> enumerate_minimal_extensions(const ConceptLattice& lat, std::size_t k,
                                                                          SearchBudget budget = {}) {
    return enumerate_minimal_extensions(order_matrix(lat), k, budget);
}

/// Number of ordered pairs of linear extensions (L1, L2) whose common
/// relations add exactly k pairs.  Each T usually comes with two of them.
inline std::size_t count_realizer_models(const OrderMatrix& m, std::size_t k, SearchBudget budget = {}) {
    detail::TwoExtensionEncoding enc(m, true);
    sat::Cnf cnf = enc.cnf();
    sat::at_most_k(cnf, enc.t(), k);
    sat::Solver solver(cnf);
    std::size_t count = 0;
    for (;;) {
        const sat::Result r = solver.solve({}, budget.conflicts);
        if (r == sat::Result::Unknown) throw std::runtime_error("realizer enumeration exceeded its budget");
        if (r == sat::Result::Unsat) break;
        if (enc.added(solver.model()).size() == k) ++count;
        std::vector<int> block;
        for (int v : enc.x()) block.push_back(solver.model_value(v) ? -v : v);
        for (int v : enc.y()) block.push_back(solver.model_value(v) ? -v : v);
        if (block.empty()) break;
        solver.add_clause(block);
    }
    return count;
}

/// Grid coordinates: each node sits at its ranks in the two extensions.
inline Layout realizer_embed(std::size_t n, const Realizer& r) {
    if (r.arity() != 2) throw std::invalid_argument("realizer embedding needs exactly two extensions");
    if (r.extensions[0].size() != n || r.extensions[1].size() != n)
        throw std::invalid_argument("realizer size does not match the lattice");
    const auto r1 = r.ranks(0), r2 = r.ranks(1);
    Layout out(n, 2);
    for (std::size_t c = 0; c < n; ++c) out.set(c, {static_cast<double>(r1[c]), static_cast<double>(r2[c])});
    return out;
}
// Concept indices run from the top, extensions from the bottom.
inline Layout realizer_embed(const ConceptLattice& lat, const Realizer& r) { return realizer_embed(lat.size(), r); }

/// Turns the grid 45 degrees so the diagonal becomes vertical, then
/// stretches x by sqrt(2) and squeezes y by sqrt(1/2).
inline Layout rotate_stretch(const Layout& layout) {
    Layout out(layout.size(), 2);
    const double s = std::sqrt(2.0);
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const Vec2 p = layout.point(i);
        out.set(i, {s * (p.x - p.y), (p.x + p.y) / s});
    }
    return out;
}

struct RealizerAdditiveReport {
    Layout embedded;  // rotated grid layout
    Layout projected; // nearest additive layout (up to translation)
    double residual = 0.0;
    double max_deviation = 0.0;
    bool additive = false;
};

/// Embeds the realizer and measures how far the result is from the
/// additive subspace of `basis`.
inline RealizerAdditiveReport check_realizer_additive_conflict(const ConceptLattice& lat, const AdditiveBasis& basis,
                                                               const ExtensionResult& ext, double tol = 1e-9) {
    RealizerAdditiveReport rep;
    rep.embedded = rotate_stretch(realizer_embed(lat, ext.realizer));
    rep.projected = project_additive_translated(basis, rep.embedded);
    const AdditivityReport a = is_additive(basis, rep.embedded, tol);
    rep.residual = a.residual;
    rep.max_deviation = a.max_deviation;
    rep.additive = a.additive;
    return rep;
}

} // namespace latflux

#endif // LATFLUX_DIMDRAW_HPP

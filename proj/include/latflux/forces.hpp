#ifndef LATFLUX_FORCES_HPP
#define LATFLUX_FORCES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "additive.hpp"
#include "geometry.hpp"
#include "lattice.hpp"
#include "layout.hpp"

namespace latflux {

enum class ForceMode { AttributeAdditive, DoublyAdditive };

inline const char* to_string(ForceMode m) {
    return m == ForceMode::AttributeAdditive ? "attribute" : "doubly";
}

struct ForceConfig {
    std::size_t max_iterations = 2000;
    double convergence_tol = 1e-4;
    double initial_step = 0.05;
    double w_rep = 1.0;
    double w_att = 1.0;
    double w_grav = 1.0;
    double parabola_a = 0.09;
    double parabola_c = 1.75;
    double spacing = 1.8;
    double delta = 0.1;
    double jitter = 1e-3;
    unsigned seed = 1;

    void validate() const {
        auto positive = [](double v, const char* what) {
            if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
        };
        if (max_iterations == 0) throw std::invalid_argument("max_iterations must be positive");
        positive(convergence_tol, "convergence_tol");
        positive(initial_step, "initial_step");
        positive(w_rep, "w_rep");
        positive(w_att, "w_att");
        positive(w_grav, "w_grav");
        positive(parabola_a, "parabola_a");
        positive(parabola_c, "parabola_c");
        positive(spacing, "spacing");
        if (!(delta >= 0.0)) throw std::invalid_argument("delta must be non-negative");
    }
};

/// Raised when a node sits exactly on a non-incident edge.
struct SingularConfiguration : std::runtime_error {
    std::size_t node;
    std::size_t edge; // index into ConceptLattice::covers()
    SingularConfiguration(std::size_t n, std::size_t e)
        : std::runtime_error("node " + std::to_string(n) + " lies on cover edge " + std::to_string(e)), node(n),
          edge(e) {}
};

inline bool is_variable(const Element& e, ForceMode mode) {
    return e.is_object ? mode == ForceMode::DoublyAdditive : true;
}

/// The concept an element generates: gamma(g) or mu(m).
inline std::size_t element_concept(const ConceptLattice& lat, const Element& e) {
    return e.is_object ? lat.object_concept(e.index) : lat.attribute_concept(e.index);
}

struct SupInf {
    double value = 0.0;
    bool clamped = false;
};

/// Structural distance between two elements; zero for comparable concepts.
inline SupInf sup_inf_distance(const ConceptLattice& lat, const Element& ei, const Element& ej) {
    const std::size_t ci = element_concept(lat, ei);
    const std::size_t cj = element_concept(lat, ej);
    if (lat.comparable(ci, cj)) return {};
    const FormalContext& ctx = lat.context();
    const Concept& a = lat.concept_at(ci);
    const Concept& b = lat.concept_at(cj);
    auto sz = [](const BitSet& s) { return static_cast<double>(s.count()); };
    if (ei.is_object && ej.is_object)
        return {sz(ctx.close_extent(a.extent | b.extent)) - sz(a.extent & b.extent) - 1.0, false};
    if (!ei.is_object && !ej.is_object)
        return {sz(ctx.close_intent(a.intent | b.intent)) - sz(a.intent & b.intent) - 1.0, false};
    const double d_meet = sz(a.extent & b.extent) - sz(a.intent & b.intent);
    const double d_join = sz(ctx.close_extent(a.extent | b.extent)) - sz(ctx.close_intent(a.intent | b.intent));
    const double v = d_meet - d_join - 1.0;
    if (v < 0.0) return {0.0, true};
    return {v, false};
}

namespace detail {

struct MinimizeResult {
    Eigen::VectorXd x;
    double energy = 0.0;
    double max_force = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Evaluates f and its gradient; returns false for singular points.
using Objective = std::function<bool(const Eigen::VectorXd&, double&, Eigen::VectorXd&)>;
using StepCallback = std::function<void(std::size_t, const Eigen::VectorXd&, double, double)>;

/// Polak-Ribiere conjugate gradient with Armijo backtracking.  The first
/// trial step moves the largest coordinate by `initial_step`; later trials
/// start from twice the last accepted displacement, so the step length does
/// not depend on the force scale.  Restarts every `restart` iterations
/// and whenever the direction stops descending.
inline MinimizeResult conjugate_gradient(const Objective& f, Eigen::VectorXd x, std::size_t max_iterations,
                                         double tol, double initial_step, std::size_t restart,
                                         const StepCallback& on_step = {}) {
    MinimizeResult r;
    double fx = 0.0;
    Eigen::VectorXd g(x.size());
    if (!f(x, fx, g)) {
        r.x = std::move(x);
        r.energy = std::numeric_limits<double>::infinity();
        return r;
    }
    r.max_force = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    if (r.max_force < tol) {
        r.x = std::move(x);
        r.energy = fx;
        r.converged = true;
        return r;
    }
    Eigen::VectorXd d = -g;
    double move = -1.0;
    std::size_t since_restart = 0;
    int failures = 0;
    Eigen::VectorXd xn(x.size()), gn(x.size());
    while (r.iterations < max_iterations) {
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            d = -g;
            slope = g.dot(d);
            since_restart = 0;
        }
        const double dmax = d.cwiseAbs().maxCoeff();
        if (!(dmax > 0.0)) break;
        // trial displacement of the largest coordinate: twice the last accepted one
        double step = (move > 0.0 ? 2.0 * move : initial_step) / dmax;
        step = std::min(step, 100.0 * initial_step / dmax);
        bool accepted = false;
        double fn = 0.0;
        for (int tries = 0; tries < 60; ++tries) {
            xn = x + step * d;
            if (f(xn, fn, gn) && std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // retry along steepest descent from a fresh step size
            if (++failures >= 20) break;
            d = -g;
            since_restart = 0;
            move = -1.0;
            continue;
        }
        failures = 0;
        move = step * dmax;
        ++r.iterations;
        const double beta_num = gn.dot(gn - g);
        const double beta_den = g.dot(g);
        x.swap(xn);
        const double fold = fx;
        fx = fn;
        g = gn;
        r.max_force = g.cwiseAbs().maxCoeff();
        if (on_step) on_step(r.iterations, x, fx, r.max_force);
        if (r.max_force < tol) {
            r.converged = true;
            break;
        }
        // stalled in floating point: nothing left to gain
        if (std::abs(fold - fx) <= 1e-15 * std::max(1.0, std::abs(fx)) && step * dmax < 1e-14) break;
        ++since_restart;
        double beta = beta_den > 0.0 ? std::max(0.0, beta_num / beta_den) : 0.0;
        if (since_restart >= restart) {
            beta = 0.0;
            since_restart = 0;
        }
        d = -g + beta * d;
    }
    r.x = std::move(x);
    r.energy = fx;
    return r;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Planarity enhancer

struct EnhancerResult {
    std::vector<std::size_t> order;   // indices into the variable-element list
    std::vector<std::size_t> elements; // basis element index of each variable
    std::vector<Vec2> points;
    double initial_energy = 0.0;
    double final_energy = 0.0;
    bool clamped = false;
};

/// Sum over unordered pairs of (|n_i - n_j| - d_ij)^2 and its gradient.
inline double sup_inf_energy(const std::vector<Vec2>& pts, const std::vector<std::vector<double>>& d,
                             std::vector<Vec2>* grad = nullptr) {
    double e = 0.0;
    if (grad) grad->assign(pts.size(), Vec2{});
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const Vec2 diff = pts[i] - pts[j];
            const double len = norm(diff);
            const double dev = len - d[i][j];
            e += dev * dev;
            if (grad && len > 0.0) {
                const Vec2 gi = (2.0 * dev / len) * diff;
                (*grad)[i] += gi;
                (*grad)[j] -= gi;
            }
        }
    return e;
}

/// Relaxes the Sup-Inf graph from the unit circle and reads a linear order
/// off the axis through the two most distant points.
inline EnhancerResult planarity_enhancer(const ConceptLattice& lat, const AdditiveBasis& basis, ForceMode mode,
                                         const ForceConfig& cfg) {
    EnhancerResult res;
    for (std::size_t j = 0; j < basis.element_count(); ++j)
        if (is_variable(basis.elements[j], mode)) res.elements.push_back(j);
    const std::size_t k = res.elements.size();
    if (k == 0) return res;
    std::vector<std::vector<double>> d(k, std::vector<double>(k, 0.0));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            const auto si = sup_inf_distance(lat, basis.elements[res.elements[a]], basis.elements[res.elements[b]]);
            d[a][b] = d[b][a] = si.value;
            res.clamped = res.clamped || si.clamped;
        }
    Eigen::VectorXd x(2 * k);
    for (std::size_t i = 0; i < k; ++i) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(k);
        x(2 * i) = std::cos(phi);
        x(2 * i + 1) = std::sin(phi);
    }
    auto unpack = [k](const Eigen::VectorXd& v) {
        std::vector<Vec2> p(k);
        for (std::size_t i = 0; i < k; ++i) p[i] = {v(2 * i), v(2 * i + 1)};
        return p;
    };
    std::mt19937 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    // separate coincident points deterministically
    auto separate = [&](Eigen::VectorXd& v) {
        bool moved = false;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j)
                if (std::hypot(v(2 * i) - v(2 * j), v(2 * i + 1) - v(2 * j + 1)) < 1e-12) {
                    v(2 * j) += 1e-6 * unit(rng);
                    v(2 * j + 1) += 1e-6 * unit(rng);
                    moved = true;
                }
        return moved;
    };
    separate(x);
    res.initial_energy = sup_inf_energy(unpack(x), d);
    detail::Objective f = [&](const Eigen::VectorXd& v, double& e, Eigen::VectorXd& g) {
        std::vector<Vec2> grad;
        const auto p = unpack(v);
        e = sup_inf_energy(p, d, &grad);
        g.resize(v.size());
        for (std::size_t i = 0; i < k; ++i) {
            g(2 * i) = grad[i].x;
            g(2 * i + 1) = grad[i].y;
        }
        return std::isfinite(e);
    };
    auto run = detail::conjugate_gradient(f, x, cfg.max_iterations, cfg.convergence_tol, cfg.initial_step, 2 * k);
    if (separate(run.x)) run = detail::conjugate_gradient(f, run.x, cfg.max_iterations, cfg.convergence_tol,
                                                          cfg.initial_step, 2 * k);
    res.points = unpack(run.x);
    res.final_energy = sup_inf_energy(res.points, d);

    std::size_t p = 0, q = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const double dist = norm(res.points[i] - res.points[j]);
            if (dist > best + 1e-12) {
                best = dist;
                p = i;
                q = j;
            }
        }
    const Vec2 axis = k > 1 ? res.points[q] - res.points[p] : Vec2{1, 0};
    std::vector<double> key(k);
    for (std::size_t i = 0; i < k; ++i) key[i] = dot(res.points[i] - res.points[p], axis);
    res.order.resize(k);
    for (std::size_t i = 0; i < k; ++i) res.order[i] = i;
    std::stable_sort(res.order.begin(), res.order.end(), [&](std::size_t a, std::size_t b) {
        return key[a] < key[b] - 1e-12;
    });
    return res;
}

// ---------------------------------------------------------------------------
// Initialization

/// n_e = MOD(e) * VEC(e): objects point up, attributes point down.
inline ElementVectors oriented(const AdditiveBasis& basis, const ElementVectors& v) {
    ElementVectors out = v;
    for (std::size_t j = 0; j < basis.element_count(); ++j)
        out.vectors[j] = static_cast<double>(basis.elements[j].mode()) * v.vectors[j];
    return out;
}

/// Parabola placement of the extremal elements followed by chain
/// decomposition for the rest.  `order` ranks the variable elements as
/// returned by planarity_enhancer; `reverse_attributes` walks the attribute
/// parabola in the opposite direction.  Returned vectors use the REP convention
/// (use oriented() for the drawing convention).
inline ElementVectors initialize_vectors(const ConceptLattice& lat, const AdditiveBasis& basis,
                                         const EnhancerResult& order, ForceMode mode, const ForceConfig& cfg,
                                         bool reverse_attributes = false) {
    const std::size_t s = basis.element_count();
    std::vector<Vec2> n(s);
    std::vector<std::size_t> position(s, s);
    for (std::size_t r = 0; r < order.order.size(); ++r) position[order.elements[order.order[r]]] = r;

    auto place = [&](bool objects) {
        const double sign = objects ? 1.0 : -1.0;
        std::vector<std::size_t> members;
        for (std::size_t j = 0; j < s; ++j)
            if (basis.elements[j].is_object == objects && is_variable(basis.elements[j], mode)) members.push_back(j);
        // "beyond" means strictly above for attributes, strictly below for objects
        auto beyond = [&](std::size_t a, std::size_t b) {
            const std::size_t ca = element_concept(lat, basis.elements[a]);
            const std::size_t cb = element_concept(lat, basis.elements[b]);
            return objects ? lat.less(cb, ca) : lat.less(ca, cb);
        };
        std::vector<std::size_t> extremal, inner;
        for (auto j : members) {
            bool has = false;
            for (auto i : members)
                if (beyond(j, i)) has = true;
            (has ? inner : extremal).push_back(j);
        }
        std::stable_sort(extremal.begin(), extremal.end(),
                         [&](std::size_t a, std::size_t b) { return position[a] < position[b]; });
        if (!objects && reverse_attributes) std::reverse(extremal.begin(), extremal.end());
        const double half = (static_cast<double>(extremal.size()) - 1.0) / 2.0;
        for (std::size_t r = 0; r < extremal.size(); ++r) {
            const double x = (static_cast<double>(r) - half) * cfg.spacing;
            n[extremal[r]] = {x, sign * (cfg.parabola_a * x * x + cfg.parabola_c)};
        }
        // nearer elements first: fewer elements beyond them
        std::vector<std::vector<std::size_t>> beyond_set(s);
        for (auto j : inner)
            for (auto i : members)
                if (beyond(j, i)) beyond_set[j].push_back(i);
        std::stable_sort(inner.begin(), inner.end(), [&](std::size_t a, std::size_t b) {
            if (beyond_set[a].size() != beyond_set[b].size()) return beyond_set[a].size() < beyond_set[b].size();
            return position[a] < position[b];
        });
        for (auto j : inner) {
            Vec2 mean{};
            for (auto i : beyond_set[j]) mean += n[i];
            n[j] = (1.0 / static_cast<double>(beyond_set[j].size())) * mean;
        }
        // symmetric shift for elements sharing their neighbour set
        std::vector<bool> done(s, false);
        for (auto j : inner) {
            if (done[j]) continue;
            std::vector<std::size_t> group;
            for (auto i : inner)
                if (!done[i] && beyond_set[i] == beyond_set[j]) group.push_back(i);
            for (auto i : group) done[i] = true;
            if (group.size() < 2) continue;
            Vec2 dir = perp(n[j]);
            const double len = norm(dir);
            dir = len > 0.0 ? (1.0 / len) * dir : Vec2{1, 0};
            const double mid = (static_cast<double>(group.size()) - 1.0) / 2.0;
            for (std::size_t r = 0; r < group.size(); ++r)
                n[group[r]] += ((static_cast<double>(r) - mid) * cfg.delta) * dir;
        }
    };
    place(false);
    if (mode == ForceMode::DoublyAdditive) place(true);

    ElementVectors v;
    v.vectors.resize(s);
    for (std::size_t j = 0; j < s; ++j) v.vectors[j] = static_cast<double>(basis.elements[j].mode()) * n[j];
    return v;
}

// ---------------------------------------------------------------------------
// Energies and forces

struct EnergyTerms {
    double rep = 0.0;
    double att = 0.0;
    double grav = 0.0;
    double total(const ForceConfig& cfg) const { return cfg.w_rep * rep + cfg.w_att * att + cfg.w_grav * grav; }
};

/// Sum of 1/d(w, f) over all (node, non-incident cover) pairs.  When `grad`
/// is given, it receives dE/dposition per concept.
inline double repulsive_energy(const ConceptLattice& lat, const Layout& layout, std::vector<Vec2>* grad = nullptr) {
    const auto& covers = lat.covers();
    if (grad) grad->assign(layout.size(), Vec2{});
    double e = 0.0;
    for (std::size_t k = 0; k < covers.size(); ++k) {
        const auto [lo, hi] = covers[k];
        const Vec2 w1 = layout.point(lo), w2 = layout.point(hi);
        const Vec2 f = w2 - w1;
        const double len = norm(f);
        for (std::size_t v = 0; v < layout.size(); ++v) {
            if (v == lo || v == hi) continue;
            const Vec2 w = layout.point(v);
            if (len == 0.0) throw SingularConfiguration(v, k);
            Vec2 gw{}, g1{}, g2{};
            double d = 0.0;
            switch (conflict_case(w, w1, w2)) {
            case ConflictCase::BelowLower: {
                d = norm(w1 - w);
                if (d == 0.0) throw SingularConfiguration(v, k);
                gw = (1.0 / d) * (w - w1);
                g1 = -gw;
                break;
            }
            case ConflictCase::AboveUpper: {
                d = norm(w2 - w);
                if (d == 0.0) throw SingularConfiguration(v, k);
                gw = (1.0 / d) * (w - w2);
                g2 = -gw;
                break;
            }
            case ConflictCase::Perpendicular: {
                const double c = cross(w1 - w, w2 - w);
                d = std::abs(c) / len;
                if (d == 0.0) throw SingularConfiguration(v, k);
                const double sgn = c > 0.0 ? 1.0 : -1.0;
                const Vec2 dc_w{-f.y, f.x};
                const Vec2 dc_w1{w2.y - w.y, w.x - w2.x};
                const Vec2 dc_w2{w.y - w1.y, w1.x - w.x};
                const Vec2 dl_w2 = (1.0 / len) * f;
                gw = (sgn / len) * dc_w;
                g1 = (sgn / len) * dc_w1 + (d / len) * dl_w2;
                g2 = (sgn / len) * dc_w2 - (d / len) * dl_w2;
                break;
            }
            }
            e += 1.0 / d;
            if (grad) {
                const double s = -1.0 / (d * d);
                (*grad)[v] += s * gw;
                (*grad)[lo] += s * g1;
                (*grad)[hi] += s * g2;
            }
        }
    }
    return e;
}

/// Sum of squared cover-edge lengths.
inline double attractive_energy(const ConceptLattice& lat, const Layout& layout, std::vector<Vec2>* grad = nullptr) {
    if (grad) grad->assign(layout.size(), Vec2{});
    double e = 0.0;
    for (const auto& [lo, hi] : lat.covers()) {
        const Vec2 f = layout.point(hi) - layout.point(lo);
        e += dot(f, f);
        if (grad) {
            (*grad)[hi] += 2.0 * f;
            (*grad)[lo] -= 2.0 * f;
        }
    }
    return e;
}

/// Safe-zone half angle for an element.
inline double safe_zone_angle(const FormalContext& ctx, const Element& e) {
    const double count = static_cast<double>(e.is_object ? ctx.object_count() : ctx.attribute_count());
    return std::numbers::pi / (count + 1.0);
}

/// Gravitational energy of one element vector (REP convention, so the safe
/// zone is the upper sector [phi0, pi - phi0] for every element).
inline double gravity_term(Vec2 v, double phi0, Vec2* grad = nullptr) {
    if (grad) *grad = {};
    if (!(v.y > 0.0)) {
        if (grad) *grad = {0.0, 2.0 * v.y};
        return v.y * v.y;
    }
    const double phi = std::atan2(v.y, v.x);
    double l = 0.0;
    if (phi < phi0)
        l = 1.0;
    else if (phi > std::numbers::pi - phi0)
        l = -1.0;
    if (l == 0.0) return 0.0;
    const double s0 = std::sin(phi0);
    const double c0 = std::cos(phi0);
    const double constant = l > 0 ? -phi0 - s0 * c0 : std::numbers::pi - phi0 - s0 * c0;
    const double sp = std::sin(phi);
    const double e = l * (phi + s0 * s0 * std::cos(phi) / sp) + constant;
    if (grad) {
        const double de_dphi = l * (sp * sp - s0 * s0) / (sp * sp);
        const double r2 = dot(v, v);
        *grad = (de_dphi / r2) * Vec2{-v.y, v.x};
    }
    return e;
}

inline double gravitational_energy(const AdditiveBasis& basis, const FormalContext& ctx, const ElementVectors& vecs,
                                   ForceMode mode, std::vector<Vec2>* grad = nullptr) {
    if (grad) grad->assign(basis.element_count(), Vec2{});
    double e = 0.0;
    for (std::size_t j = 0; j < basis.element_count(); ++j) {
        const Element& el = basis.elements[j];
        if (!is_variable(el, mode)) continue;
        Vec2 g{};
        e += gravity_term(vecs.vectors[j], safe_zone_angle(ctx, el), grad ? &g : nullptr);
        if (grad) (*grad)[j] = g;
    }
    return e;
}

/// Chains per-concept position gradients down to the element vectors.
inline std::vector<Vec2> to_element_gradient(const AdditiveBasis& basis, const std::vector<Vec2>& by_concept) {
    std::vector<Vec2> out(basis.element_count());
    for (std::size_t c = 0; c < basis.concept_count(); ++c)
        for (std::size_t j = 0; j < basis.element_count(); ++j)
            if (basis.contains(c, j)) out[j] += by_concept[c];
    return out;
}

struct ForceEvaluation {
    EnergyTerms energy;
    std::vector<Vec2> force;     // total force per element (zero for fixed elements)
    std::vector<Vec2> rep_force;
    std::vector<Vec2> att_force;
    std::vector<Vec2> grav_force;
    double max_force = 0.0;
};

inline ForceEvaluation evaluate_forces(const ConceptLattice& lat, const AdditiveBasis& basis,
                                       const ElementVectors& vecs, ForceMode mode, const ForceConfig& cfg) {
    const Layout layout = positions_from_vectors(basis, vecs);
    ForceEvaluation ev;
    std::vector<Vec2> grep, gatt, ggrav;
    ev.energy.rep = repulsive_energy(lat, layout, &grep);
    ev.energy.att = attractive_energy(lat, layout, &gatt);
    ev.energy.grav = gravitational_energy(basis, lat.context(), vecs, mode, &ggrav);
    const auto erep = to_element_gradient(basis, grep);
    const auto eatt = to_element_gradient(basis, gatt);
    const std::size_t s = basis.element_count();
    ev.force.assign(s, Vec2{});
    ev.rep_force.assign(s, Vec2{});
    ev.att_force.assign(s, Vec2{});
    ev.grav_force.assign(s, Vec2{});
    for (std::size_t j = 0; j < s; ++j) {
        if (!is_variable(basis.elements[j], mode)) continue;
        ev.rep_force[j] = -erep[j];
        ev.att_force[j] = -eatt[j];
        ev.grav_force[j] = -ggrav[j];
        ev.force[j] = cfg.w_rep * ev.rep_force[j] + cfg.w_att * ev.att_force[j] + cfg.w_grav * ev.grav_force[j];
        ev.max_force = std::max({ev.max_force, std::abs(ev.force[j].x), std::abs(ev.force[j].y)});
    }
    return ev;
}

/// Doubly mode: the enhancer order fixes the object and attribute sequences
/// only up to a common reversal, and the two parabolas can end up mirrored
/// so that atoms cancel out.  Tries both attribute directions and keeps the
/// start with the lower total energy (singular starts lose).
inline ElementVectors initialize_vectors_oriented(const ConceptLattice& lat, const AdditiveBasis& basis,
                                                 const EnhancerResult& order, ForceMode mode,
                                                 const ForceConfig& cfg) {
    ElementVectors best = initialize_vectors(lat, basis, order, mode, cfg, false);
    if (mode != ForceMode::DoublyAdditive) return best;
    auto energy = [&](const ElementVectors& v) {
        try {
            return evaluate_forces(lat, basis, v, mode, cfg).energy.total(cfg);
        } catch (const SingularConfiguration&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    ElementVectors other = initialize_vectors(lat, basis, order, mode, cfg, true);
    if (energy(other) < energy(best)) best = std::move(other);
    return best;
}

// ---------------------------------------------------------------------------
// Optimizer

struct TraceRow {
    std::size_t iteration = 0;
    EnergyTerms energy;
    double max_force = 0.0;
};

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
    os << "iteration,E_rep,E_att,E_grav,max_force\n";
    os.precision(12);
    for (const auto& r : trace)
        os << r.iteration << ',' << r.energy.rep << ',' << r.energy.att << ',' << r.energy.grav << ','
           << r.max_force << '\n';
}

struct OptimizeResult {
    ElementVectors vectors;
    Layout layout;
    std::vector<TraceRow> trace;
    std::size_t iterations = 0;
    bool converged = false;
    bool singular = false; // no non-singular state could be reached
};

using ProgressCallback = std::function<void(const TraceRow&)>;

/// Conjugate-gradient descent of the weighted total energy over the
/// variable element vectors.  The origin offset stays fixed.
inline OptimizeResult optimize(const ConceptLattice& lat, const AdditiveBasis& basis, const ElementVectors& start,
                               ForceMode mode, const ForceConfig& cfg, const ProgressCallback& progress = {}) {
    cfg.validate();
    const std::size_t s = basis.element_count();
    if (start.vectors.size() != s) throw std::invalid_argument("vector count does not match the basis");
    for (auto v : start.vectors)
        if (!std::isfinite(v.x) || !std::isfinite(v.y)) throw std::invalid_argument("start vectors must be finite");

    std::vector<std::size_t> vars;
    for (std::size_t j = 0; j < s; ++j)
        if (is_variable(basis.elements[j], mode)) vars.push_back(j);

    ElementVectors current = start;
    for (std::size_t j = 0; j < s; ++j)
        if (!is_variable(basis.elements[j], mode)) current.vectors[j] = {};

    auto pack = [&](const ElementVectors& v) {
        Eigen::VectorXd x(2 * vars.size());
        for (std::size_t k = 0; k < vars.size(); ++k) {
            x(2 * k) = v.vectors[vars[k]].x;
            x(2 * k + 1) = v.vectors[vars[k]].y;
        }
        return x;
    };
    auto unpack = [&](const Eigen::VectorXd& x) {
        ElementVectors v = current;
        for (std::size_t k = 0; k < vars.size(); ++k) v.vectors[vars[k]] = {x(2 * k), x(2 * k + 1)};
        return v;
    };
    auto in_zone_half = [&](const Eigen::VectorXd& x, std::size_t k) { return x(2 * k + 1) > 0.0; };

    Eigen::VectorXd anchor;
    detail::Objective f = [&](const Eigen::VectorXd& x, double& e, Eigen::VectorXd& g) {
        // an element may not jump from the correct into the wrong half-plane
        if (anchor.size() == x.size())
            for (std::size_t k = 0; k < vars.size(); ++k)
                if (in_zone_half(anchor, k) && !in_zone_half(x, k)) return false;
        try {
            const auto ev = evaluate_forces(lat, basis, unpack(x), mode, cfg);
            e = ev.energy.total(cfg);
            g.resize(x.size());
            for (std::size_t k = 0; k < vars.size(); ++k) {
                g(2 * k) = -ev.force[vars[k]].x;
                g(2 * k + 1) = -ev.force[vars[k]].y;
            }
            return std::isfinite(e);
        } catch (const SingularConfiguration&) {
            return false;
        }
    };

    OptimizeResult out;
    Eigen::VectorXd x = pack(current);
    {
        // Nudge singular and nearly singular starts apart with a seeded
        // jitter; "nearly" means a node closer to a non-incident edge than
        // jitter times the diagram size.
        std::mt19937 rng(cfg.seed);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        double e = 0.0;
        Eigen::VectorXd g;
        const Bounds box = bounds(positions_from_vectors(basis, current));
        const double size = std::max({box.width(), box.height(), 1.0});
        auto clear = [&](const Eigen::VectorXd& xs) {
            if (!f(xs, e, g)) return false;
            const auto rep = validate_line_diagram(lat, positions_from_vectors(basis, unpack(xs)), cfg.jitter * size);
            return rep.edges_clear; // the repulsion is singular only at node-edge contact
        };
        int attempts = 0;
        const Eigen::VectorXd base = x;
        while (!clear(x) && attempts < 50) {
            ++attempts;
            const double scale = cfg.jitter * size * static_cast<double>(attempts);
            x = base;
            for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += scale * unit(rng);
        }
        // a start that stays crowded is still usable when it is not singular
        if (attempts == 50 && !f(x, e, g) && f(base, e, g)) x = base;
        if (!f(x, e, g)) {
            out.vectors = current;
            out.layout = positions_from_vectors(basis, current);
            out.singular = true;
            return out;
        }
    }

    auto record = [&](std::size_t it, const Eigen::VectorXd& xs) {
        const auto ev = evaluate_forces(lat, basis, unpack(xs), mode, cfg);
        TraceRow row{it, ev.energy, ev.max_force};
        out.trace.push_back(row);
        if (progress) progress(row);
    };
    record(0, x);
    anchor = x;
    detail::StepCallback on_step = [&](std::size_t it, const Eigen::VectorXd& xs, double, double) {
        anchor = xs;
        record(it, xs);
    };
    const std::size_t restart = std::max<std::size_t>(1, vars.size());
    auto run = detail::conjugate_gradient(f, x, cfg.max_iterations, cfg.convergence_tol, cfg.initial_step, restart,
                                          on_step);
    out.vectors = unpack(run.x);
    out.layout = positions_from_vectors(basis, out.vectors);
    out.iterations = run.iterations;
    out.converged = run.converged;
    return out;
}

} // namespace latflux

#endif // LATFLUX_FORCES_HPP

#ifndef LATFLUX_ADDITIVE_HPP
#define LATFLUX_ADDITIVE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geometry.hpp"
#include "lattice.hpp"
#include "layout.hpp"

namespace latflux {

enum class RepresentationKind { DoublyAdditive, AttributeAdditive, ObjectAdditive, DualAttribute };

inline const char* to_string(RepresentationKind k) {
    switch (k) {
    case RepresentationKind::DoublyAdditive: return "doubly";
    case RepresentationKind::AttributeAdditive: return "attribute";
    case RepresentationKind::ObjectAdditive: return "object";
    case RepresentationKind::DualAttribute: return "dual-attribute";
    }
    return "?";
}

/// One member of the representation set S.  Objects and attributes live in
/// separate namespaces, so equal names never collide.
struct Element {
    bool is_object = false;
    std::size_t index = 0;
    std::string name;

    std::string key() const { return (is_object ? "object:" : "attribute:") + name; }
    int mode() const noexcept { return is_object ? +1 : -1; }
    friend bool operator==(const Element&, const Element&) = default;
};

inline constexpr double kRankTolerance = 1e-10;

struct AdditiveBasis {
    RepresentationKind kind = RepresentationKind::DoublyAdditive;
    Eigen::MatrixXd srm;      // concepts x |S|, entries 0/1
    Eigen::MatrixXd ortho;    // concepts x rank, orthonormal columns spanning im(srm)
    Eigen::MatrixXd ortho_t;  // ortho extended by the constant direction (translations)
    std::vector<Element> elements;

    std::size_t concept_count() const noexcept { return static_cast<std::size_t>(srm.rows()); }
    std::size_t element_count() const noexcept { return elements.size(); }
    std::size_t rank() const noexcept { return static_cast<std::size_t>(ortho.cols()); }
    bool contains(std::size_t concept_index, std::size_t element) const {
        return srm(static_cast<Eigen::Index>(concept_index), static_cast<Eigen::Index>(element)) != 0.0;
    }
};

/// Per-element plane vectors in the order of AdditiveBasis::elements, plus a
/// common offset added to every concept position.
struct ElementVectors {
    std::vector<Vec2> vectors;
    Vec2 origin{};
    friend bool operator==(const ElementVectors&, const ElementVectors&) = default;
};

namespace detail {

// Modified Gram-Schmidt with one re-orthogonalization pass; columns whose
// residual drops below the rank tolerance are skipped.
inline Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& a, const Eigen::MatrixXd& seed = {}) {
    std::vector<Eigen::VectorXd> q;
    for (Eigen::Index j = 0; j < seed.cols(); ++j) q.emplace_back(seed.col(j));
    const std::size_t seeded = q.size();
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        Eigen::VectorXd v = a.col(j);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : q) v -= u.dot(v) * u;
        const double len = v.norm();
        if (len < kRankTolerance) continue;
        q.emplace_back(v / len);
    }
    Eigen::MatrixXd out(a.rows(), static_cast<Eigen::Index>(q.size() - seeded));
    for (std::size_t k = seeded; k < q.size(); ++k) out.col(static_cast<Eigen::Index>(k - seeded)) = q[k];
    return out;
}

inline Eigen::MatrixXd to_matrix(const Layout& layout) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(layout.size()), static_cast<Eigen::Index>(layout.dimension()));
    for (std::size_t i = 0; i < layout.size(); ++i)
        for (std::size_t a = 0; a < layout.dimension(); ++a)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = layout.at(i, a);
    return m;
}

inline Layout from_matrix(const Eigen::MatrixXd& m) {
    Layout out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index a = 0; a < m.cols(); ++a)
            out.at(static_cast<std::size_t>(i), static_cast<std::size_t>(a)) = m(i, a);
    return out;
}

inline void check_layout(const AdditiveBasis& basis, const Layout& layout) {
    if (layout.size() != basis.concept_count())
        throw std::invalid_argument("layout has " + std::to_string(layout.size()) + " nodes, lattice has " +
                                    std::to_string(basis.concept_count()));
}

} // namespace detail

inline std::vector<Element> representation_elements(const FormalContext& ctx, RepresentationKind kind) {
    std::vector<Element> out;
    const bool objects = kind == RepresentationKind::DoublyAdditive || kind == RepresentationKind::ObjectAdditive;
    const bool attributes = kind != RepresentationKind::ObjectAdditive;
    if (objects)
        for (std::size_t g = 0; g < ctx.object_count(); ++g) out.push_back({true, g, ctx.objects()[g]});
    if (attributes)
        for (std::size_t m = 0; m < ctx.attribute_count(); ++m) out.push_back({false, m, ctx.attributes()[m]});
    return out;
}

/// Set-representation matrix and its column-space basis.
inline AdditiveBasis build_srm(const ConceptLattice& lat, RepresentationKind kind) {
    AdditiveBasis b;
    b.kind = kind;
    b.elements = representation_elements(lat.context(), kind);
    const auto n = static_cast<Eigen::Index>(lat.size());
    const auto s = static_cast<Eigen::Index>(b.elements.size());
    b.srm = Eigen::MatrixXd::Zero(n, s);
    for (Eigen::Index c = 0; c < n; ++c) {
        const Concept& con = lat.concept_at(static_cast<std::size_t>(c));
        for (Eigen::Index j = 0; j < s; ++j) {
            const Element& e = b.elements[static_cast<std::size_t>(j)];
            bool in = false;
            if (e.is_object)
                in = con.extent.test(e.index);
            else if (kind == RepresentationKind::DualAttribute)
                in = con.intent.test(e.index);
            else
                in = !con.intent.test(e.index);
            b.srm(c, j) = in ? 1.0 : 0.0;
        }
    }
    b.ortho = detail::orthonormal_columns(b.srm);
    Eigen::MatrixXd extra = detail::orthonormal_columns(Eigen::MatrixXd::Ones(n, n > 0 ? 1 : 0), b.ortho);
    b.ortho_t.resize(n, b.ortho.cols() + extra.cols());
    b.ortho_t << b.ortho, extra;
    return b;
}

inline Layout positions_from_vectors(const AdditiveBasis& basis, const ElementVectors& vecs) {
    if (vecs.vectors.size() != basis.element_count())
        throw std::invalid_argument("expected " + std::to_string(basis.element_count()) + " element vectors, got " +
                                    std::to_string(vecs.vectors.size()));
    Layout out(basis.concept_count());
    for (std::size_t c = 0; c < basis.concept_count(); ++c) {
        Vec2 p = vecs.origin;
        for (std::size_t j = 0; j < basis.element_count(); ++j)
            if (basis.contains(c, j)) p += vecs.vectors[j];
        out.set(c, p);
    }
    return out;
}

/// Nearest additive layout: every coordinate column is orthogonally
/// projected onto im(SRM).
inline Layout project_additive(const AdditiveBasis& basis, const Layout& layout) {
    detail::check_layout(basis, layout);
    const Eigen::MatrixXd x = detail::to_matrix(layout);
    const Eigen::MatrixXd q = basis.ortho;
    return detail::from_matrix(q * (q.transpose() * x));
}

/// Projection onto im(SRM) + span(1): additive layouts up to a common offset.
inline Layout project_additive_translated(const AdditiveBasis& basis, const Layout& layout) {
    detail::check_layout(basis, layout);
    const Eigen::MatrixXd x = detail::to_matrix(layout);
    const Eigen::MatrixXd& q = basis.ortho_t;
    return detail::from_matrix(q * (q.transpose() * x));
}

struct AdditivityReport {
    bool additive = false;
    double max_deviation = 0.0; // infinity norm of layout - projection
    double residual = 0.0;      // Euclidean norm of layout - projection
};

/// Additivity up to a common translation of all nodes.
inline AdditivityReport is_additive(const AdditiveBasis& basis, const Layout& layout, double tol) {
    const Layout p = project_additive_translated(basis, layout);
    AdditivityReport r;
    double sq = 0.0;
    for (std::size_t i = 0; i < layout.raw().size(); ++i) {
        const double d = layout.raw()[i] - p.raw()[i];
        r.max_deviation = std::max(r.max_deviation, std::abs(d));
        sq += d * d;
    }
    r.residual = std::sqrt(sq);
    r.additive = r.max_deviation <= tol;
    return r;
}

struct VectorRecovery {
    ElementVectors vectors;
    double residual = 0.0; // Euclidean norm of layout - positions_from_vectors(vectors)
};

/// Minimum-norm least-squares vectors.  A common origin is fitted only when
/// the layout is not additive without one.
inline VectorRecovery recover_vectors(const AdditiveBasis& basis, const Layout& layout) {
    detail::check_layout(basis, layout);
    VectorRecovery out;
    const std::size_t s = basis.element_count();
    out.vectors.vectors.assign(s, Vec2{});
    if (basis.concept_count() == 0) return out;

    const Eigen::MatrixXd x = detail::to_matrix(layout);
    const Eigen::MatrixXd plain = basis.ortho * (basis.ortho.transpose() * x);
    const double scale = 1.0 + x.cwiseAbs().maxCoeff();
    const bool needs_origin = (x - plain).cwiseAbs().maxCoeff() > 1e-9 * scale;

    Eigen::MatrixXd a = basis.srm;
    if (needs_origin) {
        a.conservativeResize(Eigen::NoChange, a.cols() + 1);
        a.col(a.cols() - 1).setOnes();
    }
    const Eigen::MatrixXd sol = a.completeOrthogonalDecomposition().solve(x);
    const Eigen::Index last = x.cols() - 1;
    for (std::size_t j = 0; j < s; ++j)
        out.vectors.vectors[j] = {sol(static_cast<Eigen::Index>(j), 0), sol(static_cast<Eigen::Index>(j), last)};
    if (needs_origin) out.vectors.origin = {sol(a.cols() - 1, 0), sol(a.cols() - 1, last)};
    out.residual = (a * sol - x).norm();
    return out;
}

inline double snap_value(double v, double step) { return std::round(v / step) * step; }

/// Rounds every element vector (and the origin) to the grid and re-sums.
/// Non-additive input is projected first.
inline Layout snap_to_grid(const AdditiveBasis& basis, const Layout& layout, double grid_step) {
    if (!(grid_step > 0.0) || !std::isfinite(grid_step)) throw std::invalid_argument("grid step must be positive");
    Layout source = layout;
    if (!is_additive(basis, layout, 1e-6).additive) source = project_additive(basis, layout);
    ElementVectors v = recover_vectors(basis, source).vectors;
    for (auto& vec : v.vectors) vec = {snap_value(vec.x, grid_step), snap_value(vec.y, grid_step)};
    v.origin = {snap_value(v.origin.x, grid_step), snap_value(v.origin.y, grid_step)};
    return positions_from_vectors(basis, v);
}

/// True iff every cover of the induced layout rises strictly.
inline bool validate_vector_cone(const ConceptLattice& lat, const AdditiveBasis& basis, const ElementVectors& vecs) {
    const Layout pos = positions_from_vectors(basis, vecs);
    for (const auto& [lo, hi] : lat.covers())
        if (!(pos.point(hi).y - pos.point(lo).y > 0.0)) return false;
    return true;
}

struct Bounds {
    double min_x, max_x, min_y, max_y;
    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
    double center_x() const { return (min_x + max_x) / 2; }
};

inline Bounds bounds(const Layout& layout) {
    Bounds b{0, 0, 0, 0};
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const Vec2 p = layout.point(i);
        if (i == 0) {
            b = {p.x, p.x, p.y, p.y};
            continue;
        }
        b.min_x = std::min(b.min_x, p.x);
        b.max_x = std::max(b.max_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_y = std::max(b.max_y, p.y);
    }
    return b;
}

inline Layout translate(const Layout& layout, Vec2 d) {
    Layout out = layout;
    for (std::size_t i = 0; i < out.size(); ++i) out.set(i, layout.point(i) + d);
    return out;
}

/// Display normalization into the frame of `reference`: uniform scale to
/// the same height, same lowest y, same horizontal bounding-box centre.
/// Scaling and translation keep an additive layout additive.
inline Layout fit_to_frame(const Layout& layout, const Layout& reference) {
    const Bounds b = bounds(layout);
    const Bounds r = bounds(reference);
    const double s = b.height() > 0.0 ? r.height() / b.height() : 1.0;
    Layout out = layout;
    for (std::size_t i = 0; i < out.size(); ++i) out.set(i, s * layout.point(i));
    const Bounds scaled = bounds(out);
    return translate(out, {r.center_x() - scaled.center_x(), r.min_y - scaled.min_y});
}

struct DragResult {
    Layout layout;
    bool accepted = false;
    ValidityReport validity;
};

/// One interactive drag increment: move a node, project, keep the diagram
/// where it was on screen (bounding-box centre and baseline), and reject
/// the move if the projected diagram is no longer a valid line diagram.
inline DragResult drag_step(const ConceptLattice& lat, const AdditiveBasis& basis, const Layout& layout,
                            std::size_t concept_index, Vec2 new_position, double min_gap = 1e-6) {
    detail::check_layout(basis, layout);
    if (concept_index >= layout.size()) throw std::out_of_range("no concept " + std::to_string(concept_index));
    Layout moved = layout;
    moved.set(concept_index, new_position);
    const Layout projected = project_additive(basis, moved);
    const Bounds before = bounds(layout);
    const Bounds after = bounds(projected);
    const Layout placed = translate(projected, {before.center_x() - after.center_x(), before.min_y - after.min_y});
    DragResult r{placed, false, validate_line_diagram(lat, placed, min_gap)};
    r.accepted = r.validity.valid();
    if (!r.accepted) r.layout = layout;
    return r;
}

} // namespace latflux

#endif // LATFLUX_ADDITIVE_HPP

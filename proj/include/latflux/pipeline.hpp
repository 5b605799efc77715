#ifndef LATFLUX_PIPELINE_HPP
#define LATFLUX_PIPELINE_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "additive.hpp"
#include "dimdraw.hpp"
#include "enumerate.hpp"
#include "forces.hpp"
#include "lattice.hpp"
#include "layout.hpp"

namespace latflux {

struct QualityMetrics {
    double min_conflict_distance = 0.0; // 0 for diagrams without (node, edge) pairs
    std::size_t edge_crossings = 0;
    std::size_t distinct_slopes = 0;
    std::optional<double> reference_distance;
};

/// Angles of cover edges are rounded to buckets of this width before
/// counting distinct slopes.
inline constexpr double kSlopeBucket = 1e-6;

inline QualityMetrics quality_metrics(const ConceptLattice& lat, const Layout& layout) {
    if (layout.size() != lat.size()) throw std::invalid_argument("layout does not cover the lattice");
    QualityMetrics q;
    const auto& covers = lat.covers();
    bool any = false;
    double best = 0.0;
    std::set<long long> slopes;
    for (std::size_t e = 0; e < covers.size(); ++e) {
        const auto [lo, hi] = covers[e];
        const Vec2 w1 = layout.point(lo), w2 = layout.point(hi);
        const Vec2 d = w2 - w1;
        if (norm(d) == 0.0) {
            // a collapsed edge: every other node on it is a zero-clearance conflict
            if (lat.size() > 2) {
                any = true;
                best = 0.0;
            }
        } else {
            slopes.insert(std::llround(std::atan2(d.y, d.x) / kSlopeBucket));
            for (std::size_t v = 0; v < lat.size(); ++v) {
                if (v == lo || v == hi) continue;
                const double c = conflict_distance(layout.point(v), w1, w2);
                best = any ? std::min(best, c) : c;
                any = true;
            }
        }
        for (std::size_t f = e + 1; f < covers.size(); ++f) {
            const auto [lo2, hi2] = covers[f];
            if (lo2 == lo || lo2 == hi || hi2 == lo || hi2 == hi) continue;
            if (segments_cross(w1, w2, layout.point(lo2), layout.point(hi2))) ++q.edge_crossings;
        }
    }
    q.min_conflict_distance = best;
    q.distinct_slopes = slopes.size();
    return q;
}

/// Centroid at the origin, unit root-mean-square radius.
inline Layout normalize_layout(const Layout& layout) {
    if (layout.size() == 0) return layout;
    Vec2 c{};
    for (std::size_t i = 0; i < layout.size(); ++i) c += layout.point(i);
    c *= 1.0 / static_cast<double>(layout.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const Vec2 d = layout.point(i) - c;
        sq += dot(d, d);
    }
    const double rms = std::sqrt(sq / static_cast<double>(layout.size()));
    Layout out(layout.size(), 2);
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const Vec2 d = layout.point(i) - c;
        out.set(i, rms > 0.0 ? (1.0 / rms) * d : d);
    }
    return out;
}

/// Euclidean distance of the two layouts as vectors in R^(2n).
inline double layout_distance(const Layout& a, const Layout& b, bool normalize = false) {
    if (a.size() != b.size()) throw std::invalid_argument("layouts have different node counts");
    const Layout x = normalize ? normalize_layout(a) : a;
    const Layout y = normalize ? normalize_layout(b) : b;
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Vec2 d = x.point(i) - y.point(i);
        sq += dot(d, d);
    }
    return std::sqrt(sq);
}

struct PipelineConfig {
    ForceConfig forces;
    SearchBudget budget;
};

struct PipelineStages {
    Layout embedded;
    Layout projected;
    Layout refined;
};

struct PipelineResult {
    PipelineStages stages;
    ExtensionResult extension;
    ElementVectors vectors;
    QualityMetrics embedded_metrics;
    QualityMetrics projected_metrics;
    QualityMetrics refined_metrics;
    ValidityReport validity; // of the refined stage
    std::vector<TraceRow> trace;
    double projection_residual = 0.0;
    bool converged = false;
    bool singular = false;
    bool budget_exceeded = false;
};

namespace detail {

inline void finish(const ConceptLattice& lat, PipelineResult& r) {
    r.embedded_metrics = quality_metrics(lat, r.stages.embedded);
    r.projected_metrics = quality_metrics(lat, r.stages.projected);
    r.refined_metrics = quality_metrics(lat, r.stages.refined);
    r.validity = validate_line_diagram(lat, r.stages.refined);
}

inline RepresentationKind representation(ForceMode mode) {
    return mode == ForceMode::AttributeAdditive ? RepresentationKind::AttributeAdditive
                                                : RepresentationKind::DoublyAdditive;
}

} // namespace detail

/// Two-dimensional extension, realizer embedding, projection into the
/// doubly-additive space, then force-directed refinement seeded with the
/// recovered vectors.
inline PipelineResult dimflux(const ConceptLattice& lat, const PipelineConfig& cfg = {},
                              const ProgressCallback& progress = {}) {
    cfg.forces.validate();
    PipelineResult r;
    r.extension = minimal_extension(lat, cfg.budget);
    r.budget_exceeded = r.extension.budget_exceeded;
    const AdditiveBasis basis = build_srm(lat, RepresentationKind::DoublyAdditive);
    r.stages.embedded = rotate_stretch(realizer_embed(lat, r.extension.realizer));
    const AdditivityReport add = is_additive(basis, r.stages.embedded, 1e-9);
    r.projection_residual = add.residual;
    // an additive embedding is its own projection
    r.stages.projected = add.additive ? r.stages.embedded : project_additive_translated(basis, r.stages.embedded);
    const VectorRecovery rec = recover_vectors(basis, r.stages.projected);
    const OptimizeResult opt = optimize(lat, basis, rec.vectors, ForceMode::DoublyAdditive, cfg.forces, progress);
    r.vectors = opt.vectors;
    r.stages.refined = opt.layout;
    r.trace = opt.trace;
    r.converged = opt.converged;
    r.singular = opt.singular;
    detail::finish(lat, r);
    return r;
}
inline PipelineResult dimflux(const FormalContext& ctx, const PipelineConfig& cfg = {},
                              const ProgressCallback& progress = {}) {
    return dimflux(compute_lattice(ctx), cfg, progress);
}

/// Planarity enhancer, parabola initialisation and force-directed
/// optimisation in the given mode.  The embedded and projected stages both
/// hold the initial layout.
inline PipelineResult zschalig_pipeline(const ConceptLattice& lat, ForceMode mode, const PipelineConfig& cfg = {},
                                        const ProgressCallback& progress = {}) {
    cfg.forces.validate();
    PipelineResult r;
    const AdditiveBasis basis = build_srm(lat, detail::representation(mode));
    const EnhancerResult order = planarity_enhancer(lat, basis, mode, cfg.forces);
    const ElementVectors start = initialize_vectors_oriented(lat, basis, order, mode, cfg.forces);
    r.stages.embedded = positions_from_vectors(basis, start);
    r.stages.projected = r.stages.embedded;
    const OptimizeResult opt = optimize(lat, basis, start, mode, cfg.forces, progress);
    r.vectors = opt.vectors;
    r.stages.refined = opt.layout;
    r.trace = opt.trace;
    r.converged = opt.converged;
    r.singular = opt.singular;
    r.extension.minimal = false;
    detail::finish(lat, r);
    return r;
}
inline PipelineResult zschalig_pipeline(const FormalContext& ctx, ForceMode mode, const PipelineConfig& cfg = {},
                                        const ProgressCallback& progress = {}) {
    return zschalig_pipeline(compute_lattice(ctx), mode, cfg, progress);
}

enum class Algorithm { AttributeFdp, DoublyFdp, DimDraw, DimFlux };

inline const char* to_string(Algorithm a) {
    switch (a) {
    case Algorithm::AttributeFdp: return "attr-fdp";
    case Algorithm::DoublyFdp: return "doubly-fdp";
    case Algorithm::DimDraw: return "dimdraw";
    case Algorithm::DimFlux: return "dimflux";
    }
    return "?";
}

inline std::optional<Algorithm> parse_algorithm(const std::string& s) {
    for (Algorithm a : {Algorithm::AttributeFdp, Algorithm::DoublyFdp, Algorithm::DimDraw, Algorithm::DimFlux})
        if (s == to_string(a)) return a;
    return std::nullopt;
}

/// Final layout of one algorithm; for DimDraw the rotated grid embedding.
inline PipelineResult run_algorithm(const ConceptLattice& lat, Algorithm algo, const PipelineConfig& cfg = {},
                                    const ProgressCallback& progress = {}) {
    switch (algo) {
    case Algorithm::AttributeFdp: return zschalig_pipeline(lat, ForceMode::AttributeAdditive, cfg, progress);
    case Algorithm::DoublyFdp: return zschalig_pipeline(lat, ForceMode::DoublyAdditive, cfg, progress);
    case Algorithm::DimFlux: return dimflux(lat, cfg, progress);
    case Algorithm::DimDraw: break;
    }
    PipelineResult r;
    r.extension = minimal_extension(lat, cfg.budget);
    r.budget_exceeded = r.extension.budget_exceeded;
    r.stages.embedded = rotate_stretch(realizer_embed(lat, r.extension.realizer));
    r.stages.projected = r.stages.embedded;
    r.stages.refined = r.stages.embedded;
    r.converged = true;
    detail::finish(lat, r);
    return r;
}

struct BatchInput {
    std::string id;
    ConceptLattice lattice;
    std::optional<Layout> reference; // same concept indexing as `lattice`
};

struct BatchRow {
    std::string id;
    Algorithm algorithm = Algorithm::DimFlux;
    std::size_t concepts = 0;
    bool ok = false; // ran without an exception
    std::string error;
    bool valid = false;
    bool converged = false;
    bool budget_exceeded = false;
    QualityMetrics metrics;
    std::optional<double> reference_distance_normalized;
    double seconds = 0.0;
    Layout layout;
};

struct BatchSummary {
    std::size_t rows = 0;
    std::size_t valid = 0;
    std::size_t failed = 0;
    std::size_t non_converged = 0;
};

inline BatchSummary summarize(const std::vector<BatchRow>& rows) {
    BatchSummary s;
    s.rows = rows.size();
    for (const auto& r : rows) {
        s.valid += r.valid;
        s.failed += !r.ok;
        s.non_converged += r.ok && !r.converged;
    }
    return s;
}

/// Runs every algorithm on every lattice.  Failures are recorded per row;
/// the batch never aborts.  Rows come back in input order regardless of
/// `threads`.
inline std::vector<BatchRow> batch_evaluate(const std::vector<BatchInput>& inputs,
                                            const std::vector<Algorithm>& algorithms, const PipelineConfig& cfg = {},
                                            unsigned threads = 1) {
    std::vector<BatchRow> rows(inputs.size() * algorithms.size());
    if (rows.empty()) return rows;
    auto job = [&](std::size_t k) {
        const BatchInput& in = inputs[k / algorithms.size()];
        BatchRow& row = rows[k];
        row.id = in.id;
        row.algorithm = algorithms[k % algorithms.size()];
        row.concepts = in.lattice.size();
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const PipelineResult r = run_algorithm(in.lattice, row.algorithm, cfg);
            QualityMetrics metrics = r.refined_metrics;
            std::optional<double> normalized;
            if (in.reference) {
                metrics.reference_distance = layout_distance(r.stages.refined, *in.reference, false);
                normalized = layout_distance(r.stages.refined, *in.reference, true);
            }
            row.ok = true;
            row.valid = r.validity.valid();
            row.converged = r.converged;
            row.budget_exceeded = r.budget_exceeded;
            row.metrics = metrics;
            row.reference_distance_normalized = normalized;
            row.layout = r.stages.refined;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    threads = std::max(1u, threads);
    if (threads == 1) {
        for (std::size_t k = 0; k < rows.size(); ++k) job(k);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < rows.size(); k = next++) job(k);
        });
    for (auto& th : pool) th.join();
    return rows;
}

inline std::vector<BatchInput> four_meet_irreducible_inputs() {
    std::vector<BatchInput> out;
    for (auto& e : enumerate_four_meet_irreducible_lattices()) out.push_back({e.id, std::move(e.lattice), std::nullopt});
    return out;
}

} // namespace latflux

#endif // LATFLUX_PIPELINE_HPP

// Sampling and central-difference helpers for checking force gradients.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <latflux/forces.hpp>

namespace oracles {

using namespace latflux;

inline ElementVectors random_vectors(std::mt19937& rng, std::size_t s) {
    std::uniform_real_distribution<double> x(-2.0, 2.0), y(0.2, 2.0);
    ElementVectors v;
    for (std::size_t j = 0; j < s; ++j) v.vectors.push_back({x(rng), y(rng)});
    return v;
}

// Keeps sampled states away from the case switches of the conflict distance
// and from near-contacts where finite differences lose accuracy.
inline bool far_from_case_boundaries(const ConceptLattice& lat, const Layout& l) {
    for (const auto& [lo, hi] : lat.covers()) {
        const Vec2 w1 = l.point(lo), w2 = l.point(hi), f = w2 - w1;
        if (norm(f) < 0.05) return false;
        for (std::size_t v = 0; v < l.size(); ++v) {
            if (v == lo || v == hi) continue;
            const Vec2 w = l.point(v);
            if (std::abs(dot(w1 - w, f)) < 1e-2 || std::abs(dot(w2 - w, f)) < 1e-2) return false;
            if (conflict_distance(w, w1, w2) < 0.05) return false;
        }
    }
    return true;
}

using TermFn = std::function<double(const ElementVectors&)>;

// Relative error of the analytic gradient against central differences.
inline double gradient_error(const TermFn& energy, const std::vector<Vec2>& analytic, ElementVectors v) {
    const double h = 1e-6;
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < v.vectors.size(); ++j)
        for (int axis = 0; axis < 2; ++axis) {
            double& c = axis == 0 ? v.vectors[j].x : v.vectors[j].y;
            const double keep = c;
            c = keep + h;
            const double ep = energy(v);
            c = keep - h;
            const double em = energy(v);
            c = keep;
            const double fd = (ep - em) / (2 * h);
            const double an = axis == 0 ? analytic[j].x : analytic[j].y;
            num += (an - fd) * (an - fd);
            den += fd * fd;
        }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-9);
}

} // namespace oracles

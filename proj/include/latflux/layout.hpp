#ifndef LATFLUX_LAYOUT_HPP
#define LATFLUX_LAYOUT_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"

namespace latflux {

/// Node placement: one point in R^d per concept index. The last coordinate
/// is the height; for d = 2 that is y.
class Layout {
public:
    Layout() = default;
    Layout(std::size_t nodes, std::size_t dimension = 2) : dimension_(dimension), coords_(nodes * dimension, 0.0) {
        if (dimension < 2) throw std::invalid_argument("layout dimension must be at least 2");
    }
    explicit Layout(const std::vector<Vec2>& points) : Layout(points.size(), 2) {
        for (std::size_t i = 0; i < points.size(); ++i) set(i, points[i]);
    }

    std::size_t size() const noexcept { return dimension_ ? coords_.size() / dimension_ : 0; }
    std::size_t dimension() const noexcept { return dimension_; }

    double& at(std::size_t node, std::size_t axis) { return coords_.at(node * dimension_ + axis); }
    double at(std::size_t node, std::size_t axis) const { return coords_.at(node * dimension_ + axis); }

    // Planar view: first coordinate and height coordinate.
    Vec2 point(std::size_t node) const { return {at(node, 0), at(node, dimension_ - 1)}; }
    void set(std::size_t node, Vec2 p) {
        at(node, 0) = p.x;
        at(node, dimension_ - 1) = p.y;
    }

    // Column `axis` as a vector over all nodes.
    std::vector<double> column(std::size_t axis) const {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i, axis);
        return out;
    }
    void set_column(std::size_t axis, const std::vector<double>& values) {
        if (values.size() != size()) throw std::invalid_argument("column length mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) at(i, axis) = values[i];
    }

    bool finite() const {
        for (double c : coords_)
            if (!std::isfinite(c)) return false;
        return true;
    }

    const std::vector<double>& raw() const noexcept { return coords_; }

    friend bool operator==(const Layout&, const Layout&) = default;

private:
    std::size_t dimension_ = 2;
    std::vector<double> coords_;
};

inline double max_abs_difference(const Layout& a, const Layout& b) {
    if (a.size() != b.size() || a.dimension() != b.dimension()) throw std::invalid_argument("layout shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.raw().size(); ++i) m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
    return m;
}

} // namespace latflux

#endif // LATFLUX_LAYOUT_HPP

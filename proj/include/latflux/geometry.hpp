#ifndef LATFLUX_GEOMETRY_HPP
#define LATFLUX_GEOMETRY_HPP

#include <cmath>
#include <stdexcept>

namespace latflux {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    friend Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
    friend Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return a *= s; }
    friend Vec2 operator*(Vec2 a, double s) { return a *= s; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

struct DegenerateEdge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class ConflictCase { BelowLower, AboveUpper, Perpendicular };

inline ConflictCase conflict_case(Vec2 w, Vec2 w1, Vec2 w2) {
    const Vec2 f = w2 - w1;
    if (dot(w1 - w, f) > 0) return ConflictCase::BelowLower;
    if (dot(w2 - w, f) < 0) return ConflictCase::AboveUpper;
    return ConflictCase::Perpendicular;
}

/// Distance between node w and the segment w1-w2 (the conflict distance).
inline double conflict_distance(Vec2 w, Vec2 w1, Vec2 w2) {
    const Vec2 f = w2 - w1;
    const double len = norm(f);
    if (len == 0.0) throw DegenerateEdge("conflict distance of a zero-length edge");
    switch (conflict_case(w, w1, w2)) {
    case ConflictCase::BelowLower: return norm(w1 - w);
    case ConflictCase::AboveUpper: return norm(w2 - w);
    case ConflictCase::Perpendicular: break;
    }
    return std::abs(cross(w1 - w, w2 - w)) / len;
}

/// Proper intersection of the open segments p1-p2 and q1-q2 (touching and
/// collinear overlap do not count).
inline bool segments_cross(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    const double d1 = cross(p2 - p1, q1 - p1);
    const double d2 = cross(p2 - p1, q2 - p1);
    const double d3 = cross(q2 - q1, p1 - q1);
    const double d4 = cross(q2 - q1, p2 - q1);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

} // namespace latflux

#endif // LATFLUX_GEOMETRY_HPP

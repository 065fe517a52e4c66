#pragma once

#include <cmath>
#include <optional>
#include <vector>

namespace escher {

// Tolerances used throughout: kEps for geometric predicates and point
// classification, kTightEps for isometry orthonormality and constraint
// consistency. Solved tiles are validated with slack well above either.
inline constexpr double kEps = 1e-9;
inline constexpr double kTightEps = 1e-12;

// ---------------------------------------------------------------------------
// Point2 / Vec2
// ---------------------------------------------------------------------------

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};
using Vec2 = Point2;

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline Point2 operator*(Point2 p, double s) { return {s * p.x, s * p.y}; }
inline Point2 operator/(Point2 p, double s) { return {p.x / s, p.y / s}; }
inline Point2& operator+=(Point2& a, Point2 b) { a.x += b.x; a.y += b.y; return a; }
inline Point2& operator-=(Point2& a, Point2 b) { a.x -= b.x; a.y -= b.y; return a; }
inline Point2 operator-(Point2 p) { return {-p.x, -p.y}; }

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::sqrt(norm2(a)); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline Vec2 normalized(Vec2 a) { return a / norm(a); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline bool approx_equal(Point2 a, Point2 b, double tol = kTightEps) {
    return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol;
}
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// ---------------------------------------------------------------------------
// Mat2
// ---------------------------------------------------------------------------

struct Mat2 {
    // Row-major 2x2 matrix.
    double a00 = 1.0, a01 = 0.0;
    double a10 = 0.0, a11 = 1.0;

    static Mat2 identity() { return {}; }
    static Mat2 rotation(double angle) {
        const double c = std::cos(angle), s = std::sin(angle);
        return {c, -s, s, c};
    }
    // Reflection across a line through the origin with unit direction d.
    static Mat2 reflection(Vec2 d) {
        return {d.x * d.x - d.y * d.y, 2.0 * d.x * d.y,
                2.0 * d.x * d.y, d.y * d.y - d.x * d.x};
    }
};

inline Vec2 operator*(const Mat2& m, Vec2 v) {
    return {m.a00 * v.x + m.a01 * v.y, m.a10 * v.x + m.a11 * v.y};
}
inline Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.a00 * b.a00 + a.a01 * b.a10, a.a00 * b.a01 + a.a01 * b.a11,
            a.a10 * b.a00 + a.a11 * b.a10, a.a10 * b.a01 + a.a11 * b.a11};
}
inline Mat2 transposed(const Mat2& m) { return {m.a00, m.a10, m.a01, m.a11}; }
inline double det(const Mat2& m) { return m.a00 * m.a11 - m.a01 * m.a10; }
inline bool approx_equal(const Mat2& a, const Mat2& b, double tol = kTightEps) {
    return std::abs(a.a00 - b.a00) <= tol && std::abs(a.a01 - b.a01) <= tol &&
           std::abs(a.a10 - b.a10) <= tol && std::abs(a.a11 - b.a11) <= tol;
}

// ---------------------------------------------------------------------------
// Line2
// ---------------------------------------------------------------------------

struct Line2 {
    Point2 point;
    Vec2 dir;  // unit length
};

inline double distance(const Line2& l, Point2 p) {
    return std::abs(cross(l.dir, p - l.point));
}
inline Point2 project(const Line2& l, Point2 p) {
    return l.point + dot(p - l.point, l.dir) * l.dir;
}
inline bool same_line(const Line2& a, const Line2& b, double tol = kEps) {
    return std::abs(cross(a.dir, b.dir)) <= tol && distance(a, b.point) <= tol;
}
// Intersection of two non-parallel lines.
std::optional<Point2> intersect(const Line2& a, const Line2& b, double tol = kEps);

// ---------------------------------------------------------------------------
// Isometry2
// ---------------------------------------------------------------------------

struct Isometry2 {
    Mat2 linear;
    Vec2 translation;
    int orientation = 1;  // +1 rotation/translation, -1 reflection/glide

    static Isometry2 identity() { return {}; }
    static Isometry2 translate(Vec2 t) { return {Mat2::identity(), t, 1}; }
    static Isometry2 rotation(double angle, Point2 center);
    static Isometry2 reflection(const Line2& axis);
    // Reflection across `axis` composed with translation of `shift` along it.
    static Isometry2 glide(const Line2& axis, double shift);
};

inline Point2 apply(const Isometry2& g, Point2 p) {
    return g.linear * p + g.translation;
}
// compose(a, b) applies b first: compose(a,b)(p) == a(b(p)).
Isometry2 compose(const Isometry2& a, const Isometry2& b);
Isometry2 inverse(const Isometry2& g);
bool approx_equal(const Isometry2& a, const Isometry2& b, double tol = kTightEps);
bool is_identity(const Isometry2& g, double tol = kTightEps);
bool is_valid(const Isometry2& g, double tol = kTightEps);
Line2 transform(const Isometry2& g, const Line2& l);

// Fixed-point set of an isometry. Identity reports kind none with the
// whole_plane flag set; translations and glides report plain none.
struct FixedSet {
    enum class Kind { none, point, line };
    Kind kind = Kind::none;
    bool whole_plane = false;
    Point2 point;
    Line2 line;
};
FixedSet fixed_set(const Isometry2& g, double tol = kEps);

// ---------------------------------------------------------------------------
// Segments and polygons
// ---------------------------------------------------------------------------

struct Segment2 {
    Point2 a;
    Point2 b;
};

double distance(const Segment2& s, Point2 p);

// True iff the interiors cross or an endpoint of one lies strictly inside the
// other. Touching at shared endpoints does not count. Throws on degenerate
// (zero-length) segments.
bool segments_properly_intersect(const Segment2& s1, const Segment2& s2);

// Closed test: any contact at all, including endpoint touches.
bool segments_intersect(const Segment2& s1, const Segment2& s2);

struct Polygon2 {
    std::vector<Point2> pts;  // closed, CCW, last vertex not repeated

    // Cached result of the simplicity test; cleared by callers that mutate pts.
    mutable std::optional<bool> simple_cache;
};

double signed_area(Point2 a, Point2 b, Point2 c);
double polygon_area(const Polygon2& poly);
bool polygon_is_simple(const Polygon2& poly);

enum class PointLocation { inside, outside, boundary };
// Even-odd classification with boundary tolerance kEps. Throws on non-simple
// polygons.
PointLocation point_in_polygon(Point2 p, const Polygon2& poly);

// Minimum distance from p to the polygon's boundary.
double boundary_distance(const Polygon2& poly, Point2 p);

struct BBox2 {
    Point2 min{1e300, 1e300};
    Point2 max{-1e300, -1e300};

    void expand(Point2 p);
    void inflate(double r);
    bool intersects(const BBox2& o) const;
    bool contains(Point2 p) const;
    Point2 extent() const { return max - min; }
};
BBox2 bbox_of(const std::vector<Point2>& pts);

}  // namespace escher

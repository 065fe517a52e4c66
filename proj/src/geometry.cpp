#include "escher/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace escher {

std::optional<Point2> intersect(const Line2& a, const Line2& b, double tol) {
    const double d = cross(a.dir, b.dir);
    if (std::abs(d) <= tol) return std::nullopt;
    const double t = cross(b.point - a.point, b.dir) / d;
    return a.point + t * a.dir;
}

Isometry2 Isometry2::rotation(double angle, Point2 center) {
    const Mat2 r = Mat2::rotation(angle);
    return {r, center - r * center, 1};
}

Isometry2 Isometry2::reflection(const Line2& axis) {
    const Mat2 r = Mat2::reflection(axis.dir);
    return {r, axis.point - r * axis.point, -1};
}

Isometry2 Isometry2::glide(const Line2& axis, double shift) {
    Isometry2 g = reflection(axis);
    g.translation += shift * axis.dir;
    return g;
}

Isometry2 compose(const Isometry2& a, const Isometry2& b) {
    return {a.linear * b.linear, a.linear * b.translation + a.translation,
            a.orientation * b.orientation};
}

Isometry2 inverse(const Isometry2& g) {
    const Mat2 li = transposed(g.linear);  // orthogonal
    return {li, -(li * g.translation), g.orientation};
}

bool approx_equal(const Isometry2& a, const Isometry2& b, double tol) {
    return approx_equal(a.linear, b.linear, tol) &&
           approx_equal(a.translation, b.translation, tol);
}

bool is_identity(const Isometry2& g, double tol) {
    return approx_equal(g, Isometry2::identity(), tol);
}

bool is_valid(const Isometry2& g, double tol) {
    const Vec2 c0{g.linear.a00, g.linear.a10};
    const Vec2 c1{g.linear.a01, g.linear.a11};
    if (std::abs(norm(c0) - 1.0) > tol) return false;
    if (std::abs(norm(c1) - 1.0) > tol) return false;
    if (std::abs(dot(c0, c1)) > tol) return false;
    if (std::abs(det(g.linear) - g.orientation) > 1e-9) return false;
    return is_finite(g.translation);
}

Line2 transform(const Isometry2& g, const Line2& l) {
    return {apply(g, l.point), g.linear * l.dir};
}

FixedSet fixed_set(const Isometry2& g, double tol) {
    FixedSet fs;
    if (g.orientation > 0) {
        if (approx_equal(g.linear, Mat2::identity(), tol)) {
            fs.whole_plane = norm(g.translation) <= tol;
            return fs;  // identity or translation: no isolated fixed set
        }
        // Rotation: solve (I - R) p = t.
        const Mat2 m{1.0 - g.linear.a00, -g.linear.a01,
                     -g.linear.a10, 1.0 - g.linear.a11};
        const double d = det(m);
        fs.kind = FixedSet::Kind::point;
        fs.point = {(m.a11 * g.translation.x - m.a01 * g.translation.y) / d,
                    (-m.a10 * g.translation.x + m.a00 * g.translation.y) / d};
        return fs;
    }
    // Reflective part: axis direction is the +1 eigenvector of the linear part.
    const double half = 0.5 * std::atan2(g.linear.a10, g.linear.a00);
    const Vec2 dir{std::cos(half), std::sin(half)};
    const double along = dot(g.translation, dir);
    if (std::abs(along) > tol) return fs;  // glide: no fixed points
    fs.kind = FixedSet::Kind::line;
    fs.line = {0.5 * g.translation, dir};
    return fs;
}

// ---------------------------------------------------------------------------
// Segments
// ---------------------------------------------------------------------------

double distance(const Segment2& s, Point2 p) {
    const Vec2 d = s.b - s.a;
    const double len2 = norm2(d);
    if (len2 <= kTightEps * kTightEps) return distance(s.a, p);
    const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
    return distance(s.a + t * d, p);
}

namespace {

int orient_sign(Point2 a, Point2 b, Point2 c, double eps) {
    const double v = cross(b - a, c - a);
    if (v > eps) return 1;
    if (v < -eps) return -1;
    return 0;
}

// p collinear with [a,b]: is it strictly between the endpoints?
bool strictly_within(Point2 a, Point2 b, Point2 p, double eps) {
    if (distance(a, p) <= eps || distance(b, p) <= eps) return false;
    const Vec2 d = b - a;
    const double t = dot(p - a, d) / norm2(d);
    return t > 0.0 && t < 1.0;
}

void require_nondegenerate(const Segment2& s) {
    if (distance(s.a, s.b) <= kTightEps)
        throw std::invalid_argument("degenerate zero-length segment");
}

}  // namespace

bool segments_properly_intersect(const Segment2& s1, const Segment2& s2) {
    require_nondegenerate(s1);
    require_nondegenerate(s2);
    const double eps = kEps;
    const int d1 = orient_sign(s2.a, s2.b, s1.a, eps);
    const int d2 = orient_sign(s2.a, s2.b, s1.b, eps);
    const int d3 = orient_sign(s1.a, s1.b, s2.a, eps);
    const int d4 = orient_sign(s1.a, s1.b, s2.b, eps);
    if (d1 * d2 < 0 && d3 * d4 < 0) return true;

    // Endpoint strictly interior to the other segment.
    if (d1 == 0 && strictly_within(s2.a, s2.b, s1.a, eps)) return true;
    if (d2 == 0 && strictly_within(s2.a, s2.b, s1.b, eps)) return true;
    if (d3 == 0 && strictly_within(s1.a, s1.b, s2.a, eps)) return true;
    if (d4 == 0 && strictly_within(s1.a, s1.b, s2.b, eps)) return true;

    // Collinear overlap longer than a point.
    if (d1 == 0 && d2 == 0 && d3 == 0 && d4 == 0) {
        const Vec2 d = normalized(s1.b - s1.a);
        double lo1 = dot(s1.a, d), hi1 = dot(s1.b, d);
        double lo2 = dot(s2.a, d), hi2 = dot(s2.b, d);
        if (lo1 > hi1) std::swap(lo1, hi1);
        if (lo2 > hi2) std::swap(lo2, hi2);
        return std::min(hi1, hi2) - std::max(lo1, lo2) > eps;
    }
    return false;
}

bool segments_intersect(const Segment2& s1, const Segment2& s2) {
    const double eps = kEps;
    const int d1 = orient_sign(s2.a, s2.b, s1.a, eps);
    const int d2 = orient_sign(s2.a, s2.b, s1.b, eps);
    const int d3 = orient_sign(s1.a, s1.b, s2.a, eps);
    const int d4 = orient_sign(s1.a, s1.b, s2.b, eps);
    if (d1 * d2 < 0 && d3 * d4 < 0) return true;
    if (distance(s1, s2.a) <= eps || distance(s1, s2.b) <= eps) return true;
    if (distance(s2, s1.a) <= eps || distance(s2, s1.b) <= eps) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Polygons
// ---------------------------------------------------------------------------

double signed_area(Point2 a, Point2 b, Point2 c) {
    return 0.5 * cross(b - a, c - a);
}

double polygon_area(const Polygon2& poly) {
    double twice = 0.0;
    const auto& p = poly.pts;
    for (size_t i = 0, n = p.size(); i < n; ++i)
        twice += cross(p[i], p[(i + 1) % n]);
    return 0.5 * twice;
}

bool polygon_is_simple(const Polygon2& poly) {
    if (poly.simple_cache) return *poly.simple_cache;
    const auto& p = poly.pts;
    const size_t n = p.size();
    bool simple = n >= 3;
    for (size_t i = 0; simple && i < n; ++i) {
        const Segment2 si{p[i], p[(i + 1) % n]};
        if (distance(si.a, si.b) <= kTightEps) {
            simple = false;
            break;
        }
        for (size_t j = i + 1; simple && j < n; ++j) {
            const Segment2 sj{p[j], p[(j + 1) % n]};
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) {
                // Shared endpoint allowed; anything more is an overlap.
                const Point2 shared = (j == i + 1) ? p[j] : p[0];
                const Point2 tip_i = (j == i + 1) ? si.a : si.b;
                const Point2 tip_j = (j == i + 1) ? sj.b : sj.a;
                if (distance(sj, tip_i) <= kEps && distance(tip_i, shared) > kEps) simple = false;
                if (distance(si, tip_j) <= kEps && distance(tip_j, shared) > kEps) simple = false;
            } else {
                if (segments_intersect(si, sj)) simple = false;
            }
        }
    }
    poly.simple_cache = simple;
    return simple;
}

PointLocation point_in_polygon(Point2 p, const Polygon2& poly) {
    if (!polygon_is_simple(poly))
        throw std::invalid_argument("point_in_polygon requires a simple polygon");
    const auto& v = poly.pts;
    const size_t n = v.size();
    for (size_t i = 0; i < n; ++i)
        if (distance(Segment2{v[i], v[(i + 1) % n]}, p) <= kEps)
            return PointLocation::boundary;

    // Crossing number with the half-open rule on a rightward ray.
    bool inside = false;
    for (size_t i = 0; i < n; ++i) {
        const Point2 a = v[i], b = v[(i + 1) % n];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (xint > p.x) inside = !inside;
        }
    }
    return inside ? PointLocation::inside : PointLocation::outside;
}

double boundary_distance(const Polygon2& poly, Point2 p) {
    double best = 1e300;
    const auto& v = poly.pts;
    for (size_t i = 0, n = v.size(); i < n; ++i)
        best = std::min(best, distance(Segment2{v[i], v[(i + 1) % n]}, p));
    return best;
}

void BBox2::expand(Point2 p) {
    min.x = std::min(min.x, p.x);
    min.y = std::min(min.y, p.y);
    max.x = std::max(max.x, p.x);
    max.y = std::max(max.y, p.y);
}

void BBox2::inflate(double r) {
    min.x -= r;
    min.y -= r;
    max.x += r;
    max.y += r;
}

bool BBox2::intersects(const BBox2& o) const {
    return min.x <= o.max.x && o.min.x <= max.x && min.y <= o.max.y && o.min.y <= max.y;
}

bool BBox2::contains(Point2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
}

BBox2 bbox_of(const std::vector<Point2>& pts) {
    BBox2 b;
    for (Point2 p : pts) b.expand(p);
    return b;
}

}  // namespace escher

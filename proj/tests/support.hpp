#pragma once

#include <vector>

#include "escher/geometry.hpp"
#include "escher/rng.hpp"

namespace escher::testsupport {

inline Isometry2 random_isometry(Rng& rng) {
    const double angle = rng.uniform(0.0, 6.283185307179586);
    const Point2 t{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    if (rng.uniform() < 0.5) {
        Isometry2 g = Isometry2::rotation(angle, {0, 0});
        g.translation += t;
        return g;
    }
    const Line2 axis{{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)},
                     normalized({std::cos(angle), std::sin(angle)})};
    Isometry2 g = Isometry2::reflection(axis);
    g.translation += t;
    g = compose(Isometry2::translate(t), Isometry2::reflection(axis));
    return g;
}

inline Point2 random_point(Rng& rng, double lo = -2.0, double hi = 2.0) {
    return {rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

// Random star-shaped polygon around the origin (always simple).
inline Polygon2 random_star_polygon(Rng& rng, int max_vertices = 20) {
    const int n = 3 + static_cast<int>(rng.next_u64() % (max_vertices - 2));
    std::vector<double> angles(n);
    for (auto& a : angles) a = rng.uniform(0.0, 6.283185307179586);
    std::sort(angles.begin(), angles.end());
    Polygon2 poly;
    for (double a : angles) {
        const double r = rng.uniform(0.3, 1.5);
        poly.pts.push_back({r * std::cos(a), r * std::sin(a)});
    }
    // Degenerate duplicates are possible when angles collide; nudge them.
    for (size_t i = 0; i < poly.pts.size(); ++i) {
        const size_t j = (i + 1) % poly.pts.size();
        if (distance(poly.pts[i], poly.pts[j]) < 1e-6)
            poly.pts[j].x += 1e-3;
    }
    return poly;
}

// Arbitrary (possibly self-intersecting) random polygon.
inline Polygon2 random_polygon(Rng& rng, int max_vertices = 20) {
    const int n = 3 + static_cast<int>(rng.next_u64() % (max_vertices - 2));
    Polygon2 poly;
    for (int i = 0; i < n; ++i) poly.pts.push_back(random_point(rng, -1.0, 1.0));
    return poly;
}

}  // namespace escher::testsupport

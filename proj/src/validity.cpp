#include "escher/validity.hpp"

#include <atomic>
#include <stdexcept>

#include "escher/parallel.hpp"
#include "escher/rng.hpp"

namespace escher {

Polygon2 boundary_polygon(const TriMesh& mesh, std::span<const Point2> positions) {
    Polygon2 poly;
    poly.pts.reserve(mesh.boundary_loop.size());
    for (int v : mesh.boundary_loop) poly.pts.push_back(positions[v]);
    return poly;
}

double check_boundary_conditions(const ConstraintSet& constraints,
                                 std::span<const Point2> positions, double phi) {
    const Isometry2 rot = Isometry2::rotation(phi, {0, 0});
    const Isometry2 rot_inv = inverse(rot);
    double worst = 0.0;
    for (const auto& r : constraints.table.pairs) {
        const Isometry2 g = compose(rot, compose(r.map, rot_inv));
        worst = std::max(worst, distance(apply(g, positions[r.from]), positions[r.to]));
    }
    for (const auto& r : constraints.table.lines)
        worst = std::max(worst, distance(transform(rot, r.line), positions[r.vertex]));
    for (const auto& r : constraints.table.pins)
        worst = std::max(worst, distance(apply(rot, r.point), positions[r.vertex]));
    return worst;
}

int check_orientation(const TriMesh& mesh, std::span<const Point2> positions) {
    int inverted = 0;
    for (const auto& t : mesh.triangles)
        if (signed_area(positions[t[0]], positions[t[1]], positions[t[2]]) <= 0.0)
            ++inverted;
    return inverted;
}

namespace {

// Crossing-number test without the boundary band; callers guarantee the point
// is farther than the resample tolerance from every edge.
bool strictly_inside(const Polygon2& poly, Point2 p) {
    bool inside = false;
    const auto& v = poly.pts;
    for (size_t i = 0, n = v.size(); i < n; ++i) {
        const Point2 a = v[i], b = v[(i + 1) % n];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (xint > p.x) inside = !inside;
        }
    }
    return inside;
}

}  // namespace

CoverageStats check_tiling_coverage(const TriMesh& mesh, const ConstraintSet& constraints,
                                    std::span<const Point2> positions, double phi,
                                    const BBox2& window, int num_samples,
                                    std::uint64_t seed) {
    // Work in the unrotated frame; coverage is rotation-invariant.
    const Isometry2 unrot = Isometry2::rotation(-phi, {0, 0});
    std::vector<Point2> local(positions.size());
    for (size_t i = 0; i < positions.size(); ++i) local[i] = apply(unrot, positions[i]);

    const Polygon2 poly = boundary_polygon(mesh, local);
    if (!polygon_is_simple(poly))
        throw std::invalid_argument("coverage check requires a simple tile boundary");

    const BBox2 tile_box = bbox_of(poly.pts);
    const double diam = norm(tile_box.extent());
    BBox2 covered = window;
    covered.inflate(diam + kEps);
    const auto copies =
        enumerate_group_copies(constraints.generators, tile_box, covered);

    struct Copy {
        Isometry2 inv;
        BBox2 box;
    };
    std::vector<Copy> prepared;
    prepared.reserve(copies.size());
    for (const auto& g : copies) {
        BBox2 box;
        for (Point2 p : poly.pts) box.expand(apply(g, p));
        box.inflate(1e-5);
        prepared.push_back({inverse(g), box});
    }

    constexpr double kResampleTol = 1e-6;
    std::vector<int> multiplicity(num_samples, 0);
    std::atomic<bool> failed{false};
    parallel_for(num_samples, [&](int k) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            if (attempt > 64) {
                failed = true;
                return;
            }
            Rng rng(Rng::mix(seed, (static_cast<std::uint64_t>(k) << 8) | attempt));
            const Point2 p{rng.uniform(window.min.x, window.max.x),
                           rng.uniform(window.min.y, window.max.y)};
            int count = 0;
            bool near_boundary = false;
            for (const Copy& c : prepared) {
                if (!c.box.contains(p)) continue;
                const Point2 q = apply(c.inv, p);
                if (boundary_distance(poly, q) <= kResampleTol) {
                    near_boundary = true;
                    break;
                }
                if (strictly_inside(poly, q)) ++count;
            }
            if (near_boundary) continue;
            multiplicity[k] = count;
            return;
        }
    });
    if (failed)
        throw std::runtime_error("coverage sampling failed to avoid copy boundaries");

    CoverageStats stats;
    stats.sample_count = num_samples;
    stats.min_multiplicity = num_samples > 0 ? multiplicity[0] : 0;
    stats.max_multiplicity = stats.min_multiplicity;
    long long total = 0;
    for (int m : multiplicity) {
        total += m;
        stats.min_multiplicity = std::min(stats.min_multiplicity, m);
        stats.max_multiplicity = std::max(stats.max_multiplicity, m);
    }
    stats.mean_multiplicity = num_samples > 0 ? double(total) / num_samples : 0.0;
    return stats;
}

ValidityReport full_report(const TriMesh& mesh, const ConstraintSet& constraints,
                           std::span<const Point2> positions, double phi,
                           const ValidityOptions& opts) {
    ValidityReport report;
    report.boundary_residual_max = check_boundary_conditions(constraints, positions, phi);
    report.inverted_triangle_count = check_orientation(mesh, positions);
    report.boundary_simple = polygon_is_simple(boundary_polygon(mesh, positions));
    report.passed = report.boundary_residual_max <= opts.boundary_tol &&
                    report.inverted_triangle_count == 0 && report.boundary_simple;
    if (opts.with_coverage && report.passed) {
        report.coverage =
            check_tiling_coverage(mesh, constraints, positions, phi,
                                  opts.coverage_window, opts.coverage_samples, opts.seed);
    }
    return report;
}

}  // namespace escher

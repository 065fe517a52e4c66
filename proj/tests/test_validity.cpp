#include <doctest.h>

#include "escher/rng.hpp"
#include "escher/tilesolve.hpp"
#include "escher/validity.hpp"

using namespace escher;

namespace {

SolvedTile random_solve(const TriMesh& mesh, const ConstraintSet& cs, std::uint64_t seed,
                        double phi = 0.0) {
    Rng rng(seed);
    TileParams p = TileParams::zeros(mesh);
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta[i] = rng.normal();
    p.phi = phi;
    return solve_tile(mesh, cs, p);
}

}  // namespace

TEST_CASE("boundary residuals") {
    const auto [mesh, cs] = build_tile(GroupId::g2222, 4);

    // Canonical placement satisfies the table exactly.
    CHECK(check_boundary_conditions(cs, mesh.vertices, 0.0) < 1e-12);

    // Solved tiles stay within solver tolerance.
    const SolvedTile tile = random_solve(mesh, cs, 5);
    CHECK(check_boundary_conditions(cs, tile.positions, 0.0) <= 1e-8);

    // Displacing one twin vertex shows up at full magnitude (isometries
    // preserve distances).
    std::vector<Point2> bent = tile.positions;
    int twin = -1;
    for (const auto& r : cs.table.pairs)
        if (r.from != r.to) twin = r.to;
    REQUIRE(twin >= 0);
    bent[twin] += Point2{0.01, 0.0};
    CHECK(check_boundary_conditions(cs, bent, 0.0) >= 0.0099);
}

TEST_CASE("orientation check") {
    const auto [mesh, cs] = build_tile(GroupId::O, 4);
    CHECK(check_orientation(mesh, mesh.vertices) == 0);

    // Swapping two interior vertices crosses their fans.
    std::vector<Point2> swapped = mesh.vertices;
    std::swap(swapped[1 * 5 + 2], swapped[2 * 5 + 2]);
    CHECK(check_orientation(mesh, swapped) > 0);

    const SolvedTile tile = random_solve(mesh, cs, 733);
    CHECK(check_orientation(mesh, tile.positions) == 0);

    // Rotation preserves the count.
    const Mat2 rot = Mat2::rotation(2.1);
    std::vector<Point2> rotated = tile.positions;
    for (auto& p : rotated) p = rot * p;
    CHECK(check_orientation(mesh, rotated) == 0);
}

TEST_CASE("coverage of the canonical square lattice") {
    const auto [mesh, cs] = build_tile(GroupId::O, 2);
    const CoverageStats stats = check_tiling_coverage(
        mesh, cs, mesh.vertices, 0.0, {{0.0, 0.0}, {1.0, 1.0}}, 10000, 1);
    CHECK(stats.sample_count == 10000);
    CHECK(stats.min_multiplicity == 1);
    CHECK(stats.max_multiplicity == 1);
    CHECK(stats.mean_multiplicity == doctest::Approx(1.0));
}

TEST_CASE("coverage on random solves") {
    const auto [mesh, cs] = build_tile(GroupId::g2222, 4);
    const SolvedTile tile = random_solve(mesh, cs, 11, 0.7);
    const CoverageStats stats = check_tiling_coverage(
        mesh, cs, tile.positions, tile.params.phi, {{0.0, 0.0}, {1.0, 1.0}}, 4000, 2);
    CHECK(stats.min_multiplicity == 1);
    CHECK(stats.max_multiplicity == 1);
}

TEST_CASE("corrupted generators produce multiplicity errors") {
    auto [mesh, cs] = build_tile(GroupId::O, 2);
    // A bogus half-step translation makes copies overlap.
    cs.generators[0] = Isometry2::translate({0.5, 0.0});
    const CoverageStats stats = check_tiling_coverage(
        mesh, cs, mesh.vertices, 0.0, {{0.0, 0.0}, {1.0, 1.0}}, 2000, 3);
    CHECK(stats.max_multiplicity >= 2);
}

TEST_CASE("full report aggregates and gates") {
    const auto [mesh, cs] = build_tile(GroupId::g22x, 4);
    const SolvedTile tile = random_solve(mesh, cs, 17);
    const ValidityReport good = full_report(mesh, cs, tile.positions, 0.0, {});
    CHECK(good.passed);
    CHECK(good.boundary_residual_max <= 1e-8);
    CHECK(good.inverted_triangle_count == 0);
    CHECK(good.boundary_simple);
    CHECK_FALSE(good.coverage.has_value());

    std::vector<Point2> corrupt = tile.positions;
    corrupt[0] += Point2{0.3, 0.0};
    const ValidityReport bad = full_report(mesh, cs, corrupt, 0.0, {});
    CHECK_FALSE(bad.passed);
    CHECK(bad.boundary_residual_max > 1e-8);

    ValidityOptions opts;
    opts.with_coverage = true;
    opts.coverage_samples = 1000;
    const ValidityReport with_cov = full_report(mesh, cs, tile.positions, 0.0, opts);
    REQUIRE(with_cov.coverage.has_value());
    CHECK(with_cov.coverage->max_multiplicity == 1);
}

TEST_CASE("reflection-group report") {
    const auto [mesh, cs] = build_tile(GroupId::s442, 4);
    const SolvedTile tile = random_solve(mesh, cs, 23);
    const ValidityReport report = full_report(mesh, cs, tile.positions, 0.0, {});
    CHECK(report.passed);
    // Every boundary vertex sits on its mirror line.
    for (const auto& r : cs.table.lines)
        CHECK(distance(r.line, tile.positions[r.vertex]) <= 1e-8);
}

TEST_CASE("rotated solves still validate") {
    const auto [mesh, cs] = build_tile(GroupId::g333, 4);
    const SolvedTile tile = random_solve(mesh, cs, 29, 1.9);
    const ValidityReport report = full_report(mesh, cs, tile.positions, 1.9, {});
    CHECK(report.passed);
}

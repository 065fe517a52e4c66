#include <doctest.h>

#include <numbers>

#include "escher/rng.hpp"
#include "escher/tilesolve.hpp"
#include "escher/validity.hpp"

using namespace escher;

namespace {

TileParams random_params(const TriMesh& mesh, Rng& rng, bool with_phi = false) {
    TileParams p = TileParams::zeros(mesh);
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta[i] = rng.normal();
    if (with_phi) p.phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return p;
}

// Independent orbit count: union-find over the raw pair table.
int count_orbits_brute_force(const ConstraintSet& cs) {
    std::vector<int> parent(cs.vertex_count);
    for (int i = 0; i < cs.vertex_count; ++i) parent[i] = i;
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& r : cs.table.pairs) parent[find(r.from)] = find(r.to);
    int orbits = 0;
    for (int i = 0; i < cs.vertex_count; ++i)
        if (find(i) == i) ++orbits;
    return orbits;
}

}  // namespace

TEST_CASE("weight squashing") {
    Eigen::VectorXd theta(3);
    theta << 0.0, 20.0, -20.0;
    const EdgeWeights w = weights_from_theta(theta);
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] < 0.95);  // supremum, never attained for finite theta
    CHECK(w[1] == doctest::Approx(0.95).epsilon(1e-7));
    CHECK(w[2] > 0.05);
    CHECK(w[2] == doctest::Approx(0.05).epsilon(1e-7));
    CHECK(dweights_dtheta(theta)[0] == doctest::Approx(0.225));
    // Bijective: round-trips through theta_from_weight.
    CHECK(theta_from_weight(w[0]) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("full laplacian structure") {
    const TriMesh mesh = grid_mesh(4);
    Rng rng(5);
    Eigen::VectorXd theta(mesh.directed_edge_count());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = rng.normal();
    const EdgeWeights w = weights_from_theta(theta);
    const auto L = full_laplacian(mesh, w);

    // Zero row sums; off-diagonals are exactly -w_ij.
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.vertex_count());
    CHECK((L * ones).lpNorm<Eigen::Infinity>() < 1e-12);
    for (int e = 0; e < mesh.directed_edge_count(); ++e) {
        const auto [i, j] = mesh.directed_edges[e];
        CHECK(L.coeff(i, j) == doctest::Approx(-w[e]).epsilon(1e-15));
    }

    // Interior vertex row: diagonal sums six weights, six off-diagonal entries.
    const int center = 2 * 5 + 2;  // (2,2)
    double diag = 0.0;
    int offdiag = 0;
    const Eigen::RowVectorXd row = Eigen::RowVectorXd(L.row(center));
    for (int c = 0; c < mesh.vertex_count(); ++c) {
        if (c == center) diag = row[c];
        else if (row[c] != 0.0) ++offdiag;
    }
    CHECK(offdiag == 6);
    double wsum = 0.0;
    for (int eid : mesh.out_edges[center]) wsum += w[eid];
    CHECK(diag == doctest::Approx(wsum));
}

TEST_CASE("uniform-weight interior row in the reduced system") {
    const auto [mesh, cs] = build_tile(GroupId::O, 4);
    TileSystem system(mesh, cs);
    const double w = 0.5;  // theta = 0
    const auto A = system.assemble_matrix(
        weights_from_theta(Eigen::VectorXd::Zero(mesh.directed_edge_count())));
    CHECK(A.rows() == system.dof_count());
    CHECK(A.cols() == system.dof_count());

    // All neighbors of grid vertex (2,2) are interior, so its row keeps the
    // unreduced 6-neighbor stencil: diagonal 6w and six -w entries.
    const int center = cs.orbit_of[2 * 5 + 2];
    const int row = system.orbit_row(center);
    CHECK(A.coeff(row, system.orbit_col(center)) == doctest::Approx(6 * w));
    int neighbor_entries = 0;
    for (int eid : mesh.out_edges[2 * 5 + 2]) {
        const int q = cs.orbit_of[mesh.directed_edges[eid].second];
        CHECK(A.coeff(row, system.orbit_col(q)) == doctest::Approx(-w));
        ++neighbor_entries;
    }
    CHECK(neighbor_entries == 6);
}

TEST_CASE("system dimension matches brute-force orbit count") {
    for (GroupId id : {GroupId::O, GroupId::g2222, GroupId::g442, GroupId::g333}) {
        CAPTURE(group_name(id));
        for (int n : {2, 4}) {
            const auto [mesh, cs] = build_tile(id, n);
            TileSystem system(mesh, cs);
            CHECK(count_orbits_brute_force(cs) == static_cast<int>(cs.orbits.size()));
            int expected = static_cast<int>(cs.drift_dirs.size());
            for (const auto& orbit : cs.orbits) {
                if (orbit.kind == OrbitInfo::Kind::free) expected += 2;
                else if (orbit.kind == OrbitInfo::Kind::on_line) expected += 1;
            }
            CHECK(system.dof_count() == expected);
        }
    }
}

TEST_CASE("canonical solve exactness for the torus") {
    const auto [mesh, cs] = build_tile(GroupId::O, 40);
    const SolvedTile tile = solve_tile(mesh, cs, TileParams::zeros(mesh));
    double worst = 0.0;
    for (int v = 0; v < mesh.vertex_count(); ++v)
        worst = std::max(worst, distance(tile.positions[v], mesh.vertices[v]));
    CHECK(worst < 1e-9);
    CHECK(tile.solve_residual < 1e-10);
}

TEST_CASE("pinned cone vertices stay at rotation fixed points") {
    const auto [mesh, cs] = build_tile(GroupId::g442, 4);
    Rng rng(17);
    for (int trial = 0; trial < 3; ++trial) {
        const SolvedTile tile = solve_tile(mesh, cs, random_params(mesh, rng));
        for (const auto& orbit : cs.orbits) {
            if (orbit.kind != OrbitInfo::Kind::pinned) continue;
            CHECK(distance(tile.positions[orbit.rep], orbit.pin) < 1e-12);
        }
    }
}

TEST_CASE("random parameters yield valid tiles for every interesting group") {
    Rng rng(23);
    for (const auto& spec : catalog()) {
        if (!spec.interesting) continue;
        CAPTURE(group_name(spec.id));
        const auto [mesh, cs] = build_tile(spec.id, 4);
        TileSystem system(mesh, cs);
        for (int trial = 0; trial < 5; ++trial) {
            const SolvedTile tile = system.solve(random_params(mesh, rng, true));
            const ValidityReport report =
                full_report(mesh, cs, tile.positions, tile.params.phi, {});
            CHECK(report.passed);
        }
    }
}

TEST_CASE("reflection-group boundaries stay on their mirror lines") {
    Rng rng(29);
    for (GroupId id : {GroupId::s2222, GroupId::s442, GroupId::s333, GroupId::s632}) {
        CAPTURE(group_name(id));
        const auto [mesh, cs] = build_tile(id, 4);
        const SolvedTile tile = solve_tile(mesh, cs, random_params(mesh, rng));
        CHECK(check_boundary_conditions(cs, tile.positions, 0.0) < 1e-8);
        CHECK(check_orientation(mesh, tile.positions) == 0);
    }
}

TEST_CASE("phi equivariance") {
    const auto [mesh, cs] = build_tile(GroupId::g333, 4);
    Rng rng(31);
    TileParams params = random_params(mesh, rng);
    TileSystem system(mesh, cs);
    const SolvedTile flat = system.solve(params);
    params.phi = 1.234;
    const SolvedTile rotated = system.solve(params);
    const Mat2 rot = Mat2::rotation(1.234);
    for (int v = 0; v < mesh.vertex_count(); ++v)
        CHECK(distance(rotated.positions[v], rot * flat.positions[v]) < 1e-12);
}

TEST_CASE("solve determinism") {
    const auto [mesh, cs] = build_tile(GroupId::g22x, 4);
    Rng rng(37);
    const TileParams params = random_params(mesh, rng, true);
    const SolvedTile a = solve_tile(mesh, cs, params);
    const SolvedTile b = solve_tile(mesh, cs, params);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        CHECK(a.positions[v].x == b.positions[v].x);
        CHECK(a.positions[v].y == b.positions[v].y);
    }
}

TEST_CASE("mean-value recovery on the canonical torus grid") {
    const auto [mesh, cs] = build_tile(GroupId::O, 4);
    const RecoverResult rec = recover_theta(mesh, cs, mesh.vertices, 0.0);
    CHECK(rec.clamped_count == 0);

    // Interior stars of the uniform grid have mean-value weights
    // sqrt(2)/(4+2*sqrt(2)) on axis neighbors and (2-sqrt(2))/(4+2*sqrt(2))
    // on the two diagonal neighbors.
    const double axis = std::sqrt(2.0) / (4.0 + 2.0 * std::sqrt(2.0));
    const double diag = (2.0 - std::sqrt(2.0)) / (4.0 + 2.0 * std::sqrt(2.0));
    const int center = 2 * 5 + 2;
    const EdgeWeights w = weights_from_theta(rec.params.theta);
    for (int eid : mesh.out_edges[center]) {
        const auto [i, j] = mesh.directed_edges[eid];
        const Vec2 d = mesh.vertices[j] - mesh.vertices[i];
        const bool diagonal = std::abs(d.x) > 1e-12 && std::abs(d.y) > 1e-12;
        CHECK(w[eid] == doctest::Approx(diagonal ? diag : axis).epsilon(1e-10));
    }

    // Re-solving with the recovered parameters reproduces the grid.
    const SolvedTile again = solve_tile(mesh, cs, rec.params);
    for (int v = 0; v < mesh.vertex_count(); ++v)
        CHECK(distance(again.positions[v], mesh.vertices[v]) < 1e-9);
}

TEST_CASE("recover round-trips random solves") {
    Rng rng(41);
    for (GroupId id : {GroupId::O, GroupId::g2222, GroupId::g442, GroupId::g333,
                       GroupId::g632, GroupId::sx}) {
        CAPTURE(group_name(id));
        const auto [mesh, cs] = build_tile(id, 4);
        TileSystem system(mesh, cs);
        for (int trial = 0; trial < 3; ++trial) {
            const SolvedTile tile = system.solve(random_params(mesh, rng, true));
            const RecoverResult rec =
                recover_theta(mesh, cs, tile.positions, tile.params.phi);
            if (rec.clamped_count > 0) continue;  // exactness not guaranteed
            const SolvedTile again = solve_tile(mesh, cs, rec.params);
            double worst = 0.0;
            for (int v = 0; v < mesh.vertex_count(); ++v)
                worst = std::max(worst, distance(again.positions[v], tile.positions[v]));
            CHECK(worst < 1e-6);
        }
    }
}

TEST_CASE("recover reproduces a hand-warped valid tile") {
    const int n = 4;
    const auto [mesh, cs] = build_tile(GroupId::O, n);
    std::vector<Point2> warped = mesh.vertices;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        const double x = mesh.vertices[v].x, y = mesh.vertices[v].y;
        // Periodic displacement: identical on twin boundary vertices, zero at
        // the pinned corner orbit.
        const double pi2 = 2.0 * std::numbers::pi;
        warped[v] += Point2{0.02 * std::sin(pi2 * x) * std::sin(pi2 * y),
                            0.03 * std::sin(pi2 * x) * std::sin(pi2 * y)};
    }
    REQUIRE(check_boundary_conditions(cs, warped, 0.0) < 1e-12);
    REQUIRE(check_orientation(mesh, warped) == 0);
    const RecoverResult rec = recover_theta(mesh, cs, warped, 0.0);
    CHECK(rec.clamped_count == 0);
    const SolvedTile again = solve_tile(mesh, cs, rec.params);
    double worst = 0.0;
    for (int v = 0; v < mesh.vertex_count(); ++v)
        worst = std::max(worst, distance(again.positions[v], warped[v]));
    CHECK(worst < 1e-6);
}

TEST_CASE("recover rejects invalid input") {
    const auto [mesh, cs] = build_tile(GroupId::O, 2);
    std::vector<Point2> bad = mesh.vertices;
    bad[4] += Point2{5.0, 5.0};  // interior vertex far away: flipped triangles
    CHECK_THROWS_AS(recover_theta(mesh, cs, bad, 0.0), std::invalid_argument);
}

#include <doctest.h>

#include <numbers>

#include "escher/autodiff.hpp"
#include "escher/rng.hpp"

using namespace escher;

namespace {

TileParams random_params(const TriMesh& mesh, Rng& rng, bool with_phi = true) {
    TileParams p = TileParams::zeros(mesh);
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta[i] = rng.normal();
    if (with_phi) p.phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return p;
}

double max_rel_error(const ParamGradient& a, const ParamGradient& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.dtheta.size(); ++i) {
        const double denom = std::max(std::abs(b.dtheta[i]), 1e-8);
        worst = std::max(worst, std::abs(a.dtheta[i] - b.dtheta[i]) / denom);
    }
    worst = std::max(worst,
                     std::abs(a.dphi - b.dphi) / std::max(std::abs(b.dphi), 1e-8));
    return worst;
}

}  // namespace

TEST_CASE("zero loss gradient gives zero parameter gradient") {
    const auto [mesh, cs] = build_tile(GroupId::O, 2);
    TileSystem system(mesh, cs);
    Rng rng(3);
    const TileParams params = random_params(mesh, rng);
    system.solve(params);
    const std::vector<Vec2> zeros(mesh.vertex_count(), Vec2{});
    const ParamGradient grad = system.backward(params, zeros);
    CHECK(grad.dtheta.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(grad.dphi == 0.0);
}

TEST_CASE("adjoint matches finite differences on a coordinate loss") {
    const auto [mesh, cs] = build_tile(GroupId::O, 4);
    TileSystem system(mesh, cs);
    Rng rng(7);
    const TileParams params = random_params(mesh, rng, false);

    // x-coordinate of one interior vertex
    const int target = 2 * 5 + 2;
    std::vector<Vec2> dLdV(mesh.vertex_count(), Vec2{});
    dLdV[target] = {1.0, 0.0};
    system.solve(params);
    const ParamGradient adjoint = system.backward(params, dLdV);
    const ParamGradient fd = finite_diff_gradient(
        mesh, cs, params,
        [target](std::span<const Point2> pos) { return pos[target].x; }, 1e-5);
    // Single-coordinate losses have tiny per-edge gradients where central
    // differences bottom out; the Richardson test pins the convergence order.
    CHECK(max_rel_error(adjoint, fd) < 5e-4);
}

TEST_CASE("rotation-invariant loss has zero phi gradient") {
    const auto [mesh, cs] = build_tile(GroupId::g2222, 4);
    TileSystem system(mesh, cs);
    Rng rng(11);
    const TileParams params = random_params(mesh, rng);
    const SolvedTile tile = system.solve(params);
    // L = sum ||v||^2: dL/dV = 2 v
    std::vector<Vec2> dLdV(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) dLdV[v] = 2.0 * tile.positions[v];
    const ParamGradient grad = system.backward(params, dLdV);
    CHECK(std::abs(grad.dphi) < 1e-9);
}

TEST_CASE("backward is linear in the loss gradient") {
    const auto [mesh, cs] = build_tile(GroupId::g442, 2);
    TileSystem system(mesh, cs);
    Rng rng(13);
    const TileParams params = random_params(mesh, rng);
    system.solve(params);

    std::vector<Vec2> g1(mesh.vertex_count()), g2(mesh.vertex_count()),
        combo(mesh.vertex_count());
    const double a = 1.7, b = -0.4;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        g1[v] = {rng.normal(), rng.normal()};
        g2[v] = {rng.normal(), rng.normal()};
        combo[v] = a * g1[v] + b * g2[v];
    }
    const ParamGradient r1 = system.backward(params, g1);
    const ParamGradient r2 = system.backward(params, g2);
    const ParamGradient rc = system.backward(params, combo);
    CHECK((rc.dtheta - a * r1.dtheta - b * r2.dtheta).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(rc.dphi == doctest::Approx(a * r1.dphi + b * r2.dphi).epsilon(1e-12));
}

TEST_CASE("finite differences of a constant loss vanish") {
    const auto [mesh, cs] = build_tile(GroupId::O, 2);
    const TileParams params = TileParams::zeros(mesh);
    const ParamGradient fd = finite_diff_gradient(
        mesh, cs, params, [](std::span<const Point2>) { return 42.0; }, 1e-5);
    CHECK(fd.dtheta.lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK(std::abs(fd.dphi) < 1e-9);
}

TEST_CASE("finite differences converge at second order on a quadratic loss") {
    const auto [mesh, cs] = build_tile(GroupId::O, 2);
    TileSystem system(mesh, cs);
    Rng rng(17);
    const TileParams params = random_params(mesh, rng, false);

    std::vector<Vec2> anchor(mesh.vertex_count());
    for (auto& p : anchor) p = {rng.normal(), rng.normal()};
    const LossFn loss = [&anchor](std::span<const Point2> pos) {
        double total = 0.0;
        for (size_t i = 0; i < pos.size(); ++i) total += norm2(pos[i] - anchor[i]);
        return total;
    };

    const SolvedTile tile = system.solve(params);
    std::vector<Vec2> dLdV(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v)
        dLdV[v] = 2.0 * (tile.positions[v] - anchor[v]);
    const ParamGradient adjoint = system.backward(params, dLdV);

    const ParamGradient coarse = finite_diff_gradient(mesh, cs, params, loss, 1e-3);
    const ParamGradient fine = finite_diff_gradient(mesh, cs, params, loss, 5e-4);
    const double err_coarse = (coarse.dtheta - adjoint.dtheta).lpNorm<Eigen::Infinity>();
    const double err_fine = (fine.dtheta - adjoint.dtheta).lpNorm<Eigen::Infinity>();
    CHECK(err_coarse < 1e-5);
    if (err_coarse > 1e-10)  // measurable above rounding noise
        CHECK(err_fine < 0.51 * err_coarse);
    CHECK(std::abs(fine.dphi - adjoint.dphi) /
              std::max(std::abs(adjoint.dphi), 1e-8) < 1e-5);
}

TEST_CASE("adjoint-vs-FD sweep over random groups and losses") {
    Rng rng(19);
    const GroupId groups[] = {GroupId::O, GroupId::xx, GroupId::g2222, GroupId::g442,
                              GroupId::g333, GroupId::g632, GroupId::sx, GroupId::g4s2,
                              GroupId::g22s, GroupId::g3s3};
    for (int trial = 0; trial < 10; ++trial) {
        const GroupId id = groups[trial % 10];
        CAPTURE(group_name(id));
        const auto [mesh, cs] = build_tile(id, trial % 2 == 0 ? 4 : 8);
        TileSystem system(mesh, cs);
        const TileParams params = random_params(mesh, rng);

        std::vector<Vec2> coeff(mesh.vertex_count());
        for (auto& c : coeff) c = {rng.normal(), rng.normal()};
        const LossFn loss = [&coeff](std::span<const Point2> pos) {
            double total = 0.0;
            for (size_t i = 0; i < pos.size(); ++i) total += dot(coeff[i], pos[i]);
            return total;
        };
        system.solve(params);
        const ParamGradient adjoint = system.backward(params, coeff);
        const ParamGradient fd = finite_diff_gradient(mesh, cs, params, loss, 1e-5);
        CHECK(max_rel_error(adjoint, fd) < 1e-4);
    }
}

TEST_CASE("rotation chain rule consistency") {
    const auto [mesh, cs] = build_tile(GroupId::g333, 4);
    TileSystem system(mesh, cs);
    Rng rng(23);
    TileParams params = random_params(mesh, rng, false);
    const double alpha = 0.9;

    std::vector<Vec2> coeff(mesh.vertex_count());
    for (auto& c : coeff) c = {rng.normal(), rng.normal()};

    // L(V R^T) with phi = alpha ...
    params.phi = alpha;
    system.solve(params);
    const ParamGradient with_rot = system.backward(params, coeff);

    // ... equals L~(V) at phi = 0 where L~ absorbs the rotation.
    const Mat2 rt = transposed(Mat2::rotation(alpha));
    std::vector<Vec2> absorbed(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) absorbed[v] = rt * coeff[v];
    params.phi = 0.0;
    system.solve(params);
    const ParamGradient without_rot = system.backward(params, absorbed);

    CHECK((with_rot.dtheta - without_rot.dtheta).lpNorm<Eigen::Infinity>() < 1e-12);
}

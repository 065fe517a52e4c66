#include <doctest.h>

#include "escher/fit.hpp"
#include "escher/image_io.hpp"
#include "escher/rng.hpp"
#include "escher/validity.hpp"

using namespace escher;

TEST_CASE("boundary sampling on the unit square") {
    const auto [mesh, cs] = build_tile(GroupId::O, 4);
    const auto samples = sample_boundary(mesh, mesh.vertices, 4);
    REQUIRE(samples.size() == 4);
    // Perimeter 4, arc lengths {0, 1, 2, 3}: the four corners.
    CHECK(approx_equal(samples[0].point, {0, 0}, 1e-12));
    CHECK(approx_equal(samples[1].point, {1, 0}, 1e-12));
    CHECK(approx_equal(samples[2].point, {1, 1}, 1e-12));
    CHECK(approx_equal(samples[3].point, {0, 1}, 1e-12));
    for (const auto& s : samples) {
        CHECK(s.t >= 0.0);
        CHECK(s.t <= 1.0);
        // Interpolation weights form a partition of unity by construction.
        CHECK((1.0 - s.t) + s.t == doctest::Approx(1.0));
    }
}

TEST_CASE("boundary samples are arc-length uniform on a random tile") {
    const auto [mesh, cs] = build_tile(GroupId::g2222, 8);
    Rng rng(3);
    TileParams p = TileParams::zeros(mesh);
    for (Eigen::Index i = 0; i < p.theta.size(); ++i) p.theta[i] = rng.normal();
    const SolvedTile tile = solve_tile(mesh, cs, p);

    const int m = 256;
    const auto samples = sample_boundary(mesh, tile.positions, m);
    const auto& loop = mesh.boundary_loop;
    std::vector<double> cum(loop.size() + 1, 0.0);
    for (size_t i = 0; i < loop.size(); ++i)
        cum[i + 1] = cum[i] + distance(tile.positions[loop[i]],
                                       tile.positions[loop[(i + 1) % loop.size()]]);
    const double total = cum.back();
    for (int k = 0; k < m; ++k) {
        const auto& s = samples[k];
        const double arc =
            cum[s.slot] + s.t * (cum[s.slot + 1] - cum[s.slot]);
        CHECK(arc == doctest::Approx(total * k / m).epsilon(1e-9));
    }
}

TEST_CASE("chamfer basics") {
    const std::vector<Point2> x{{0, 0}, {1, 0}, {0.2, 0.7}};
    const auto self = chamfer_loss(x, x);
    CHECK(self.loss == doctest::Approx(0.0));

    const std::vector<Point2> a{{0, 0}};
    const std::vector<Point2> b{{0.3, 0.4}};
    CHECK(chamfer_loss(a, b).loss == doctest::Approx(2 * 0.25));  // both directions

    CHECK_THROWS_AS(chamfer_loss({}, b), std::invalid_argument);
}

TEST_CASE("chamfer gradient matches finite differences") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Point2> a(5), b(7);
        for (auto& p : a) p = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        for (auto& p : b) p = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const auto base = chamfer_loss(a, b);
        const double h = 1e-6;
        for (size_t i = 0; i < a.size(); ++i) {
            for (int axis = 0; axis < 2; ++axis) {
                auto plus = a, minus = a;
                (axis == 0 ? plus[i].x : plus[i].y) += h;
                (axis == 0 ? minus[i].x : minus[i].y) -= h;
                const double fd =
                    (chamfer_loss(plus, b).loss - chamfer_loss(minus, b).loss) / (2 * h);
                const double an = axis == 0 ? base.grad_a[i].x : base.grad_a[i].y;
                CHECK(std::abs(fd - an) < 1e-6);
            }
        }
    }
}

TEST_CASE("texture loss") {
    const auto [mesh, cs] = build_tile(GroupId::O, 2);
    const Texture tex = Texture::constant(4, 4, 1, 0.5);
    const RasterFields fields = rasterize_fields(mesh, mesh.vertices, 32, 32);

    RasterImage target;
    target.width = 32;
    target.height = 32;
    target.channels = 1;
    target.data.assign(32 * 32, 0.5);
    const auto zero = texture_loss(fields, tex, target);
    CHECK(zero.loss == doctest::Approx(0.0));
    for (double g : zero.grad_texels) CHECK(g == doctest::Approx(0.0));

    // Single texel against a constant target: closed-form quadratic.
    const Texture single = Texture::constant(1, 1, 1, 0.2);
    RasterImage dark = target;
    dark.data.assign(32 * 32, 0.8);
    const auto quad = texture_loss(fields, single, dark);
    CHECK(quad.loss == doctest::Approx(0.36));          // (0.2-0.8)^2
    CHECK(quad.grad_texels[0] == doctest::Approx(-1.2));  // 2(v-c)
    // One gradient-descent step moves the texel toward the target.
    CHECK(0.2 - 0.1 * quad.grad_texels[0] > 0.2);

    RasterImage mismatched = target;
    mismatched.width = 16;
    mismatched.data.resize(16 * 32);
    CHECK_THROWS_AS(texture_loss(fields, tex, mismatched), std::invalid_argument);
}

TEST_CASE("optimize with zero iterations returns the canonical tile") {
    const auto [mesh, cs] = build_tile(GroupId::O, 4);
    const TargetShape target = make_target(ellipse_polygon({0.5, 0.5}, 0.6, 0.4), 64);
    FitConfig config;
    config.iterations = 0;
    config.chamfer_samples = 64;
    const FitTrace trace = optimize(mesh, cs, target, std::nullopt, config);
    CHECK(trace.losses.empty());
    for (int v = 0; v < mesh.vertex_count(); ++v)
        CHECK(distance(trace.final_tile.positions[v], mesh.vertices[v]) < 1e-9);
    // No texture target: texels never change.
    for (double t : trace.final_texture.texels) CHECK(t == 0.5);
}

TEST_CASE("optimizing toward the initial boundary is a fixed point") {
    const auto [mesh, cs] = build_tile(GroupId::O, 4);
    Polygon2 square{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    FitConfig config;
    config.iterations = 50;
    config.chamfer_samples = 64;
    const TargetShape target = make_target(square, config.chamfer_samples);
    const FitTrace trace = optimize(mesh, cs, target, std::nullopt, config);
    REQUIRE(trace.losses.size() == 50);
    for (double loss : trace.losses)
        CHECK(std::abs(loss - trace.losses.front()) <= 1e-6);
    CHECK(trace.losses.front() <= 1e-9);
}

TEST_CASE("short blob fit reduces the chamfer loss and keeps iterates valid") {
    const auto [mesh, cs] = build_tile(GroupId::O, 8);
    const TargetShape target = make_target(ellipse_polygon({0.5, 0.5}, 0.6, 0.4), 128);
    FitConfig config;
    config.iterations = 120;
    config.chamfer_samples = 128;
    config.seed = 7;
    // optimize() itself validates every iterate and would throw on a failure.
    const FitTrace trace = optimize(mesh, cs, target, std::nullopt, config);
    REQUIRE(trace.losses.size() == 120);
    CHECK(trace.losses.back() < 0.95 * trace.losses.front());
    const ValidityReport report = full_report(mesh, cs, trace.final_tile.positions,
                                              trace.final_tile.params.phi, {});
    CHECK(report.passed);
}

TEST_CASE("fit determinism") {
    const auto [mesh, cs] = build_tile(GroupId::O, 4);
    const TargetShape target = make_target(ellipse_polygon({0.5, 0.5}, 0.6, 0.4), 64);
    FitConfig config;
    config.iterations = 25;
    config.chamfer_samples = 64;
    config.seed = 11;
    const FitTrace a = optimize(mesh, cs, target, std::nullopt, config);
    const FitTrace b = optimize(mesh, cs, target, std::nullopt, config);
    REQUIRE(a.losses.size() == b.losses.size());
    for (size_t i = 0; i < a.losses.size(); ++i) CHECK(a.losses[i] == b.losses[i]);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        CHECK(a.final_tile.positions[v].x == b.final_tile.positions[v].x);
        CHECK(a.final_tile.positions[v].y == b.final_tile.positions[v].y);
    }
}

TEST_CASE("target area sanity warning does not abort") {
    const auto [mesh, cs] = build_tile(GroupId::O, 2);
    // 0.05x the tile area: outside the sane band, still runs.
    const TargetShape tiny = make_target(ellipse_polygon({0.5, 0.5}, 0.15, 0.1), 32);
    FitConfig config;
    config.iterations = 1;
    config.chamfer_samples = 32;
    CHECK_NOTHROW(optimize(mesh, cs, tiny, std::nullopt, config));
}

TEST_CASE("mask PNG target extraction") {
    // Filled ellipse mask, 96x64.
    RasterImage mask;
    mask.width = 96;
    mask.height = 64;
    mask.channels = 1;
    mask.data.assign(96 * 64, 0.0);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 96; ++x) {
            const double dx = (x - 48.0) / 30.0, dy = (y - 32.0) / 20.0;
            if (dx * dx + dy * dy <= 1.0) mask.at(x, y, 0) = 1.0;
        }
    const std::string path = "/tmp/escher_fit_mask.png";
    write_png(mask, path);
    const TargetShape target = target_from_mask_png(path, 64);
    std::remove(path.c_str());

    CHECK(polygon_is_simple(target.polygon));
    CHECK(target.samples.size() == 64);
    // Pixels map to world / max(W, H): the ellipse has radii 30/96 and 20/96.
    const double expected_area = 3.14159265 * (30.0 / 96) * (20.0 / 96);
    CHECK(std::abs(polygon_area(target.polygon) - expected_area) <
          0.1 * expected_area);
}

TEST_CASE("texture fitting moves texels toward the target image") {
    const auto [mesh, cs] = build_tile(GroupId::O, 4);
    const TargetShape target = make_target(ellipse_polygon({0.5, 0.5}, 0.6, 0.4), 32);

    RasterImage image;
    image.width = 32;
    image.height = 32;
    image.channels = 1;
    image.data.assign(32 * 32, 0.2);

    FitConfig config;
    config.iterations = 40;
    config.chamfer_samples = 32;
    config.texture_size = 8;
    const FitTrace trace = optimize(mesh, cs, target, image, config);
    double mean = 0.0;
    for (double t : trace.final_texture.texels) mean += t;
    mean /= trace.final_texture.texels.size();
    CHECK(mean < 0.45);  // moved from 0.5 toward 0.2
    for (double t : trace.final_texture.texels) {
        CHECK(t >= 0.0);
        CHECK(t <= 1.0);
    }

    // lr_texture = 0 freezes the texels bitwise.
    config.lr_texture = 0.0;
    const FitTrace frozen = optimize(mesh, cs, target, image, config);
    for (double t : frozen.final_texture.texels) CHECK(t == 0.5);
}

TEST_CASE("loss traces stay finite across seeds") {
    const auto [mesh, cs] = build_tile(GroupId::O, 4);
    const TargetShape target = make_target(ellipse_polygon({0.5, 0.5}, 0.6, 0.4), 32);
    for (std::uint64_t seed : {1ull, 7ull, 99ull, 12345ull}) {
        FitConfig config;
        config.iterations = 10;
        config.chamfer_samples = 32;
        config.seed = seed;
        const FitTrace trace = optimize(mesh, cs, target, std::nullopt, config);
        for (double loss : trace.losses) CHECK(std::isfinite(loss));
    }
}

// escher_tile: wallpaper-group tiles as a differentiable linear-solve
// representation. Subcommands: groups, solve, fit, render, validate,
// gradcheck.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "escher/autodiff.hpp"
#include "escher/config.hpp"
#include "escher/fit.hpp"
#include "escher/image_io.hpp"
#include "escher/render.hpp"
#include "escher/rng.hpp"
#include "escher/tilefile.hpp"
#include "escher/validity.hpp"

namespace {

using namespace escher;
namespace fs = std::filesystem;

enum ExitCode {
    kOk = 0,
    kInvalid = 1,       // validity or convergence failure
    kNumerical = 2,
    kUsage = 64,
    kDataFormat = 65,
    kMissingInput = 66,
};

GroupId require_group(const std::string& name) {
    const auto id = parse_group(name);
    if (!id) {
        std::cerr << "unknown group '" << name << "'; run `escher_tile groups`\n";
        std::exit(kUsage);
    }
    return *id;
}

Eigen::VectorXd random_theta(int count, std::uint64_t seed) {
    Rng rng(Rng::mix(seed, 0xe5c4e8));
    Eigen::VectorXd theta(count);
    for (int i = 0; i < count; ++i) theta[i] = rng.normal();
    return theta;
}

void print_report(const ValidityReport& report) {
    std::printf("boundary_residual_max: %.3e\n", report.boundary_residual_max);
    std::printf("inverted_triangles:    %d\n", report.inverted_triangle_count);
    std::printf("boundary_simple:       %s\n", report.boundary_simple ? "yes" : "no");
    if (report.coverage) {
        std::printf("coverage multiplicity: mean %.4f min %d max %d over %d samples\n",
                    report.coverage->mean_multiplicity, report.coverage->min_multiplicity,
                    report.coverage->max_multiplicity, report.coverage->sample_count);
    }
    std::printf("passed:                %s\n", report.passed ? "yes" : "no");
}

ColorScheme parse_scheme(const std::string& name) {
    if (name == "by-orientation") return ColorScheme::by_orientation;
    if (name == "random") return ColorScheme::random_palette;
    if (name == "uniform") return ColorScheme::uniform;
    std::cerr << "unknown color scheme '" << name
              << "' (expected by-orientation | random | uniform)\n";
    std::exit(kUsage);
}

BBox2 scaled_window(const BBox2& tile_box, double scale) {
    const Point2 c = 0.5 * (tile_box.min + tile_box.max);
    const Vec2 half = 0.5 * scale * tile_box.extent();
    return {{c.x - half.x, c.y - half.y}, {c.x + half.x, c.y + half.y}};
}

// ---------------------------------------------------------------------------
// groups
// ---------------------------------------------------------------------------

int cmd_groups(bool interesting_only) {
    std::printf("%-6s %-28s %-12s %s\n", "group", "basic tile", "interesting",
                "boundary constraints at n=8");
    for (const auto& spec : catalog()) {
        if (interesting_only && !spec.interesting) continue;
        const auto [mesh, cs] = build_tile(spec.id, 8);
        const int twins = cs.count_kind(mesh, VertexConstraint::Kind::twin_pair);
        const int lines = cs.count_kind(mesh, VertexConstraint::Kind::on_line);
        const int pins = cs.count_kind(mesh, VertexConstraint::Kind::pinned);
        const int free = cs.count_kind(mesh, VertexConstraint::Kind::free);
        std::printf("%-6s %-28s %-12s twin=%d line=%d pin=%d free=%d\n",
                    std::string(group_name(spec.id)).c_str(), spec.tile_shape.c_str(),
                    spec.interesting ? "yes" : "no", twins, lines, pins, free);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

int cmd_solve(const std::string& group_name_arg, int n, std::uint64_t seed,
              const std::string& theta_file, double phi, const std::string& out,
              bool with_coverage) {
    const GroupId group = require_group(group_name_arg);
    auto [mesh, cs] = build_tile(group, n);

    TileParams params;
    if (!theta_file.empty()) {
        if (!fs::exists(theta_file)) {
            std::cerr << "theta file not found: " << theta_file << "\n";
            return kMissingInput;
        }
        std::ifstream in(theta_file);
        std::vector<double> values;
        double v;
        while (in >> v) values.push_back(v);
        if (static_cast<int>(values.size()) != mesh.directed_edge_count()) {
            std::cerr << "theta file has " << values.size() << " values, expected "
                      << mesh.directed_edge_count() << "\n";
            return kDataFormat;
        }
        params.theta = Eigen::Map<const Eigen::VectorXd>(
            values.data(), static_cast<Eigen::Index>(values.size()));
    } else {
        params.theta = random_theta(mesh.directed_edge_count(), seed);
    }
    params.phi = phi;

    const SolvedTile tile = solve_tile(mesh, cs, params);
    ValidityOptions opts;
    opts.with_coverage = with_coverage;
    opts.coverage_window = bbox_of(group_spec(group).basic_tile.pts);
    opts.seed = seed;
    const ValidityReport report = full_report(mesh, cs, tile.positions, params.phi, opts);
    print_report(report);
    if (!out.empty()) write_tile_file(out, tile, n);
    return report.passed ? kOk : kInvalid;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

TargetShape load_target(const std::string& path, int m) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".png")
        return target_from_mask_png(path, m);
    return target_from_points_file(path, m);
}

int cmd_fit(const RunConfig& config) {
    if (config.target_path.empty() || !fs::exists(config.target_path)) {
        std::cerr << "fit target not found: '" << config.target_path << "'\n";
        return kMissingInput;
    }
    const GroupId group = require_group(config.group);
    auto [mesh, cs] = build_tile(group, config.n);
    const TargetShape target = load_target(config.target_path, config.fit.chamfer_samples);

    std::optional<RasterImage> target_image;
    if (!config.target_image_path.empty()) {
        if (!fs::exists(config.target_image_path)) {
            std::cerr << "target image not found: " << config.target_image_path << "\n";
            return kMissingInput;
        }
        target_image = to_grayscale(read_png(config.target_image_path));
    }

    const FitTrace trace = optimize(mesh, cs, target, target_image, config.fit);

    fs::create_directories(config.out_dir);
    const fs::path dir(config.out_dir);
    write_tile_file((dir / "tile.json").string(), trace.final_tile, config.n);

    {
        std::ofstream csv(dir / "loss.csv");
        csv << "iteration,loss\n";
        char buf[64];
        for (size_t i = 0; i < trace.losses.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, trace.losses[i]);
            csv << buf;
        }
    }

    RasterImage texture_img;
    texture_img.width = trace.final_texture.width;
    texture_img.height = trace.final_texture.height;
    texture_img.channels = trace.final_texture.channels;
    texture_img.data = trace.final_texture.texels;
    write_png(texture_img, (dir / "texture.png").string());

    const BBox2 tile_box = bbox_of(boundary_polygon(mesh, trace.final_tile.positions).pts);
    const TilingLayout layout =
        enumerate_copies(group, tile_box, scaled_window(tile_box, config.window_scale),
                         parse_scheme(config.color_scheme), config.fit.seed,
                         trace.final_tile.params.phi);
    export_png(render_tiling(mesh, trace.final_tile.positions, trace.final_texture,
                             layout, config.resolution),
               (dir / "tiling.png").string());
    export_svg(mesh, trace.final_tile.positions, layout, (dir / "tiling.svg").string());
    export_obj(mesh, trace.final_tile.positions, (dir / "tile.obj").string());

    const double initial = trace.losses.empty() ? 0.0 : trace.losses.front();
    const double final_loss = trace.losses.empty() ? 0.0 : trace.losses.back();
    std::printf("iterations: %zu\ninitial loss: %.6g\nfinal loss: %.6g\n",
                trace.losses.size(), initial, final_loss);
    return kOk;
}

// ---------------------------------------------------------------------------
// render
// ---------------------------------------------------------------------------

int cmd_render(const std::string& tile_path, const std::string& texture_path,
               double window_scale, const std::string& scheme_name,
               const std::string& out_dir, int resolution, std::uint64_t seed,
               int coverage_samples) {
    if (!fs::exists(tile_path)) {
        std::cerr << "tile file not found: " << tile_path << "\n";
        return kMissingInput;
    }
    const LoadedTile loaded = read_tile_file(tile_path);  // throws TileFileError -> 65

    Texture texture = Texture::constant(64, 64, 1, 0.85);
    if (!texture_path.empty()) {
        if (!fs::exists(texture_path)) {
            std::cerr << "texture not found: " << texture_path << "\n";
            return kMissingInput;
        }
        const RasterImage img = read_png(texture_path);
        texture.width = img.width;
        texture.height = img.height;
        texture.channels = img.channels;
        texture.texels = img.data;
    }

    const auto& positions = loaded.tile.positions;
    const double phi = loaded.tile.params.phi;
    const BBox2 tile_box = bbox_of(boundary_polygon(loaded.mesh, positions).pts);
    const BBox2 window = scaled_window(tile_box, window_scale);
    const TilingLayout layout = enumerate_copies(
        loaded.tile.group, tile_box, window, parse_scheme(scheme_name), seed, phi);

    const CoverageStats stats =
        check_tiling_coverage(loaded.mesh, loaded.constraints, positions, phi, window,
                              coverage_samples, seed);
    if (stats.min_multiplicity != 1 || stats.max_multiplicity != 1) {
        std::cerr << "tiling does not cover the window with multiplicity 1 (min "
                  << stats.min_multiplicity << ", max " << stats.max_multiplicity << ")\n";
        return kInvalid;
    }

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    export_png(render_tiling(loaded.mesh, positions, texture, layout, resolution),
               (dir / "tiling.png").string());
    export_svg(loaded.mesh, positions, layout, (dir / "tiling.svg").string());
    std::printf("copies: %zu\n", layout.copies.size());
    return kOk;
}

// ---------------------------------------------------------------------------
// validate / gradcheck
// ---------------------------------------------------------------------------

int cmd_validate(const std::string& tile_path, bool with_coverage,
                 std::uint64_t seed) {
    if (!fs::exists(tile_path)) {
        std::cerr << "tile file not found: " << tile_path << "\n";
        return kMissingInput;
    }
    const LoadedTile loaded = read_tile_file(tile_path, /*require_consistent=*/false);
    ValidityOptions opts;
    opts.with_coverage = with_coverage;
    opts.coverage_window =
        bbox_of(group_spec(loaded.tile.group).basic_tile.pts);
    opts.seed = seed;
    const ValidityReport report =
        full_report(loaded.mesh, loaded.constraints, loaded.tile.positions,
                    loaded.tile.params.phi, opts);
    print_report(report);
    std::printf("self_check_error:      %.3e\n", loaded.self_check_error);
    if (!report.passed) return kInvalid;
    if (!loaded.self_consistent()) return kDataFormat;
    return kOk;
}

int cmd_gradcheck(const std::string& group_name_arg, int n, int trials,
                  std::uint64_t seed) {
    const GroupId group = require_group(group_name_arg);
    auto [mesh, cs] = build_tile(group, n);
    TileSystem system(mesh, cs);

    double worst = 0.0;
    const double h = 1e-5;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(Rng::mix(seed, trial + 1));
        TileParams params;
        params.theta = Eigen::VectorXd(mesh.directed_edge_count());
        for (int i = 0; i < mesh.directed_edge_count(); ++i) params.theta[i] = rng.normal();
        params.phi = rng.uniform(0.0, 2.0 * 3.14159265358979323846);

        std::vector<Vec2> coeff(mesh.vertex_count());
        for (auto& c : coeff) c = {rng.normal(), rng.normal()};
        const LossFn loss = [&coeff](std::span<const Point2> pos) {
            double total = 0.0;
            for (size_t i = 0; i < pos.size(); ++i) total += dot(coeff[i], pos[i]);
            return total;
        };

        system.solve(params);
        const ParamGradient adjoint = system.backward(params, coeff);
        const ParamGradient fd = finite_diff_gradient(mesh, cs, params, loss, h);
        for (Eigen::Index i = 0; i < adjoint.dtheta.size(); ++i) {
            const double denom = std::max(std::abs(fd.dtheta[i]), 1e-8);
            worst = std::max(worst, std::abs(adjoint.dtheta[i] - fd.dtheta[i]) / denom);
        }
        worst = std::max(worst, std::abs(adjoint.dphi - fd.dphi) /
                                    std::max(std::abs(fd.dphi), 1e-8));
    }
    std::printf("max adjoint-vs-FD relative error over %d trials: %.3e\n", trials, worst);
    return worst < 1e-4 ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differentiable wallpaper-group tiles: solve, fit, render"};
    app.require_subcommand(1);

    // groups
    auto* groups = app.add_subcommand("groups", "List the 17 wallpaper groups");
    bool interesting_only = false;
    groups->add_flag("--interesting", interesting_only,
                     "Only groups whose tile shape can move");

    // solve
    auto* solve = app.add_subcommand("solve", "Solve a tile for given parameters");
    std::string solve_group = "O", theta_file, solve_out;
    int solve_n = 40;
    std::uint64_t solve_seed = 0;
    double solve_phi = 0.0;
    bool solve_coverage = false;
    solve->add_option("--group", solve_group, "Orbifold group name")->required();
    solve->add_option("--n", solve_n, "Subdivision count (default 40)");
    solve->add_option("--seed", solve_seed, "Random theta seed");
    solve->add_option("--theta-file", theta_file, "Read theta values from file");
    solve->add_option("--phi", solve_phi, "Global rotation angle");
    solve->add_option("--out", solve_out, "Write the solved tile JSON here");
    solve->add_flag("--coverage", solve_coverage, "Run the Monte-Carlo coverage check");

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a tile to a target silhouette");
    std::string fit_config_path;
    std::vector<std::string> fit_sets;
    fit->add_option("--config", fit_config_path, "TOML run manifest");
    fit->add_option("--set", fit_sets,
                    "Override a config key, e.g. --set fit.iterations=100");
    std::string fit_group, fit_target, fit_target_image, fit_out_dir;
    int fit_n = 0, fit_iterations = -1;
    std::uint64_t fit_seed = 0;
    bool fit_seed_given = false;
    fit->add_option("--group", fit_group, "Orbifold group name");
    fit->add_option("--n", fit_n, "Subdivision count");
    fit->add_option("--target", fit_target, "Target polygon (.txt) or mask (.png)");
    fit->add_option("--target-image", fit_target_image, "Texture target PNG");
    fit->add_option("--out-dir", fit_out_dir, "Artifact directory");
    fit->add_option("--iterations", fit_iterations, "Optimization steps");
    fit->add_option("--seed", fit_seed, "RNG seed")->each([&](const std::string&) {
        fit_seed_given = true;
    });

    // render
    auto* render = app.add_subcommand("render", "Render a tiling from a tile file");
    std::string render_tile, render_texture, render_scheme = "by-orientation",
                render_out = ".";
    double render_window = 3.0;
    int render_resolution = 512, render_samples = 10000;
    std::uint64_t render_seed = 0;
    render->add_option("tile", render_tile, "Solved tile JSON")->required();
    render->add_option("--texture", render_texture, "Texture PNG");
    render->add_option("--window", render_window, "Window size in tile-bbox multiples");
    render->add_option("--scheme", render_scheme,
                       "by-orientation | random | uniform");
    render->add_option("--out-dir", render_out, "Artifact directory");
    render->add_option("--resolution", render_resolution, "PNG width in pixels");
    render->add_option("--seed", render_seed, "Palette seed");
    render->add_option("--coverage-samples", render_samples,
                       "Samples for the layout coverage check");

    // validate
    auto* validate = app.add_subcommand("validate", "Validity report for a tile file");
    std::string validate_tile;
    bool validate_coverage = false;
    std::uint64_t validate_seed = 0;
    validate->add_option("tile", validate_tile, "Solved tile JSON")->required();
    validate->add_flag("--coverage", validate_coverage, "Include the coverage check");
    validate->add_option("--seed", validate_seed, "Coverage sampling seed");

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "Adjoint vs finite differences");
    std::string gc_group = "O";
    int gc_n = 4, gc_trials = 3;
    std::uint64_t gc_seed = 0;
    gradcheck->add_option("--group", gc_group, "Orbifold group name");
    gradcheck->add_option("--n", gc_n, "Subdivision count (small)");
    gradcheck->add_option("--trials", gc_trials, "Random trials");
    gradcheck->add_option("--seed", gc_seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*groups) return cmd_groups(interesting_only);
        if (*solve)
            return cmd_solve(solve_group, solve_n, solve_seed, theta_file, solve_phi,
                             solve_out, solve_coverage);
        if (*fit) {
            RunConfig config;
            if (!fit_config_path.empty()) {
                if (!fs::exists(fit_config_path)) {
                    std::cerr << "config file not found: " << fit_config_path << "\n";
                    return kMissingInput;
                }
                config = run_config_from_file(fit_config_path);
            }
            for (const std::string& kv : fit_sets) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    std::cerr << "--set expects key=value, got '" << kv << "'\n";
                    return kUsage;
                }
                apply_config_entry(config, kv.substr(0, eq), kv.substr(eq + 1));
            }
            if (!fit_group.empty()) config.group = fit_group;
            if (fit_n > 0) config.n = fit_n;
            if (!fit_target.empty()) config.target_path = fit_target;
            if (!fit_target_image.empty()) config.target_image_path = fit_target_image;
            if (!fit_out_dir.empty()) config.out_dir = fit_out_dir;
            if (fit_iterations >= 0) config.fit.iterations = fit_iterations;
            if (fit_seed_given) config.fit.seed = fit_seed;
            return cmd_fit(config);
        }
        if (*render)
            return cmd_render(render_tile, render_texture, render_window, render_scheme,
                              render_out, render_resolution, render_seed, render_samples);
        if (*validate) return cmd_validate(validate_tile, validate_coverage, validate_seed);
        if (*gradcheck) return cmd_gradcheck(gc_group, gc_n, gc_trials, gc_seed);
    } catch (const SolveError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumerical;
    } catch (const FitError& e) {
        std::cerr << "fit aborted: " << e.what() << "\n";
        return kInvalid;
    } catch (const TileFileError& e) {
        std::cerr << "tile file error: " << e.what() << "\n";
        return kDataFormat;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kDataFormat;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    }
    return kUsage;
}

#include "escher/fit.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iostream>

#include "escher/rng.hpp"
#include <numbers>
#include <sstream>

#include "escher/image_io.hpp"
#include "escher/validity.hpp"

namespace escher {

// ---------------------------------------------------------------------------
// Targets
// ---------------------------------------------------------------------------

std::vector<Point2> resample_polygon(const Polygon2& poly, int m) {
    const auto& pts = poly.pts;
    const size_t n = pts.size();
    std::vector<double> cum(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i)
        cum[i + 1] = cum[i] + distance(pts[i], pts[(i + 1) % n]);
    const double total = cum[n];
    if (total <= 0.0) throw std::invalid_argument("degenerate target polygon");

    std::vector<Point2> samples(m);
    size_t seg = 0;
    for (int k = 0; k < m; ++k) {
        const double s = total * k / m;
        while (seg + 1 < n && cum[seg + 1] <= s) ++seg;
        const double t = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
        samples[k] = (1.0 - t) * pts[seg] + t * pts[(seg + 1) % n];
    }
    return samples;
}

TargetShape make_target(Polygon2 poly, int m) {
    if (poly.pts.size() < 3) throw std::invalid_argument("target needs >= 3 points");
    if (polygon_area(poly) < 0.0) {
        std::reverse(poly.pts.begin(), poly.pts.end());
        poly.simple_cache.reset();
    }
    if (!polygon_is_simple(poly))
        throw std::invalid_argument("target polygon is not simple");
    TargetShape target;
    target.samples = resample_polygon(poly, m);
    target.polygon = std::move(poly);
    return target;
}

TargetShape target_from_points_file(const std::string& path, int m) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open target file: " + path);
    Polygon2 poly;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        double x, y;
        if (ss >> x >> y) poly.pts.push_back({x, y});
    }
    return make_target(std::move(poly), m);
}

Polygon2 ellipse_polygon(Point2 center, double radius_x, double radius_y, int segments) {
    Polygon2 poly;
    poly.pts.reserve(segments);
    for (int k = 0; k < segments; ++k) {
        const double a = 2.0 * std::numbers::pi * k / segments;
        poly.pts.push_back(
            {center.x + radius_x * std::cos(a), center.y + radius_y * std::sin(a)});
    }
    return poly;
}

namespace {

// Moore-neighbor boundary trace of the largest 4-connected foreground
// component; returns pixel coordinates in order.
std::vector<Point2> trace_largest_contour(const RasterImage& mask) {
    const int w = mask.width, h = mask.height;
    auto fg = [&](int x, int y) {
        return x >= 0 && x < w && y >= 0 && y < h && mask.at(x, y, 0) >= 0.5;
    };

    std::vector<int> label(static_cast<size_t>(w) * h, -1);
    int best_label = -1, best_count = 0, best_seed = -1;
    int labels = 0;
    for (int i = 0; i < w * h; ++i) {
        if (label[i] != -1 || !(mask.data[static_cast<size_t>(i) * mask.channels] >= 0.5))
            continue;
        int count = 0;
        std::deque<int> queue{i};
        label[i] = labels;
        while (!queue.empty()) {
            const int p = queue.front();
            queue.pop_front();
            ++count;
            const int x = p % w, y = p / w;
            const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
            for (auto [dx, dy] : nb) {
                const int nx = x + dx, ny = y + dy;
                if (!fg(nx, ny)) continue;
                const int q = ny * w + nx;
                if (label[q] == -1) {
                    label[q] = labels;
                    queue.push_back(q);
                }
            }
        }
        if (count > best_count) {
            best_count = count;
            best_label = labels;
            best_seed = i;
        }
        ++labels;
    }
    if (best_label < 0) throw std::runtime_error("mask contains no foreground pixels");

    auto in_comp = [&](int x, int y) {
        return fg(x, y) && label[y * w + x] == best_label;
    };
    // Start at the component's lowest-leftmost pixel.
    int sx = best_seed % w, sy = best_seed / w;
    for (int y = 0; y < h; ++y) {
        bool found = false;
        for (int x = 0; x < w; ++x)
            if (in_comp(x, y)) {
                sx = x;
                sy = y;
                found = true;
                break;
            }
        if (found) break;
    }

    // Moore neighborhood, counterclockwise starting east.
    const int moore[8][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1},
                             {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
    std::vector<Point2> contour;
    int cx = sx, cy = sy;
    int backtrack = 4;  // came from the west
    do {
        contour.push_back({static_cast<double>(cx), static_cast<double>(cy)});
        int k = (backtrack + 1) % 8;
        int found = -1;
        for (int step = 0; step < 8; ++step, k = (k + 1) % 8) {
            const int nx = cx + moore[k][0], ny = cy + moore[k][1];
            if (in_comp(nx, ny)) {
                found = k;
                cx = nx;
                cy = ny;
                break;
            }
        }
        if (found < 0) break;  // isolated pixel
        backtrack = (found + 4) % 8;
        if (contour.size() > static_cast<size_t>(4 * w * h)) break;
    } while (cx != sx || cy != sy);
    return contour;
}

}  // namespace

TargetShape target_from_mask_png(const std::string& path, int m, int max_contour_points) {
    const RasterImage mask = to_grayscale(read_png(path));
    std::vector<Point2> contour = trace_largest_contour(mask);
    if (contour.size() < 3)
        throw std::runtime_error("mask contour is degenerate: " + path);

    const int stride =
        std::max(1, static_cast<int>(contour.size()) / max_contour_points);
    Polygon2 poly;
    for (size_t i = 0; i < contour.size(); i += stride) poly.pts.push_back(contour[i]);

    const double scale = 1.0 / std::max(mask.width, mask.height);
    for (auto& p : poly.pts) p = scale * p;
    return make_target(std::move(poly), m);
}

// ---------------------------------------------------------------------------
// Boundary sampling and losses
// ---------------------------------------------------------------------------

std::vector<BoundarySample> sample_boundary(const TriMesh& mesh,
                                            std::span<const Point2> positions, int m,
                                            double phase) {
    const auto& loop = mesh.boundary_loop;
    const int nb = static_cast<int>(loop.size());
    std::vector<double> cum(nb + 1, 0.0);
    for (int i = 0; i < nb; ++i)
        cum[i + 1] = cum[i] + distance(positions[loop[i]], positions[loop[(i + 1) % nb]]);
    const double total = cum[nb];
    if (total <= kTightEps) throw std::invalid_argument("degenerate tile boundary");

    std::vector<BoundarySample> samples(m);
    int seg = 0;
    for (int k = 0; k < m; ++k) {
        const double s = total * (k + phase) / m;
        while (seg + 1 < nb && cum[seg + 1] <= s) ++seg;
        const double t = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
        samples[k] = {(1.0 - t) * positions[loop[seg]] +
                          t * positions[loop[(seg + 1) % nb]],
                      seg, t};
    }
    return samples;
}

ChamferResult chamfer_loss(std::span<const Point2> a, std::span<const Point2> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("chamfer requires non-empty point sets");
    ChamferResult result;
    result.grad_a.assign(a.size(), Vec2{});

    // A -> B
    for (size_t i = 0; i < a.size(); ++i) {
        size_t best = 0;
        double bd = norm2(a[i] - b[0]);
        for (size_t j = 1; j < b.size(); ++j) {
            const double d = norm2(a[i] - b[j]);
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        result.loss += bd / a.size();
        result.grad_a[i] += (2.0 / a.size()) * (a[i] - b[best]);
    }
    // B -> A
    for (size_t j = 0; j < b.size(); ++j) {
        size_t best = 0;
        double bd = norm2(b[j] - a[0]);
        for (size_t i = 1; i < a.size(); ++i) {
            const double d = norm2(b[j] - a[i]);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        result.loss += bd / b.size();
        result.grad_a[best] += (2.0 / b.size()) * (a[best] - b[j]);
    }
    return result;
}

TextureLossResult texture_loss(const RasterFields& fields, const Texture& texture,
                               const RasterImage& target) {
    if (fields.width != target.width || fields.height != target.height)
        throw std::invalid_argument("render and target resolutions differ");
    if (target.channels != texture.channels)
        throw std::invalid_argument("render and target channel counts differ");

    TextureLossResult result;
    result.grad_texels.assign(texture.texels.size(), 0.0);
    int covered = 0;
    for (size_t idx = 0; idx < fields.covered.size(); ++idx)
        if (fields.covered[idx]) ++covered;
    if (covered == 0) return result;

    const double inv = 1.0 / (covered * texture.channels);
    for (int y = 0; y < fields.height; ++y) {
        for (int x = 0; x < fields.width; ++x) {
            const size_t idx = static_cast<size_t>(y) * fields.width + x;
            if (!fields.covered[idx]) continue;
            const Point2 uv = fields.uv[idx];
            const BilinearTap tap = bilinear_tap(texture, uv.x, uv.y);
            for (int c = 0; c < texture.channels; ++c) {
                double value = 0.0;
                for (int k = 0; k < 4; ++k)
                    value += tap.weight[k] * texture.texels[tap.texel[k] * texture.channels + c];
                const double diff = value - target.at(x, y, c);
                result.loss += diff * diff * inv;
                for (int k = 0; k < 4; ++k)
                    result.grad_texels[tap.texel[k] * texture.channels + c] +=
                        2.0 * diff * tap.weight[k] * inv;
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Optimization
// ---------------------------------------------------------------------------

namespace {

class Adam {
  public:
    Adam(Eigen::Index size, double b1, double b2, double eps)
        : m_(Eigen::VectorXd::Zero(size)),
          v_(Eigen::VectorXd::Zero(size)),
          b1_(b1), b2_(b2), eps_(eps) {}

    void step(Eigen::Ref<Eigen::VectorXd> x, const Eigen::VectorXd& g, double lr) {
        ++t_;
        m_ = b1_ * m_ + (1.0 - b1_) * g;
        v_ = b2_ * v_ + (1.0 - b2_) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(b1_, t_);
        const double c2 = 1.0 - std::pow(b2_, t_);
        x -= lr * (m_ / c1).cwiseQuotient(((v_ / c2).cwiseSqrt().array() + eps_).matrix());
    }

  private:
    Eigen::VectorXd m_, v_;
    double b1_, b2_, eps_;
    int t_ = 0;
};

}  // namespace

FitTrace optimize(const TriMesh& mesh, const ConstraintSet& constraints,
                  const TargetShape& target,
                  const std::optional<RasterImage>& target_image,
                  const FitConfig& config) {
    if (config.lr_theta <= 0.0 || config.lr_phi <= 0.0 || config.lr_texture < 0.0)
        throw std::invalid_argument("learning rates must be positive");
    if (config.chamfer_samples < 8)
        throw std::invalid_argument("chamfer needs at least 8 samples");

    double tile_area = 0.0;
    for (const auto& t : mesh.triangles)
        tile_area += signed_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    const double ratio = std::abs(polygon_area(target.polygon)) / tile_area;
    if (ratio < 0.2 || ratio > 5.0)
        std::cerr << "warning: target area is " << ratio
                  << "x the basic tile area; fit may behave poorly\n";

    TileSystem system(mesh, constraints);
    TileParams params = TileParams::zeros(mesh);

    const bool fit_texture = target_image.has_value();
    std::optional<RasterImage> gray_target;
    Texture texture = Texture::constant(
        fit_texture ? target_image->width : config.texture_size,
        fit_texture ? target_image->height : config.texture_size,
        fit_texture ? target_image->channels : 1, 0.5);
    if (fit_texture) gray_target = *target_image;

    Adam adam_theta(params.theta.size(), config.adam_beta1, config.adam_beta2,
                    config.adam_eps);
    Adam adam_phi(1, config.adam_beta1, config.adam_beta2, config.adam_eps);
    Adam adam_tex(fit_texture ? static_cast<Eigen::Index>(texture.texels.size()) : 0,
                  config.adam_beta1, config.adam_beta2, config.adam_eps);

    FitTrace trace;
    trace.losses.reserve(config.iterations);

    for (int iter = 0; iter < config.iterations; ++iter) {
        const SolvedTile tile = system.solve(params);
        const ValidityReport report =
            full_report(mesh, constraints, tile.positions, params.phi, {});
        if (!report.passed)
            throw FitError("iterate failed tile validity at iteration " +
                           std::to_string(iter));

        const auto samples =
            sample_boundary(mesh, tile.positions, config.chamfer_samples);
        std::vector<Point2> sample_pts(samples.size());
        for (size_t i = 0; i < samples.size(); ++i) sample_pts[i] = samples[i].point;
        const ChamferResult chamfer = chamfer_loss(sample_pts, target.samples);

        std::vector<Vec2> dLdV(mesh.vertex_count(), Vec2{});
        const auto& loop = mesh.boundary_loop;
        for (size_t i = 0; i < samples.size(); ++i) {
            const int a = loop[samples[i].slot];
            const int b = loop[(samples[i].slot + 1) % loop.size()];
            dLdV[a] += (1.0 - samples[i].t) * chamfer.grad_a[i];
            dLdV[b] += samples[i].t * chamfer.grad_a[i];
        }

        double loss = chamfer.loss;
        TextureLossResult tex_result;
        if (fit_texture) {
            const RasterFields fields = rasterize_fields(
                mesh, tile.positions, gray_target->width, gray_target->height);
            tex_result = texture_loss(fields, texture, *gray_target);
            loss += config.texture_weight * tex_result.loss;
        }
        if (!std::isfinite(loss))
            throw FitError("non-finite loss at iteration " + std::to_string(iter));
        trace.losses.push_back(loss);

        const ParamGradient grad = system.backward(params, dLdV);

        // Adam normalizes per coordinate, which would amplify numerically-zero
        // gradients into full-size steps; keep exact optima fixed points.
        double gmax = std::max(grad.dtheta.lpNorm<Eigen::Infinity>(),
                               std::abs(grad.dphi));
        if (fit_texture)
            for (double g : tex_result.grad_texels)
                gmax = std::max(gmax, config.texture_weight * std::abs(g));
        if (gmax < 1e-12) continue;
        adam_theta.step(params.theta, grad.dtheta, config.lr_theta);
        Eigen::VectorXd phi_vec(1), phi_grad(1);
        phi_vec[0] = params.phi;
        phi_grad[0] = grad.dphi;
        adam_phi.step(phi_vec, phi_grad, config.lr_phi);
        params.phi = phi_vec[0];

        if (fit_texture && config.lr_texture > 0.0) {
            Eigen::VectorXd tex_vec = Eigen::Map<const Eigen::VectorXd>(
                texture.texels.data(), texture.texels.size());
            Eigen::VectorXd tex_grad = Eigen::Map<const Eigen::VectorXd>(
                                           tex_result.grad_texels.data(),
                                           tex_result.grad_texels.size()) *
                                       config.texture_weight;
            adam_tex.step(tex_vec, tex_grad, config.lr_texture);
            for (size_t i = 0; i < texture.texels.size(); ++i)
                texture.texels[i] = std::clamp(tex_vec[static_cast<Eigen::Index>(i)], 0.0, 1.0);
        }
    }

    trace.final_tile = system.solve(params);
    trace.final_texture = std::move(texture);
    return trace;
}

}  // namespace escher

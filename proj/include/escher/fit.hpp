#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "escher/render.hpp"
#include "escher/tilesolve.hpp"

namespace escher {

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Closed target silhouette with an arc-length-uniform sample set.
struct TargetShape {
    Polygon2 polygon;
    std::vector<Point2> samples;
};

std::vector<Point2> resample_polygon(const Polygon2& poly, int m);
TargetShape make_target(Polygon2 poly, int m);
// Plain-text point list, one "x y" pair per line.
TargetShape target_from_points_file(const std::string& path, int m);
// Largest foreground contour of a binary mask (threshold 0.5), simplified to
// at most `max_contour_points` vertices. Pixels map to world units scaled by
// 1 / max(width, height).
TargetShape target_from_mask_png(const std::string& path, int m,
                                 int max_contour_points = 512);
Polygon2 ellipse_polygon(Point2 center, double radius_x, double radius_y,
                         int segments = 256);

struct FitConfig {
    int iterations = 500;
    double lr_theta = 0.1;
    double lr_phi = 0.1;
    double lr_texture = 0.01;
    int chamfer_samples = 256;   // m
    double texture_weight = 1.0;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int texture_size = 64;
};

// A point on the tile boundary with the interpolation data that routes its
// gradient to the two edge endpoints.
struct BoundarySample {
    Point2 point;
    int slot = 0;    // index into the boundary loop (edge loop[slot] -> loop[slot+1])
    double t = 0.0;  // barycentric coordinate along that edge
};

// Samples at arc lengths (k + phase) * perimeter / m. The optimizer jitters
// the phase each iteration so the loss is not locked to one sampling comb.
std::vector<BoundarySample> sample_boundary(const TriMesh& mesh,
                                            std::span<const Point2> positions, int m,
                                            double phase = 0.0);

// Symmetric mean of squared nearest-neighbor distances with the gradient with
// respect to set A; nearest assignments are constants per evaluation.
struct ChamferResult {
    double loss = 0.0;
    std::vector<Vec2> grad_a;
};
ChamferResult chamfer_loss(std::span<const Point2> a, std::span<const Point2> b);

// MSE over tile-covered pixels against the target, with texel gradients via
// the bilinear taps. Geometry receives no gradient from this term.
struct TextureLossResult {
    double loss = 0.0;
    std::vector<double> grad_texels;
};
TextureLossResult texture_loss(const RasterFields& fields, const Texture& texture,
                               const RasterImage& target);

struct FitTrace {
    std::vector<double> losses;
    SolvedTile final_tile;
    Texture final_texture;
};

// Adam over (theta, phi[, texels]): solve, sample the boundary, chamfer to the
// target (plus the texture term when a target image is given), adjoint
// backward, step. Aborts with FitError on non-finite losses.
FitTrace optimize(const TriMesh& mesh, const ConstraintSet& constraints,
                  const TargetShape& target,
                  const std::optional<RasterImage>& target_image,
                  const FitConfig& config);

}  // namespace escher

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "escher/mesh.hpp"
#include "escher/wallpaper.hpp"

namespace escher {

// ---------------------------------------------------------------------------
// Texture
// ---------------------------------------------------------------------------

struct Texture {
    int width = 1;
    int height = 1;
    int channels = 1;  // 1 grayscale or 3 RGB
    std::vector<double> texels;  // row-major, row 0 at v = 0, values in [0, 1]

    static Texture constant(int w, int h, int ch, double value);
    double& at(int x, int y, int c) { return texels[(y * width + x) * channels + c]; }
    double at(int x, int y, int c) const { return texels[(y * width + x) * channels + c]; }
    double sample(double u, double v, int c) const;  // bilinear, uv clamped to [0,1]
};

// Bilinear footprint of a UV sample: four texel indices and weights.
struct BilinearTap {
    std::array<int, 4> texel;   // flat indices (x, y) into the texture grid
    std::array<double, 4> weight;
};
BilinearTap bilinear_tap(const Texture& tex, double u, double v);

// ---------------------------------------------------------------------------
// Raster images
// ---------------------------------------------------------------------------

struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> data;  // row-major, row 0 at the world-space bottom
    Point2 world_min{0, 0};
    Point2 world_max{1, 1};

    double& at(int x, int y, int c) { return data[(y * width + x) * channels + c]; }
    double at(int x, int y, int c) const { return data[(y * width + x) * channels + c]; }
    Point2 pixel_center(int x, int y) const;
};

// Coverage and interpolated UVs per pixel; the part of rasterization that the
// texture fit differentiates through.
struct RasterFields {
    int width = 0;
    int height = 0;
    std::vector<char> covered;
    std::vector<Point2> uv;
    Point2 world_min{0, 0};
    Point2 world_max{1, 1};
};

RasterFields rasterize_fields(const TriMesh& mesh, std::span<const Point2> positions,
                              int width, int height,
                              std::optional<BBox2> window = std::nullopt);

// Point-sampled rasterization of the textured tile over its bounding box
// (or an explicit window). Background pixels get `background`.
RasterImage rasterize_tile(const TriMesh& mesh, std::span<const Point2> positions,
                           const Texture& texture, int resolution,
                           std::optional<BBox2> window = std::nullopt,
                           double background = 1.0);

// ---------------------------------------------------------------------------
// Tiling composition
// ---------------------------------------------------------------------------

enum class ColorScheme { by_orientation, random_palette, uniform };

struct TilingLayout {
    std::vector<std::pair<Isometry2, std::array<double, 3>>> copies;
    BBox2 window;
};

// Copies of the group whose transformed tile bounding box meets the window,
// colored per scheme. `phi` conjugates the group to follow a rotated tile.
TilingLayout enumerate_copies(GroupId group, const BBox2& tile_box, const BBox2& window,
                              ColorScheme scheme, std::uint64_t seed, double phi = 0.0);

// Rasterizes every copy, multiplying texture values by the copy color.
// Covered pixels are never overwritten by later copies.
RasterImage render_tiling(const TriMesh& mesh, std::span<const Point2> positions,
                          const Texture& texture, const TilingLayout& layout,
                          int resolution, double background = 1.0);

// ---------------------------------------------------------------------------
// Exporters
// ---------------------------------------------------------------------------

void export_svg(const TriMesh& mesh, std::span<const Point2> positions,
                const TilingLayout& layout, const std::string& path);
void export_obj(const TriMesh& mesh, std::span<const Point2> positions,
                const std::string& path);
void export_png(const RasterImage& image, const std::string& path);

}  // namespace escher

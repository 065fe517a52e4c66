#include "escher/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "escher/image_io.hpp"
#include "escher/parallel.hpp"
#include "escher/rng.hpp"

namespace escher {

// ---------------------------------------------------------------------------
// Texture
// ---------------------------------------------------------------------------

Texture Texture::constant(int w, int h, int ch, double value) {
    if (w < 1 || h < 1 || (ch != 1 && ch != 3))
        throw std::invalid_argument("texture must be >=1x1 with 1 or 3 channels");
    Texture t;
    t.width = w;
    t.height = h;
    t.channels = ch;
    t.texels.assign(static_cast<size_t>(w) * h * ch, value);
    return t;
}

BilinearTap bilinear_tap(const Texture& tex, double u, double v) {
    // Texel centers at (i + 0.5) / width.
    const double fx = std::clamp(u, 0.0, 1.0) * tex.width - 0.5;
    const double fy = std::clamp(v, 0.0, 1.0) * tex.height - 0.5;
    const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, tex.width - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, tex.height - 1);
    const int x1 = std::min(x0 + 1, tex.width - 1);
    const int y1 = std::min(y0 + 1, tex.height - 1);
    const double ax = std::clamp(fx - x0, 0.0, 1.0);
    const double ay = std::clamp(fy - y0, 0.0, 1.0);
    BilinearTap tap;
    tap.texel = {y0 * tex.width + x0, y0 * tex.width + x1, y1 * tex.width + x0,
                 y1 * tex.width + x1};
    tap.weight = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
    return tap;
}

double Texture::sample(double u, double v, int c) const {
    const BilinearTap tap = bilinear_tap(*this, u, v);
    double value = 0.0;
    for (int k = 0; k < 4; ++k)
        value += tap.weight[k] * texels[tap.texel[k] * channels + c];
    return value;
}

Point2 RasterImage::pixel_center(int x, int y) const {
    const Vec2 ext = world_max - world_min;
    return {world_min.x + (x + 0.5) / width * ext.x,
            world_min.y + (y + 0.5) / height * ext.y};
}

// ---------------------------------------------------------------------------
// Rasterization
// ---------------------------------------------------------------------------

namespace {

struct PixelFrame {
    Point2 world_min, world_max;
    double sx, sy;  // pixels per world unit
    int width, height;

    Point2 center(int x, int y) const {
        return {world_min.x + (x + 0.5) / sx, world_min.y + (y + 0.5) / sy};
    }
};

PixelFrame make_frame(const BBox2& window, int width, int height) {
    PixelFrame f;
    f.world_min = window.min;
    f.world_max = window.max;
    f.width = width;
    f.height = height;
    f.sx = width / (window.max.x - window.min.x);
    f.sy = height / (window.max.y - window.min.y);
    return f;
}

// Visits pixel centers covered by the CCW triangle (a, b, c).
template <class Fn>
void raster_triangle(const PixelFrame& f, Point2 a, Point2 b, Point2 c, Fn&& emit) {
    BBox2 box;
    box.expand(a);
    box.expand(b);
    box.expand(c);
    int x0 = std::max(0, static_cast<int>(std::floor((box.min.x - f.world_min.x) * f.sx - 0.5)));
    int x1 = std::min(f.width - 1, static_cast<int>(std::ceil((box.max.x - f.world_min.x) * f.sx)));
    int y0 = std::max(0, static_cast<int>(std::floor((box.min.y - f.world_min.y) * f.sy - 0.5)));
    int y1 = std::min(f.height - 1, static_cast<int>(std::ceil((box.max.y - f.world_min.y) * f.sy)));
    const double area = cross(b - a, c - a);
    if (area <= 0.0) return;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const Point2 p = f.center(x, y);
            const double w0 = cross(b - p, c - p);
            const double w1 = cross(c - p, a - p);
            const double w2 = cross(a - p, b - p);
            if (w0 < 0 || w1 < 0 || w2 < 0) continue;
            emit(x, y, w0 / area, w1 / area, w2 / area);
        }
    }
}

BBox2 positions_box(std::span<const Point2> positions) {
    BBox2 b;
    for (Point2 p : positions) b.expand(p);
    return b;
}

}  // namespace

RasterFields rasterize_fields(const TriMesh& mesh, std::span<const Point2> positions,
                              int width, int height, std::optional<BBox2> window) {
    if (width < 1 || height < 1) throw std::invalid_argument("raster size must be >= 1");
    const BBox2 box = window ? *window : positions_box(positions);
    const PixelFrame frame = make_frame(box, width, height);
    RasterFields fields;
    fields.width = width;
    fields.height = height;
    fields.world_min = box.min;
    fields.world_max = box.max;
    fields.covered.assign(static_cast<size_t>(width) * height, 0);
    fields.uv.assign(static_cast<size_t>(width) * height, Point2{});
    for (const auto& t : mesh.triangles) {
        raster_triangle(frame, positions[t[0]], positions[t[1]], positions[t[2]],
                        [&](int x, int y, double b0, double b1, double b2) {
                            const size_t idx = static_cast<size_t>(y) * width + x;
                            if (fields.covered[idx]) return;
                            fields.covered[idx] = 1;
                            fields.uv[idx] = b0 * mesh.uvs[t[0]] + b1 * mesh.uvs[t[1]] +
                                             b2 * mesh.uvs[t[2]];
                        });
    }
    return fields;
}

RasterImage rasterize_tile(const TriMesh& mesh, std::span<const Point2> positions,
                           const Texture& texture, int resolution,
                           std::optional<BBox2> window, double background) {
    if (resolution < 16) throw std::invalid_argument("resolution must be >= 16");
    const RasterFields fields =
        rasterize_fields(mesh, positions, resolution, resolution, window);
    RasterImage img;
    img.width = fields.width;
    img.height = fields.height;
    img.channels = texture.channels;
    img.world_min = fields.world_min;
    img.world_max = fields.world_max;
    img.data.assign(static_cast<size_t>(img.width) * img.height * img.channels,
                    background);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const size_t idx = static_cast<size_t>(y) * img.width + x;
            if (!fields.covered[idx]) continue;
            for (int c = 0; c < img.channels; ++c)
                img.at(x, y, c) = texture.sample(fields.uv[idx].x, fields.uv[idx].y, c);
        }
    }
    return img;
}

// ---------------------------------------------------------------------------
// Tiling composition
// ---------------------------------------------------------------------------

namespace {

std::array<double, 3> palette_color(int index, int count) {
    // Evenly spaced hues at fixed saturation/value.
    const double h = count > 0 ? (index % count) * (360.0 / count) : 0.0;
    const double s = 0.45, v = 0.95;
    const double c = v * s;
    const double hp = h / 60.0;
    const double xv = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = xv; }
    else if (hp < 2) { r = xv; g = c; }
    else if (hp < 3) { g = c; b = xv; }
    else if (hp < 4) { g = xv; b = c; }
    else if (hp < 5) { r = xv; b = c; }
    else { r = c; b = xv; }
    const double m = v - c;
    return {r + m, g + m, b + m};
}

std::array<long long, 4> linear_key(const Isometry2& g) {
    auto q = [](double v) { return std::llround(v * 1e7); };
    return {q(g.linear.a00), q(g.linear.a01), q(g.linear.a10), q(g.linear.a11)};
}

}  // namespace

TilingLayout enumerate_copies(GroupId group, const BBox2& tile_box, const BBox2& window,
                              ColorScheme scheme, std::uint64_t seed, double phi) {
    std::vector<Isometry2> gens = tiling_generators(group);
    if (phi != 0.0) {
        const Isometry2 rot = Isometry2::rotation(phi, {0, 0});
        const Isometry2 rot_inv = inverse(rot);
        for (auto& g : gens) g = compose(rot, compose(g, rot_inv));
    }
    const auto copies = enumerate_group_copies(gens, tile_box, window);

    // Group linear parts for the orientation scheme.
    std::map<std::array<long long, 4>, int> orientation_class;
    for (const auto& g : copies)
        orientation_class.emplace(linear_key(g), static_cast<int>(orientation_class.size()));

    TilingLayout layout;
    layout.window = window;
    layout.copies.reserve(copies.size());
    for (size_t i = 0; i < copies.size(); ++i) {
        std::array<double, 3> color{1.0, 1.0, 1.0};
        switch (scheme) {
            case ColorScheme::uniform:
                break;
            case ColorScheme::by_orientation:
                color = palette_color(orientation_class[linear_key(copies[i])],
                                      static_cast<int>(orientation_class.size()));
                break;
            case ColorScheme::random_palette: {
                Rng r(Rng::mix(seed, i + 1));
                color = palette_color(static_cast<int>(r.next_u64() % 12), 12);
                break;
            }
        }
        layout.copies.emplace_back(copies[i], color);
    }
    return layout;
}

RasterImage render_tiling(const TriMesh& mesh, std::span<const Point2> positions,
                          const Texture& texture, const TilingLayout& layout,
                          int resolution, double background) {
    if (resolution < 16) throw std::invalid_argument("resolution must be >= 16");
    const Vec2 ext = layout.window.extent();
    const int width = resolution;
    const int height = std::max(1, static_cast<int>(std::lround(resolution * ext.y / ext.x)));
    const PixelFrame frame = make_frame(layout.window, width, height);

    RasterImage img;
    img.width = width;
    img.height = height;
    img.channels = 3;
    img.world_min = layout.window.min;
    img.world_max = layout.window.max;
    img.data.assign(static_cast<size_t>(width) * height * 3, background);
    std::vector<char> covered(static_cast<size_t>(width) * height, 0);

    std::vector<Point2> moved(positions.size());
    for (const auto& [g, color] : layout.copies) {
        for (size_t i = 0; i < positions.size(); ++i) moved[i] = apply(g, positions[i]);
        for (const auto& t : mesh.triangles) {
            raster_triangle(frame, moved[t[0]], moved[t[1]], moved[t[2]],
                            [&](int x, int y, double b0, double b1, double b2) {
                                const size_t idx = static_cast<size_t>(y) * width + x;
                                if (covered[idx]) return;
                                covered[idx] = 1;
                                const Point2 uv = b0 * mesh.uvs[t[0]] +
                                                  b1 * mesh.uvs[t[1]] +
                                                  b2 * mesh.uvs[t[2]];
                                for (int c = 0; c < 3; ++c) {
                                    const int tc = texture.channels == 3 ? c : 0;
                                    img.at(x, y, c) =
                                        color[c] * texture.sample(uv.x, uv.y, tc);
                                }
                            });
        }
    }
    return img;
}

// ---------------------------------------------------------------------------
// Exporters
// ---------------------------------------------------------------------------

namespace {

std::string hex_color(const std::array<double, 3>& c) {
    char buf[8];
    auto q = [](double v) {
        return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    };
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", q(c[0]), q(c[1]), q(c[2]));
    return buf;
}

}  // namespace

void export_svg(const TriMesh& mesh, std::span<const Point2> positions,
                const TilingLayout& layout, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write SVG file: " + path);
    char buf[64];
    const Point2 lo = layout.window.min;
    const Vec2 ext = layout.window.extent();
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 ";
    std::snprintf(buf, sizeof(buf), "%.6f %.6f", ext.x, ext.y);
    out << buf << "\">\n";
    for (const auto& [g, color] : layout.copies) {
        out << "  <path d=\"";
        bool first = true;
        for (int v : mesh.boundary_loop) {
            const Point2 p = apply(g, positions[v]);
            // SVG y grows downward.
            std::snprintf(buf, sizeof(buf), "%c%.6f %.6f", first ? 'M' : 'L',
                          p.x - lo.x, ext.y - (p.y - lo.y));
            out << buf;
            first = false;
        }
        out << "Z\" fill=\"" << hex_color(color) << "\" stroke=\"none\"/>\n";
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("failed while writing SVG file: " + path);
}

void export_obj(const TriMesh& mesh, std::span<const Point2> positions,
                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write OBJ file: " + path);
    char buf[96];
    for (const Point2& p : positions) {
        std::snprintf(buf, sizeof(buf), "v %.6f %.6f 0.000000\n", p.x, p.y);
        out << buf;
    }
    for (const Point2& uv : mesh.uvs) {
        std::snprintf(buf, sizeof(buf), "vt %.6f %.6f\n", uv.x, uv.y);
        out << buf;
    }
    for (const auto& t : mesh.triangles) {
        std::snprintf(buf, sizeof(buf), "f %d/%d %d/%d %d/%d\n", t[0] + 1, t[0] + 1,
                      t[1] + 1, t[1] + 1, t[2] + 1, t[2] + 1);
        out << buf;
    }
    if (!out) throw std::runtime_error("failed while writing OBJ file: " + path);
}

void export_png(const RasterImage& image, const std::string& path) {
    write_png(image, path);
}

}  // namespace escher

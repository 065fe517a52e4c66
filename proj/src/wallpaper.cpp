#include "escher/wallpaper.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <stdexcept>

namespace escher {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt3 = std::sqrt(3.0);

// Consistency tolerance for canonical tables. Builders are exact up to
// floating-point rounding, so 1e-9 flags genuine mistakes only.
constexpr double kTableTol = 1e-9;

}  // namespace

// ---------------------------------------------------------------------------
// Group identity
// ---------------------------------------------------------------------------

const std::vector<GroupId>& all_groups() {
    static const std::vector<GroupId> ids = {
        GroupId::O,     GroupId::xx,   GroupId::sx,   GroupId::ss,
        GroupId::g2222, GroupId::g22x, GroupId::g22s, GroupId::g2s22,
        GroupId::s2222, GroupId::g442, GroupId::g4s2, GroupId::s442,
        GroupId::g333,  GroupId::g3s3, GroupId::s333, GroupId::g632,
        GroupId::s632};
    return ids;
}

std::string_view group_name(GroupId id) {
    switch (id) {
        case GroupId::O: return "O";
        case GroupId::xx: return "xx";
        case GroupId::sx: return "*x";
        case GroupId::ss: return "**";
        case GroupId::g2222: return "2222";
        case GroupId::g22x: return "22x";
        case GroupId::g22s: return "22*";
        case GroupId::g2s22: return "2*22";
        case GroupId::s2222: return "*2222";
        case GroupId::g442: return "442";
        case GroupId::g4s2: return "4*2";
        case GroupId::s442: return "*442";
        case GroupId::g333: return "333";
        case GroupId::g3s3: return "3*3";
        case GroupId::s333: return "*333";
        case GroupId::g632: return "632";
        case GroupId::s632: return "*632";
    }
    return "?";
}

std::optional<GroupId> parse_group(std::string_view name) {
    for (GroupId id : all_groups())
        if (group_name(id) == name) return id;
    return std::nullopt;
}

bool group_interesting(GroupId id) {
    // The four pure-reflection groups have a completely fixed convex boundary.
    return id != GroupId::s2222 && id != GroupId::s442 && id != GroupId::s333 &&
           id != GroupId::s632;
}

// ---------------------------------------------------------------------------
// Canonical isometries per group
// ---------------------------------------------------------------------------

namespace {

Line2 vline(double x) { return {{x, 0.0}, {0.0, 1.0}}; }
Line2 hline(double y) { return {{0.0, y}, {1.0, 0.0}}; }

Isometry2 rot(double angle, Point2 c) { return Isometry2::rotation(angle, c); }
Isometry2 half_turn(Point2 c) { return Isometry2::rotation(kPi, c); }

Polygon2 square_poly() {
    return {{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
}
Polygon2 right_triangle_poly() {
    return {{{0, 0}, {1, 0}, {1, 1}}};
}
Polygon2 rhombus_poly() {
    return {{{0, 0}, {1, 0}, {1.5, kSqrt3 / 2}, {0.5, kSqrt3 / 2}}};
}
Polygon2 equilateral_poly() {
    return {{{0, 0}, {1, 0}, {0.5, kSqrt3 / 2}}};
}
Polygon2 obtuse_isoceles_poly() {
    return {{{0, 0}, {1, 0}, {0.5, kSqrt3 / 6}}};
}
Polygon2 half_equilateral_poly() {
    return {{{0, 0}, {1, 0}, {1, 1 / kSqrt3}}};
}

// Linear maps applied to lower_triangle_mesh for the 3-fold family.
Mat2 equilateral_map() { return {1.0, -0.5, 0.0, kSqrt3 / 2}; }
Mat2 obtuse_isoceles_map() { return {1.0, -0.5, 0.0, kSqrt3 / 6}; }
Mat2 half_equilateral_map() { return {1.0, 0.0, 0.0, 1 / kSqrt3}; }

// Mirror lines of the triangular domains.
Line2 diag_line() { return {{0, 0}, normalized({1, 1})}; }
Line2 deg60_line() { return {{0, 0}, {0.5, kSqrt3 / 2}}; }
Line2 deg30_line() { return {{0, 0}, {kSqrt3 / 2, 0.5}}; }
Line2 equilateral_right_line() { return {{1, 0}, {-0.5, kSqrt3 / 2}}; }

}  // namespace

std::vector<Isometry2> tiling_generators(GroupId id) {
    switch (id) {
        case GroupId::O:
            return {Isometry2::translate({1, 0}), Isometry2::translate({0, 1})};
        case GroupId::xx:
            return {Isometry2::translate({1, 0}),
                    Isometry2::glide(vline(0.5), 1.0)};
        case GroupId::sx:
            return {Isometry2::reflection(vline(0.0)),
                    Isometry2::glide(vline(1.0), 0.5),
                    Isometry2::translate({0, 1})};
        case GroupId::ss:
            return {Isometry2::reflection(vline(0.0)),
                    Isometry2::reflection(vline(1.0)),
                    Isometry2::translate({0, 1})};
        case GroupId::g2222:
            return {half_turn({0.5, 0}), half_turn({0.5, 1}), half_turn({0, 0.5}),
                    half_turn({1, 0.5})};
        case GroupId::g22x:
            return {half_turn({0.5, 0}), half_turn({0.5, 1}),
                    Isometry2::glide(hline(0.5), 1.0)};
        case GroupId::g22s:
            return {Isometry2::reflection(vline(0.0)),
                    Isometry2::reflection(vline(1.0)), half_turn({0.5, 0}),
                    half_turn({0.5, 1})};
        case GroupId::g2s22:
            return {Isometry2::reflection(hline(0.0)),
                    Isometry2::reflection(vline(1.0)), half_turn({0.5, 0.5})};
        case GroupId::s2222:
            return {Isometry2::reflection(vline(0.0)),
                    Isometry2::reflection(vline(1.0)),
                    Isometry2::reflection(hline(0.0)),
                    Isometry2::reflection(hline(1.0))};
        case GroupId::g442:
            return {rot(kPi / 2, {0, 0}), rot(kPi / 2, {1, 1})};
        case GroupId::g4s2:
            return {rot(kPi / 2, {1, 0}), Isometry2::reflection(diag_line())};
        case GroupId::s442:
            return {Isometry2::reflection(hline(0.0)),
                    Isometry2::reflection(vline(1.0)),
                    Isometry2::reflection(diag_line())};
        case GroupId::g333:
            return {rot(-2 * kPi / 3, {1, 0}),
                    rot(2 * kPi / 3, {0.5, kSqrt3 / 2})};
        case GroupId::g3s3:
            return {Isometry2::reflection(hline(0.0)),
                    rot(2 * kPi / 3, {0.5, kSqrt3 / 6})};
        case GroupId::s333:
            return {Isometry2::reflection(hline(0.0)),
                    Isometry2::reflection(deg60_line()),
                    Isometry2::reflection(equilateral_right_line())};
        case GroupId::g632:
            return {rot(kPi / 3, {0, 0}), half_turn({0.75, kSqrt3 / 4})};
        case GroupId::s632:
            return {Isometry2::reflection(hline(0.0)),
                    Isometry2::reflection(vline(1.0)),
                    Isometry2::reflection(deg30_line())};
    }
    throw std::invalid_argument("unknown group");
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

const std::vector<GroupSpec>& catalog() {
    static const std::vector<GroupSpec> specs = [] {
        std::vector<GroupSpec> v;
        auto add = [&v](GroupId id, std::string shape, Polygon2 poly, int mult,
                        std::string parity) {
            v.push_back({id, group_interesting(id), std::move(shape),
                         std::move(poly), mult, std::move(parity)});
        };
        add(GroupId::O, "unit square", square_poly(), 1, "");
        add(GroupId::xx, "unit square", square_poly(), 1, "");
        add(GroupId::sx, "unit square", square_poly(), 2,
            "glide half-period vertex (1, 0.5)");
        add(GroupId::ss, "unit square", square_poly(), 1, "");
        add(GroupId::g2222, "unit square", square_poly(), 2,
            "cone point (0.5, 0)");
        add(GroupId::g22x, "unit square", square_poly(), 2,
            "cone point (0.5, 0)");
        add(GroupId::g22s, "unit square", square_poly(), 2,
            "cone point (0.5, 0)");
        add(GroupId::g2s22, "right isoceles triangle", right_triangle_poly(), 2,
            "cone point (0.5, 0.5)");
        add(GroupId::s2222, "unit square", square_poly(), 1, "");
        add(GroupId::g442, "unit square", square_poly(), 1, "");
        add(GroupId::g4s2, "right isoceles triangle", right_triangle_poly(), 1, "");
        add(GroupId::s442, "right isoceles triangle", right_triangle_poly(), 1, "");
        add(GroupId::g333, "60-degree rhombus", rhombus_poly(), 1, "");
        add(GroupId::g3s3, "isoceles 30-30-120 triangle", obtuse_isoceles_poly(),
            1, "");
        add(GroupId::s333, "equilateral triangle", equilateral_poly(), 1, "");
        add(GroupId::g632, "equilateral triangle", equilateral_poly(), 2,
            "cone point (0.75, sqrt(3)/4)");
        add(GroupId::s632, "30-60-90 triangle", half_equilateral_poly(), 1, "");
        return v;
    }();
    return specs;
}

const GroupSpec& group_spec(GroupId id) {
    for (const auto& s : catalog())
        if (s.id == id) return s;
    throw std::invalid_argument("unknown group");
}

// ---------------------------------------------------------------------------
// Constraint tables
// ---------------------------------------------------------------------------

namespace {

struct TableBuilder {
    ConstraintTable table;
    void pair(int u, int v, const Isometry2& g) { table.pairs.push_back({u, v, g}); }
    void line(int v, const Line2& l) { table.lines.push_back({v, l}); }
    void pin(int v, Point2 p) { table.pins.push_back({v, p}); }
};

ConstraintTable square_table(GroupId id, int n) {
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    TableBuilder b;
    switch (id) {
        case GroupId::O: {
            const auto tx = Isometry2::translate({1, 0});
            const auto ty = Isometry2::translate({0, 1});
            for (int j = 0; j <= n; ++j) b.pair(vid(0, j), vid(n, j), tx);
            for (int i = 0; i <= n; ++i) b.pair(vid(i, 0), vid(i, n), ty);
            break;
        }
        case GroupId::xx: {
            const auto tx = Isometry2::translate({1, 0});
            const auto g = Isometry2::glide(vline(0.5), 1.0);
            for (int j = 0; j <= n; ++j) b.pair(vid(0, j), vid(n, j), tx);
            for (int i = 0; i <= n; ++i) b.pair(vid(i, 0), vid(n - i, n), g);
            break;
        }
        case GroupId::sx: {
            const auto ty = Isometry2::translate({0, 1});
            const auto g = Isometry2::glide(vline(1.0), 0.5);
            for (int j = 0; j <= n; ++j) b.line(vid(0, j), vline(0.0));
            for (int i = 0; i <= n; ++i) b.pair(vid(i, 0), vid(i, n), ty);
            for (int j = 0; j <= n / 2; ++j)
                b.pair(vid(n, j), vid(n, j + n / 2), g);
            break;
        }
        case GroupId::ss: {
            const auto ty = Isometry2::translate({0, 1});
            for (int j = 0; j <= n; ++j) {
                b.line(vid(0, j), vline(0.0));
                b.line(vid(n, j), vline(1.0));
            }
            for (int i = 0; i <= n; ++i) b.pair(vid(i, 0), vid(i, n), ty);
            break;
        }
        case GroupId::g2222: {
            for (int i = 0; i <= n; ++i) {
                b.pair(vid(i, 0), vid(n - i, 0), half_turn({0.5, 0}));
                b.pair(vid(i, n), vid(n - i, n), half_turn({0.5, 1}));
            }
            for (int j = 0; j <= n; ++j) {
                b.pair(vid(0, j), vid(0, n - j), half_turn({0, 0.5}));
                b.pair(vid(n, j), vid(n, n - j), half_turn({1, 0.5}));
            }
            break;
        }
        case GroupId::g22x: {
            const auto g = Isometry2::glide(hline(0.5), 1.0);
            for (int i = 0; i <= n; ++i) {
                b.pair(vid(i, 0), vid(n - i, 0), half_turn({0.5, 0}));
                b.pair(vid(i, n), vid(n - i, n), half_turn({0.5, 1}));
            }
            for (int j = 0; j <= n; ++j) b.pair(vid(0, j), vid(n, n - j), g);
            break;
        }
        case GroupId::g22s: {
            for (int j = 0; j <= n; ++j) {
                b.line(vid(0, j), vline(0.0));
                b.line(vid(n, j), vline(1.0));
            }
            for (int i = 0; i <= n; ++i) {
                b.pair(vid(i, 0), vid(n - i, 0), half_turn({0.5, 0}));
                b.pair(vid(i, n), vid(n - i, n), half_turn({0.5, 1}));
            }
            break;
        }
        case GroupId::s2222: {
            for (int j = 0; j <= n; ++j) {
                b.line(vid(0, j), vline(0.0));
                b.line(vid(n, j), vline(1.0));
            }
            for (int i = 0; i <= n; ++i) {
                b.line(vid(i, 0), hline(0.0));
                b.line(vid(i, n), hline(1.0));
            }
            break;
        }
        case GroupId::g442: {
            const auto r0 = rot(kPi / 2, {0, 0});
            const auto r1 = rot(-kPi / 2, {1, 1});
            for (int i = 0; i <= n; ++i) b.pair(vid(i, 0), vid(0, i), r0);
            for (int j = 0; j <= n; ++j) b.pair(vid(n, j), vid(j, n), r1);
            break;
        }
        default:
            throw std::logic_error("not a square-domain group");
    }
    return b.table;
}

ConstraintTable triangle_table(GroupId id, int n) {
    auto vid = [](int i, int j) { return i * (i + 1) / 2 + j; };
    TableBuilder b;
    switch (id) {
        case GroupId::g2s22: {
            for (int i = 0; i <= n; ++i) b.line(vid(i, 0), hline(0.0));
            for (int j = 0; j <= n; ++j) b.line(vid(n, j), vline(1.0));
            for (int i = 0; i <= n; ++i)
                b.pair(vid(i, i), vid(n - i, n - i), half_turn({0.5, 0.5}));
            break;
        }
        case GroupId::g4s2: {
            const auto r = rot(-kPi / 2, {1, 0});
            for (int i = 0; i <= n; ++i) b.pair(vid(i, 0), vid(n, n - i), r);
            for (int i = 0; i <= n; ++i) b.line(vid(i, i), diag_line());
            break;
        }
        case GroupId::s442: {
            for (int i = 0; i <= n; ++i) b.line(vid(i, 0), hline(0.0));
            for (int j = 0; j <= n; ++j) b.line(vid(n, j), vline(1.0));
            for (int i = 0; i <= n; ++i) b.line(vid(i, i), diag_line());
            break;
        }
        case GroupId::g3s3: {
            const auto r = rot(2 * kPi / 3, {0.5, kSqrt3 / 6});
            for (int i = 0; i <= n; ++i) b.line(vid(i, 0), hline(0.0));
            for (int i = 0; i <= n; ++i) b.pair(vid(i, i), vid(n, i), r);
            break;
        }
        case GroupId::s333: {
            for (int i = 0; i <= n; ++i) b.line(vid(i, 0), hline(0.0));
            for (int j = 0; j <= n; ++j)
                b.line(vid(n, j), equilateral_right_line());
            for (int i = 0; i <= n; ++i) b.line(vid(i, i), deg60_line());
            break;
        }
        case GroupId::g632: {
            const auto r6 = rot(kPi / 3, {0, 0});
            const auto r2 = half_turn({0.75, kSqrt3 / 4});
            for (int i = 0; i <= n; ++i) b.pair(vid(i, 0), vid(i, i), r6);
            for (int j = 0; j <= n; ++j) b.pair(vid(n, j), vid(n, n - j), r2);
            break;
        }
        case GroupId::s632: {
            for (int i = 0; i <= n; ++i) b.line(vid(i, 0), hline(0.0));
            for (int j = 0; j <= n; ++j) b.line(vid(n, j), vline(1.0));
            for (int i = 0; i <= n; ++i) b.line(vid(i, i), deg30_line());
            break;
        }
        default:
            throw std::logic_error("not a triangle-domain group");
    }
    return b.table;
}

ConstraintTable rhombus_table(int n) {
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    TableBuilder b;
    const auto rb = rot(-2 * kPi / 3, {1, 0});
    const auto rd = rot(2 * kPi / 3, {0.5, kSqrt3 / 2});
    for (int i = 0; i <= n; ++i) b.pair(vid(i, 0), vid(n, n - i), rb);
    for (int j = 0; j <= n; ++j) b.pair(vid(0, j), vid(n - j, n), rd);
    return b.table;
}

TriMesh group_mesh(GroupId id, int n) {
    switch (id) {
        case GroupId::O:
        case GroupId::xx:
        case GroupId::sx:
        case GroupId::ss:
        case GroupId::g2222:
        case GroupId::g22x:
        case GroupId::g22s:
        case GroupId::s2222:
        case GroupId::g442:
            return grid_mesh(n);
        case GroupId::g2s22:
        case GroupId::g4s2:
        case GroupId::s442:
            return lower_triangle_mesh(n);
        case GroupId::g333:
            return sheared_mesh(n);
        case GroupId::g3s3:
            return transformed(lower_triangle_mesh(n), obtuse_isoceles_map());
        case GroupId::s333:
            return transformed(lower_triangle_mesh(n), equilateral_map());
        case GroupId::g632:
            return transformed(lower_triangle_mesh(n), equilateral_map());
        case GroupId::s632:
            return transformed(lower_triangle_mesh(n), half_equilateral_map());
    }
    throw std::invalid_argument("unknown group");
}

ConstraintTable group_table(GroupId id, int n) {
    switch (id) {
        case GroupId::O:
        case GroupId::xx:
        case GroupId::sx:
        case GroupId::ss:
        case GroupId::g2222:
        case GroupId::g22x:
        case GroupId::g22s:
        case GroupId::s2222:
        case GroupId::g442:
            return square_table(id, n);
        case GroupId::g333:
            return rhombus_table(n);
        default:
            return triangle_table(id, n);
    }
}

}  // namespace

std::pair<TriMesh, ConstraintSet> build_tile(GroupId id, int n) {
    if (n < 2) throw std::invalid_argument("build_tile requires n >= 2");
    const GroupSpec& spec = group_spec(id);
    if (n % spec.subdivision_multiple != 0)
        throw std::invalid_argument(
            "group " + std::string(group_name(id)) + ": " + spec.parity_reason +
            " must coincide with a mesh vertex; subdivision must be a multiple of " +
            std::to_string(spec.subdivision_multiple));
    TriMesh mesh = group_mesh(id, n);
    ConstraintSet cs =
        orbit_closure(mesh, id, group_table(id, n), tiling_generators(id));

    // The fixed-point-free groups have no cone pins. Group O can translate
    // freely; xx, ** and *x can slide along their glide/mirror direction.
    // Centroid gauge rows paired with drift unknowns keep the system square.
    if (id == GroupId::O) {
        cs.gauge_dirs = {{1, 0}, {0, 1}};
        cs.drift_dirs = {{1, 0}, {0, 1}};
    } else if (id == GroupId::xx || id == GroupId::ss || id == GroupId::sx) {
        cs.gauge_dirs = {{0, 1}};
        cs.drift_dirs = {{0, 1}};
    }
    return {std::move(mesh), std::move(cs)};
}

// ---------------------------------------------------------------------------
// Orbit closure
// ---------------------------------------------------------------------------

namespace {

Line2 canonical_dir(Line2 l) {
    if (l.dir.x < -kEps || (std::abs(l.dir.x) <= kEps && l.dir.y < 0)) l.dir = -l.dir;
    return l;
}

}  // namespace

ConstraintSet orbit_closure(const TriMesh& mesh, GroupId id,
                            const ConstraintTable& table,
                            std::vector<Isometry2> generators) {
    const int nv = mesh.vertex_count();
    const auto& pos = mesh.vertices;

    for (const auto& r : table.pairs) {
        if (distance(apply(r.map, pos[r.from]), pos[r.to]) > kTableTol)
            throw std::invalid_argument(
                "constraint table: pair relation violates canonical placement");
    }
    for (const auto& r : table.lines) {
        if (distance(r.line, pos[r.vertex]) > kTableTol)
            throw std::invalid_argument(
                "constraint table: vertex is off its mirror line");
    }

    struct Arc {
        int to;
        Isometry2 map;
    };
    std::vector<std::vector<Arc>> adj(nv);
    for (const auto& r : table.pairs) {
        adj[r.from].push_back({r.to, r.map});
        adj[r.to].push_back({r.from, inverse(r.map)});
    }

    ConstraintSet cs;
    cs.group = id;
    cs.vertex_count = nv;
    cs.orbit_of.assign(nv, -1);
    cs.to_rep.assign(nv, Isometry2::identity());
    cs.generators = std::move(generators);
    cs.table = table;

    std::vector<std::vector<Point2>> pin_candidates(nv);
    std::vector<std::vector<Line2>> line_candidates(nv);
    for (const auto& r : table.pins) pin_candidates[r.vertex].push_back(r.point);
    for (const auto& r : table.lines) line_candidates[r.vertex].push_back(r.line);

    std::vector<int> component(nv, -1);
    std::vector<std::vector<int>> members;
    std::vector<Isometry2> h(nv, Isometry2::identity());

    for (int root = 0; root < nv; ++root) {
        if (component[root] != -1) continue;
        const int ci = static_cast<int>(members.size());
        members.push_back({});
        std::deque<int> queue{root};
        component[root] = ci;
        h[root] = Isometry2::identity();

        std::vector<Point2> pins;   // self-map pins, in root frame
        std::vector<Line2> lines;   // self-map mirrors, in root frame
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            members[ci].push_back(u);
            for (const Arc& arc : adj[u]) {
                const Isometry2 hv = compose(arc.map, h[u]);
                if (component[arc.to] == -1) {
                    component[arc.to] = ci;
                    h[arc.to] = hv;
                    queue.push_back(arc.to);
                    continue;
                }
                // Cycle: the composed self-map must fix the representative.
                const Isometry2 self = compose(inverse(h[arc.to]), hv);
                if (is_identity(self, 1e-10)) continue;
                const FixedSet fs = fixed_set(self);
                switch (fs.kind) {
                    case FixedSet::Kind::point:
                        pins.push_back(fs.point);
                        break;
                    case FixedSet::Kind::line:
                        lines.push_back(fs.line);
                        break;
                    case FixedSet::Kind::none:
                        throw std::invalid_argument(
                            "malformed group table: orbit cycle composes to a "
                            "translation or glide");
                }
            }
        }

        // Pull explicit per-vertex constraints back to the representative frame.
        for (int v : members[ci]) {
            const Isometry2 back = inverse(h[v]);
            for (Point2 p : pin_candidates[v]) pins.push_back(apply(back, p));
            for (const Line2& l : line_candidates[v]) lines.push_back(transform(back, l));
        }

        OrbitInfo orbit;
        orbit.rep = root;
        orbit.members = members[ci];
        std::vector<Line2> unique_lines;
        for (const Line2& l : lines) {
            bool dup = false;
            for (const Line2& u : unique_lines) dup = dup || same_line(l, u);
            if (!dup) unique_lines.push_back(canonical_dir(l));
        }
        std::optional<Point2> pin;
        for (Point2 p : pins) {
            if (pin && distance(*pin, p) > kTableTol)
                throw std::invalid_argument("malformed group table: conflicting pins");
            pin = p;
        }
        if (!pin && unique_lines.size() >= 2) {
            auto isect = intersect(unique_lines[0], unique_lines[1]);
            if (!isect)
                throw std::invalid_argument(
                    "malformed group table: parallel distinct mirror constraints");
            pin = *isect;
        }
        if (pin) {
            for (const Line2& l : unique_lines)
                if (distance(l, *pin) > kTableTol)
                    throw std::invalid_argument(
                        "malformed group table: pin misses a mirror line");
            if (distance(*pin, pos[root]) > kTableTol)
                throw std::invalid_argument(
                    "malformed group table: pin misses the canonical placement; " +
                    std::string(group_name(id)));
            orbit.kind = OrbitInfo::Kind::pinned;
            orbit.rows = OrbitInfo::Rows::none;
            orbit.pin = *pin;
        } else if (unique_lines.size() == 1) {
            orbit.kind = OrbitInfo::Kind::on_line;
            orbit.rows = OrbitInfo::Rows::projected;
            orbit.line = unique_lines[0];
        } else {
            orbit.kind = OrbitInfo::Kind::free;
            orbit.rows = OrbitInfo::Rows::full;
        }

        const int oi = static_cast<int>(cs.orbits.size());
        for (int v : members[ci]) {
            cs.orbit_of[v] = oi;
            cs.to_rep[v] = h[v];
        }
        cs.orbits.push_back(std::move(orbit));
    }
    return cs;
}

std::vector<VertexConstraint> ConstraintSet::classify(const TriMesh& mesh) const {
    std::vector<VertexConstraint> out(vertex_count);
    for (int v = 0; v < vertex_count; ++v) {
        const OrbitInfo& o = orbit(v);
        VertexConstraint c;
        c.vertex = v;
        c.primary = o.rep;
        c.to_primary = to_rep[v];
        if (v != o.rep || o.members.size() > 1) {
            c.kind = VertexConstraint::Kind::twin_pair;
        }
        if (v == o.rep) {
            switch (o.kind) {
                case OrbitInfo::Kind::pinned:
                    c.kind = VertexConstraint::Kind::pinned;
                    break;
                case OrbitInfo::Kind::on_line:
                    c.kind = VertexConstraint::Kind::on_line;
                    break;
                case OrbitInfo::Kind::free:
                    if (o.members.size() == 1) c.kind = VertexConstraint::Kind::free;
                    break;
            }
        }
        out[v] = c;
    }
    (void)mesh;
    return out;
}

int ConstraintSet::count_kind(const TriMesh& mesh, VertexConstraint::Kind k) const {
    int count = 0;
    for (const auto& c : classify(mesh))
        if (c.kind == k && mesh.on_boundary[c.vertex]) ++count;
    return count;
}

// ---------------------------------------------------------------------------
// Copy enumeration
// ---------------------------------------------------------------------------

namespace {

std::array<long long, 6> quantized_key(const Isometry2& g) {
    auto q = [](double v) { return std::llround(v * 1e7); };
    return {q(g.linear.a00), q(g.linear.a01), q(g.linear.a10), q(g.linear.a11),
            q(g.translation.x), q(g.translation.y)};
}

BBox2 transformed_box(const Isometry2& g, const BBox2& box) {
    BBox2 out;
    out.expand(apply(g, {box.min.x, box.min.y}));
    out.expand(apply(g, {box.max.x, box.min.y}));
    out.expand(apply(g, {box.max.x, box.max.y}));
    out.expand(apply(g, {box.min.x, box.max.y}));
    return out;
}

}  // namespace

std::vector<Isometry2> enumerate_group_copies(const std::vector<Isometry2>& generators,
                                              const BBox2& tile_box, const BBox2& window,
                                              int depth_limit) {
    std::vector<Isometry2> steps;
    for (const auto& g : generators) {
        steps.push_back(g);
        steps.push_back(inverse(g));
    }
    // Frontier pruning uses an inflated window so copies reachable only through
    // intermediate steps just outside the window are still found.
    const double diam = norm(tile_box.extent());
    BBox2 prune = window;
    prune.inflate(3.0 * diam + 1e-9);

    std::map<std::array<long long, 6>, bool> seen;
    std::vector<Isometry2> kept;
    std::deque<std::pair<Isometry2, int>> queue;

    const Isometry2 id = Isometry2::identity();
    seen[quantized_key(id)] = true;
    queue.push_back({id, 0});
    kept.push_back(id);

    while (!queue.empty()) {
        auto [g, depth] = queue.front();
        queue.pop_front();
        if (depth >= depth_limit)
            throw std::runtime_error("copy enumeration exceeded depth limit");
        for (const auto& s : steps) {
            // Right multiplication keeps successive copies spatially adjacent.
            const Isometry2 h = compose(g, s);
            auto key = quantized_key(h);
            if (seen.count(key)) continue;
            seen[key] = true;
            if (!transformed_box(h, tile_box).intersects(prune)) continue;
            queue.push_back({h, depth + 1});
            if (transformed_box(h, tile_box).intersects(window)) kept.push_back(h);
        }
    }
    return kept;
}

}  // namespace escher

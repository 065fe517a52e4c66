#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "escher/geometry.hpp"
#include "escher/mesh.hpp"

namespace escher {

// The 17 wallpaper groups, named in orbifold notation.
enum class GroupId {
    O, xx, sx, ss,              // o, xx, *x, **
    g2222, g22x, g22s, g2s22,   // 2222, 22x, 22*, 2*22
    s2222,                      // *2222
    g442, g4s2, s442,           // 442, 4*2, *442
    g333, g3s3, s333,           // 333, 3*3, *333
    g632, s632                  // 632, *632
};

inline constexpr int kGroupCount = 17;
const std::vector<GroupId>& all_groups();
std::string_view group_name(GroupId id);
std::optional<GroupId> parse_group(std::string_view name);
bool group_interesting(GroupId id);

// ---------------------------------------------------------------------------
// Raw constraint table, emitted per group for the canonical vertex placement
// ---------------------------------------------------------------------------

// map(pos[from]) == pos[to] in every valid tile.
struct PairRelation {
    int from = -1, to = -1;
    Isometry2 map;
};
struct LineRelation {
    int vertex = -1;
    Line2 line;
};
struct PinRelation {
    int vertex = -1;
    Point2 point;
};
struct ConstraintTable {
    std::vector<PairRelation> pairs;
    std::vector<LineRelation> lines;
    std::vector<PinRelation> pins;
};

// ---------------------------------------------------------------------------
// Closed constraint set: orbits, representatives, degrees of freedom
// ---------------------------------------------------------------------------

struct OrbitInfo {
    enum class Kind { free, on_line, pinned };
    // Equation policy: pinned cone orbits carry no harmonic equation; mirror
    // orbits carry one projected equation; free orbits carry two. The anchor
    // orbit of the fixed-point-free groups keeps its equations even though
    // its position is (partly) fixed; global drift unknowns absorb the
    // matching rank.
    enum class Rows { none, projected, full };
    int rep = -1;
    Kind kind = Kind::free;
    Rows rows = Rows::full;
    Line2 line;   // when on_line, or the projection direction for Rows::projected
    Point2 pin;   // when pinned
    std::vector<int> members;  // includes rep
};

// Per-boundary-vertex classification, for reporting.
struct VertexConstraint {
    enum class Kind { free, twin_pair, on_line, pinned };
    Kind kind = Kind::free;
    int vertex = -1;
    int primary = -1;      // orbit representative
    Isometry2 to_primary;  // pos[vertex] == to_primary(pos[primary])
};

struct ConstraintSet {
    GroupId group{};
    int vertex_count = 0;
    std::vector<int> orbit_of;       // vertex -> orbit index
    std::vector<Isometry2> to_rep;   // vertex -> h with pos[v] == h(pos[rep])
    std::vector<OrbitInfo> orbits;
    std::vector<Isometry2> generators;
    ConstraintTable table;           // raw relations kept for residual checks

    // Fixed-point-free groups only. Their harmonic system has translational
    // gauge freedom and, for a non-symmetric Laplacian, a matching global
    // inconsistency. Centroid gauge rows fix the freedom without restricting
    // tile shapes; paired drift unknowns absorb the inconsistency (they
    // vanish whenever the weights admit an exact solution).
    std::vector<Vec2> gauge_dirs;  // directions of the centroid constraint
    std::vector<Vec2> drift_dirs;  // directions of the drift unknowns

    const OrbitInfo& orbit(int vertex) const { return orbits[orbit_of[vertex]]; }
    bool vertex_pinned(int vertex) const {
        return orbit(vertex).kind == OrbitInfo::Kind::pinned;
    }
    bool vertex_has_equation(int vertex) const {
        return orbit(vertex).rows != OrbitInfo::Rows::none;
    }
    std::vector<VertexConstraint> classify(const TriMesh& mesh) const;
    int count_kind(const TriMesh& mesh, VertexConstraint::Kind k) const;
};

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

struct GroupSpec {
    GroupId id{};
    bool interesting = true;
    std::string tile_shape;   // human-readable domain description
    Polygon2 basic_tile;      // canonical boundary polygon
    int subdivision_multiple = 1;  // n must be a multiple of this
    std::string parity_reason;     // cone point named in the n-validation error
};

const std::vector<GroupSpec>& catalog();
const GroupSpec& group_spec(GroupId id);
std::vector<Isometry2> tiling_generators(GroupId id);

// Canonical mesh + closed constraints for a group. Throws std::invalid_argument
// for unknown n < 2 or when a cone point of the group cannot land on a mesh
// vertex at this subdivision.
std::pair<TriMesh, ConstraintSet> build_tile(GroupId id, int n);

// Closes a raw relation table over the mesh's canonical placement: assigns
// every vertex (representative, composed isometry), derives pins at rotational
// self-maps and line constraints at reflective ones, and verifies that every
// relation holds on the canonical positions. Throws on inconsistent tables.
ConstraintSet orbit_closure(const TriMesh& mesh, GroupId id,
                            const ConstraintTable& table,
                            std::vector<Isometry2> generators);

// Breadth-first enumeration of group elements whose transformed copy of
// `tile_box` intersects `window`. Includes the identity; deduplicates
// isometries; throws if `depth_limit` is exceeded.
std::vector<Isometry2> enumerate_group_copies(const std::vector<Isometry2>& generators,
                                              const BBox2& tile_box, const BBox2& window,
                                              int depth_limit = 64);

}  // namespace escher

#pragma once

#include <array>
#include <unordered_map>
#include <vector>

#include "escher/geometry.hpp"

namespace escher {

// Triangle mesh with fixed connectivity. Connectivity is immutable after
// finalize(); optimization only ever moves a copy of the positions, never the
// mesh itself. UVs equal the initial vertex coordinates.
struct TriMesh {
    std::vector<Point2> vertices;
    std::vector<std::array<int, 3>> triangles;  // CCW
    std::vector<Point2> uvs;

    // Derived by finalize():
    std::vector<std::pair<int, int>> directed_edges;  // both directions per edge
    std::vector<std::vector<int>> out_edges;          // vertex -> directed edge ids
    std::vector<int> boundary_loop;                   // CCW vertex cycle
    std::vector<char> on_boundary;                    // per vertex

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int triangle_count() const { return static_cast<int>(triangles.size()); }
    int directed_edge_count() const { return static_cast<int>(directed_edges.size()); }

    // -1 if (i, j) is not an edge.
    int directed_edge_id(int i, int j) const;

    // Builds edges, adjacency and the boundary loop; validates disk topology
    // (Euler characteristic 1, single boundary cycle, CCW triangles).
    void finalize();

  private:
    std::unordered_map<long long, int> edge_index_;
};

// Regular triangulation of the unit square: (n+1)^2 vertices, 2n^2 triangles,
// every cell split along its lower-left to upper-right diagonal.
TriMesh grid_mesh(int n);

// grid_mesh(n) sheared onto the unit-edge 60-degree rhombus spanned by
// (1,0) and (1/2, sqrt(3)/2). Connectivity unchanged.
TriMesh sheared_mesh(int n);

// The part of grid_mesh(n) at or below the main diagonal: the right isoceles
// triangle (0,0), (1,0), (1,1). (n+1)(n+2)/2 vertices, n^2 triangles.
TriMesh lower_triangle_mesh(int n);

// Applies a linear map to vertices and UVs; requires positive determinant.
TriMesh transformed(TriMesh mesh, const Mat2& m);

// Ordered CCW boundary cycle of a finalized (or raw) disk mesh.
std::vector<int> boundary_loop_of(const TriMesh& mesh);

}  // namespace escher

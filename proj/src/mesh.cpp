#include "escher/mesh.hpp"

#include <map>
#include <stdexcept>

namespace escher {

namespace {

long long edge_key(int i, int j) {
    return (static_cast<long long>(i) << 32) | static_cast<unsigned>(j);
}

}  // namespace

int TriMesh::directed_edge_id(int i, int j) const {
    auto it = edge_index_.find(edge_key(i, j));
    return it == edge_index_.end() ? -1 : it->second;
}

void TriMesh::finalize() {
    const int nv = vertex_count();
    if (uvs.empty()) uvs = vertices;

    for (const auto& t : triangles) {
        if (signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) <= 0.0)
            throw std::invalid_argument("mesh triangle is not CCW");
    }

    // Collect undirected edges, then store both directions.
    std::map<std::pair<int, int>, int> undirected;  // sorted pair -> use count
    for (const auto& t : triangles) {
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            undirected[{std::min(a, b), std::max(a, b)}]++;
        }
    }
    directed_edges.clear();
    edge_index_.clear();
    out_edges.assign(nv, {});
    for (const auto& [e, uses] : undirected) {
        if (uses > 2) throw std::invalid_argument("non-manifold edge");
        for (auto [i, j] : {std::pair{e.first, e.second}, std::pair{e.second, e.first}}) {
            edge_index_[edge_key(i, j)] = directed_edge_count();
            out_edges[i].push_back(directed_edge_count());
            directed_edges.emplace_back(i, j);
        }
    }

    const long long ne = static_cast<long long>(undirected.size());
    if (nv - ne + triangle_count() != 1)
        throw std::invalid_argument("mesh is not a topological disk");

    boundary_loop = boundary_loop_of(*this);
    on_boundary.assign(nv, 0);
    for (int v : boundary_loop) on_boundary[v] = 1;
}

std::vector<int> boundary_loop_of(const TriMesh& mesh) {
    // Boundary half-edges are triangle sides with no opposite half-edge.
    std::map<std::pair<int, int>, int> half;  // (a, b) -> count
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) half[{t[k], t[(k + 1) % 3]}]++;

    std::map<int, int> next;  // boundary successor
    int nbound = 0;
    for (const auto& [e, cnt] : half) {
        if (cnt > 1) throw std::invalid_argument("duplicated half-edge");
        if (!half.count({e.second, e.first})) {
            if (next.count(e.first)) throw std::invalid_argument("non-manifold boundary");
            next[e.first] = e.second;
            ++nbound;
        }
    }
    if (nbound == 0) throw std::invalid_argument("mesh has no boundary");

    std::vector<int> loop;
    int start = next.begin()->first;
    int v = start;
    do {
        loop.push_back(v);
        auto it = next.find(v);
        if (it == next.end()) throw std::invalid_argument("open boundary chain");
        v = it->second;
    } while (v != start && static_cast<int>(loop.size()) <= nbound);
    if (static_cast<int>(loop.size()) != nbound)
        throw std::invalid_argument("boundary is not a single cycle");

    // CCW triangles leave the interior on the left of each boundary half-edge,
    // so the chained loop is already CCW; check anyway.
    Polygon2 poly{std::vector<Point2>{}};
    for (int idx : loop) poly.pts.push_back(mesh.vertices[idx]);
    if (polygon_area(poly) <= 0.0) throw std::invalid_argument("boundary loop not CCW");
    return loop;
}

TriMesh grid_mesh(int n) {
    if (n < 1) throw std::invalid_argument("grid_mesh requires n >= 1");
    TriMesh m;
    const double h = 1.0 / n;
    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    m.vertices.resize(static_cast<size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) m.vertices[vid(i, j)] = {i * h, j * h};
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            // Lower-left to upper-right diagonal in every cell.
            m.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            m.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    }
    m.finalize();
    return m;
}

TriMesh sheared_mesh(int n) {
    return transformed(grid_mesh(n), Mat2{1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0});
}

TriMesh lower_triangle_mesh(int n) {
    if (n < 1) throw std::invalid_argument("lower_triangle_mesh requires n >= 1");
    TriMesh m;
    const double h = 1.0 / n;
    // Vertices (i, j) with j <= i, ordered by i then j.
    auto vid = [](int i, int j) { return i * (i + 1) / 2 + j; };
    m.vertices.resize(static_cast<size_t>(n + 1) * (n + 2) / 2);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= i; ++j) m.vertices[vid(i, j)] = {i * h, j * h};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            m.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            if (j < i)
                m.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    }
    m.finalize();
    return m;
}

TriMesh transformed(TriMesh mesh, const Mat2& m) {
    if (det(m) <= 0.0) throw std::invalid_argument("transform must preserve orientation");
    for (auto& v : mesh.vertices) v = m * v;
    mesh.uvs.clear();
    mesh.finalize();
    return mesh;
}

}  // namespace escher

#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "escher/mesh.hpp"
#include "escher/wallpaper.hpp"

namespace escher {

struct CoverageStats {
    double mean_multiplicity = 0.0;
    int min_multiplicity = 0;
    int max_multiplicity = 0;
    int sample_count = 0;
};

struct ValidityReport {
    double boundary_residual_max = 0.0;
    int inverted_triangle_count = 0;
    bool boundary_simple = false;
    std::optional<CoverageStats> coverage;
    bool passed = false;
};

struct ValidityOptions {
    double boundary_tol = 1e-8;
    bool with_coverage = false;
    BBox2 coverage_window{{0.0, 0.0}, {1.0, 1.0}};
    int coverage_samples = 10000;
    std::uint64_t seed = 0;
};

// Boundary polygon of the embedded tile (positions in boundary-loop order).
Polygon2 boundary_polygon(const TriMesh& mesh, std::span<const Point2> positions);

// Max residual of the boundary conditions, with the constraint isometries
// conjugated by the global rotation: ||R g R^-1 (v_i) - v_j|| for twin pairs,
// distance to the rotated mirror line, distance to the rotated pin.
double check_boundary_conditions(const ConstraintSet& constraints,
                                 std::span<const Point2> positions, double phi);

// Number of triangles with non-positive signed area.
int check_orientation(const TriMesh& mesh, std::span<const Point2> positions);

// Monte-Carlo coverage: enumerates copies over the window plus one tile
// diameter of margin, then counts per-sample multiplicity (number of copies
// strictly containing the point). Samples within 1e-6 of any copy boundary
// are redrawn. Requires orientation and boundary checks to pass first.
CoverageStats check_tiling_coverage(const TriMesh& mesh, const ConstraintSet& constraints,
                                    std::span<const Point2> positions, double phi,
                                    const BBox2& window, int num_samples,
                                    std::uint64_t seed);

ValidityReport full_report(const TriMesh& mesh, const ConstraintSet& constraints,
                           std::span<const Point2> positions, double phi,
                           const ValidityOptions& opts = {});

}  // namespace escher

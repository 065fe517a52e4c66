#pragma once

#include <functional>
#include <span>

#include "escher/tilesolve.hpp"

namespace escher {

// dL/dV per final vertex position.
using PositionGradient = std::vector<Vec2>;

// Scalar loss over the solved positions.
using LossFn = std::function<double(std::span<const Point2>)>;

// Adjoint gradient through the reduced solve: one transposed solve on the
// forward factorization, then per-edge vector-Jacobian products.
inline ParamGradient backward(TileSystem& system, const TileParams& params,
                              std::span<const Vec2> dLdV) {
    return system.backward(params, dLdV);
}

// Central-difference oracle over every theta coordinate and phi. Intended for
// small meshes; cost is two solves per parameter.
ParamGradient finite_diff_gradient(const TriMesh& mesh, const ConstraintSet& constraints,
                                   const TileParams& params, const LossFn& loss,
                                   double h);

}  // namespace escher

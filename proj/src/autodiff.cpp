#include "escher/autodiff.hpp"

namespace escher {

ParamGradient finite_diff_gradient(const TriMesh& mesh, const ConstraintSet& constraints,
                                   const TileParams& params, const LossFn& loss,
                                   double h) {
    if (h <= 0.0) throw std::invalid_argument("finite differences require h > 0");
    TileSystem system(mesh, constraints);
    ParamGradient grad;
    grad.dtheta = Eigen::VectorXd::Zero(params.theta.size());

    TileParams probe = params;
    auto eval = [&]() { return loss(system.solve(probe).positions); };
    for (Eigen::Index i = 0; i < params.theta.size(); ++i) {
        probe.theta[i] = params.theta[i] + h;
        const double up = eval();
        probe.theta[i] = params.theta[i] - h;
        const double down = eval();
        probe.theta[i] = params.theta[i];
        grad.dtheta[i] = (up - down) / (2.0 * h);
    }
    probe.phi = params.phi + h;
    const double up = eval();
    probe.phi = params.phi - h;
    const double down = eval();
    grad.dphi = (up - down) / (2.0 * h);
    return grad;
}

}  // namespace escher

#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <span>
#include <stdexcept>
#include <vector>

#include "escher/mesh.hpp"
#include "escher/wallpaper.hpp"

namespace escher {

// Thrown when the reduced system cannot be factorized. Cannot occur for valid
// weights and a well-formed group table.
struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unconstrained optimization variables: one scalar per directed edge plus the
// global rotation angle.
struct TileParams {
    Eigen::VectorXd theta;
    double phi = 0.0;

    static TileParams zeros(const TriMesh& mesh) {
        TileParams p;
        p.theta = Eigen::VectorXd::Zero(mesh.directed_edge_count());
        return p;
    }
};

using EdgeWeights = Eigen::VectorXd;

// w = 0.05 + 0.9 * sigmoid(theta); strictly inside (0.05, 0.95).
EdgeWeights weights_from_theta(const Eigen::VectorXd& theta);
Eigen::VectorXd dweights_dtheta(const Eigen::VectorXd& theta);
double theta_from_weight(double w);

struct SolvedTile {
    GroupId group{};
    std::vector<Point2> positions;  // after the global rotation
    TileParams params;
    double solve_residual = 0.0;    // ||A x - b||_inf of the reduced system
};

struct ParamGradient {
    Eigen::VectorXd dtheta;
    double dphi = 0.0;
};

struct RecoverResult {
    TileParams params;
    int clamped_count = 0;  // barycentric weights outside [0.05, 0.95]
};

// Full (unreduced) parameterized Laplacian over mesh vertices: off-diagonal
// -w_ij for every directed edge, diagonal sum of the row's weights.
Eigen::SparseMatrix<double> full_laplacian(const TriMesh& mesh, const EdgeWeights& w);

// Reduced harmonic system for one (mesh, constraints) pair. The sparsity
// structure and the per-edge contribution patterns are fixed at construction;
// assembly and factorization reuse them across solves. One instance is
// single-threaded; distinct instances may run concurrently.
class TileSystem {
  public:
    TileSystem(const TriMesh& mesh, const ConstraintSet& constraints);

    int dof_count() const { return n_dofs_; }
    const TriMesh& mesh() const { return *mesh_; }
    const ConstraintSet& constraints() const { return *constraints_; }
    // Equation-row and unknown-column offsets of an orbit (-1 when absent).
    int orbit_row(int orbit) const { return row_offset_[orbit]; }
    int orbit_col(int orbit) const { return dof_offset_[orbit]; }

    Eigen::SparseMatrix<double> assemble_matrix(const EdgeWeights& w) const;
    Eigen::VectorXd assemble_rhs(const EdgeWeights& w) const;

    // Weights the assembly actually uses. The fixed-point-free groups take
    // the symmetrized field (w_ij + w_ji) / 2: their prescribed periods admit
    // an exact discrete-harmonic solution only for consistent weights, and
    // the symmetric field is the consistent family with a no-overlap
    // guarantee. All other groups use the directed weights as given.
    EdgeWeights effective_weights(const Eigen::VectorXd& theta) const;

    SolvedTile solve(const TileParams& params);

    // Adjoint gradient of a scalar loss through the solve; dLdV holds the
    // loss gradient per final (rotated) vertex position. Re-factorizes
    // internally when `params` differ from the cached solve.
    ParamGradient backward(const TileParams& params, std::span<const Vec2> dLdV);

    // Positions of all vertices from the reduced solution, before rotation.
    std::vector<Point2> positions_from_dofs(const Eigen::VectorXd& x) const;

  private:
    struct MatTerm {
        int row, col;
        double coef;
    };
    struct RhsTerm {
        int row;
        double coef;
    };

    void ensure_factorized(const TileParams& params);

    const TriMesh* mesh_;
    const ConstraintSet* constraints_;
    int n_dofs_ = 0;
    bool symmetrize_ = false;
    std::vector<int> reverse_edge_;
    std::vector<int> dof_offset_;                  // per orbit; -1 when pinned
    std::vector<int> row_offset_;                  // per orbit; -1 when no rows
    std::vector<std::vector<MatTerm>> edge_mat_;   // per directed edge
    std::vector<std::vector<RhsTerm>> edge_rhs_;
    std::vector<MatTerm> const_mat_;               // weight-independent entries
    std::vector<RhsTerm> const_rhs_;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool pattern_analyzed_ = false;
    bool factorized_ = false;
    Eigen::VectorXd cached_theta_;
    Eigen::VectorXd last_x_;
    Eigen::VectorXd last_b_;
};

// Convenience wrapper: build the system, solve once.
SolvedTile solve_tile(const TriMesh& mesh, const ConstraintSet& constraints,
                      const TileParams& params);

// Inverts the construction: computes positive barycentric (mean-value)
// weights of each representative over its glued one-ring in the tiling and
// maps them back through the weight squashing. Throws if the positions do
// not form a valid tile. Out-of-range weights are clamped and counted.
RecoverResult recover_theta(const TriMesh& mesh, const ConstraintSet& constraints,
                            std::span<const Point2> positions, double phi = 0.0);

}  // namespace escher

#include "escher/tilesolve.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "escher/validity.hpp"

namespace escher {

namespace {

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

}  // namespace

EdgeWeights weights_from_theta(const Eigen::VectorXd& theta) {
    EdgeWeights w(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i)
        w[i] = 0.05 + 0.9 * sigmoid(theta[i]);
    return w;
}

Eigen::VectorXd dweights_dtheta(const Eigen::VectorXd& theta) {
    Eigen::VectorXd d(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double s = sigmoid(theta[i]);
        d[i] = 0.9 * s * (1.0 - s);
    }
    return d;
}

double theta_from_weight(double w) {
    const double u = (w - 0.05) / 0.9;
    return std::log(u / (1.0 - u));
}

Eigen::SparseMatrix<double> full_laplacian(const TriMesh& mesh, const EdgeWeights& w) {
    const int nv = mesh.vertex_count();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.directed_edge_count() * 2);
    for (int e = 0; e < mesh.directed_edge_count(); ++e) {
        const auto [i, j] = mesh.directed_edges[e];
        trips.emplace_back(i, j, -w[e]);
        trips.emplace_back(i, i, w[e]);
    }
    Eigen::SparseMatrix<double> L(nv, nv);
    L.setFromTriplets(trips.begin(), trips.end());
    return L;
}

// ---------------------------------------------------------------------------
// TileSystem
// ---------------------------------------------------------------------------

TileSystem::TileSystem(const TriMesh& mesh, const ConstraintSet& constraints)
    : mesh_(&mesh), constraints_(&constraints) {
    const auto& cs = *constraints_;
    symmetrize_ = !cs.gauge_dirs.empty();
    reverse_edge_.resize(mesh.directed_edge_count());
    for (int e = 0; e < mesh.directed_edge_count(); ++e) {
        const auto [i, j] = mesh.directed_edges[e];
        reverse_edge_[e] = mesh.directed_edge_id(j, i);
    }
    const int norbits = static_cast<int>(cs.orbits.size());
    dof_offset_.assign(norbits, -1);
    row_offset_.assign(norbits, -1);
    n_dofs_ = 0;
    int n_rows = 0;
    for (int oi = 0; oi < norbits; ++oi) {
        const auto& orbit = cs.orbits[oi];
        if (orbit.kind != OrbitInfo::Kind::pinned) {
            dof_offset_[oi] = n_dofs_;
            n_dofs_ += orbit.kind == OrbitInfo::Kind::free ? 2 : 1;
        }
        if (orbit.rows != OrbitInfo::Rows::none) {
            row_offset_[oi] = n_rows;
            n_rows += orbit.rows == OrbitInfo::Rows::full ? 2 : 1;
        }
    }
    const int drift_base = n_dofs_;
    n_dofs_ += static_cast<int>(cs.drift_dirs.size());
    const int gauge_base = n_rows;
    n_rows += static_cast<int>(cs.gauge_dirs.size());
    if (n_dofs_ == 0) throw SolveError("reduced system has zero degrees of freedom");
    if (n_rows != n_dofs_)
        throw SolveError("reduced system is not square; malformed constraints");

    edge_mat_.resize(mesh.directed_edge_count());
    edge_rhs_.resize(mesh.directed_edge_count());

    // One harmonic equation per orbit over the union of its members'
    // neighborhoods; neighbors enter through the composed orbit isometries.
    for (int oi = 0; oi < norbits; ++oi) {
        const auto& orbit = cs.orbits[oi];
        if (orbit.rows == OrbitInfo::Rows::none) continue;
        const int r0 = row_offset_[oi];
        const bool projected = orbit.rows == OrbitInfo::Rows::projected;
        const Vec2 rd = orbit.line.dir;  // projection direction when projected

        // "+ M p_orbit(qi)" contribution to this orbit's equation rows,
        // substituting the column orbit's degrees of freedom.
        auto emit_position = [&](std::vector<MatTerm>& mats, std::vector<RhsTerm>& rhss,
                                 int qi, const Mat2& M) {
            const auto& q = cs.orbits[qi];
            Vec2 cpart{0.0, 0.0};
            if (q.kind == OrbitInfo::Kind::pinned) {
                cpart = M * q.pin;
            } else if (q.kind == OrbitInfo::Kind::on_line) {
                cpart = M * q.line.point;
                const Vec2 m = M * q.line.dir;
                const int q0 = dof_offset_[qi];
                if (projected) {
                    mats.push_back({r0, q0, dot(rd, m)});
                } else {
                    mats.push_back({r0, q0, m.x});
                    mats.push_back({r0 + 1, q0, m.y});
                }
            } else {
                const int q0 = dof_offset_[qi];
                if (projected) {
                    mats.push_back({r0, q0, rd.x * M.a00 + rd.y * M.a10});
                    mats.push_back({r0, q0 + 1, rd.x * M.a01 + rd.y * M.a11});
                } else {
                    mats.push_back({r0, q0, M.a00});
                    mats.push_back({r0, q0 + 1, M.a01});
                    mats.push_back({r0 + 1, q0, M.a10});
                    mats.push_back({r0 + 1, q0 + 1, M.a11});
                }
            }
            // Constant part of the term moves to the right-hand side.
            if (projected) {
                if (cpart.x != 0.0 || cpart.y != 0.0)
                    rhss.push_back({r0, -dot(rd, cpart)});
            } else {
                if (cpart.x != 0.0) rhss.push_back({r0, -cpart.x});
                if (cpart.y != 0.0) rhss.push_back({r0 + 1, -cpart.y});
            }
        };

        for (int v : orbit.members) {
            const Isometry2 back = inverse(cs.to_rep[v]);
            for (int eid : mesh.out_edges[v]) {
                const int j = mesh.directed_edges[eid].second;
                const Isometry2 k = compose(back, cs.to_rep[j]);
                auto& mats = edge_mat_[eid];
                auto& rhss = edge_rhs_[eid];

                emit_position(mats, rhss, oi, Mat2::identity());       // + p_r
                Mat2 negK = k.linear;
                negK.a00 = -negK.a00; negK.a01 = -negK.a01;
                negK.a10 = -negK.a10; negK.a11 = -negK.a11;
                emit_position(mats, rhss, cs.orbit_of[j], negK);       // - K p_q
                const Vec2 u = k.translation;                          // - u
                if (projected) {
                    rhss.push_back({r0, dot(rd, u)});
                } else {
                    rhss.push_back({r0, u.x});
                    rhss.push_back({r0 + 1, u.y});
                }

                // Drift unknowns enter scaled by the orbit's total weight, so
                // the hull offset they induce is uniform across vertices:
                // "- w_e d_k dir_k" per edge term.
                for (size_t k = 0; k < cs.drift_dirs.size(); ++k) {
                    const Vec2 dir = cs.drift_dirs[k];
                    const int col = drift_base + static_cast<int>(k);
                    if (projected) {
                        mats.push_back({r0, col, -dot(rd, dir)});
                    } else {
                        mats.push_back({r0, col, -dir.x});
                        mats.push_back({r0 + 1, col, -dir.y});
                    }
                }
            }
        }
    }

    // Centroid gauge rows: mean vertex position projected on each gauge
    // direction equals its canonical value. Weight-independent.
    for (size_t k = 0; k < cs.gauge_dirs.size(); ++k) {
        const Vec2 dir = cs.gauge_dirs[k];
        const int row = gauge_base + static_cast<int>(k);
        const double inv_n = 1.0 / cs.vertex_count;
        double rhs = 0.0;
        for (int v = 0; v < cs.vertex_count; ++v) {
            rhs += inv_n * dot(dir, mesh.vertices[v]);
            const Isometry2& h = cs.to_rep[v];
            const Vec2 dh = transposed(h.linear) * dir;  // dir^T A_v as a vector
            const int qi = cs.orbit_of[v];
            const auto& q = cs.orbits[qi];
            if (q.kind == OrbitInfo::Kind::pinned) {
                rhs -= inv_n * dot(dh, q.pin);
            } else if (q.kind == OrbitInfo::Kind::on_line) {
                const_mat_.push_back({row, dof_offset_[qi], inv_n * dot(dh, q.line.dir)});
                rhs -= inv_n * dot(dh, q.line.point);
            } else {
                const_mat_.push_back({row, dof_offset_[qi], inv_n * dh.x});
                const_mat_.push_back({row, dof_offset_[qi] + 1, inv_n * dh.y});
            }
            rhs -= inv_n * dot(dir, h.translation);
        }
        const_rhs_.push_back({row, rhs});
    }
}

Eigen::SparseMatrix<double> TileSystem::assemble_matrix(const EdgeWeights& w) const {
    std::vector<Eigen::Triplet<double>> trips;
    size_t total = const_mat_.size();
    for (const auto& terms : edge_mat_) total += terms.size();
    trips.reserve(total);
    for (int e = 0; e < static_cast<int>(edge_mat_.size()); ++e)
        for (const MatTerm& t : edge_mat_[e])
            trips.emplace_back(t.row, t.col, w[e] * t.coef);
    for (const MatTerm& t : const_mat_) trips.emplace_back(t.row, t.col, t.coef);
    Eigen::SparseMatrix<double> A(n_dofs_, n_dofs_);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

Eigen::VectorXd TileSystem::assemble_rhs(const EdgeWeights& w) const {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_dofs_);
    for (int e = 0; e < static_cast<int>(edge_rhs_.size()); ++e)
        for (const RhsTerm& t : edge_rhs_[e]) b[t.row] += w[e] * t.coef;
    for (const RhsTerm& t : const_rhs_) b[t.row] += t.coef;
    return b;
}

EdgeWeights TileSystem::effective_weights(const Eigen::VectorXd& theta) const {
    EdgeWeights w = weights_from_theta(theta);
    if (!symmetrize_) return w;
    EdgeWeights sym(w.size());
    for (Eigen::Index e = 0; e < w.size(); ++e)
        sym[e] = 0.5 * (w[e] + w[reverse_edge_[e]]);
    return sym;
}

void TileSystem::ensure_factorized(const TileParams& params) {
    if (params.theta.size() != mesh_->directed_edge_count())
        throw std::invalid_argument("theta length must equal the directed edge count");
    if (factorized_ && cached_theta_.size() == params.theta.size() &&
        (cached_theta_.array() == params.theta.array()).all())
        return;
    const EdgeWeights w = effective_weights(params.theta);
    const Eigen::SparseMatrix<double> A = assemble_matrix(w);
    if (!pattern_analyzed_) {
        lu_.analyzePattern(A);
        pattern_analyzed_ = true;
    }
    lu_.factorize(A);
    if (lu_.info() != Eigen::Success)
        throw SolveError("sparse factorization failed; malformed constraints");
    last_b_ = assemble_rhs(w);
    last_x_ = lu_.solve(last_b_);
    if (lu_.info() != Eigen::Success) throw SolveError("sparse solve failed");
    cached_theta_ = params.theta;
    factorized_ = true;
}

std::vector<Point2> TileSystem::positions_from_dofs(const Eigen::VectorXd& x) const {
    const auto& cs = *constraints_;
    std::vector<Point2> rep_pos(cs.orbits.size());
    for (size_t oi = 0; oi < cs.orbits.size(); ++oi) {
        const auto& orbit = cs.orbits[oi];
        switch (orbit.kind) {
            case OrbitInfo::Kind::pinned:
                rep_pos[oi] = orbit.pin;
                break;
            case OrbitInfo::Kind::on_line:
                rep_pos[oi] = orbit.line.point + x[dof_offset_[oi]] * orbit.line.dir;
                break;
            case OrbitInfo::Kind::free:
                rep_pos[oi] = {x[dof_offset_[oi]], x[dof_offset_[oi] + 1]};
                break;
        }
    }
    std::vector<Point2> pos(cs.vertex_count);
    for (int v = 0; v < cs.vertex_count; ++v)
        pos[v] = apply(cs.to_rep[v], rep_pos[cs.orbit_of[v]]);
    return pos;
}

SolvedTile TileSystem::solve(const TileParams& params) {
    ensure_factorized(params);
    SolvedTile tile;
    tile.group = constraints_->group;
    tile.params = params;
    const EdgeWeights w = effective_weights(params.theta);
    tile.solve_residual =
        (assemble_matrix(w) * last_x_ - last_b_).lpNorm<Eigen::Infinity>();
    tile.positions = positions_from_dofs(last_x_);
    const Mat2 rot = Mat2::rotation(params.phi);
    for (auto& p : tile.positions) p = rot * p;
    return tile;
}

ParamGradient TileSystem::backward(const TileParams& params,
                                   std::span<const Vec2> dLdV) {
    ensure_factorized(params);
    const auto& cs = *constraints_;
    if (static_cast<int>(dLdV.size()) != cs.vertex_count)
        throw std::invalid_argument("dLdV size must equal the vertex count");

    const std::vector<Point2> pre = positions_from_dofs(last_x_);
    const double c = std::cos(params.phi), s = std::sin(params.phi);
    const Mat2 rot_t{c, s, -s, c};       // R^T
    const Mat2 drot{-s, -c, c, -s};      // dR/dphi

    ParamGradient grad;
    grad.dphi = 0.0;
    for (int v = 0; v < cs.vertex_count; ++v)
        grad.dphi += dot(dLdV[v], drot * pre[v]);

    // Pull the position gradient back through the rotation and the orbit
    // isometries onto the reduced unknowns.
    Eigen::VectorXd ghat = Eigen::VectorXd::Zero(n_dofs_);
    for (int v = 0; v < cs.vertex_count; ++v) {
        const int oi = cs.orbit_of[v];
        const auto& orbit = cs.orbits[oi];
        if (orbit.kind == OrbitInfo::Kind::pinned) continue;
        const Vec2 g_pre = rot_t * dLdV[v];
        const Vec2 g_rep = transposed(cs.to_rep[v].linear) * g_pre;
        const int o0 = dof_offset_[oi];
        if (orbit.kind == OrbitInfo::Kind::free) {
            ghat[o0] += g_rep.x;
            ghat[o0 + 1] += g_rep.y;
        } else {
            ghat[o0] += dot(orbit.line.dir, g_rep);
        }
    }

    // Adjoint solve reuses the forward factorization.
    const Eigen::VectorXd lambda = lu_.transpose().solve(ghat);

    const Eigen::VectorXd dw = dweights_dtheta(params.theta);
    Eigen::VectorXd dldw_eff(params.theta.size());
    for (int e = 0; e < static_cast<int>(edge_mat_.size()); ++e) {
        double dldw = 0.0;
        for (const MatTerm& t : edge_mat_[e])
            dldw -= lambda[t.row] * t.coef * last_x_[t.col];
        for (const RhsTerm& t : edge_rhs_[e]) dldw += lambda[t.row] * t.coef;
        dldw_eff[e] = dldw;
    }
    grad.dtheta = Eigen::VectorXd::Zero(params.theta.size());
    for (Eigen::Index e = 0; e < params.theta.size(); ++e) {
        const double chain = symmetrize_
            ? 0.5 * (dldw_eff[e] + dldw_eff[reverse_edge_[e]])
            : dldw_eff[e];
        grad.dtheta[e] = chain * dw[e];
    }
    return grad;
}

SolvedTile solve_tile(const TriMesh& mesh, const ConstraintSet& constraints,
                      const TileParams& params) {
    TileSystem system(mesh, constraints);
    return system.solve(params);
}

// ---------------------------------------------------------------------------
// recover_theta
// ---------------------------------------------------------------------------

namespace {

constexpr double kWeightLo = 0.05;
constexpr double kWeightHi = 0.95;
constexpr double kWeightMargin = 1e-8;

// Dykstra's alternating projections between the representable weight box and
// an affine constraint set (given by its projection operator). Returns true
// when the final affine-feasible point also lies in the box.
template <class AffineProj>
bool project_into_box(Eigen::VectorXd& w, const AffineProj& affine, int iterations) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(w.size());
    Eigen::VectorXd q = Eigen::VectorXd::Zero(w.size());
    auto box = [](Eigen::VectorXd v) {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            v[i] = std::clamp(v[i], kWeightLo + kWeightMargin, kWeightHi - kWeightMargin);
        return v;
    };
    Eigen::VectorXd x = w;
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXd y = box(x + p);
        p = x + p - y;
        x = affine(y + q);
        q = y + q - x;
    }
    // x is affine-feasible; accept it if the box holds too.
    if (x.minCoeff() < kWeightLo || x.maxCoeff() > kWeightHi) return false;
    w = x;
    return true;
}

}  // namespace

RecoverResult recover_theta(const TriMesh& mesh, const ConstraintSet& constraints,
                            std::span<const Point2> positions, double phi) {
    const ValidityReport report =
        full_report(mesh, constraints, positions, phi, {});
    if (!report.passed)
        throw std::invalid_argument("recover_theta requires a valid tile");

    const Isometry2 unrot = Isometry2::rotation(-phi, {0, 0});
    std::vector<Point2> q(positions.size());
    for (size_t i = 0; i < positions.size(); ++i) q[i] = apply(unrot, positions[i]);

    RecoverResult out;
    out.params.theta = Eigen::VectorXd::Zero(mesh.directed_edge_count());
    out.params.phi = phi;

    struct FanEntry {
        Point2 p;
        int edge;
        double angle;
    };

    for (const auto& orbit : constraints.orbits) {
        if (orbit.rows == OrbitInfo::Rows::none) continue;
        const Point2 center = q[orbit.rep];

        std::vector<FanEntry> fan;
        for (int v : orbit.members) {
            const Isometry2 back = inverse(constraints.to_rep[v]);
            for (int eid : mesh.out_edges[v]) {
                const int j = mesh.directed_edges[eid].second;
                fan.push_back({apply(back, q[j]), eid, 0.0});
            }
        }
        if (orbit.rows == OrbitInfo::Rows::projected) {
            // The tiling continues across the mirror with the same edge set.
            const Isometry2 sigma = Isometry2::reflection(orbit.line);
            const size_t half = fan.size();
            for (size_t i = 0; i < half; ++i)
                fan.push_back({apply(sigma, fan[i].p), fan[i].edge, 0.0});
        }

        double scale = 0.0;
        for (auto& f : fan) {
            f.angle = std::atan2(f.p.y - center.y, f.p.x - center.x);
            scale = std::max(scale, distance(f.p, center));
        }
        std::sort(fan.begin(), fan.end(), [](const FanEntry& a, const FanEntry& b) {
            if (a.angle != b.angle) return a.angle < b.angle;
            return a.edge < b.edge;
        });

        // Merge coincident fan points (glued seam edges appear once per member).
        const double tol = 1e-9 * (1.0 + scale);
        struct UniquePoint {
            Point2 p;
            double angle;
            std::vector<int> edges;
        };
        std::vector<UniquePoint> ring;
        for (const auto& f : fan) {
            if (!ring.empty() && distance(ring.back().p, f.p) <= tol) {
                ring.back().edges.push_back(f.edge);
                continue;
            }
            ring.push_back({f.p, f.angle, {f.edge}});
        }
        if (ring.size() >= 2 &&
            distance(ring.front().p, ring.back().p) <= tol) {
            for (int e : ring.back().edges) ring.front().edges.push_back(e);
            ring.pop_back();
        }

        const int m = static_cast<int>(ring.size());
        std::vector<double> gap(m), weight(m);
        for (int i = 0; i < m; ++i) {
            double d = ring[(i + 1) % m].angle - ring[i].angle;
            if (i + 1 == m) d += 2.0 * std::numbers::pi;
            gap[i] = d;
        }
        double total = 0.0;
        for (int i = 0; i < m; ++i) {
            const double prev = gap[(i + m - 1) % m];
            const double r = distance(ring[i].p, center);
            weight[i] = (std::tan(prev / 2.0) + std::tan(gap[i] / 2.0)) / r;
            total += weight[i];
        }
        for (int i = 0; i < m; ++i) {
            const double share =
                weight[i] / total / static_cast<double>(ring[i].edges.size());
            for (int e : ring[i].edges) out.params.theta[e] += share;
        }

        // Each orbit equation is homogeneous in its weights, so a per-orbit
        // rescale can move out-of-range mean-value coordinates back into the
        // representable band without changing the solution. Only meaningful
        // for the groups that keep directed weights as-is.
        if (constraints.gauge_dirs.empty()) {
            std::vector<int> orbit_edges;
            for (const auto& up : ring)
                for (int e : up.edges) orbit_edges.push_back(e);
            std::sort(orbit_edges.begin(), orbit_edges.end());
            orbit_edges.erase(std::unique(orbit_edges.begin(), orbit_edges.end()),
                              orbit_edges.end());
            double lo = 1e300, hi = 0.0;
            for (int e : orbit_edges) {
                lo = std::min(lo, out.params.theta[e]);
                hi = std::max(hi, out.params.theta[e]);
            }
            if (lo >= 0.05 && hi <= 0.95) continue;

            // The orbit equation is homogeneous in its weights: rescaling
            // recenters the band without changing the solution.
            if (hi / lo < kWeightHi / kWeightLo) {
                const double scale = std::sqrt(kWeightLo * kWeightHi / (lo * hi));
                for (int e : orbit_edges) out.params.theta[e] *= scale;
                continue;
            }

            // Otherwise search the whole barycentric family: any positive
            // in-range weights satisfying this orbit's (projected) equation
            // reproduce the positions equally well.
            const int k = static_cast<int>(orbit_edges.size());
            const bool projected = orbit.rows == OrbitInfo::Rows::projected;
            const int eq_rows = projected ? 1 : 2;
            Eigen::MatrixXd arms = Eigen::MatrixXd::Zero(eq_rows, k);
            for (int idx = 0; idx < k; ++idx) {
                const int eid = orbit_edges[idx];
                const int v = mesh.directed_edges[eid].first;
                const int j = mesh.directed_edges[eid].second;
                const Vec2 arm =
                    apply(inverse(constraints.to_rep[v]), q[j]) - center;
                if (projected) {
                    arms(0, idx) = dot(orbit.line.dir, arm);
                } else {
                    arms(0, idx) = arm.x;
                    arms(1, idx) = arm.y;
                }
            }
            const Eigen::MatrixXd gram = arms * arms.transpose();
            const Eigen::MatrixXd gram_inv = gram.inverse();
            auto affine = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
                return v - arms.transpose() * (gram_inv * (arms * v));
            };
            Eigen::VectorXd w(k);
            const double scale = std::sqrt(kWeightLo * kWeightHi / (lo * hi));
            for (int idx = 0; idx < k; ++idx)
                w[idx] = out.params.theta[orbit_edges[idx]] * scale;
            if (project_into_box(w, affine, 300)) {
                for (int idx = 0; idx < k; ++idx)
                    out.params.theta[orbit_edges[idx]] = w[idx];
            }
            // On failure the clamp pass below counts the out-of-range edges.
        }
    }

    // The fixed-point-free groups solve with the symmetrized weight field, so
    // the mean-value coordinates only seed an equality-constrained least
    // squares for a symmetric weight set that is exactly harmonic at the
    // given positions.
    if (!constraints.gauge_dirs.empty()) {
        const int ne = mesh.directed_edge_count();
        std::vector<int> undirected(ne, -1);
        std::vector<int> primary;  // directed id with the smaller endpoint first
        for (int e = 0; e < ne; ++e) {
            const auto [i, j] = mesh.directed_edges[e];
            if (i < j) {
                undirected[e] = static_cast<int>(primary.size());
                primary.push_back(e);
            }
        }
        for (int e = 0; e < ne; ++e) {
            if (undirected[e] >= 0) continue;
            const auto [i, j] = mesh.directed_edges[e];
            undirected[e] = undirected[mesh.directed_edge_id(j, i)];
        }
        const int nu = static_cast<int>(primary.size());

        Eigen::VectorXd target(nu);
        for (int u = 0; u < nu; ++u) {
            const int e = primary[u];
            const auto [i, j] = mesh.directed_edges[e];
            const int er = mesh.directed_edge_id(j, i);
            target[u] = 0.5 * (out.params.theta[e] + out.params.theta[er]);
        }

        // Harmonic equations at the solved positions, unknowns one weight per
        // undirected edge.
        std::vector<Eigen::Triplet<double>> ctrips;
        int row = 0;
        for (const auto& orbit : constraints.orbits) {
            if (orbit.rows == OrbitInfo::Rows::none) continue;
            const bool projected = orbit.rows == OrbitInfo::Rows::projected;
            const Point2 center = q[orbit.rep];
            for (int v : orbit.members) {
                const Isometry2 back = inverse(constraints.to_rep[v]);
                for (int eid : mesh.out_edges[v]) {
                    const int j = mesh.directed_edges[eid].second;
                    const Vec2 arm = apply(back, q[j]) - center;
                    const int col = undirected[eid];
                    if (projected) {
                        ctrips.emplace_back(row, col, dot(orbit.line.dir, arm));
                    } else {
                        ctrips.emplace_back(row, col, arm.x);
                        ctrips.emplace_back(row + 1, col, arm.y);
                    }
                }
            }
            row += projected ? 1 : 2;
        }

        // KKT system for min ||s - target||^2 s.t. C s = 0, with a tiny
        // regularizer absorbing the dependent rows among the equations.
        const int dim = nu + row;
        std::vector<Eigen::Triplet<double>> ktrips;
        for (int u = 0; u < nu; ++u) ktrips.emplace_back(u, u, 2.0);
        for (const auto& t : ctrips) {
            ktrips.emplace_back(nu + t.row(), t.col(), t.value());
            ktrips.emplace_back(t.col(), nu + t.row(), t.value());
        }
        for (int r = 0; r < row; ++r) ktrips.emplace_back(nu + r, nu + r, -1e-12);
        Eigen::SparseMatrix<double> K(dim, dim);
        K.setFromTriplets(ktrips.begin(), ktrips.end());
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
        rhs.head(nu) = 2.0 * target;
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(K);
        if (lu.info() != Eigen::Success)
            throw SolveError("symmetric weight recovery failed to factorize");
        Eigen::VectorXd s = lu.solve(rhs).head(nu);
        // The whole system is homogeneous in the weights (the gauge rows do
        // not involve them), so one global rescale can recenter the band.
        const double lo = s.minCoeff(), hi = s.maxCoeff();
        if ((lo < 0.05 || hi > 0.95) && lo > 0.0 && hi / lo < kWeightHi / kWeightLo)
            s *= std::sqrt(kWeightLo * kWeightHi / (lo * hi));
        if (s.minCoeff() < kWeightLo || s.maxCoeff() > kWeightHi) {
            // Search the symmetric-witness family for an in-range member.
            auto affine = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
                Eigen::VectorXd r = Eigen::VectorXd::Zero(dim);
                r.head(nu) = 2.0 * v;
                return lu.solve(r).head(nu);
            };
            Eigen::VectorXd w = s;
            if (w.minCoeff() <= 0.0)
                w = w.cwiseMax(kWeightLo + kWeightMargin);
            if (project_into_box(w, affine, 300)) s = w;
        }
        for (int e = 0; e < ne; ++e) out.params.theta[e] = s[undirected[e]];
    }

    // theta currently holds barycentric weights; squash back through the
    // sigmoid range, clamping anything the range cannot represent.
    for (Eigen::Index e = 0; e < out.params.theta.size(); ++e) {
        const auto [i, j] = mesh.directed_edges[e];
        if (!constraints.vertex_has_equation(i)) {
            out.params.theta[e] = 0.0;  // unused by the solve
            continue;
        }
        double w = out.params.theta[e];
        if (w < 0.05 || w > 0.95) {
            ++out.clamped_count;
            w = std::clamp(w, 0.05 + 1e-9, 0.95 - 1e-9);
        }
        out.params.theta[e] = theta_from_weight(w);
    }
    return out;
}

}  // namespace escher

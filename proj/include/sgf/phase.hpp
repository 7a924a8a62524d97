#pragma once

#include "sgf/front.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace sgf {

using Vec3 = Eigen::Vector3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

/// Value and derivatives of a generating family at (x, theta).
struct GeneratingFamilyEval {
    double value = 0;
    Vec3 grad = Vec3::Zero();     // d/dtheta
    Mat3 hess = Mat3::Zero();     // d2/dtheta2
    Vec2 grad_x = Vec2::Zero();   // d/dx
    Mat32 mixed = Mat32::Zero();  // d2/(dtheta dx)
};

struct FamilyOptions {
    /// include the second angular derivatives of P (extra rays by central differences)
    bool second_order = true;
    double step = 1e-4;
};

/// Phi = mE t + lambda <P(t,psi), x - X(t,psi)>, theta = (t, psi, lambda).
GeneratingFamilyEval eval_family_plane(const Front& front, const Vec2& x, double t, double psi, double lambda,
                                       const FamilyOptions& opts = {});

/// Same family from an already computed sample. d2P/dpsi2 is only used off the critical set.
GeneratingFamilyEval family_from_sample(const HomHamiltonian& H, const FrontSample& s, const Vec2& ppsi_psi,
                                        const Vec2& x, double lambda, double mE);

/// Sample of the ray launched from the cylinder point (phi omega(psi), omega(psi)).
FrontSample cylinder_sample(const Front& front, double t, double phi, double psi);

/// Phi = phi + lambda <P(t,phi,psi), x - X(t,phi,psi)>, theta = (lambda, phi, psi). Needs m = 1.
GeneratingFamilyEval eval_family_cylinder_extended(const Front& front, const Vec2& x, double t, double phi,
                                                   double psi, double lambda, const FamilyOptions& opts = {});

/// Phi = mE t + lambda <P, x - X> on the cylinder front at its own phi, theta = (t, psi, lambda).
GeneratingFamilyEval eval_family_cylinder_energy(const Front& front, const Vec2& x, double t, double psi,
                                                 double lambda, const FamilyOptions& opts = {});

/// Determinant of the (t, psi) block of the energy-family Hessian on the critical set.
double cylinder_energy_D(const FrontSample& s);
/// Its closed form at t = 0 on the cylinder of radius phi.
double cylinder_energy_D0(const HomHamiltonian& H, double phi, double psi);

struct CriticalBranch {
    double t_star = 0;
    double psi_star = 0;
    double lambda_star = 1;
    double phase_value = 0;
    Mat3 hessian = Mat3::Zero();
    double hessian_det = 0;
    int signature = 0;
    FrontSample sample;
    double residual = 0;  // norm of the theta-gradient
    bool degenerate = false;
};

struct BranchOptions {
    int n_t = 400;
    double newton_tol = 1e-12;
    int max_iter = 40;
    double accept_tol = 1e-10;
    double degeneracy = 1e-6;
    int threads = 0;
};

/// Branch solver for one front; the scan grid is computed once and reused across targets.
class BranchSolver {
public:
    explicit BranchSolver(const Front& front, const BranchOptions& opts = {});
    std::vector<CriticalBranch> solve(const Vec2& x) const;
    const Front& front() const { return front_; }
    const BranchOptions& options() const { return opts_; }

private:
    struct Node {
        Vec2 X, P, Ppsi;
    };
    const Front& front_;
    BranchOptions opts_;
    std::vector<double> t_grid_;
    std::vector<std::vector<Node>> nodes_;  // [column][time]
    std::optional<CriticalBranch> polish(const Vec2& x, double t0, double psi0) const;
};

std::vector<CriticalBranch> solve_branches(const Front& front, const Vec2& x, const BranchOptions& opts = {});

enum class EikonalKind { plane, cylinder };

double eikonal_values(EikonalKind kind, double t, double phi, double m, double E, double tau);

/// Generating function of the time-one free flow for H = |p|^m, m > 1.
double flat_twist_action(double m, const Vec2& x, const Vec2& X);
/// (d/dx, d/dX) of flat_twist_action
std::pair<Vec2, Vec2> flat_twist_gradients(double m, const Vec2& x, const Vec2& X);

/// d_t Phi + H(x, d_x Phi) - E for the plane family.
double hj_residual(const Front& front, const Vec2& x, double t, double psi, double lambda);

/// 5x5 Jacobian of (t, psi, d_t Phi, d_lambda Phi, d_psi Phi) in (x1, x2, t, psi, lambda)
/// by central differences of the analytic gradient, at x = X(t, psi), lambda = 1.
Eigen::Matrix<double, 5, 5> density_jacobian_plane(const Front& front, double t, double psi, double step = 1e-5);
/// Quotient of volume forms for the plane family (equals -mE det(P, Ppsi)).
double density_quotient_plane(const Front& front, double t, double psi, double step = 1e-5);

/// 6x6 Jacobian of (t, psi, phi, d_phi Phi, d_lambda Phi, d_psi Phi) in
/// (x1, x2, t, psi, phi, lambda) for the extended cylinder family.
Eigen::Matrix<double, 6, 6> density_jacobian_cylinder(const Front& front, double t, double psi, double step = 1e-5);
double density_quotient_cylinder(const Front& front, double t, double psi, double step = 1e-5);

/// Smallest singular value of [d2Phi/dtheta dx, d2Phi/dtheta2] on the critical set.
double nondegeneracy_margin(const Front& front, double t, double psi);

}  // namespace sgf

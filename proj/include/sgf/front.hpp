#pragma once

#include "sgf/flow.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace sgf {

enum class PointClass { ordinary, special, residual };

std::string to_string(PointClass c);

struct DiagnosticTolerances {
    double focal = 1e-8;     // relative to max(1, |Xdot||Xpsi|)
    double classify = 1e-8;  // absolute, on normalized inner products
    double rank = 1e-8;      // singular value threshold, relative to the largest
};

struct FrontDiagnostics {
    double a = 0;      // <Pdot, Xpsi>
    double c = 0;      // <Ppsi, Xpsi>
    double d = 0;      // <Pdot, Xdot>
    double alpha = 0;  // det(P, Ppsi)
    double beta = 0;   // det(P, Pdot)
    double gamma = 0;  // det(Pdot, Ppsi)
    double density = 0;
    double focal_det = 0;  // det(Xdot, Xpsi)
    int rank_dpix = 2;
    PointClass cls = PointClass::ordinary;
    bool focal = false;
};

FrontDiagnostics diagnostics(const FrontSample& s, double m, double E, const DiagnosticTolerances& tol = {});

struct HessianTPL {
    Mat3 matrix;
    double det;
};

/// Hessian of the generating family in (t, psi, lambda) on the critical set.
HessianTPL hessian_tpl(const FrontSample& s, double m, double E, double lambda = 1.0);

/// Which position coordinate stays in the position representation.
enum class MixedSplit {
    x1_xi2,  // x'' = x1, Legendre transform in x2
    x2_xi1,  // x'' = x2, Legendre transform in x1
};

using Mat4 = Eigen::Matrix4d;
using Mat5 = Eigen::Matrix<double, 5, 5>;

/// Hessian in (x', t, psi, lambda) of Phi - x' xi' on the critical set.
Mat4 mixed_hessian_matrix(const FrontSample& s, double m, double E, MixedSplit split, double lambda = 1.0);
/// Its determinant in closed form.
double mixed_hessian_det(const FrontSample& s, double m, double E, MixedSplit split, double lambda = 1.0);

/// Hessian in (x, t, psi, lambda) of Phi - x xi on the critical set.
Mat5 fourier_hessian_matrix(const FrontSample& s, double m, double E, double lambda = 1.0);
/// -lambda^-3 det of the matrix above, in closed form.
double fourier_hessian_reduced(const FrontSample& s, double m, double E);

struct PropA1Report {
    bool rank_ok = false;
    bool symmetric_ok = false;
    bool nondegenerate_ok = false;
    double min_singular = 0;
    double symmetry_defect = 0;
    double det_plus = 0;   // |det(C + iB)|
    double det_minus = 0;  // |det(C - iB)|
    bool ok() const { return rank_ok && symmetric_ok && nondegenerate_ok; }
};

/// B = (Pdot, Ppsi), C = (Xdot, Xpsi).
PropA1Report propA1_check(const FrontSample& s, double tol = 1e-8, double sym_tol = 1e-7);

struct CausticPoint {
    double t = 0;
    double psi = 0;
    Vec2 x = Vec2::Zero();
    PointClass cls = PointClass::ordinary;
    int rank = 1;
    double c = 0;
    double alpha = 0;
    double density = 0;
    /// false when the point contradicts the focal-point lemma for conformal H
    bool lemma_ok = true;
};

struct CausticCurve {
    std::vector<CausticPoint> points;
};

struct CausticOptions {
    double t_tol = 1e-10;
    DiagnosticTolerances tol;
    int threads = 0;
};

/// Zero curves of det(Xdot, Xpsi) over the grid columns of the front.
std::vector<CausticCurve> caustic_scan(const Front& front, const std::vector<double>& t_grid,
                                       const CausticOptions& opts = {});

/// <grad rho(X), P>, conformal H only
double special_function(const HomHamiltonian& H, const FrontSample& s);
/// time derivative of special_function along the ray, closed form
double special_function_rate(const HomHamiltonian& H, const FrontSample& s);

/// Sign changes of special_function along a column of samples.
int special_sign_changes(const HomHamiltonian& H, const std::vector<FrontSample>& column);

}  // namespace sgf

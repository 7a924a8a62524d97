#pragma once

#include "sgf/phase.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace sgf {

enum class OscMethod { direct, stationary, vanvleck };

std::string to_string(OscMethod m);

struct OscResult {
    Complex value{};
    OscMethod method = OscMethod::direct;
    double est_error = 0;
    double h = 0;
};

/// Normalization of the starred integrals: int^* over k dimensions is (2 pi h)^{-k/2} int.
/// Every other routine in this module returns the plain integral.
double star_norm(int dims, double h);

struct QuadRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

QuadRule gauss_legendre(int n, double a = -1.0, double b = 1.0);
QuadRule composite_gauss(double a, double b, int panels, int order);

/// Composite Gauss-Legendre with panel doubling until two passes agree to tol (absolute).
Complex integrate_adaptive(const std::function<Complex(double)>& f, double a, double b, double tol = 1e-12,
                           int order = 16, int max_panels = 1 << 14);

/// Trapezoid rule over one period [0, 2 pi) with n nodes.
Complex periodic_trapezoid(const std::function<Complex(double)>& f, int n);

/// C-infinity step: 0 for s <= 0, 1 for s >= 1.
double smooth_step(double s);

struct LambdaWindow {
    double center = 1.0;
    double flat = 0.1;   // equal to 1 on |lambda - center| <= flat
    double half = 0.6;   // zero for |lambda - center| >= half
    double lo() const { return center - half; }
    double hi() const { return center + half; }
};

double lambda_window(double lambda, const LambdaWindow& w = {});

/// Polynomial through (x_i, y_i) evaluated at 0 (Neville).
Complex neville_at_zero(const std::vector<double>& x, std::vector<Complex> y);

/// Equal to 1 on [0, T/2], zero for t >= T.
double time_cutoff(double t, double T);

using AmplitudeFn = std::function<Complex(const Eigen::VectorXd&)>;

/// prod_j (mu_j / (2 i pi h))^{-1/2} over the eigenvalues of a real symmetric A.
Complex scaled_inv_sqrt_det(const Eigen::MatrixXd& A, double h);

/// Stationary phase for int e^{i<Ax,x>/2h} u(x) dx with k_terms terms of the series
/// sum_j (i h / 2)^j <A^{-1} d, d>^j u(0) / j!, derivatives by nested central differences.
OscResult quadratic_stationary(const Eigen::MatrixXd& A, const AmplitudeFn& u, double h, int k_terms = 1);

/// Leading term e^{i Phi_c/h} (det(Hess/2 i pi h))^{-1/2} amplitude at a nondegenerate branch.
OscResult stationary_at_branch(const CriticalBranch& branch, Complex amplitude, double h);

/// Phase alpha + lambda beta and amplitude factor at one (t, psi) node.
struct LinearPhaseNode {
    double alpha = 0;
    double beta = 0;
    Complex amp{};
};

struct DirectIntegrand {
    /// node(i, t, j, psi) for the i-th time node and the j-th angle psi = 2 pi j / n_psi
    std::function<LinearPhaseNode(int, double, int, double)> node;
    /// lambda dependence of the amplitude (the window is applied separately)
    std::function<Complex(double psi, double lambda)> lambda_amp;
};

struct DirectGrid {
    double T = 4.0;        // time cutoff; the t range is [0, T]
    int t_panels = 8;      // Gauss-Kronrod 15 panels
    int n_psi = 256;
    int n_lambda = 64;
    LambdaWindow window;
    double max_cell_phase = pi / 2;
};

/// Time nodes used by direct_oscillatory for a grid.
std::vector<double> direct_time_nodes(const DirectGrid& g);

/// (i/h) int theta_T(t) dt int dpsi int dlambda e^{i Phi/h} b. Throws RefinementRequired
/// when the phase changes by more than max_cell_phase between neighbouring nodes.
OscResult direct_oscillatory(const DirectIntegrand& f, double h, const DirectGrid& g, int threads = 1);

struct VanVleckTerm {
    Complex amplitude{};
    Complex jacobian{};
    double phase = 0;
};

/// sum amplitude jacobian^{-1/2} e^{i phase/h}, principal square root.
OscResult van_vleck_sum(const std::vector<VanVleckTerm>& terms, double h);

/// Continued values of d^{-1/2} along a path of determinants.
std::vector<Complex> continued_inv_sqrt(const std::vector<Complex>& dets);

/// Jacobian of p -> X(t; x0, p) at a plane-front sample with initial momentum radius r0,
/// from the homogeneity of H.
double exp_map_jacobian(const FrontSample& s, double m, double r0);

}  // namespace sgf

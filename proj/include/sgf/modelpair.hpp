#pragma once

#include "sgf/oscint.hpp"

#include <functional>
#include <vector>

namespace sgf {

/// a(xi', xi_n), independent of x
using ModelAmplitude = std::function<Complex(double xi1, double xi2)>;

/// exp(-|xi - c|^2 / (2 s^2))
ModelAmplitude gaussian_model_amplitude(double s = 1.0, Vec2 c = Vec2::Zero());

struct ModelOptions {
    // rectangle holding the support of a
    double xi1_lo = -8, xi1_hi = 8;
    double xi2_lo = -8, xi2_hi = 8;
    double x1_max = 1.0;       // largest |x'| resolved by the xi' rule
    double panel_phase = 8.0;  // phase change per Gauss-Legendre panel
    int order = 16;
    int threads = 0;
};

/// (i/h) int theta_T(t) e^{-i t xi_n / h} dt, by quadrature. With sharp = true the cutoff is
/// the indicator of [0, T].
Complex model_t_integral(double xi_n, double h, double T, bool sharp = false);

/// (1 - e^{-i T xi_n / h}) / xi_n, the sharp-cutoff value in closed form
Complex model_t_integral_exact(double xi_n, double h, double T);

/// u_h(x) = (i/h) int theta_T dt int^* e^{i(x' xi' + (x_n - t) xi_n)/h} a(xi) dxi, with the
/// t integral cached per xi_n node.
class ModelSolution {
public:
    ModelSolution(ModelAmplitude a, double h, double T, const ModelOptions& opts = {});

    /// throws DomainError for x_n > T/2 or |x'| > x1_max
    Complex u(const Vec2& x) const;
    /// f_h(x) = int^* e^{i x xi / h} a(xi) dxi
    Complex f(const Vec2& x) const;
    /// 2 i pi (2 pi h)^{-1} int e^{i x' xi' / h} a(xi', 0) dxi'
    Complex reduced(double x1) const;

    double h() const { return h_; }
    double T() const { return T_; }
    const ModelOptions& options() const { return opts_; }
    size_t n_xi1() const { return q1_.nodes.size(); }
    size_t n_xi2() const { return q2_.nodes.size(); }

private:
    Complex sum(const Vec2& x, bool with_k) const;

    ModelAmplitude a_;
    double h_, T_;
    ModelOptions opts_;
    QuadRule q1_, q2_;
    std::vector<Complex> table_;  // a w1 w2 at (xi1_i, xi2_j), index j * n_xi1 + i
    std::vector<Complex> k_;      // t integral at xi2_j
};

Complex model_u(const ModelAmplitude& a, double h, double T, const Vec2& x, const ModelOptions& opts = {});

struct ModelGrid {
    double x1_lo = -0.3, x1_hi = 0.3;
    int n1 = 7;
    double x2_lo = -0.3, x2_hi = 0.5;
    int n2 = 9;
    std::vector<Vec2> points() const;
};

/// max over the grid of |h D_{x_n} u - f| / max |f|, D_{x_n} by central differences of step h/50.
double model_residual(const ModelSolution& sol, const ModelGrid& grid);
double model_residual(const ModelAmplitude& a, double h, double T, const ModelGrid& grid,
                      const ModelOptions& opts = {});

struct ModelSymbols {
    Complex sigma{};               // a(xi) / xi_n
    Complex sigma_plus{};          // 2 i pi a(xi', 0)
    Complex sigma_plus_literal{};  // (i/h) (det A)^{-1/2} (2 i pi h)^3 a(xi', 0), det A = -1
};

/// Throws DomainError for xi_n = 0.
ModelSymbols model_symbols(const ModelAmplitude& a, double h, const Vec2& xi);

/// sigma_plus_literal / sigma_plus
Complex wave_symbol_ratio(double h);

struct SymbolLimit {
    Complex limit{};   // extrapolated lim xi_n sigma(xi', xi_n)
    Complex target{};  // a(xi', 0)
    std::vector<double> xi_n;
    std::vector<Complex> values;  // xi_n sigma along the sequence
};

/// xi_n sigma at xi_n = d0 2^{-k}, k < n, extrapolated to xi_n = 0 (Richardson/Neville).
SymbolLimit model_symbol_limit(const ModelAmplitude& a, double h, double xi1, double d0 = 0.1, int n = 6);

}  // namespace sgf

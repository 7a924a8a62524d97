#include "sgf/modelpair.hpp"

#include "sgf/flow.hpp"
#include "sgf/specfun.hpp"

#include <algorithm>
#include <cmath>

namespace sgf {

namespace {

constexpr Complex I{0.0, 1.0};

int panels_for(double phase, double per_panel)
{
    return std::max(2, static_cast<int>(std::ceil(phase / per_panel)));
}

Complex t_quad(double xi_n, double h, double a, double b, bool smooth, double T, double per_panel)
{
    const QuadRule q = composite_gauss(a, b, panels_for((b - a) * std::fabs(xi_n) / h, per_panel), 16);
    Complex s{};
    for (size_t k = 0; k < q.nodes.size(); ++k) {
        const double t = q.nodes[k];
        const double c = smooth ? time_cutoff(t, T) : 1.0;
        s += q.weights[k] * c * std::exp(-I * t * xi_n / h);
    }
    return s;
}

}  // namespace

ModelAmplitude gaussian_model_amplitude(double s, Vec2 c)
{
    if (!(s > 0)) throw DomainError("gaussian_model_amplitude: width must be positive");
    return [s, c](double x1, double x2) {
        const double d1 = x1 - c.x(), d2 = x2 - c.y();
        return Complex(std::exp(-(d1 * d1 + d2 * d2) / (2 * s * s)), 0.0);
    };
}

Complex model_t_integral(double xi_n, double h, double T, bool sharp)
{
    if (!(h > 0) || !(T > 0)) throw DomainError("model_t_integral: h and T must be positive");
    constexpr double per_panel = 4.0;
    Complex s;
    if (sharp)
        s = t_quad(xi_n, h, 0.0, T, false, T, per_panel);
    else
        s = t_quad(xi_n, h, 0.0, 0.5 * T, false, T, per_panel) + t_quad(xi_n, h, 0.5 * T, T, true, T, per_panel);
    return I / h * s;
}

Complex model_t_integral_exact(double xi_n, double h, double T)
{
    if (!(h > 0) || !(T > 0)) throw DomainError("model_t_integral_exact: h and T must be positive");
    if (xi_n == 0) return I * T / h;
    const double z = T * xi_n / h;
    const double s = std::sin(0.5 * z);
    return Complex(2 * s * s, std::sin(z)) / xi_n;
}

ModelSolution::ModelSolution(ModelAmplitude a, double h, double T, const ModelOptions& opts)
    : a_(std::move(a)), h_(h), T_(T), opts_(opts)
{
    if (!a_) throw DomainError("ModelSolution: amplitude is empty");
    if (!(h > 0) || !(T > 0)) throw DomainError("ModelSolution: h and T must be positive");
    if (!(opts.xi1_hi > opts.xi1_lo) || !(opts.xi2_hi > opts.xi2_lo) || !(opts.x1_max > 0) ||
        !(opts.panel_phase > 0) || opts.order < 2)
        throw DomainError("ModelSolution: invalid options");

    // x_n ranges over [-T/2, T/2] and t over [0, T]
    const double rate2 = 1.5 * T / h;
    const double rate1 = opts.x1_max / h;
    q1_ = composite_gauss(opts.xi1_lo, opts.xi1_hi,
                          panels_for(rate1 * (opts.xi1_hi - opts.xi1_lo), opts.panel_phase), opts.order);
    q2_ = composite_gauss(opts.xi2_lo, opts.xi2_hi,
                          panels_for(rate2 * (opts.xi2_hi - opts.xi2_lo), opts.panel_phase), opts.order);

    const int n1 = static_cast<int>(q1_.nodes.size()), n2 = static_cast<int>(q2_.nodes.size());
    table_.assign(static_cast<size_t>(n1) * n2, Complex{});
    k_.assign(n2, Complex{});
    parallel_for(n2, opts.threads, [&](int j) {
        const double xi2 = q2_.nodes[j];
        k_[j] = model_t_integral(xi2, h_, T_);
        for (int i = 0; i < n1; ++i)
            table_[static_cast<size_t>(j) * n1 + i] = a_(q1_.nodes[i], xi2) * (q1_.weights[i] * q2_.weights[j]);
    });
}

Complex ModelSolution::sum(const Vec2& x, bool with_k) const
{
    const size_t n1 = q1_.nodes.size(), n2 = q2_.nodes.size();
    std::vector<Complex> e1(n1);
    for (size_t i = 0; i < n1; ++i) e1[i] = std::exp(I * x.x() * q1_.nodes[i] / h_);
    Complex s{};
    for (size_t j = 0; j < n2; ++j) {
        const Complex* row = &table_[j * n1];
        Complex inner{};
        for (size_t i = 0; i < n1; ++i) inner += e1[i] * row[i];
        Complex w = std::exp(I * x.y() * q2_.nodes[j] / h_);
        if (with_k) w *= k_[j];
        s += w * inner;
    }
    return s * star_norm(2, h_);
}

Complex ModelSolution::u(const Vec2& x) const
{
    if (std::fabs(x.y()) > 0.5 * T_ * (1 + 1e-12))
        throw DomainError("ModelSolution::u: x_n outside [-T/2, T/2]");
    if (std::fabs(x.x()) > opts_.x1_max * (1 + 1e-12))
        throw DomainError("ModelSolution::u: |x'| exceeds x1_max");
    return sum(x, true);
}

Complex ModelSolution::f(const Vec2& x) const
{
    if (std::fabs(x.y()) > 0.5 * T_ * (1 + 1e-12) || std::fabs(x.x()) > opts_.x1_max * (1 + 1e-12))
        throw DomainError("ModelSolution::f: point outside the resolved region");
    return sum(x, false);
}

Complex ModelSolution::reduced(double x1) const
{
    if (std::fabs(x1) > opts_.x1_max * (1 + 1e-12)) throw DomainError("ModelSolution::reduced: |x'| exceeds x1_max");
    Complex s{};
    for (size_t i = 0; i < q1_.nodes.size(); ++i)
        s += std::exp(I * x1 * q1_.nodes[i] / h_) * a_(q1_.nodes[i], 0.0) * q1_.weights[i];
    return 2.0 * I * pi / (two_pi * h_) * s;
}

Complex model_u(const ModelAmplitude& a, double h, double T, const Vec2& x, const ModelOptions& opts)
{
    ModelOptions o = opts;
    o.x1_max = std::max(o.x1_max, std::fabs(x.x()));
    return ModelSolution(a, h, T, o).u(x);
}

std::vector<Vec2> ModelGrid::points() const
{
    if (n1 < 1 || n2 < 1) throw DomainError("ModelGrid: empty grid");
    std::vector<Vec2> pts;
    pts.reserve(static_cast<size_t>(n1) * n2);
    for (int j = 0; j < n2; ++j)
        for (int i = 0; i < n1; ++i) {
            const double x1 = n1 == 1 ? x1_lo : x1_lo + (x1_hi - x1_lo) * i / (n1 - 1);
            const double x2 = n2 == 1 ? x2_lo : x2_lo + (x2_hi - x2_lo) * j / (n2 - 1);
            pts.emplace_back(x1, x2);
        }
    return pts;
}

double model_residual(const ModelSolution& sol, const ModelGrid& grid)
{
    const double h = sol.h();
    const double d = h / 50;
    const std::vector<Vec2> pts = grid.points();
    for (const Vec2& p : pts)
        if (std::fabs(p.y()) + d > 0.5 * sol.T())
            throw DomainError("model_residual: grid reaches beyond |x_n| = T/2");
    std::vector<double> res(pts.size()), fa(pts.size());
    parallel_for(static_cast<int>(pts.size()), sol.options().threads, [&](int k) {
        const Vec2& p = pts[k];
        const Complex up = sol.u(p + Vec2(0, d)), um = sol.u(p - Vec2(0, d));
        const Complex f = sol.f(p);
        res[k] = std::abs(-I * h * (up - um) / (2 * d) - f);
        fa[k] = std::abs(f);
    });
    const double fmax = *std::max_element(fa.begin(), fa.end());
    const double rmax = *std::max_element(res.begin(), res.end());
    if (fmax == 0) return rmax;
    return rmax / fmax;
}

double model_residual(const ModelAmplitude& a, double h, double T, const ModelGrid& grid, const ModelOptions& opts)
{
    ModelOptions o = opts;
    o.x1_max = std::max({o.x1_max, std::fabs(grid.x1_lo), std::fabs(grid.x1_hi)});
    return model_residual(ModelSolution(a, h, T, o), grid);
}

Complex wave_symbol_ratio(double h)
{
    if (!(h > 0)) throw DomainError("wave_symbol_ratio: h must be positive");
    // (i/h) (-1)^{-1/2} (2 i pi h)^3 / (2 i pi)
    const Complex inv_sqrt_det = principal_inv_sqrt_det(Complex(-1.0, 0.0));
    return I / h * inv_sqrt_det * std::pow(2.0 * I * pi * h, 3) / (2.0 * I * pi);
}

ModelSymbols model_symbols(const ModelAmplitude& a, double h, const Vec2& xi)
{
    if (!a) throw DomainError("model_symbols: amplitude is empty");
    if (xi.y() == 0) throw DomainError("model_symbols: sigma is singular at xi_n = 0");
    ModelSymbols s;
    s.sigma = a(xi.x(), xi.y()) / xi.y();
    s.sigma_plus = 2.0 * I * pi * a(xi.x(), 0.0);
    s.sigma_plus_literal = s.sigma_plus * wave_symbol_ratio(h);
    return s;
}

SymbolLimit model_symbol_limit(const ModelAmplitude& a, double h, double xi1, double d0, int n)
{
    if (!(d0 > 0) || n < 2) throw DomainError("model_symbol_limit: need d0 > 0 and n >= 2");
    SymbolLimit r;
    for (int k = 0; k < n; ++k) {
        const double xn = d0 * std::ldexp(1.0, -k);
        r.xi_n.push_back(xn);
        r.values.push_back(xn * model_symbols(a, h, Vec2(xi1, xn)).sigma);
    }
    r.limit = neville_at_zero(r.xi_n, r.values);
    r.target = a(xi1, 0.0);
    return r;
}

}  // namespace sgf

#include "sgf/oscint.hpp"

#include "sgf/specfun.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>

namespace sgf {

std::string to_string(OscMethod m)
{
    switch (m) {
    case OscMethod::direct: return "direct";
    case OscMethod::stationary: return "stationary";
    case OscMethod::vanvleck: return "vanvleck";
    }
    return "direct";
}

double star_norm(int dims, double h) { return std::pow(two_pi * h, -0.5 * dims); }

QuadRule gauss_legendre(int n, double a, double b)
{
    if (n < 1) throw DomainError("gauss_legendre: n must be positive");
    const std::vector<double> z = boost::math::legendre_p_zeros<double>(n);
    std::vector<double> x, w;
    for (double r : z) {
        const double dp = boost::math::legendre_p_prime(n, r);
        const double wt = 2.0 / ((1.0 - r * r) * dp * dp);
        x.push_back(r);
        w.push_back(wt);
        if (r != 0.0) {
            x.push_back(-r);
            w.push_back(wt);
        }
    }
    std::vector<int> idx(x.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return x[i] < x[j]; });
    QuadRule q;
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    for (int i : idx) {
        q.nodes.push_back(c + r * x[i]);
        q.weights.push_back(r * w[i]);
    }
    return q;
}

QuadRule composite_gauss(double a, double b, int panels, int order)
{
    if (panels < 1) throw DomainError("composite_gauss: panels must be positive");
    const QuadRule ref = gauss_legendre(order);
    QuadRule q;
    const double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * w;
        for (size_t i = 0; i < ref.nodes.size(); ++i) {
            q.nodes.push_back(lo + 0.5 * w * (ref.nodes[i] + 1.0));
            q.weights.push_back(0.5 * w * ref.weights[i]);
        }
    }
    return q;
}

Complex integrate_adaptive(const std::function<Complex(double)>& f, double a, double b, double tol, int order,
                           int max_panels)
{
    const QuadRule ref = gauss_legendre(order);
    auto pass = [&](int panels) {
        Complex s{};
        const double w = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            const double lo = a + p * w;
            for (size_t i = 0; i < ref.nodes.size(); ++i)
                s += 0.5 * w * ref.weights[i] * f(lo + 0.5 * w * (ref.nodes[i] + 1.0));
        }
        return s;
    };
    int panels = 4;
    Complex prev = pass(panels);
    while (panels < max_panels) {
        panels *= 2;
        const Complex cur = pass(panels);
        if (std::abs(cur - prev) <= tol) return cur;
        prev = cur;
    }
    throw RefinementRequired("integrate_adaptive: no convergence", 0, max_panels);
}

Complex periodic_trapezoid(const std::function<Complex(double)>& f, int n)
{
    if (n < 1) throw DomainError("periodic_trapezoid: n must be positive");
    Complex s{};
    for (int j = 0; j < n; ++j) s += f(two_pi * j / n);
    return s * (two_pi / n);
}

double smooth_step(double s)
{
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

double lambda_window(double lambda, const LambdaWindow& w)
{
    const double d = std::fabs(lambda - w.center);
    if (d <= w.flat) return 1.0;
    if (d >= w.half) return 0.0;
    return 1.0 - smooth_step((d - w.flat) / (w.half - w.flat));
}

Complex neville_at_zero(const std::vector<double>& x, std::vector<Complex> y)
{
    const size_t n = x.size();
    for (size_t lvl = 1; lvl < n; ++lvl)
        for (size_t i = 0; i + lvl < n; ++i)
            y[i] = (x[i + lvl] * y[i] - x[i] * y[i + 1]) / (x[i + lvl] - x[i]);
    return y[0];
}

double time_cutoff(double t, double T)
{
    if (t <= 0.5 * T) return 1.0;
    if (t >= T) return 0.0;
    return 1.0 - smooth_step((t - 0.5 * T) / (0.5 * T));
}

Complex scaled_inv_sqrt_det(const Eigen::MatrixXd& A, double h)
{
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
    Complex r(1.0, 0.0);
    for (Eigen::Index j = 0; j < es.eigenvalues().size(); ++j) {
        const double mu = es.eigenvalues()(j);
        if (mu == 0.0) throw SingularError("stationary phase: singular Hessian");
        r *= principal_inv_sqrt_det(Complex(mu, 0.0) / Complex(0.0, two_pi * h));
    }
    return r;
}

namespace {

double fd_step(int depth)
{
    static const double steps[] = {1e-3, 1e-2, 3e-2, 5e-2};
    return depth <= 4 ? steps[depth - 1] : 0.1;
}

// <B d, d>^j u at x by nested central differences
Complex apply_operator(const Eigen::MatrixXd& B, const AmplitudeFn& u, const Eigen::VectorXd& x, int j, double d)
{
    if (j == 0) return u(x);
    const Eigen::Index k = x.size();
    Complex s{};
    Eigen::VectorXd y = x;
    for (Eigen::Index a = 0; a < k; ++a) {
        y(a) = x(a) + d;
        const Complex fp = apply_operator(B, u, y, j - 1, d);
        y(a) = x(a) - d;
        const Complex fm = apply_operator(B, u, y, j - 1, d);
        y(a) = x(a);
        s += B(a, a) * (fp - 2.0 * apply_operator(B, u, x, j - 1, d) + fm) / (d * d);
        for (Eigen::Index b = a + 1; b < k; ++b) {
            if (B(a, b) == 0.0) continue;
            Complex m{};
            for (int sa : {1, -1})
                for (int sb : {1, -1}) {
                    y(a) = x(a) + sa * d;
                    y(b) = x(b) + sb * d;
                    m += static_cast<double>(sa * sb) * apply_operator(B, u, y, j - 1, d);
                }
            y(a) = x(a);
            y(b) = x(b);
            s += 2.0 * B(a, b) * m / (4.0 * d * d);
        }
    }
    return s;
}

}  // namespace

OscResult quadratic_stationary(const Eigen::MatrixXd& A, const AmplitudeFn& u, double h, int k_terms)
{
    if (A.rows() != A.cols() || A.rows() == 0) throw DomainError("quadratic_stationary: A must be square");
    if (k_terms < 1) throw DomainError("quadratic_stationary: k_terms must be positive");
    if (!(h > 0)) throw DomainError("quadratic_stationary: h must be positive");
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) throw SingularError("quadratic_stationary: singular A");
    const Eigen::MatrixXd B = lu.inverse();
    const Complex pref = scaled_inv_sqrt_det(A, h);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(A.rows());

    Complex sum{};
    Complex c(1.0, 0.0);  // (i h / 2)^j / j!
    for (int j = 0; j < k_terms; ++j) {
        sum += c * (j == 0 ? u(zero) : apply_operator(B, u, zero, j, fd_step(j)));
        c *= Complex(0.0, 0.5 * h) / static_cast<double>(j + 1);
    }
    OscResult r;
    r.value = pref * sum;
    r.est_error = std::abs(pref * c * apply_operator(B, u, zero, k_terms, fd_step(k_terms)));
    r.method = OscMethod::stationary;
    r.h = h;
    return r;
}

OscResult stationary_at_branch(const CriticalBranch& branch, Complex amplitude, double h)
{
    if (branch.degenerate) throw SingularError("stationary_at_branch: degenerate branch, use direct quadrature");
    OscResult r;
    r.value = std::exp(Complex(0.0, branch.phase_value / h)) * scaled_inv_sqrt_det(branch.hessian, h) * amplitude;
    r.est_error = std::abs(r.value) * h;
    r.method = OscMethod::stationary;
    r.h = h;
    return r;
}

namespace {

struct TimeRule {
    std::vector<double> t, wk, wg;  // Kronrod and embedded Gauss weights
};

TimeRule time_rule(const DirectGrid& g)
{
    using K = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    const auto& ka = K::abscissa();
    const auto& kw = K::weights();
    const auto& ga = G::abscissa();
    const auto& gw = G::weights();
    std::vector<double> x, wk, wg;
    for (size_t i = 0; i < ka.size(); ++i) {
        double gweight = 0.0;
        for (size_t j = 0; j < ga.size(); ++j)
            if (std::fabs(ga[j] - ka[i]) < 1e-14) gweight = gw[j];
        x.push_back(ka[i]);
        wk.push_back(kw[i]);
        wg.push_back(gweight);
        if (ka[i] != 0.0) {
            x.push_back(-ka[i]);
            wk.push_back(kw[i]);
            wg.push_back(gweight);
        }
    }
    std::vector<int> idx(x.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return x[i] < x[j]; });

    TimeRule r;
    const double w = g.T / g.t_panels;
    for (int p = 0; p < g.t_panels; ++p) {
        for (int i : idx) {
            r.t.push_back(p * w + 0.5 * w * (x[i] + 1.0));
            r.wk.push_back(0.5 * w * wk[i]);
            r.wg.push_back(0.5 * w * wg[i]);
        }
    }
    return r;
}

int round_up(double v, int multiple) { return multiple * static_cast<int>(std::ceil(v / multiple)); }

}  // namespace

std::vector<double> direct_time_nodes(const DirectGrid& g) { return time_rule(g).t; }

OscResult direct_oscillatory(const DirectIntegrand& f, double h, const DirectGrid& g, int threads)
{
    if (!(h > 0)) throw DomainError("direct_oscillatory: h must be positive");
    if (!(g.T > 0) || g.t_panels < 1 || g.n_psi < 2 || g.n_lambda < 2)
        throw DomainError("direct_oscillatory: invalid grid");
    const TimeRule tr = time_rule(g);
    const int nt = static_cast<int>(tr.t.size());
    const int np = g.n_psi % 2 == 0 ? g.n_psi : g.n_psi + 1;
    const QuadRule lf = gauss_legendre(g.n_lambda, g.window.lo(), g.window.hi());
    const QuadRule lh = gauss_legendre(std::max(1, g.n_lambda / 2), g.window.lo(), g.window.hi());
    const int nlf = static_cast<int>(lf.nodes.size()), nlh = static_cast<int>(lh.nodes.size());

    // lambda amplitudes per angle, window and weight included
    std::vector<Complex> Lf(static_cast<size_t>(np) * nlf), Lh(static_cast<size_t>(np) * nlh);
    for (int j = 0; j < np; ++j) {
        const double psi = two_pi * j / np;
        for (int k = 0; k < nlf; ++k)
            Lf[j * nlf + k] = lf.weights[k] * lambda_window(lf.nodes[k], g.window) * f.lambda_amp(psi, lf.nodes[k]);
        for (int k = 0; k < nlh; ++k)
            Lh[j * nlh + k] = lh.weights[k] * lambda_window(lh.nodes[k], g.window) * f.lambda_amp(psi, lh.nodes[k]);
    }

    std::vector<LinearPhaseNode> nodes(static_cast<size_t>(nt) * np);
    parallel_for(np, threads, [&](int j) {
        const double psi = two_pi * j / np;
        for (int i = 0; i < nt; ++i) nodes[i * np + j] = f.node(i, tr.t[i], j, psi);
    });

    // resolution check on the active part of the grid
    double lgap = 0.0;
    for (int k = 1; k < nlf; ++k) lgap = std::max(lgap, lf.nodes[k] - lf.nodes[k - 1]);
    double cell_t = 0.0, cell_psi = 0.0, cell_l = 0.0;
    const double l0 = g.window.lo(), l1 = g.window.hi();
    auto jump = [&](const LinearPhaseNode& a, const LinearPhaseNode& b) {
        return std::max(std::fabs(a.alpha - b.alpha + l0 * (a.beta - b.beta)),
                        std::fabs(a.alpha - b.alpha + l1 * (a.beta - b.beta))) / h;
    };
    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < np; ++j) {
            const LinearPhaseNode& n = nodes[i * np + j];
            if (n.amp == Complex(0.0) || time_cutoff(tr.t[i], g.T) == 0.0) continue;
            cell_l = std::max(cell_l, std::fabs(n.beta) * lgap / h);
            const LinearPhaseNode& nj = nodes[i * np + (j + 1) % np];
            if (nj.amp != Complex(0.0)) cell_psi = std::max(cell_psi, jump(n, nj));
            if (i + 1 < nt) {
                const LinearPhaseNode& ni = nodes[(i + 1) * np + j];
                if (ni.amp != Complex(0.0)) cell_t = std::max(cell_t, jump(n, ni));
            }
        }
    }
    const double lim = g.max_cell_phase;
    if (cell_t > lim || cell_psi > lim || cell_l > lim) {
        const auto grow = [&](double cell, int n, int mult) {
            return cell > lim ? round_up(1.1 * n * cell / lim, mult) : n;
        };
        throw RefinementRequired("direct_oscillatory: oscillation per cell exceeds the limit", grow(cell_psi, np, 8),
                                 grow(cell_t, g.t_panels, 1), grow(cell_l, g.n_lambda, 2));
    }

    struct Partial {
        Complex full, gauss, half_psi, half_lambda;
    };
    std::vector<Partial> part(nt);
    parallel_for(nt, threads, [&](int i) {
        const double th = time_cutoff(tr.t[i], g.T);
        Partial p{};
        if (th == 0.0) {
            part[i] = p;
            return;
        }
        for (int j = 0; j < np; ++j) {
            const LinearPhaseNode& n = nodes[i * np + j];
            if (n.amp == Complex(0.0)) continue;
            Complex sf{}, sh{};
            for (int k = 0; k < nlf; ++k) sf += Lf[j * nlf + k] * std::exp(Complex(0.0, lf.nodes[k] * n.beta / h));
            for (int k = 0; k < nlh; ++k) sh += Lh[j * nlh + k] * std::exp(Complex(0.0, lh.nodes[k] * n.beta / h));
            const Complex e = n.amp * std::exp(Complex(0.0, n.alpha / h));
            p.full += e * sf;
            p.half_lambda += e * sh;
            if (j % 2 == 0) p.half_psi += 2.0 * e * sf;
        }
        const double wpsi = two_pi / np;
        part[i].full = tr.wk[i] * th * wpsi * p.full;
        part[i].gauss = tr.wg[i] * th * wpsi * p.full;
        part[i].half_psi = tr.wk[i] * th * wpsi * p.half_psi;
        part[i].half_lambda = tr.wk[i] * th * wpsi * p.half_lambda;
    });

    Partial tot{};
    for (const Partial& p : part) {
        tot.full += p.full;
        tot.gauss += p.gauss;
        tot.half_psi += p.half_psi;
        tot.half_lambda += p.half_lambda;
    }
    const Complex pref(0.0, 1.0 / h);
    OscResult r;
    r.value = pref * tot.full;
    r.est_error = std::abs(pref) *
                  (std::abs(tot.full - tot.gauss) + std::abs(tot.full - tot.half_psi) +
                   std::abs(tot.full - tot.half_lambda));
    r.method = OscMethod::direct;
    r.h = h;
    return r;
}

OscResult van_vleck_sum(const std::vector<VanVleckTerm>& terms, double h)
{
    if (!(h > 0)) throw DomainError("van_vleck_sum: h must be positive");
    OscResult r;
    r.method = OscMethod::vanvleck;
    r.h = h;
    double mag = 0.0;
    for (const VanVleckTerm& t : terms) {
        if (t.jacobian == Complex(0.0)) throw SingularError("van_vleck_sum: degenerate branch");
        const Complex v = t.amplitude * principal_inv_sqrt_det(t.jacobian) * std::exp(Complex(0.0, t.phase / h));
        r.value += v;
        mag += std::abs(v);
    }
    r.est_error = mag * h;
    return r;
}

std::vector<Complex> continued_inv_sqrt(const std::vector<Complex>& dets)
{
    BranchTracker tr;
    std::vector<Complex> out;
    out.reserve(dets.size());
    for (const Complex& d : dets) out.push_back(tr.next(d));
    return out;
}

double exp_map_jacobian(const FrontSample& s, double m, double r0)
{
    if (!(r0 > 0)) throw DomainError("exp_map_jacobian: r0 must be positive");
    return (m - 1.0) * s.t * det2(s.Xdot, s.Xpsi) / (r0 * r0);
}

}  // namespace sgf

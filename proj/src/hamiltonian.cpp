#include "sgf/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

namespace sgf {

RadialSpline::RadialSpline(std::vector<double> r, std::vector<double> values)
    : r_(std::move(r)), f_(std::move(values))
{
    const size_t n = r_.size();
    if (n < 3 || f_.size() != n) throw DomainError("radial table needs at least 3 matching samples");
    if (r_[0] != 0.0) throw DomainError("radial table must start at r = 0");
    for (size_t i = 1; i < n; ++i)
        if (!(r_[i] > r_[i - 1])) throw DomainError("radial table radii must increase");

    // clamped spline, f'(r_0) = f'(r_n-1) = 0; tridiagonal solve for second derivatives
    std::vector<double> a(n), b(n), c(n), d(n);
    const double h0 = r_[1] - r_[0];
    b[0] = h0 / 3.0;
    c[0] = h0 / 6.0;
    d[0] = (f_[1] - f_[0]) / h0;
    for (size_t i = 1; i + 1 < n; ++i) {
        const double hl = r_[i] - r_[i - 1];
        const double hr = r_[i + 1] - r_[i];
        a[i] = hl / 6.0;
        b[i] = (hl + hr) / 3.0;
        c[i] = hr / 6.0;
        d[i] = (f_[i + 1] - f_[i]) / hr - (f_[i] - f_[i - 1]) / hl;
    }
    const double hn = r_[n - 1] - r_[n - 2];
    a[n - 1] = hn / 6.0;
    b[n - 1] = hn / 3.0;
    d[n - 1] = -(f_[n - 1] - f_[n - 2]) / hn;
    for (size_t i = 1; i < n; ++i) {
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    m_.assign(n, 0.0);
    m_[n - 1] = d[n - 1] / b[n - 1];
    for (size_t i = n - 1; i-- > 0;) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
}

void RadialSpline::eval(double r, double& f, double& df, double& d2f) const
{
    const size_t n = r_.size();
    if (r >= r_[n - 1]) {
        f = f_[n - 1];
        df = 0.0;
        d2f = 0.0;
        return;
    }
    const size_t hi = static_cast<size_t>(std::upper_bound(r_.begin(), r_.end(), r) - r_.begin());
    const size_t i = std::max<size_t>(hi, 1) - 1;
    const double h = r_[i + 1] - r_[i];
    const double A = (r_[i + 1] - r) / h;
    const double B = (r - r_[i]) / h;
    f = A * f_[i] + B * f_[i + 1] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
    df = (f_[i + 1] - f_[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m_[i] + (3.0 * B * B - 1.0) / 6.0 * h * m_[i + 1];
    d2f = A * m_[i] + B * m_[i + 1];
}

DensityProfile DensityProfile::constant(double rho0)
{
    if (!(rho0 > 0)) throw DomainError("density must be positive");
    DensityProfile p;
    p.kind = Kind::constant;
    p.rho0 = rho0;
    return p;
}

DensityProfile DensityProfile::quadratic_well(double rho0, Vec2 c)
{
    if (!(rho0 > 0)) throw DomainError("density must be positive");
    DensityProfile p;
    p.kind = Kind::quadratic_well;
    p.rho0 = rho0;
    p.center = c;
    return p;
}

DensityProfile DensityProfile::gaussian_bump(double rho0, double A, double w, Vec2 c)
{
    if (!(w > 0)) throw DomainError("gaussian width must be positive");
    if (!(rho0 > 0) || !(rho0 + std::min(A, 0.0) > 0)) throw DomainError("density must be positive");
    DensityProfile p;
    p.kind = Kind::gaussian_bump;
    p.rho0 = rho0;
    p.amplitude = A;
    p.width = w;
    p.center = c;
    return p;
}

DensityProfile DensityProfile::radial_table(std::vector<double> r, std::vector<double> rho, Vec2 c)
{
    for (double v : rho)
        if (!(v > 0)) throw DomainError("density must be positive");
    DensityProfile p;
    p.kind = Kind::radial_table;
    p.table = RadialSpline(std::move(r), std::move(rho));
    p.center = c;
    return p;
}

DensityProfile DensityProfile::linear(double rho0, Vec2 g, Vec2 c)
{
    if (!(rho0 > 0)) throw DomainError("density must be positive");
    DensityProfile p;
    p.kind = Kind::linear;
    p.rho0 = rho0;
    p.slope = g;
    p.center = c;
    return p;
}

void DensityProfile::eval(const Vec2& x, double& r, Vec2& g, Mat2& H) const
{
    const Vec2 y = x - center;
    switch (kind) {
        case Kind::constant:
            r = rho0;
            g.setZero();
            H.setZero();
            break;
        case Kind::quadratic_well:
            r = rho0 + y.squaredNorm();
            g = 2.0 * y;
            H = 2.0 * Mat2::Identity();
            break;
        case Kind::gaussian_bump: {
            const double w2 = width * width;
            const double e = amplitude * std::exp(-y.squaredNorm() / w2);
            r = rho0 + e;
            g = (-2.0 / w2) * e * y;
            H = e * ((4.0 / (w2 * w2)) * (y * y.transpose()) - (2.0 / w2) * Mat2::Identity());
            break;
        }
        case Kind::radial_table: {
            const double s = y.norm();
            double f, df, d2f;
            table.eval(s, f, df, d2f);
            r = f;
            if (s < 1e-12) {
                // clamped at the origin: f' = 0 and f'/s -> f''
                g.setZero();
                H = d2f * Mat2::Identity();
            } else {
                const Vec2 e = y / s;
                g = df * e;
                const Mat2 ee = e * e.transpose();
                H = d2f * ee + (df / s) * (Mat2::Identity() - ee);
            }
            break;
        }
        case Kind::linear:
            r = rho0 + slope.dot(y);
            g = slope;
            H.setZero();
            break;
    }
}

double DensityProfile::rho(const Vec2& x) const
{
    double r;
    Vec2 g;
    Mat2 H;
    eval(x, r, g, H);
    return r;
}

Vec2 DensityProfile::grad(const Vec2& x) const
{
    double r;
    Vec2 g;
    Mat2 H;
    eval(x, r, g, H);
    return g;
}

Mat2 DensityProfile::hess(const Vec2& x) const
{
    double r;
    Vec2 g;
    Mat2 H;
    eval(x, r, g, H);
    return H;
}

bool DensityProfile::radial_about_origin() const
{
    switch (kind) {
        case Kind::constant: return true;
        case Kind::linear: return slope.norm() == 0.0;
        case Kind::gaussian_bump: return amplitude == 0.0 || center.norm() == 0.0;
        default: return center.norm() == 0.0;
    }
}

std::string DensityProfile::kind_name() const
{
    switch (kind) {
        case Kind::constant: return "constant";
        case Kind::quadratic_well: return "quadratic_well";
        case Kind::gaussian_bump: return "gaussian_bump";
        case Kind::radial_table: return "radial_table";
        case Kind::linear: return "linear";
    }
    return "unknown";
}

HomHamiltonian::HomHamiltonian(double m, DensityProfile profile) : m_(m), profile_(std::move(profile))
{
    if (!(m >= 1.0)) throw DomainError("homogeneity degree must be >= 1");
}

HomHamiltonian::HomHamiltonian(double m, GenericEvaluator eval) : m_(m), generic_(std::move(eval))
{
    if (!(m >= 1.0)) throw DomainError("homogeneity degree must be >= 1");
    if (!generic_) throw DomainError("generic Hamiltonian needs an evaluator");
}

const DensityProfile& HomHamiltonian::profile() const
{
    if (!profile_) throw UnsupportedError("Hamiltonian is not of conformal kind");
    return *profile_;
}

HamDerivs HomHamiltonian::derivs(const Vec2& x, const Vec2& p) const
{
    const double r = p.norm();
    if (r == 0.0) throw DomainError("Hamiltonian is singular at p = 0");
    if (!profile_) return generic_(x, p);

    double rho;
    Vec2 g;
    Mat2 G;
    profile_->eval(x, rho, g, G);
    if (!(rho > 0)) throw DomainError("density is not positive at the evaluation point");

    const double m = m_;
    const double rm = std::pow(r, m);
    const double rm2 = rm / (r * r);
    HamDerivs d;
    d.h = rm / rho;
    d.hp = (m * rm2 / rho) * p;
    d.hx = (-rm / (rho * rho)) * g;
    d.hpp = (m * rm2 / rho) * (Mat2::Identity() + ((m - 2.0) / (r * r)) * (p * p.transpose()));
    d.hxp = (-m * rm2 / (rho * rho)) * (g * p.transpose());
    d.hxx = -rm * (G / (rho * rho) - (2.0 / (rho * rho * rho)) * (g * g.transpose()));
    return d;
}

double eval_h(const HomHamiltonian& H, const PhasePoint& z)
{
    return H.derivs(z.x, z.p).h;
}

HamiltonField hamilton_field(const HomHamiltonian& H, const PhasePoint& z)
{
    const HamDerivs d = H.derivs(z.x, z.p);
    return {d.hp, -d.hx};
}

double euler_residual(const HomHamiltonian& H, const PhasePoint& z)
{
    const HamDerivs d = H.derivs(z.x, z.p);
    return z.p.dot(d.hp) - H.degree() * d.h;
}

double defocussing_value(const HomHamiltonian& H, const PhasePoint& z)
{
    if (!H.conformal()) throw UnsupportedError("defocussing value needs a conformal Hamiltonian");
    if (z.p.norm() == 0.0) throw DomainError("defocussing value is singular at p = 0");
    double rho;
    Vec2 g;
    Mat2 G;
    H.profile().eval(z.x, rho, g, G);
    return z.p.dot(G * z.p) + g.squaredNorm() * z.p.squaredNorm() / (H.degree() * rho);
}

double shell_radius(const HomHamiltonian& H, const Vec2& x0, double E, double tau, double psi)
{
    const double level = E - tau;
    if (!(level > 0)) throw DomainError("energy shell is empty (E - tau <= 0)");
    const double m = H.degree();
    if (H.conformal()) return std::pow(level * H.profile().rho(x0), 1.0 / m);
    const double h1 = H.derivs(x0, omega(psi)).h;
    if (!(h1 > 0)) throw DomainError("Hamiltonian is not positive on the unit circle");
    return std::pow(level / h1, 1.0 / m);
}

}  // namespace sgf

#include "sgf/manifolds.hpp"

#include <cmath>

namespace sgf {

namespace {

double generic_h1(const BoundaryParam& b, double psi, Vec2* hp = nullptr)
{
    const HamDerivs d = b.generic->derivs(b.x0, omega(psi));
    if (hp) *hp = d.hp;
    return d.h;
}

}  // namespace

PhasePoint BoundaryParam::point(double psi) const
{
    if (kind == Kind::cylinder) return {phi * omega(psi), omega(psi)};
    double r = radius;
    if (generic) r = std::pow((E - tau) / generic_h1(*this, psi), 1.0 / m);
    return {x0, r * omega(psi)};
}

PhasePoint BoundaryParam::d_psi(double psi) const
{
    if (kind == Kind::cylinder) return {phi * omega_perp(psi), omega_perp(psi)};
    if (!generic) return {Vec2::Zero(), radius * omega_perp(psi)};
    Vec2 hp;
    const double h1 = generic_h1(*this, psi, &hp);
    const double r = std::pow((E - tau) / h1, 1.0 / m);
    const double dr = -r / (m * h1) * hp.dot(omega_perp(psi));
    return {Vec2::Zero(), dr * omega(psi) + r * omega_perp(psi)};
}

PhasePoint BoundaryParam::d_phi(double psi) const
{
    if (kind != Kind::cylinder) throw UnsupportedError("phi derivative exists only for the cylinder");
    return {omega(psi), Vec2::Zero()};
}

BoundaryParam plane_boundary(const HomHamiltonian& H, const Vec2& x0, double E, double tau)
{
    if (!(E - tau > 0)) throw DomainError("plane boundary: energy shell is empty (E - tau <= 0)");
    BoundaryParam b;
    b.kind = BoundaryParam::Kind::plane;
    b.E = E;
    b.tau = tau;
    b.m = H.degree();
    b.x0 = x0;
    if (H.conformal()) {
        b.radius = shell_radius(H, x0, E, tau);
    } else {
        b.generic = std::make_shared<const HomHamiltonian>(H);
        b.radius = shell_radius(H, x0, E, tau, 0.0);
    }
    return b;
}

double lambda_tau_map(double E, double m, double tau)
{
    if (!(tau < E)) throw DomainError("lambda_tau_map: requires tau < E");
    return std::pow(1.0 - tau / E, 1.0 / m);
}

double tau_lambda_map(double E, double m, double lambda)
{
    if (!(lambda > 0)) throw DomainError("tau_lambda_map: requires lambda > 0");
    return E * (1.0 - std::pow(lambda, m));
}

RestrictedH cylinder_restricted_h(const HomHamiltonian& H, double phi, double psi)
{
    const Vec2 w = omega(psi);
    const Vec2 wp = omega_perp(psi);
    const HamDerivs d = H.derivs(phi * w, w);
    return {d.h, Vec2(d.hx.dot(w), phi * d.hx.dot(wp) + d.hp.dot(wp))};
}

GlancingReport detect_glancing(const HomHamiltonian& H, double E, const std::vector<double>& phi_grid,
                               const std::vector<double>& psi_grid, double tol)
{
    if (!(tol > 0)) throw DomainError("glancing tolerance must be positive");
    const double gtol = tol * std::max(1.0, std::fabs(E));
    GlancingReport rep;
    rep.points.reserve(phi_grid.size() * psi_grid.size());
    for (double phi : phi_grid) {
        for (double psi : psi_grid) {
            const RestrictedH rh = cylinder_restricted_h(H, phi, psi);
            const Vec2 w = omega(psi);
            const HamDerivs d = H.derivs(phi * w, w);
            GlancingPoint g;
            g.phi = phi;
            g.psi = psi;
            g.grad_norm = rh.grad.norm();
            g.glancing = g.grad_norm <= gtol;
            g.special = std::fabs(d.hx.dot(w)) <= gtol;
            g.residual = rh.value - E;
            if (g.glancing) ++rep.glancing_count;
            if (H.conformal()) {
                const Vec2 grho = H.profile().grad(phi * w);
                const double scale = gtol;
                bool split;
                if (phi != 0.0)
                    split = grho.norm() <= scale;
                else
                    split = std::fabs(grho.dot(w)) <= scale;
                if (split != g.glancing) ++rep.split_mismatches;
            }
            rep.points.push_back(g);
        }
    }
    return rep;
}

BoundaryParam cylinder_boundary(const HomHamiltonian& H, double E, double tau, double psi, double phi_lo,
                                double phi_hi)
{
    if (!H.conformal()) throw UnsupportedError("cylinder boundary needs a conformal density");
    const double level = E - tau;
    auto f = [&](double phi) { return cylinder_restricted_h(H, phi, psi).value - level; };
    double lo = phi_lo, hi = phi_hi;
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) hi = lo;
    else if (fhi == 0.0) lo = hi;
    else if (flo * fhi > 0) throw DomainError("cylinder boundary: no root of the restricted Hamiltonian in the bracket");

    double phi = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > 0; ++it) {
        const RestrictedH rh = cylinder_restricted_h(H, phi, psi);
        const double v = rh.value - level;
        if (v == 0.0) break;
        if ((v < 0) == (flo < 0)) lo = phi, flo = v;
        else hi = phi;
        double next = (rh.grad.x() != 0.0) ? phi - v / rh.grad.x() : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - phi) <= 1e-15 * std::max(1.0, std::fabs(phi))) {
            phi = next;
            break;
        }
        phi = next;
    }
    const RestrictedH rh = cylinder_restricted_h(H, phi, psi);
    if (std::fabs(rh.value - level) > 1e-12 * std::max(1.0, std::fabs(level)))
        throw DomainError("cylinder boundary: root refinement did not converge");
    if (std::fabs(rh.grad.x()) < 1e-12)
        throw SingularError("cylinder boundary: restricted Hamiltonian is stationary in phi at the root");

    // the shell intersection is a circle only when rho is radial: phi <grad rho, omega_perp> = 0
    const DensityProfile& prof = H.profile();
    double defect = 0.0;
    for (int k = 0; k < 16; ++k) {
        const double s = psi + two_pi * k / 16.0;
        defect = std::max(defect, std::fabs(phi * prof.grad(phi * omega(s)).dot(omega_perp(s))));
        defect = std::max(defect, std::fabs(prof.rho(phi * omega(s)) - prof.rho(phi * omega(psi))));
    }
    if (defect > 1e-10 * std::max(1.0, std::fabs(prof.rho(phi * omega(psi)))))
        throw UnsupportedError("cylinder boundary: density is not radially symmetric about the origin");

    BoundaryParam b;
    b.kind = BoundaryParam::Kind::cylinder;
    b.E = E;
    b.tau = tau;
    b.m = H.degree();
    b.phi = phi;
    b.dphi_dtau = -1.0 / rh.grad.x();
    return b;
}

}  // namespace sgf

#include "doctest.h"
#include "sgf/manifolds.hpp"

#include <cmath>
#include <random>

using namespace sgf;

TEST_CASE("plane boundary radius")
{
    for (double m : {1.0, 2.0, 3.5}) {
        const HomHamiltonian H(m, DensityProfile::constant(1.0));
        CHECK(plane_boundary(H, Vec2::Zero(), 1.0, 0.0).radius == doctest::Approx(1.0));
    }
    const HomHamiltonian H4(2.0, DensityProfile::constant(4.0));
    CHECK(plane_boundary(H4, Vec2::Zero(), 1.0, 0.0).radius == doctest::Approx(2.0));

    const HomHamiltonian H(1.0, DensityProfile::constant(1.0));
    CHECK(plane_boundary(H, Vec2::Zero(), 1.0, 1.0 - 1e-9).radius < 1e-8);
    CHECK_THROWS_AS(plane_boundary(H, Vec2::Zero(), 1.0, 1.0), DomainError);
}

TEST_CASE("plane boundary points lie on the shell and derivatives match differences")
{
    const HomHamiltonian H(1.7, DensityProfile::gaussian_bump(1.0, 0.5, 0.8, Vec2(0.2, 0.1)));
    const BoundaryParam b = plane_boundary(H, Vec2(0.3, -0.4), 1.3, 0.2);
    for (double psi = 0.0; psi < two_pi; psi += 0.3) {
        CHECK(std::fabs(eval_h(H, b.point(psi)) - 1.1) < 1e-12);
        const double d = 1e-6;
        const Vec2 fd = (b.point(psi + d).p - b.point(psi - d).p) / (2 * d);
        CHECK((fd - b.d_psi(psi).p).norm() < 1e-6);
        CHECK(b.d_psi(psi).x.norm() == 0.0);
        CHECK(std::fabs(det2(b.point(psi).p, b.d_psi(psi).p) - b.radius * b.radius) < 1e-12);
    }
}

TEST_CASE("generic plane boundary follows a direction dependent radius")
{
    // anisotropic H = (p1^2 + 4 p2^2), homogeneous of degree 2
    const HomHamiltonian H(2.0, [](const Vec2&, const Vec2& p) {
        HamDerivs d;
        d.h = p.x() * p.x() + 4 * p.y() * p.y();
        d.hp = Vec2(2 * p.x(), 8 * p.y());
        d.hpp << 2, 0, 0, 8;
        return d;
    });
    const BoundaryParam b = plane_boundary(H, Vec2::Zero(), 1.0, 0.0);
    for (double psi = 0.1; psi < two_pi; psi += 0.4) {
        CHECK(std::fabs(eval_h(H, b.point(psi)) - 1.0) < 1e-12);
        const double d = 1e-6;
        const Vec2 fd = (b.point(psi + d).p - b.point(psi - d).p) / (2 * d);
        CHECK((fd - b.d_psi(psi).p).norm() < 1e-6);
    }
}

TEST_CASE("lambda tau map")
{
    CHECK(lambda_tau_map(1.0, 1.0, 0.0) == 1.0);
    CHECK(lambda_tau_map(1.0, 1.0, 0.19) == doctest::Approx(0.81).epsilon(1e-15));
    CHECK(lambda_tau_map(2.0, 2.0, 1.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK_THROWS_AS(lambda_tau_map(1.0, 1.0, 1.0), DomainError);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        const double E = 0.5 + 2 * u(rng), m = 1 + 3 * u(rng), tau = E * (1.8 * u(rng) - 0.9);
        const double lam = lambda_tau_map(E, m, tau);
        CHECK(lam > 0);
        CHECK(std::fabs(tau_lambda_map(E, m, lam) - tau) <= 1e-14 * std::max(1.0, E));
    }
}

TEST_CASE("restricted Hamiltonian on the cylinder")
{
    const HomHamiltonian p2(2.0, DensityProfile::constant(1.0));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const RestrictedH r = cylinder_restricted_h(p2, u(rng), u(rng));
        CHECK(r.value == doctest::Approx(1.0));
        CHECK(r.grad.norm() < 1e-12);
    }

    // radial density: the psi component reduces to <H_p, omega_perp>
    const HomHamiltonian well(1.0, DensityProfile::quadratic_well(2.0));
    for (int k = 0; k < 20; ++k) {
        const double phi = u(rng), psi = u(rng);
        const RestrictedH r = cylinder_restricted_h(well, phi, psi);
        const HamDerivs d = well.derivs(phi * omega(psi), omega(psi));
        CHECK(std::fabs(r.grad.y() - d.hp.dot(omega_perp(psi))) < 1e-14);
    }

    // finite difference oracle on a non-radial density
    const HomHamiltonian bump(1.5, DensityProfile::gaussian_bump(1.0, 0.4, 0.9, Vec2(0.3, -0.2)));
    const double d = 1e-6;
    for (int k = 0; k < 50; ++k) {
        const double phi = u(rng), psi = u(rng);
        const RestrictedH r = cylinder_restricted_h(bump, phi, psi);
        const double dphi =
            (cylinder_restricted_h(bump, phi + d, psi).value - cylinder_restricted_h(bump, phi - d, psi).value) / (2 * d);
        const double dpsi =
            (cylinder_restricted_h(bump, phi, psi + d).value - cylinder_restricted_h(bump, phi, psi - d).value) / (2 * d);
        CHECK(std::fabs(dphi - r.grad.x()) < 1e-6);
        CHECK(std::fabs(dpsi - r.grad.y()) < 1e-6);
    }
}

TEST_CASE("glancing detection")
{
    std::vector<double> phis, psis;
    for (int i = -5; i <= 5; ++i) phis.push_back(0.3 * i);
    for (int j = 0; j < 12; ++j) psis.push_back(two_pi * j / 12);

    const HomHamiltonian p2(2.0, DensityProfile::constant(1.0));
    const GlancingReport all = detect_glancing(p2, 1.0, phis, psis);
    CHECK(all.glancing_count == phis.size() * psis.size());
    CHECK(all.split_mismatches == 0);
    for (const auto& g : all.points) CHECK(g.special);

    const HomHamiltonian well(1.0, DensityProfile::quadratic_well(2.0));
    const GlancingReport ring = detect_glancing(well, 1.0, phis, psis);
    CHECK(ring.glancing_count == psis.size());
    CHECK(ring.split_mismatches == 0);
    for (const auto& g : ring.points) CHECK(g.glancing == (g.phi == 0.0));

    // off-centre well: glancing exactly where phi omega(psi) = c
    const Vec2 c(0.6, 0.0);
    const HomHamiltonian off(1.0, DensityProfile::quadratic_well(2.0, c));
    const GlancingReport rep = detect_glancing(off, 1.0, {0.6, 0.9}, {0.0, pi / 2, pi});
    CHECK(rep.glancing_count == 1);
    CHECK(rep.points[0].glancing);
    CHECK(rep.split_mismatches == 0);
}

TEST_CASE("cylinder boundary")
{
    // rho = 2 - r^2 near the origin, tabulated; restricted H = 1/rho is monotone for r in (0, 1)
    std::vector<double> r, rho;
    for (int i = 0; i <= 20; ++i) {
        r.push_back(0.06 * i);
        rho.push_back(2.0 - r.back() * r.back());
    }
    const HomHamiltonian H(1.0, DensityProfile::radial_table(r, rho));
    const double E = 1.0 / 1.5;  // rho(phi) = 1.5 at phi ~ sqrt(0.5)
    const BoundaryParam b = cylinder_boundary(H, E, 0.0, 0.4, 0.2, 1.0);
    CHECK(std::fabs(cylinder_restricted_h(H, b.phi, 0.4).value - E) < 1e-12);
    // bisection oracle
    double lo = 0.2, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        ((cylinder_restricted_h(H, mid, 0.4).value - E) < 0 ? lo : hi) = mid;
    }
    CHECK(std::fabs(b.phi - 0.5 * (lo + hi)) < 1e-12);
    const BoundaryParam b2 = cylinder_boundary(H, E, 0.0, 2.0, 0.2, 1.0);
    CHECK(std::fabs(b2.phi - b.phi) < 1e-13);

    // eikonal relations at t = 0
    for (double psi : {0.0, 1.0, 4.0}) {
        const PhasePoint z = b.point(psi);
        CHECK(std::fabs(z.p.dot(b.d_phi(psi).x) - 1.0) < 1e-12);
        CHECK(std::fabs(z.p.dot(b.d_psi(psi).x)) < 1e-12);
    }

    // tau shifts the root along d phi / d tau
    const double dt = 1e-6;
    const BoundaryParam bp = cylinder_boundary(H, E, dt, 0.4, 0.2, 1.0);
    CHECK(std::fabs((bp.phi - b.phi) / dt - b.dphi_dtau) < 1e-5);

    const HomHamiltonian offc(1.0, DensityProfile::quadratic_well(1.0, Vec2(0.3, 0.0)));
    CHECK_THROWS_AS(cylinder_boundary(offc, 0.5, 0.0, 0.4, 0.1, 2.0), UnsupportedError);
    CHECK_THROWS_AS(cylinder_boundary(H, 5.0, 0.0, 0.4, 0.2, 1.0), DomainError);
}

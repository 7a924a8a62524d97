#include "doctest.h"
#include "sgf/phase.hpp"

#include <cmath>
#include <random>

using namespace sgf;

namespace {

const HomHamiltonian& bump_h()
{
    static const HomHamiltonian H(1.5, DensityProfile::gaussian_bump(1.0, 0.4, 0.9, Vec2(0.6, 0.2)));
    return H;
}

const Front& bump_front()
{
    static const Front f(bump_h(), plane_boundary(bump_h(), Vec2(-0.1, 0.0), 1.2, 0.0), 2.5, 32);
    return f;
}

double table_rho(double r) { return 1.0 + 1.0 / (1.0 + r * r); }

HomHamiltonian radial_table_h()
{
    std::vector<double> r, rho;
    for (int i = 0; i <= 160; ++i) {
        r.push_back(0.05 * i);
        rho.push_back(table_rho(r.back()));
    }
    return HomHamiltonian(1.0, DensityProfile::radial_table(r, rho));
}

RayOptions tight()
{
    RayOptions o;
    o.atol = o.rtol = 1e-13;
    return o;
}

}  // namespace

TEST_CASE("plane family on the critical set")
{
    const Front& f = bump_front();
    const double mE = 1.5 * 1.2;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ut(0.0, 2.5), up(0.0, two_pi);
    for (int k = 0; k < 20; ++k) {
        const double t = ut(rng), psi = up(rng);
        const FrontSample s = f.sample(t, psi);
        const GeneratingFamilyEval e = eval_family_plane(f, s.X, t, psi, 1.0);
        CHECK(std::fabs(e.value - mE * t) < 1e-12);
        CHECK(e.grad.norm() < 1e-9);
        CHECK((e.grad_x - s.P).norm() < 1e-12);
        const HessianTPL h = hessian_tpl(s, 1.5, 1.2);
        CHECK((e.hess - h.matrix).norm() < 1e-8 * std::max(1.0, h.matrix.norm()));
        CHECK(std::fabs(e.hess.determinant() - mE * mE * s.Ppsi.dot(s.Xpsi)) < 1e-8 * std::max(1.0, mE * mE));
    }
}

TEST_CASE("plane family initial condition")
{
    const HomHamiltonian H(2.0, DensityProfile::constant(1.0));
    const Front f(H, plane_boundary(H, Vec2::Zero(), 1.0, 0.0), 1.0, 16);
    for (double psi : {0.0, 1.0, 2.5}) {
        const Vec2 x(0.3, -0.7);
        const GeneratingFamilyEval e = eval_family_plane(f, x, 0.0, psi, 1.0);
        CHECK(e.value == doctest::Approx(omega(psi).dot(x)));
    }
    CHECK_THROWS_AS(eval_family_plane(f, Vec2::Zero(), 1.5, 0.0, 1.0), DomainError);
}

TEST_CASE("plane family derivatives against differences")
{
    const Front& f = bump_front();
    const Vec2 x(0.4, 0.9);
    const double t = 1.1, psi = 0.8, lam = 1.07;
    const double d = 1e-5;
    const GeneratingFamilyEval e = eval_family_plane(f, x, t, psi, lam);
    auto val = [&](double tt, double pp, double ll) { return eval_family_plane(f, x, tt, pp, ll, {false}).value; };
    const Vec3 fd((val(t + d, psi, lam) - val(t - d, psi, lam)) / (2 * d),
                  (val(t, psi + d, lam) - val(t, psi - d, lam)) / (2 * d),
                  (val(t, psi, lam + d) - val(t, psi, lam - d)) / (2 * d));
    CHECK((fd - e.grad).norm() < 1e-7);

    auto grad = [&](double tt, double pp, double ll) { return eval_family_plane(f, x, tt, pp, ll, {false}).grad; };
    Mat3 H;
    H.col(0) = (grad(t + d, psi, lam) - grad(t - d, psi, lam)) / (2 * d);
    H.col(1) = (grad(t, psi + d, lam) - grad(t, psi - d, lam)) / (2 * d);
    H.col(2) = (grad(t, psi, lam + d) - grad(t, psi, lam - d)) / (2 * d);
    CHECK((H - e.hess).norm() < 1e-6);

    const Vec2 gx((eval_family_plane(f, x + Vec2(d, 0), t, psi, lam, {false}).value -
                   eval_family_plane(f, x - Vec2(d, 0), t, psi, lam, {false}).value) / (2 * d),
                  (eval_family_plane(f, x + Vec2(0, d), t, psi, lam, {false}).value -
                   eval_family_plane(f, x - Vec2(0, d), t, psi, lam, {false}).value) / (2 * d));
    CHECK((gx - e.grad_x).norm() < 1e-7);
}

TEST_CASE("extended cylinder family")
{
    const HomHamiltonian H = radial_table_h();
    const double E = 1.0 / table_rho(0.6);
    const BoundaryParam b = cylinder_boundary(H, E, 0.0, 0.0, 0.1, 1.5);
    CHECK(b.phi == doctest::Approx(0.6));
    const Front f(H, b, 2.0, 16, tight());

    for (double psi : {0.3, 2.0}) {
        const Vec2 x(0.2, 0.5);
        const GeneratingFamilyEval e0 = eval_family_cylinder_extended(f, x, 0.0, b.phi, psi, 1.0);
        CHECK(e0.value == doctest::Approx(omega(psi).dot(x)).epsilon(1e-12));

        for (double t : {0.5, 1.5}) {
            const FrontSample s = cylinder_sample(f, t, b.phi, psi);
            const GeneratingFamilyEval e = eval_family_cylinder_extended(f, s.X, t, b.phi, psi, 1.0);
            CHECK(e.grad.norm() < 1e-9);
            CHECK(e.value == doctest::Approx(b.phi).epsilon(1e-12));
        }
    }

    const Vec2 x(0.7, -0.3);
    const double t = 0.9, phi = 0.55, psi = 1.2, lam = 0.95, d = 1e-4;
    const GeneratingFamilyEval e = eval_family_cylinder_extended(f, x, t, phi, psi, lam);
    auto val = [&](double ll, double ff, double pp) {
        return eval_family_cylinder_extended(f, x, t, ff, pp, ll, {false}).value;
    };
    const Vec3 fd((val(lam + d, phi, psi) - val(lam - d, phi, psi)) / (2 * d),
                  (val(lam, phi + d, psi) - val(lam, phi - d, psi)) / (2 * d),
                  (val(lam, phi, psi + d) - val(lam, phi, psi - d)) / (2 * d));
    CHECK((fd - e.grad).norm() < 1e-7);

    auto grad = [&](double ll, double ff, double pp) {
        return eval_family_cylinder_extended(f, x, t, ff, pp, ll, {false}).grad;
    };
    Mat3 Hs;
    Hs.col(0) = (grad(lam + d, phi, psi) - grad(lam - d, phi, psi)) / (2 * d);
    Hs.col(1) = (grad(lam, phi + d, psi) - grad(lam, phi - d, psi)) / (2 * d);
    Hs.col(2) = (grad(lam, phi, psi + d) - grad(lam, phi, psi - d)) / (2 * d);
    CHECK((Hs - e.hess).norm() < 1e-6);

    const HomHamiltonian H2(2.0, DensityProfile::quadratic_well(1.0));
    const Front f2(H2, cylinder_boundary(H2, 1.0 / 1.25, 0.0, 0.0, 0.1, 1.5), 1.0, 8);
    CHECK_THROWS_AS(eval_family_cylinder_extended(f2, x, 0.5, 0.5, 0.0, 1.0), UnsupportedError);
}

TEST_CASE("energy cylinder family")
{
    const HomHamiltonian H = radial_table_h();
    const double E = 1.0 / table_rho(0.7);
    const BoundaryParam b = cylinder_boundary(H, E, 0.0, 0.0, 0.1, 1.5);
    const Front f(H, b, 2.0, 16, tight());
    for (double psi : {0.0, 1.3, 4.0}) {
        const FrontSample s0 = f.sample(0.0, psi);
        CHECK(std::fabs(cylinder_energy_D(s0) - cylinder_energy_D0(H, b.phi, psi)) < 1e-8);
        const GeneratingFamilyEval e = eval_family_cylinder_energy(f, s0.X, 0.0, psi, 1.0);
        CHECK(e.grad.norm() < 1e-12);
        // D is the (t, psi) block determinant of the Hessian
        const FrontSample s = f.sample(1.0, psi);
        const GeneratingFamilyEval e1 = eval_family_cylinder_energy(f, s.X, 1.0, psi, 1.0);
        CHECK(std::fabs(e1.hess.topLeftCorner<2, 2>().determinant() - cylinder_energy_D(s)) < 1e-8);
    }

    // constant coefficients: D(z(0)) = -<H_p, omega_perp>^2 = 0, degenerate
    const HomHamiltonian p2(2.0, DensityProfile::constant(1.0));
    for (double psi : {0.0, 0.7, 3.0}) {
        const double D0 = cylinder_energy_D0(p2, 0.4, psi);
        CHECK(D0 <= 0.0);
        CHECK(std::fabs(D0) < 1e-15);
    }

    // Hessian against differences of the gradient
    const Vec2 x(0.2, 0.8);
    const double t = 0.8, psi = 0.9, lam = 1.05, d = 1e-4;
    const GeneratingFamilyEval e = eval_family_cylinder_energy(f, x, t, psi, lam);
    auto grad = [&](double tt, double pp, double ll) {
        return eval_family_cylinder_energy(f, x, tt, pp, ll, {false}).grad;
    };
    Mat3 Hs;
    Hs.col(0) = (grad(t + d, psi, lam) - grad(t - d, psi, lam)) / (2 * d);
    Hs.col(1) = (grad(t, psi + d, lam) - grad(t, psi - d, lam)) / (2 * d);
    Hs.col(2) = (grad(t, psi, lam + d) - grad(t, psi, lam - d)) / (2 * d);
    CHECK((Hs - e.hess).norm() < 1e-6);
}

TEST_CASE("branches of the free m=1 front")
{
    const HomHamiltonian H(1.0, DensityProfile::constant(1.0));
    const double E = 1.0;
    const Front f(H, plane_boundary(H, Vec2::Zero(), E, 0.0), 6.0, 128);
    const BranchSolver solver(f, {200});
    for (const Vec2& x : {Vec2(1.0, 0.5), Vec2(-2.0, 0.3), Vec2(0.1, -3.0)}) {
        const auto br = solver.solve(x);
        REQUIRE(br.size() == 1);
        CHECK(br[0].t_star == doctest::Approx(x.norm()).epsilon(1e-10));
        CHECK(std::fabs(br[0].psi_star - wrap_angle(std::atan2(x.y(), x.x()))) < 1e-10);
        CHECK(br[0].phase_value == doctest::Approx(E * x.norm()).epsilon(1e-10));
        CHECK(br[0].residual <= 1e-10);
        CHECK_FALSE(br[0].degenerate);
        CHECK(br[0].hessian_det == doctest::Approx(E * E * x.norm()).epsilon(1e-8));
    }
}

TEST_CASE("branches of the free m=2 front")
{
    const HomHamiltonian H(2.0, DensityProfile::constant(1.0));
    const Front f(H, plane_boundary(H, Vec2::Zero(), 1.0, 0.0), 6.0, 128);
    const auto br = solve_branches(f, Vec2(1.2, -0.9), {200});
    REQUIRE(br.size() == 1);
    CHECK(br[0].t_star == doctest::Approx(1.5 / 2).epsilon(1e-10));
    CHECK(br[0].phase_value == doctest::Approx(2.0 * 0.75).epsilon(1e-10));
    CHECK((br[0].sample.X - Vec2(1.2, -0.9)).norm() < 1e-10);

    // outside the swept region
    CHECK(solve_branches(f, Vec2(20.0, 0.0), {200}).empty());
}

TEST_CASE("branches near a lens caustic")
{
    const HomHamiltonian H(1.0, DensityProfile::gaussian_bump(1.0, 1.0, 0.6, Vec2(1.0, 0.0)));
    const Front f(H, plane_boundary(H, Vec2::Zero(), 1.0, 0.0), 4.0, 256);
    const auto curves = caustic_scan(f, uniform_t_grid(4.0, 161));
    const CausticPoint* cp = nullptr;
    for (const auto& cv : curves)
        for (const auto& p : cv.points)
            if (p.t > 2.0 && !cp) cp = &p;
    REQUIRE(cp != nullptr);
    const BranchSolver solver(f, {400});
    const auto on = solver.solve(cp->x);
    bool degenerate_found = false;
    for (const auto& b : on)
        if (b.degenerate && std::fabs(b.t_star - cp->t) < 1e-3) degenerate_found = true;
    CHECK(degenerate_found);

    // a point well inside the fold has three branches with alternating det sign
    const FrontSample s = f.sample(cp->t + 0.3, cp->psi);
    const auto three = solver.solve(s.X);
    CHECK(three.size() >= 2);
    for (const auto& b : three) CHECK((b.sample.X - s.X).norm() < 1e-9);
}

TEST_CASE("eikonal values")
{
    CHECK(eikonal_values(EikonalKind::plane, 0.0, 0.0, 1.0, 1.0, 0.0) == 0.0);
    CHECK(eikonal_values(EikonalKind::plane, 0.5, 0.0, 1.0, 2.0, 0.0) == doctest::Approx(1.0));
    CHECK(eikonal_values(EikonalKind::cylinder, 0.7, 0.3, 1.0, 1.0, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("flat twist action")
{
    CHECK(flat_twist_action(2.0, Vec2(1.0, 2.0), Vec2(0.0, 0.0)) == doctest::Approx(5.0 / 4.0));
    CHECK(flat_twist_action(2.5, Vec2(1.0, 2.0), Vec2(1.0, 2.0)) == 0.0);
    CHECK(flat_twist_action(3.0, Vec2(1.0, 0.0), Vec2(0.0, 0.0)) == doctest::Approx(2.0 * std::pow(1.0 / 3.0, 1.5)));
    CHECK_THROWS_AS(flat_twist_action(1.0, Vec2::Zero(), Vec2(1, 0)), DomainError);

    // p = -d_x S1 and P = d_X S1 along the time-one free flow
    for (double m : {1.5, 2.0, 3.0}) {
        const HomHamiltonian H(m, DensityProfile::constant(1.0));
        const PhasePoint z{Vec2(0.2, -0.1), Vec2(0.7, 0.4)};
        const Trajectory tr = integrate_ray(H, z, 1.0);
        const FrontSample s = dense_sample(tr, 1.0);
        const auto [gx, gX] = flat_twist_gradients(m, z.x, s.X);
        CHECK((-gx - z.p).norm() < 1e-9);
        CHECK((gX - s.P).norm() < 1e-9);
        const double d = 1e-6;
        const double fd = (flat_twist_action(m, z.x, s.X + Vec2(d, 0)) - flat_twist_action(m, z.x, s.X - Vec2(d, 0))) /
                          (2 * d);
        CHECK(std::fabs(fd - gX.x()) < 1e-7);
    }
}

TEST_CASE("Hamilton-Jacobi residual is second order")
{
    const Front& f = bump_front();
    const double t = 1.2, psi = 2.0;
    const FrontSample s = f.sample(t, psi);
    const Vec2 n = s.P.normalized();
    std::vector<double> le, lr;
    for (double eps : {0.04, 0.02, 0.01, 0.005}) {
        le.push_back(std::log(eps));
        lr.push_back(std::log(std::fabs(hj_residual(f, s.X + eps * n, t, psi, 1.0))));
    }
    const double slope = (lr.back() - lr.front()) / (le.back() - le.front());
    CHECK(slope == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::fabs(hj_residual(f, s.X, t, psi, 1.0)) < 1e-9);
    const double r1 = std::fabs(hj_residual(f, s.X, t, psi, 1.02));
    const double r2 = std::fabs(hj_residual(f, s.X, t, psi, 1.01));
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("density quotient of the plane family")
{
    const Front& f = bump_front();
    const double mE = 1.5 * 1.2;
    for (double t : {0.0, 0.4, 1.3, 2.4}) {
        for (double psi : {0.0, 1.9, 4.4}) {
            const FrontSample s = f.sample(t, psi);
            const double expected = -mE * det2(s.P, s.Ppsi);
            CHECK(std::fabs(density_quotient_plane(f, t, psi) - expected) <= 1e-8 * std::fabs(expected));
        }
    }
}

TEST_CASE("density quotient of the cylinder family")
{
    const HomHamiltonian H = radial_table_h();
    const BoundaryParam b = cylinder_boundary(H, 1.0 / table_rho(0.5), 0.0, 0.0, 0.1, 1.5);
    const Front f(H, b, 2.0, 16);
    for (double t : {0.0, 0.7, 1.8}) {
        for (double psi : {0.5, 3.0}) {
            const FrontSample s = f.sample(t, psi);
            const double a = det2(s.P, s.Ppsi);
            const double q = density_quotient_cylinder(f, t, psi);
            CHECK(std::fabs(std::fabs(q) - std::fabs(a)) <= 1e-8 * std::fabs(a));
        }
    }
}

TEST_CASE("nondegeneracy follows the density")
{
    const Front& f = bump_front();
    for (double t : {0.0, 0.5, 1.5, 2.5})
        for (double psi : {0.2, 2.2, 5.0}) {
            const FrontSample s = f.sample(t, psi);
            const double margin = nondegeneracy_margin(f, t, psi);
            CHECK(margin > 0.05 * std::fabs(det2(s.P, s.Ppsi)));
        }
}

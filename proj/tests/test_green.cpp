#include "doctest.h"
#include "sgf/green.hpp"
#include "sgf/specfun.hpp"

#include <cmath>

using namespace sgf;

namespace {

double fitted_slope(const std::vector<double>& h, const std::vector<double>& e)
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]), y = std::log(e[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

const HomHamiltonian free_m1{1.0, DensityProfile::constant(1.0)};
const HomHamiltonian free_m2{2.0, DensityProfile::constant(1.0)};

Complex unit_lambda(double) { return 1.0; }

}  // namespace

TEST_CASE("cylinder source is the Bessel beam")
{
    for (double h : {0.05, 0.1, 0.3}) {
        const SourceSpec s = cylinder_source(h, 0.5);
        for (const Vec2& x : {Vec2(0.3, 0.1), Vec2(-1.2, 0.7), Vec2(2.0, -2.5)}) {
            const Complex f = synthesize_source(free_m2, s, x);
            const double ref = std::sqrt(two_pi / h) * bessel_j0(x.norm() / h);
            CHECK(std::abs(f - ref) <= 1e-6 * std::sqrt(two_pi / h));
        }
    }
}

TEST_CASE("plane source peaks at the source point")
{
    const Vec2 x0(0.2, -0.1);
    SourceSpec s = plane_source(x0, 0.1, 1.0);
    s.plane_amp = [](double, double l) { return Complex(std::exp(-4.0 * (l - 1.0) * (l - 1.0))); };
    const Complex f0 = synthesize_source(free_m2, s, x0);
    CHECK(std::fabs(f0.imag()) < 1e-12 * f0.real());
    CHECK(f0.real() > 0);
    for (const Vec2& d : {Vec2(0.01, 0.0), Vec2(0.0, -0.03), Vec2(0.1, 0.1), Vec2(0.5, 0.2)})
        CHECK(std::abs(synthesize_source(free_m2, s, x0 + d)) < f0.real());

    SourceSpec s2 = s;
    s2.plane_amp = [](double psi, double l) { return Complex(2.0 * std::cos(psi), l); };
    SourceSpec s3 = s;
    s3.plane_amp = [&](double psi, double l) { return s.plane_amp(psi, l) - 3.0 * s2.plane_amp(psi, l); };
    const Vec2 x(0.45, 0.05);
    const Complex lin = synthesize_source(free_m2, s, x) - 3.0 * synthesize_source(free_m2, s2, x);
    CHECK(std::abs(synthesize_source(free_m2, s3, x) - lin) < 1e-12 * std::abs(lin));
}

TEST_CASE("source validation")
{
    CHECK_THROWS_AS(synthesize_source(free_m2, plane_source(Vec2::Zero(), 0.01, 1.0), Vec2(1, 0)), DomainError);
    CHECK_THROWS_AS(synthesize_source(free_m2, plane_source(Vec2::Zero(), 0.1, 0.0), Vec2(1, 0)), DomainError);
    SourceSpec s = plane_source(Vec2::Zero(), 0.1, 1.0);
    s.plane_amp = nullptr;
    CHECK_THROWS_AS(s.validate(), DomainError);
    CHECK(strategy_from_string("auto") == Strategy::automatic);
    CHECK(to_string(Strategy::stationary) == "stationary");
    CHECK_THROWS_AS(strategy_from_string("fast"), ConfigError);
}

TEST_CASE("transport amplitude")
{
    const HomHamiltonian H(2.0, DensityProfile::gaussian_bump(1.0, 0.3, 1.0));
    const Vec2 x0(0.3, 0.2);
    const double E = 1.5;
    const Front f(H, plane_boundary(H, x0, E, 0.0), 1.0, 32);
    const FrontSample s0 = f.sample(0.0, 0.7);
    const Complex a(0.4, -0.2);
    const double p2 = s0.P.squaredNorm();
    CHECK(std::abs(transport_amplitude(s0, a, 2.0, E) - a / std::sqrt(2.0 * E * p2)) < 1e-12);
    CHECK(transport_amplitude(s0, 0.0, 2.0, E) == Complex(0.0));

    const Front g(free_m1, plane_boundary(free_m1, Vec2::Zero(), 1.0, 0.0), 3.0, 16);
    const Complex b0 = transport_amplitude(g.sample(0.0, 1.1), 1.0, 1.0, 1.0);
    for (double t : {0.5, 1.7, 2.9}) CHECK(std::abs(transport_amplitude(g.sample(t, 1.1), 1.0, 1.0, 1.0) - b0) < 1e-9);

    FrontSample bad = s0;
    bad.Ppsi = 2.0 * bad.P;
    CHECK_THROWS_AS(transport_amplitude(bad, 1.0, 2.0, E), DomainError);
}

TEST_CASE("Bessel pair identity")
{
    const BesselPairReport r = bessel_pair_check(0.1, 0.5, 3.0, 251, 0.1 / 50);
    CHECK(r.n_points == 251);
    CHECK(r.relative < 1e-4);
    CHECK(r.relative < 1e-7);
    // the 2-D cross at the same step is second-order and misses the bound
    const BesselPairReport c = bessel_pair_check_cross(0.1, 0.5, 3.0, 251, 0.1 / 50);
    CHECK(c.relative > 1e-4);
    CHECK(c.relative < 1e-3);
    CHECK(radial_stencil([](double) { return 0.0; }, 1.0, 1e-3, 0.1, 1.0) == 0.0);
}

TEST_CASE("exact free field")
{
    const double h1 = 0.05;
    const Complex v1 = free_field_exact(1.0, 1.0, 1.0, Vec2::Zero(), h1, unit_lambda, Vec2(0.9, 0.6));
    CHECK(std::abs(v1 * (two_pi * h1) - Complex(-3.061816571410506, -1.3860787350086108)) < 1e-8);
    const Complex v2 = free_field_exact(2.0, 1.0, 1.0, Vec2(0.5, 0.5), 0.1, unit_lambda, Vec2(0.5, 1.7));
    CHECK(std::abs(v2 - Complex(3.786452760420416, 0.7491019422704602)) < 1e-8);
    const Complex v3 = free_field_exact(1.5, 1.0, 2.0, Vec2::Zero(), 0.1, unit_lambda, Vec2(0.0, -0.8));
    CHECK(std::abs(v3 - Complex(3.786932014838892, 4.657021768446933)) < 1e-8);
    CHECK_THROWS_AS(free_field_exact(1.0, 1.0, -1.0, Vec2::Zero(), 0.1, unit_lambda, Vec2(1, 0)), DomainError);
}

TEST_CASE("constant-coefficient decomposition")
{
    const double h = 0.1, w = 1.0;
    const auto g = [w](double r) { return r * (r + 1.0) * std::exp(-r * r / (w * w)); };

    const CoeffPair a = constant_coeff_reference(Vec2(0.7, 0.2), h, 1.0, g);
    const CoeffPair b = constant_coeff_reference(Vec2(-0.2, -0.7), h, 1.0, g);
    CHECK(std::abs(std::abs(a.u0) - std::abs(b.u0)) < 1e-12 * std::abs(a.u0));

    // u1 of this g is a Gaussian in x
    const double n2 = std::pow(two_pi * h, -2.0);
    for (double r : {0.0, 0.1, 0.3}) {
        const CoeffPair c = constant_coeff_reference(Vec2(r, 0.0), h, 1.0, g);
        const double ref = n2 * two_pi * 0.5 * w * w * std::exp(-r * r * w * w / (4 * h * h));
        CHECK(std::abs(c.u1 - ref) < 1e-10 * n2);
    }
    const double u1_0 = std::abs(constant_coeff_reference(Vec2::Zero(), h, 1.0, g).u1);
    for (double r : {1.0, 1.5, 2.5}) CHECK(std::abs(constant_coeff_reference(Vec2(0.0, r), h, 1.0, g).u1) < 1e-6 * u1_0);

    std::vector<double> rs, mags;
    for (double r : {2.0, 4.0, 8.0, 16.0}) {
        rs.push_back(r);
        mags.push_back(std::abs(constant_coeff_reference(Vec2(r, 0.0), 0.05, 1.0, g).u0));
    }
    CHECK(fitted_slope(rs, mags) == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("cylinder field reference")
{
    const CylinderFieldAmp one = [](const Vec2&, double) { return Complex(1.0); };
    const CylinderFieldAmp zero = [](const Vec2&, double) { return Complex(0.0); };
    const Vec2 x(0.8, -0.5);
    CHECK(cylinder_field_reference(x, 0.1, 0.4, zero) == Complex(0.0));

    // pole-free: the periodic trapezoid rule is spectrally accurate
    const CylinderFieldAmp A = [](const Vec2&, double psi) { return Complex(1.0 + 0.3 * std::cos(psi), 0.2 * std::sin(2 * psi)); };
    for (double E : {-0.5, 1.7}) {
        const double h = 0.1;
        const Complex v = cylinder_field_reference(x, h, E, A);
        const Complex ref = std::sqrt(h) * periodic_trapezoid(
                                               [&](double psi) {
                                                   const double s = std::sin(psi);
                                                   return std::exp(Complex(0.0, x.norm() * s / h)) * A(x, psi) / (s * s - E);
                                               },
                                               4096);
        CHECK(std::abs(v - ref) < 1e-8 * std::abs(ref));
    }

    // poles on the line: principal value plus residues
    const double h = 0.1, E = 0.36;
    const Complex v = cylinder_field_reference(x, h, E, A);
    const double r = x.norm();
    const double s0 = std::asin(std::sqrt(E));
    const std::vector<double> poles{s0, pi - s0, -s0, -pi + s0};
    auto F = [&](double psi) { return std::exp(Complex(0.0, r * std::sin(psi) / h)) * A(x, psi); };
    std::vector<Complex> res;
    for (double p : poles) res.push_back(F(p) / std::sin(2 * p));
    const int n = 40000;
    Complex pv{};
    for (int j = 0; j < n; ++j) {
        const double psi = -pi + two_pi * (j + 0.37) / n;
        const double s = std::sin(psi);
        Complex g = F(psi) / (s * s - E);
        for (size_t k = 0; k < poles.size(); ++k) g -= res[k] * 0.5 / std::tan(0.5 * (psi - poles[k]));
        pv += g;
    }
    pv *= two_pi / n;
    Complex delta{};
    for (size_t k = 0; k < poles.size(); ++k) delta += F(poles[k]) / std::fabs(std::sin(2 * poles[k]));
    const Complex ref = std::sqrt(h) * (pv + Complex(0.0, pi) * delta);
    CHECK(std::abs(v - ref) < 1e-7 * std::abs(ref));

    CHECK_THROWS_AS(cylinder_field_reference(x, 0.1, 1.0005, A), DomainError);
    CHECK_THROWS_AS(cylinder_field_reference(x, 0.1, 2e-4, A), DomainError);
}

TEST_CASE("cylinder field satisfies the equation to leading order")
{
    const double h = 0.05, E = -0.5;
    const SourceSpec s = cylinder_source(h, E);
    GridSpec g;
    g.step = h / 20;
    g.nx = 9;
    g.ny = 9;
    g.origin = Vec2(0.9, 0.4);
    const std::vector<Vec2> pts = g.points();
    std::vector<FieldSample> field = evaluate_field(free_m2, s, pts);
    const PdeReport rep = verify_pde(g, field, free_m2, E, h);
    CHECK(rep.interior == 49);
    CHECK(rep.relative_to_f <= 0.05);
    CHECK(field[40].residual.has_value());
    CHECK_FALSE(field[0].residual.has_value());

    CHECK_THROWS_AS(evaluate_field(free_m1, s, pts), UnsupportedError);
}

TEST_CASE("verify_pde preconditions and the zero field")
{
    GridSpec g;
    g.step = 0.005;
    g.nx = 5;
    g.ny = 4;
    std::vector<FieldSample> zero(20);
    const PdeReport r = verify_pde(g, zero, free_m2, 1.0, 0.1);
    CHECK(r.max_residual == 0.0);
    CHECK(r.relative == 0.0);
    CHECK(r.interior == 6);
    CHECK_THROWS_AS(verify_pde(g, zero, free_m2, 1.0, 0.04), DomainError);
    CHECK_THROWS_AS(verify_pde(g, zero, free_m1, 1.0, 0.1), UnsupportedError);
    std::vector<FieldSample> short_field(3);
    CHECK_THROWS_AS(verify_pde(g, short_field, free_m2, 1.0, 0.1), DomainError);
}

TEST_CASE("free m=1 field: strategies against the exact field")
{
    const std::vector<Vec2> xs{Vec2(0.9, 0.6), Vec2(-1.2, 0.4), Vec2(0.3, -1.5)};
    std::vector<double> hs{0.2, 0.1, 0.05}, gap_sd, gap_de;
    for (double h : hs) {
        const SourceSpec s = plane_source(Vec2::Zero(), h, 1.0);
        FieldOptions o;
        o.strategy = Strategy::stationary;
        const auto st = evaluate_field(free_m1, s, xs, o);
        o.strategy = Strategy::direct;
        const auto di = evaluate_field(free_m1, s, xs, o);
        double gs = 0, ge = 0;
        for (size_t k = 0; k < xs.size(); ++k) {
            CHECK(st[k].method == OscMethod::stationary);
            CHECK(di[k].method == OscMethod::direct);
            CHECK(st[k].n_branches == 1);
            const Complex ex = free_field_exact(1.0, 1.0, 1.0, Vec2::Zero(), h, unit_lambda, xs[k]);
            gs = std::max(gs, std::abs(st[k].u - di[k].u) / std::abs(di[k].u));
            ge = std::max(ge, std::abs(di[k].u - ex) / std::abs(ex));
        }
        gap_sd.push_back(gs);
        gap_de.push_back(ge);
    }
    CHECK(gap_sd[2] < 0.05);
    CHECK(fitted_slope(hs, gap_sd) >= 0.8);
    CHECK(gap_de[2] < gap_de[0]);
    CHECK(gap_de[2] < 0.05);
}

TEST_CASE("free m=1 phase advances along a ray")
{
    const double h = 0.05;
    const SourceSpec s = plane_source(Vec2::Zero(), h, 1.0);
    FieldOptions o;
    o.strategy = Strategy::stationary;
    const Vec2 dir = Vec2(3.0, 4.0) / 5.0;
    const std::vector<Vec2> xs{1.0 * dir, 1.3 * dir, 2.1 * dir};
    const auto u = evaluate_field(free_m1, s, xs, o);
    for (size_t k = 1; k < xs.size(); ++k) {
        const double d = xs[k].norm() - xs[0].norm();
        const Complex ratio = u[k].u / u[0].u;
        CHECK(std::abs(ratio / std::abs(ratio) - std::exp(Complex(0.0, d / h))) < 1e-8);
        CHECK(std::abs(ratio) == doctest::Approx(std::sqrt(xs[0].norm() / xs[k].norm())).epsilon(1e-8));
    }
}

TEST_CASE("constant-coefficient m=2 field matches the exact field")
{
    const Vec2 x0(0.5, 0.5);
    const std::vector<Vec2> xs{Vec2(0.5, 1.7), Vec2(1.9, 0.1)};
    for (double h : {0.1, 0.05}) {
        const SourceSpec s = plane_source(x0, h, 1.0);
        FieldOptions o;
        o.strategy = Strategy::direct;
        const auto di = evaluate_field(free_m2, s, xs, o);
        for (size_t k = 0; k < xs.size(); ++k) {
            const Complex ex = free_field_exact(2.0, 1.0, 1.0, x0, h, unit_lambda, xs[k]);
            CHECK(std::abs(di[k].u - ex) < 4 * h * std::abs(ex));
        }
    }
}

TEST_CASE("stationary field residual decreases with h")
{
    std::vector<double> hs{0.2, 0.1, 0.05}, rel;
    for (double h : hs) {
        const SourceSpec s = plane_source(Vec2::Zero(), h, 1.0);
        FieldOptions o;
        o.strategy = Strategy::stationary;
        GridSpec g;
        g.step = h / 50;
        g.nx = 5;
        g.ny = 5;
        g.origin = Vec2(3.0, 1.0);
        const auto pts = g.points();
        auto field = evaluate_field(free_m2, s, pts, o);
        rel.push_back(verify_pde(g, field, free_m2, 1.0, h).relative);
    }
    CHECK(rel[2] < rel[1]);
    CHECK(rel[1] < rel[0]);
    CHECK(fitted_slope(hs, rel) >= 0.5);
}

TEST_CASE("automatic strategy and flags")
{
    const double h = 0.1;
    const SourceSpec s = plane_source(Vec2::Zero(), h, 1.0);
    const std::vector<Vec2> xs{Vec2(0.4, 0.0), Vec2(1.5, 0.5)};
    const auto u = evaluate_field(free_m1, s, xs);
    CHECK(u[0].method == OscMethod::direct);
    CHECK(u[0].caustic_adjacent);
    CHECK(u[1].method == OscMethod::stationary);
    CHECK_FALSE(u[1].caustic_adjacent);
    CHECK(u[1].f != Complex(0.0));

    CHECK_THROWS_AS(evaluate_field(free_m1, s, {Vec2(0.1, 0.1)}), DomainError);
    CHECK(evaluate_field(free_m1, s, {}).empty());

    FieldOptions o;
    o.t_probe = 1.0;
    o.T = 1.0;
    const auto far = evaluate_field(free_m1, s, {Vec2(0.0, 0.45), Vec2(3.0, 0.0)}, o);
    CHECK(far[0].n_branches == 1);
    CHECK_FALSE(far[0].unreachable);
    CHECK(far[1].n_branches == 0);
    CHECK(far[1].unreachable);
    CHECK(far[1].u == Complex(0.0));
}

TEST_CASE("field linearity and rotational symmetry")
{
    const double h = 0.1;
    const HomHamiltonian H(2.0, DensityProfile::gaussian_bump(1.0, 0.3, 1.0));
    SourceSpec s = plane_source(Vec2::Zero(), h, 1.0);
    FieldOptions o;
    o.strategy = Strategy::direct;
    o.compute_source = false;
    const std::vector<Vec2> xs{Vec2(1.2, 0.3)};
    const Complex u1 = evaluate_field(H, s, xs, o)[0].u;
    s.plane_amp = [](double, double) { return Complex(0.0, 2.0); };
    const Complex u2 = evaluate_field(H, s, xs, o)[0].u;
    CHECK(std::abs(u2 - Complex(0.0, 2.0) * u1) < 1e-10 * std::abs(u2));

    s = plane_source(Vec2::Zero(), h, 1.0);
    o.strategy = Strategy::stationary;
    const double c = std::cos(1.1), sn = std::sin(1.1);
    const Vec2 y(1.2 * c - 0.3 * sn, 1.2 * sn + 0.3 * c);
    const auto v = evaluate_field(H, s, {xs[0], y}, o);
    CHECK(std::abs(std::abs(v[0].u) - std::abs(v[1].u)) < 1e-7 * std::abs(v[0].u));
}

#include "sgf/green.hpp"

#include "sgf/specfun.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>

namespace sgf {

void SourceSpec::validate() const
{
    if (!(h >= 0.02 && h <= 0.5)) throw DomainError("source: h must lie in [0.02, 0.5]");
    if (!std::isfinite(E) || E == 0.0) throw DomainError("source: E must be finite and nonzero");
    if (kind == Kind::plane && !plane_amp) throw DomainError("source: missing plane amplitude");
    if (kind == Kind::cylinder && !cylinder_amp) throw DomainError("source: missing cylinder amplitude");
    if (!(window.half > window.flat && window.flat >= 0 && window.lo() > 0))
        throw DomainError("source: invalid lambda window");
}

SourceSpec plane_source(const Vec2& x0, double h, double E, PlaneAmplitude a)
{
    SourceSpec s;
    s.kind = SourceSpec::Kind::plane;
    s.x0 = x0;
    s.h = h;
    s.E = E;
    s.plane_amp = a ? std::move(a) : PlaneAmplitude([](double, double) { return Complex(1.0); });
    return s;
}

SourceSpec cylinder_source(double h, double E, CylinderAmplitude a)
{
    SourceSpec s;
    s.kind = SourceSpec::Kind::cylinder;
    s.h = h;
    s.E = E;
    s.cylinder_amp = a ? std::move(a) : CylinderAmplitude([](double, double) { return Complex(1.0); });
    return s;
}

namespace {

const Complex I1(0.0, 1.0);

int even_at_least(double v, int floor_n)
{
    const int n = std::max(floor_n, static_cast<int>(std::ceil(v)));
    return n + (n % 2);
}

bool constant_m2(const HomHamiltonian& H)
{
    return H.conformal() && std::fabs(H.degree() - 2.0) < 1e-12 &&
           H.profile().kind == DensityProfile::Kind::constant;
}

}  // namespace

Complex synthesize_source(const HomHamiltonian& H, const SourceSpec& spec, const Vec2& x)
{
    spec.validate();
    const double h = spec.h;
    if (spec.kind == SourceSpec::Kind::cylinder) {
        const int n = even_at_least(16.0 * x.norm() / h, 64);
        const Complex v = periodic_trapezoid(
            [&](double psi) {
                const double s = omega(psi).dot(x);
                return std::exp(I1 * (s / h)) * spec.cylinder_amp(s, psi);
            },
            n);
        return v / std::sqrt(two_pi * h);
    }

    const Vec2 d = x - spec.x0;
    const double r0 = shell_radius(H, spec.x0, spec.E, 0.0, 0.0);
    const double band = spec.window.hi() * r0 * d.norm() / h;
    const int n_psi = even_at_least(2.0 * band + 64, 64);
    const QuadRule lq = gauss_legendre(48 + static_cast<int>(std::ceil(band)), spec.window.lo(), spec.window.hi());
    const bool radial = H.conformal();
    const Complex v = periodic_trapezoid(
        [&](double psi) {
            const double r = radial ? r0 : shell_radius(H, spec.x0, spec.E, 0.0, psi);
            const double c = r * omega(psi).dot(d) / h;
            Complex s{};
            for (size_t k = 0; k < lq.nodes.size(); ++k) {
                const double l = lq.nodes[k];
                s += lq.weights[k] * l * lambda_window(l, spec.window) * spec.plane_amp(psi, l) *
                     std::exp(I1 * (l * c));
            }
            return r * r * s;
        },
        n_psi);
    return v / (two_pi * h);
}

Complex transport_amplitude(const FrontSample& s, Complex a, double m, double E)
{
    const double density = m * E * det2(s.P, s.Ppsi);
    const double scale = std::fabs(m * E) * s.P.squaredNorm();
    if (!(std::fabs(density) > 1e-12 * std::max(scale, 1e-300)))
        throw DomainError("transport_amplitude: vanishing density (caustic amplitude)");
    if (a == Complex(0.0)) return 0.0;
    return principal_inv_sqrt_det(Complex(density)) * a;
}

std::string to_string(Strategy s)
{
    switch (s) {
    case Strategy::direct: return "direct";
    case Strategy::stationary: return "stationary";
    case Strategy::automatic: return "auto";
    }
    return "auto";
}

Strategy strategy_from_string(const std::string& s)
{
    if (s == "direct") return Strategy::direct;
    if (s == "stationary") return Strategy::stationary;
    if (s == "auto") return Strategy::automatic;
    throw ConfigError("unknown strategy '" + s + "'");
}

namespace {

std::vector<FieldSample> cylinder_field(const HomHamiltonian& H, const SourceSpec& spec,
                                        const std::vector<Vec2>& targets, const FieldOptions& opts)
{
    if (!constant_m2(H))
        throw UnsupportedError("evaluate_field: cylinder sources need m = 2 and a constant density");
    const double rho0 = H.profile().rho0;
    const double h = spec.h;
    const double scale = rho0 / (std::sqrt(two_pi * h) * std::sqrt(h));
    std::vector<FieldSample> out(targets.size());
    parallel_for(static_cast<int>(targets.size()), resolve_threads(opts.threads), [&](int k) {
        const Vec2& x = targets[static_cast<size_t>(k)];
        const double th = std::atan2(x.y(), x.x());
        const double r = x.norm();
        const CylinderFieldAmp A = [&](const Vec2&, double psi) {
            return spec.cylinder_amp(r * std::sin(psi), psi + th - 0.5 * pi);
        };
        FieldSample fs;
        fs.x = x;
        fs.u = scale * cylinder_field_reference(x, h, spec.E * rho0, A);
        fs.method = OscMethod::direct;
        fs.est_error = 1e-9 * std::abs(fs.u);
        if (opts.compute_source) fs.f = synthesize_source(H, spec, x);
        out[static_cast<size_t>(k)] = fs;
    });
    return out;
}

double probe_time(const HomHamiltonian& H, const SourceSpec& spec, const std::vector<Vec2>& targets)
{
    double dmax = 0.0, vmin = std::numeric_limits<double>::infinity();
    auto speed = [&](const Vec2& x) {
        try {
            const double r = shell_radius(H, x, spec.E, 0.0, 0.0);
            const double v = H.derivs(x, Vec2(r, 0.0)).hp.norm();
            if (v > 0) vmin = std::min(vmin, v);
        } catch (const Error&) {
        }
    };
    speed(spec.x0);
    for (const Vec2& x : targets) {
        dmax = std::max(dmax, (x - spec.x0).norm());
        speed(x);
        speed(0.5 * (x + spec.x0));
    }
    if (!std::isfinite(vmin)) throw DomainError("evaluate_field: no positive ray speed near the targets");
    return 2.0 * dmax / vmin + 0.5;
}

}  // namespace

std::vector<FieldSample> evaluate_field(const HomHamiltonian& H, const SourceSpec& spec,
                                        const std::vector<Vec2>& targets, const FieldOptions& opts)
{
    spec.validate();
    if (targets.empty()) return {};
    if (spec.kind == SourceSpec::Kind::cylinder) return cylinder_field(H, spec, targets, opts);

    const double h = spec.h, E = spec.E, m = H.degree();
    const double eps0 = opts.eps0_factor * h;
    for (const Vec2& x : targets)
        if ((x - spec.x0).norm() < eps0)
            throw DomainError("evaluate_field: target within the exclusion radius of the source");

    const int threads = resolve_threads(opts.threads);
    const int nt = static_cast<int>(targets.size());
    const BoundaryParam b = plane_boundary(H, spec.x0, E, 0.0);
    auto C_of = [&](double psi) {
        const double r = b.point(psi).p.norm();
        return r * r * std::sqrt(m * E * r * r);
    };
    const Complex pref = I1 / h;
    const double norm = star_norm(2, h);

    // branches on a probe front
    const double t_probe = opts.t_probe > 0 ? opts.t_probe : probe_time(H, spec, targets);
    const Front probe(H, b, t_probe, opts.n_psi_branch, opts.rays, threads);
    BranchOptions bo = opts.branch;
    bo.threads = threads;
    const BranchSolver solver(probe, bo);
    std::vector<std::vector<CriticalBranch>> branches(static_cast<size_t>(nt));
    parallel_for(nt, threads, [&](int k) { branches[static_cast<size_t>(k)] = solver.solve(targets[static_cast<size_t>(k)]); });

    double t_last = 0.0;
    for (const auto& br : branches)
        for (const auto& c : br) t_last = std::max(t_last, c.t_star);
    const double T = opts.T > 0 ? opts.T : (t_last > 0 ? opts.t_factor * t_last : t_probe);

    std::vector<FieldSample> out(static_cast<size_t>(nt));
    std::vector<int> direct;
    for (int k = 0; k < nt; ++k) {
        FieldSample& fs = out[static_cast<size_t>(k)];
        const auto& br = branches[static_cast<size_t>(k)];
        fs.x = targets[static_cast<size_t>(k)];
        fs.n_branches = static_cast<int>(br.size());

        bool singular = false;
        double min_xpsi = std::numeric_limits<double>::infinity();
        Complex sum{};
        double est = 0.0;
        for (const CriticalBranch& c : br) {
            min_xpsi = std::min(min_xpsi, c.sample.Xpsi.norm());
            if (c.degenerate) {
                singular = true;
                continue;
            }
            try {
                const double lam = c.lambda_star;
                const Complex amp = C_of(c.psi_star) *
                                    transport_amplitude(c.sample, spec.plane_amp(c.psi_star, lam), m, E) * lam *
                                    lambda_window(lam, spec.window) * time_cutoff(c.t_star, T);
                const OscResult r = stationary_at_branch(c, amp, h);
                sum += pref * r.value;
                est += std::abs(pref) * r.est_error;
            } catch (const DomainError&) {
                singular = true;
            }
        }
        fs.caustic_adjacent = singular || (!br.empty() && min_xpsi < opts.xpsi_switch);

        bool use_direct = opts.strategy == Strategy::direct;
        if (opts.strategy == Strategy::automatic) use_direct = br.empty() || fs.caustic_adjacent;
        if (use_direct) {
            direct.push_back(k);
            continue;
        }
        fs.method = OscMethod::stationary;
        fs.u = norm * sum;
        fs.est_error = norm * est;
        fs.unreachable = br.empty();
    }

    if (!direct.empty()) {
        DirectGrid g = opts.grid;
        g.T = T;
        g.window = spec.window;
        g.n_psi += g.n_psi % 2;
        std::vector<int> todo = direct;
        for (int round = 0; !todo.empty(); ++round) {
            if (round > opts.max_refinements)
                throw RefinementRequired("evaluate_field: direct grid did not converge", g.n_psi, g.t_panels,
                                         g.n_lambda);
            const Front fr(H, b, T, g.n_psi, opts.rays, threads);
            const std::vector<double> tn = direct_time_nodes(g);
            const FrontGrid fg = fr.grid(tn);
            const int np = g.n_psi, ntn = static_cast<int>(tn.size());

            struct Node {
                Vec2 X, P;
                Complex amp;
            };
            std::vector<Node> table(static_cast<size_t>(np) * ntn);
            parallel_for(np, threads, [&](int j) {
                const auto& col = fg.samples[static_cast<size_t>(j)];
                const double C = C_of(fg.psi_grid[static_cast<size_t>(j)]);
                for (int i = 0; i < ntn; ++i) {
                    Node& n = table[static_cast<size_t>(i) * np + j];
                    n.amp = 0.0;
                    if (static_cast<size_t>(i) >= col.size()) continue;
                    const FrontSample& s = col[static_cast<size_t>(i)];
                    n.X = s.X;
                    n.P = s.P;
                    try {
                        n.amp = C * transport_amplitude(s, 1.0, m, E);
                    } catch (const DomainError&) {
                    }
                }
            });

            const DirectIntegrand base{
                {}, [&](double psi, double lam) { return lam * spec.plane_amp(psi, lam); }};
            std::mutex mu;
            int sug_psi = g.n_psi, sug_t = g.t_panels, sug_l = g.n_lambda;
            std::vector<char> failed(todo.size(), 0);
            parallel_for(static_cast<int>(todo.size()), threads, [&](int q) {
                const int k = todo[static_cast<size_t>(q)];
                const Vec2 x = targets[static_cast<size_t>(k)];
                DirectIntegrand f = base;
                f.node = [&](int i, double t, int j, double) {
                    const Node& n = table[static_cast<size_t>(i) * np + j];
                    return LinearPhaseNode{m * E * t, n.P.dot(x - n.X), n.amp};
                };
                try {
                    const OscResult r = direct_oscillatory(f, h, g, 1);
                    FieldSample& fs = out[static_cast<size_t>(k)];
                    fs.method = OscMethod::direct;
                    fs.u = norm * r.value;
                    fs.est_error = norm * r.est_error;
                } catch (const RefinementRequired& e) {
                    std::lock_guard<std::mutex> lock(mu);
                    failed[static_cast<size_t>(q)] = 1;
                    sug_psi = std::max(sug_psi, e.suggested_n_psi);
                    sug_t = std::max(sug_t, e.suggested_n_t);
                    sug_l = std::max(sug_l, e.suggested_n_lambda);
                }
            });
            std::vector<int> next;
            for (size_t q = 0; q < todo.size(); ++q)
                if (failed[q]) next.push_back(todo[q]);
            todo = std::move(next);
            g.n_psi = sug_psi + sug_psi % 2;
            g.t_panels = sug_t;
            g.n_lambda = sug_l;
        }
    }

    double reached = 0.0;
    for (const FieldSample& fs : out)
        if (fs.n_branches > 0) reached = std::max(reached, std::abs(fs.u));
    for (FieldSample& fs : out) {
        if (fs.n_branches > 0 || fs.method != OscMethod::direct) continue;
        if (std::abs(fs.u) <= fs.est_error + opts.unreachable_rel * reached) {
            fs.u = 0.0;
            fs.unreachable = true;
        }
    }

    if (opts.compute_source)
        parallel_for(nt, threads, [&](int k) {
            out[static_cast<size_t>(k)].f = synthesize_source(H, spec, targets[static_cast<size_t>(k)]);
        });
    return out;
}

std::vector<Vec2> GridSpec::points() const
{
    std::vector<Vec2> p;
    p.reserve(static_cast<size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) p.emplace_back(origin.x() + i * step, origin.y() + j * step);
    return p;
}

PdeReport verify_pde(const GridSpec& grid, std::vector<FieldSample>& field, const HomHamiltonian& H, double E,
                     double h)
{
    if (!constant_m2(H)) throw UnsupportedError("verify_pde: stencil check needs m = 2 and a constant density");
    if (!(h > 0)) throw DomainError("verify_pde: h must be positive");
    if (!(grid.step > 0) || grid.step > h / 10)
        throw DomainError("verify_pde: grid too coarse for the stencil (step must be at most h/10)");
    if (field.size() != static_cast<size_t>(grid.nx) * grid.ny)
        throw DomainError("verify_pde: field does not match the grid");
    const double rho0 = H.profile().rho0;
    const double d2 = grid.step * grid.step;
    PdeReport rep;
    rep.residual.assign(field.size(), std::numeric_limits<double>::quiet_NaN());
    for (int j = 1; j + 1 < grid.ny; ++j) {
        for (int i = 1; i + 1 < grid.nx; ++i) {
            const size_t c = static_cast<size_t>(j) * grid.nx + i;
            const Complex lap = (field[c + 1].u + field[c - 1].u + field[c + grid.nx].u + field[c - grid.nx].u -
                                 4.0 * field[c].u) /
                                d2;
            const double r = std::abs(-h * h * lap / rho0 - E * field[c].u - field[c].f);
            rep.residual[c] = r;
            field[c].residual = r;
            rep.max_residual = std::max(rep.max_residual, r);
            rep.max_f = std::max(rep.max_f, std::abs(field[c].f));
            rep.max_u = std::max(rep.max_u, std::abs(field[c].u));
            ++rep.interior;
        }
    }
    auto ratio = [](double a, double b) { return b > 0 ? a / b : (a > 0 ? std::numeric_limits<double>::infinity() : 0.0); };
    rep.relative_to_f = ratio(rep.max_residual, rep.max_f);
    rep.relative_to_u = ratio(rep.max_residual, std::fabs(E) * rep.max_u);
    rep.relative = ratio(rep.max_residual, std::max(rep.max_f, std::fabs(E) * rep.max_u));
    return rep;
}

double bessel_pair_u(double r, double h) { return -(r / (2.0 * h)) * bessel_j1(r / h); }

double radial_stencil(const std::function<double(double)>& u, double r, double d, double h, double E)
{
    const double um2 = u(r - 2 * d), um1 = u(r - d), u0 = u(r), up1 = u(r + d), up2 = u(r + 2 * d);
    const double urr = (-up2 + 16 * up1 - 30 * u0 + 16 * um1 - um2) / (12 * d * d);
    const double ur = (-up2 + 8 * up1 - 8 * um1 + um2) / (12 * d);
    return -h * h * (urr + ur / r) - E * u0;
}

namespace {

BesselPairReport bessel_report(double h, double r_lo, double r_hi, int n_r, const std::function<double(double)>& op)
{
    if (n_r < 2 || !(r_hi > r_lo) || !(r_lo > 0)) throw DomainError("bessel_pair_check: invalid radial range");
    BesselPairReport rep;
    for (int k = 0; k < n_r; ++k) {
        const double r = r_lo + (r_hi - r_lo) * k / (n_r - 1);
        const double j0 = bessel_j0(r / h);
        rep.max_abs_error = std::max(rep.max_abs_error, std::fabs(op(r) - j0));
        rep.max_j0 = std::max(rep.max_j0, std::fabs(j0));
        ++rep.n_points;
    }
    rep.relative = rep.max_abs_error / rep.max_j0;
    return rep;
}

}  // namespace

BesselPairReport bessel_pair_check(double h, double r_lo, double r_hi, int n_r, double step)
{
    const auto u = [h](double r) { return bessel_pair_u(r, h); };
    return bessel_report(h, r_lo, r_hi, n_r, [&](double r) { return radial_stencil(u, r, step, h, 1.0); });
}

BesselPairReport bessel_pair_check_cross(double h, double r_lo, double r_hi, int n_r, double step)
{
    const auto U = [h](double x, double y) { return bessel_pair_u(std::hypot(x, y), h); };
    return bessel_report(h, r_lo, r_hi, n_r, [&](double r) {
        const double lap = (U(r + step, 0) + U(r - step, 0) + U(r, step) + U(r, -step) - 4 * U(r, 0)) / (step * step);
        return -h * h * lap - U(r, 0);
    });
}

Complex free_field_exact(double m, double rho0, double E, const Vec2& x0, double h,
                         const std::function<Complex(double)>& a, const Vec2& x, const LambdaWindow& w)
{
    if (!(m >= 1) || !(rho0 > 0) || !(E > 0) || !(h > 0)) throw DomainError("free_field_exact: invalid parameters");
    const double rk = std::pow(E * rho0, 1.0 / m);
    const double lo = w.lo() * rk, hi = w.hi() * rk;
    const double y = (x - x0).norm();
    auto F = [&](double r) {
        const double lam = r / rk;
        return r * two_pi * h * a(lam) * lambda_window(lam, w) * bessel_j0(y * r / h);
    };
    auto q = [&](double r) { return std::pow(r, m) / rho0 - E; };
    const double dq = m * std::pow(rk, m - 1) / rho0;
    const Complex Fk = F(rk);
    auto G = [&](double r) { return F(r) / q(r) - Fk / (dq * (r - rk)); };
    const double tol = 1e-13 * (1.0 + std::abs(Fk) / dq);
    const Complex pv = integrate_adaptive(G, lo, rk, tol, 16) + integrate_adaptive(G, rk, hi, tol, 16) +
                       Fk / dq * std::log((hi - rk) / (rk - lo));
    const Complex total = pv + I1 * pi * Fk / dq;
    return std::pow(two_pi * h, -2.0) * two_pi * total;
}

CoeffPair constant_coeff_reference(const Vec2& x, double h, double E, const std::function<double(double)>& g,
                                   double r_max)
{
    if (!(E > 0) || !(h > 0)) throw DomainError("constant_coeff_reference: needs E > 0 and h > 0");
    const double k = std::sqrt(E);
    const double r = x.norm();
    const double R = r_max > 0 ? r_max : 10.0 * std::max(1.0, k);
    const double n2 = std::pow(two_pi * h, -2.0);
    CoeffPair out;
    const Complex th = integrate_adaptive([&](double t) { return std::exp(I1 * (r * k * std::cos(t) / h)); },
                                          -0.5 * pi, 0.5 * pi, 1e-13, 16);
    out.u0 = I1 * pi * g(k) * n2 * th;
    double gmax = 0.0;
    for (int i = 0; i <= 64; ++i) gmax = std::max(gmax, std::fabs(g(R * i / 64) / (R * i / 64 + k)));
    const Complex hk = integrate_adaptive([&](double s) { return Complex(bessel_j0(r * s / h) * g(s) / (s + k)); },
                                          0.0, R, 1e-14 * (1.0 + gmax), 16);
    out.u1 = n2 * two_pi * hk;
    return out;
}

namespace {

Complex ts_complex(const std::function<Complex(double)>& f, double a, double b, const CylinderRefOptions& o)
{
    boost::math::quadrature::tanh_sinh<double> ts(static_cast<size_t>(o.max_depth));
    const double re = ts.integrate([&](double s) { return f(s).real(); }, a, b, o.tol);
    const double im = ts.integrate([&](double s) { return f(s).imag(); }, a, b, o.tol);
    return {re, im};
}

}  // namespace

Complex cylinder_field_reference(const Vec2& x, double h, double E, const CylinderFieldAmp& A,
                                 const CylinderRefOptions& opts)
{
    if (!(h > 0)) throw DomainError("cylinder_field_reference: h must be positive");
    if (std::fabs(E) < 1e-3 || std::fabs(E - 1.0) < 1e-3)
        throw DomainError("cylinder_field_reference: E too close to a double pole of 1/(sin^2 - E)");
    const double r = x.norm();
    auto num = [&](double psi) { return std::exp(I1 * (r * std::sin(psi) / h)) * A(x, psi); };
    std::vector<double> cuts{-pi, -0.5 * pi, 0.0, 0.5 * pi, pi};
    const bool poles = E > 0 && E < 1;
    if (poles) {
        const double s = std::asin(std::sqrt(E));
        for (double c : {-pi + s, -s, s, pi - s}) cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    auto integral = [&](double eps) {
        const std::function<Complex(double)> f = [&](double psi) {
            const double sn = std::sin(psi);
            return num(psi) / Complex(sn * sn - E, -eps);
        };
        Complex s{};
        for (size_t i = 0; i + 1 < cuts.size(); ++i) s += ts_complex(f, cuts[i], cuts[i + 1], opts);
        return s;
    };
    Complex v;
    if (!poles) {
        v = integral(0.0);
    } else {
        if (opts.eps.empty()) throw DomainError("cylinder_field_reference: no regularization parameters");
        std::vector<Complex> vals;
        for (double e : opts.eps) vals.push_back(integral(e));
        v = neville_at_zero(opts.eps, vals);
    }
    return std::sqrt(h) * v;
}

}  // namespace sgf

#include "sgf/flow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

namespace sgf {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

void rhs(const HomHamiltonian& H, int ntan, bool reverse, const RayState& y, RayState& f)
{
    const Vec2 x(y[0], y[1]);
    const Vec2 p(y[2], y[3]);
    const HamDerivs d = H.derivs(x, p);
    const double s = reverse ? -1.0 : 1.0;
    f.fill(0.0);
    f[0] = s * d.hp.x();
    f[1] = s * d.hp.y();
    f[2] = -s * d.hx.x();
    f[3] = -s * d.hx.y();
    const Mat2 hpx = d.hxp.transpose();
    for (int k = 0; k < ntan; ++k) {
        const int o = 4 + 4 * k;
        const Vec2 dx(y[o], y[o + 1]);
        const Vec2 dp(y[o + 2], y[o + 3]);
        const Vec2 ddx = s * (hpx * dx + d.hpp * dp);
        const Vec2 ddp = -s * (d.hxx * dx + d.hxp * dp);
        f[o] = ddx.x();
        f[o + 1] = ddx.y();
        f[o + 2] = ddp.x();
        f[o + 3] = ddp.y();
    }
}

}  // namespace

SampleResiduals sample_residuals(const HomHamiltonian& H, const FrontSample& s)
{
    SampleResiduals r;
    r.energy = std::fabs(H.derivs(s.X, s.P).h - s.energy);
    r.huygens = std::fabs(s.P.dot(s.Xdot) - H.degree() * s.energy);
    r.orth = std::fabs(s.P.dot(s.Xpsi));
    r.gram = std::fabs(s.Xdot.dot(s.Ppsi) - s.Pdot.dot(s.Xpsi));
    return r;
}

RayState Trajectory::state_at(double time) const
{
    if (t.empty()) throw DomainError("empty trajectory");
    const double tol = 1e-12 * std::max(1.0, std::fabs(t.back()));
    if (time < t.front() - tol || time > t.back() + tol) throw DomainError("dense_sample: time outside the trajectory");
    auto it = std::lower_bound(t.begin(), t.end(), time);
    if (it != t.end() && *it == time) return y[static_cast<size_t>(it - t.begin())];
    size_t i = (it == t.begin()) ? 0 : static_cast<size_t>(it - t.begin()) - 1;
    if (i + 1 >= t.size()) i = t.size() - 2;
    const double h = t[i + 1] - t[i];
    const double th = std::clamp((time - t[i]) / h, 0.0, 1.0);
    const double th1 = 1.0 - th;
    const auto& r = cont[i];
    RayState out{};
    const int n = 4 + 4 * tangents;
    for (int k = 0; k < n; ++k)
        out[k] = r[0][k] + th * (r[1][k] + th1 * (r[2][k] + th * (r[3][k] + th1 * r[4][k])));
    return out;
}

FrontSample make_sample(const HomHamiltonian& H, double t, double psi, const RayState& y, int tangents, double energy)
{
    FrontSample s;
    s.t = t;
    s.psi = psi;
    s.X = Vec2(y[0], y[1]);
    s.P = Vec2(y[2], y[3]);
    if (tangents >= 1) {
        s.Xpsi = Vec2(y[4], y[5]);
        s.Ppsi = Vec2(y[6], y[7]);
    }
    if (tangents >= 2) {
        s.Xphi = Vec2(y[8], y[9]);
        s.Pphi = Vec2(y[10], y[11]);
        s.has_phi = true;
    }
    const HamDerivs d = H.derivs(s.X, s.P);
    s.Xdot = d.hp;
    s.Pdot = -d.hx;
    s.energy = energy;
    return s;
}

Trajectory integrate_ray(const HomHamiltonian& H, const PhasePoint& z0, double t_end, const RayOptions& opts,
                         const std::vector<Tangent>& tangents, double psi)
{
    if (!(t_end > 0)) throw DomainError("integrate_ray: t_end must be positive");
    if (z0.p.norm() == 0.0) throw DomainError("integrate_ray: zero initial momentum");
    if (tangents.size() > 2) throw DomainError("integrate_ray: at most two tangent vectors");

    Trajectory tr;
    tr.H = std::make_shared<const HomHamiltonian>(H);
    tr.tangents = static_cast<int>(tangents.size());
    tr.reverse = opts.reverse;
    tr.psi = psi;
    tr.energy = H.derivs(z0.x, z0.p).h;
    const int n = 4 + 4 * tr.tangents;

    RayState y{};
    y[0] = z0.x.x();
    y[1] = z0.x.y();
    y[2] = z0.p.x();
    y[3] = z0.p.y();
    for (int k = 0; k < tr.tangents; ++k) {
        y[4 + 4 * k] = tangents[k].dx.x();
        y[5 + 4 * k] = tangents[k].dx.y();
        y[6 + 4 * k] = tangents[k].dp.x();
        y[7 + 4 * k] = tangents[k].dp.y();
    }
    tr.t.push_back(0.0);
    tr.y.push_back(y);

    RayState k1, k2, k3, k4, k5, k6, k7, yt, ynew;
    double t = 0.0;
    try {
        rhs(H, tr.tangents, opts.reverse, y, k1);
    } catch (const DomainError& e) {
        throw IntegrationError(std::string("integrate_ray: ") + e.what(), 0.0);
    }

    double h = opts.initial_step;
    if (!(h > 0)) {
        double ny = 0, nf = 0;
        for (int i = 0; i < n; ++i) {
            const double sc = opts.atol + opts.rtol * std::fabs(y[i]);
            ny += (y[i] / sc) * (y[i] / sc);
            nf += (k1[i] / sc) * (k1[i] / sc);
        }
        ny = std::sqrt(ny / n);
        nf = std::sqrt(nf / n);
        h = (ny < 1e-5 || nf < 1e-5) ? 1e-6 : 0.01 * ny / nf;
        h = std::min({h, opts.max_step, t_end});
    }

    long steps = 0;
    double err_prev = 1e-4;
    while (t < t_end) {
        if (++steps > opts.max_steps) throw IntegrationError("integrate_ray: too many steps", t);
        bool last = false;
        if (t + h >= t_end) {
            h = t_end - t;
            last = true;
        }
        if (h < 1e-13 * std::max(1.0, t)) throw IntegrationError("integrate_ray: step size underflow", t);
        try {
            for (int i = 0; i < n; ++i) yt[i] = y[i] + h * a21 * k1[i];
            rhs(H, tr.tangents, opts.reverse, yt, k2);
            for (int i = 0; i < n; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            rhs(H, tr.tangents, opts.reverse, yt, k3);
            for (int i = 0; i < n; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            rhs(H, tr.tangents, opts.reverse, yt, k4);
            for (int i = 0; i < n; ++i) yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            rhs(H, tr.tangents, opts.reverse, yt, k5);
            for (int i = 0; i < n; ++i)
                yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            rhs(H, tr.tangents, opts.reverse, yt, k6);
            for (int i = 0; i < n; ++i)
                ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            rhs(H, tr.tangents, opts.reverse, ynew, k7);
        } catch (const DomainError&) {
            // the trial step left the domain of H; retry smaller
            h *= 0.25;
            continue;
        }
        double err = 0;
        for (int i = 0; i < n; ++i) {
            const double ei =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = opts.atol + opts.rtol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            err += (ei / sc) * (ei / sc);
        }
        err = std::sqrt(err / n);
        if (!std::isfinite(err)) {
            h *= 0.25;
            continue;
        }
        if (err <= 1.0) {
            std::array<RayState, 5> r{};
            for (int i = 0; i < n; ++i) {
                r[0][i] = y[i];
                r[1][i] = ynew[i] - y[i];
                r[2][i] = h * k1[i] - r[1][i];
                r[3][i] = r[1][i] - h * k7[i] - r[2][i];
                r[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
            }
            tr.cont.push_back(r);
            t = last ? t_end : t + h;
            y = ynew;
            k1 = k7;
            tr.t.push_back(t);
            tr.y.push_back(y);
            if (std::hypot(y[2], y[3]) < 1e-8 * z0.p.norm())
                throw IntegrationError("integrate_ray: momentum vanished", t);
            // PI step control
            const double e = std::max(err, 1e-10);
            double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, 5.0);
            err_prev = std::max(err, 1e-4);
            h = std::min(h * fac, opts.max_step);
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }

    if (opts.check_invariants) {
        for (size_t i = 0; i < tr.t.size(); ++i) {
            const FrontSample s = make_sample(H, tr.t[i], psi, tr.y[i], tr.tangents, tr.energy);
            const SampleResiduals r = sample_residuals(H, s);
            if (r.energy > opts.energy_tol) throw IntegrationError("integrate_ray: energy drift above tolerance", tr.t[i]);
        }
    }
    return tr;
}

FrontSample dense_sample(const Trajectory& traj, double t)
{
    return make_sample(*traj.H, t, traj.psi, traj.state_at(t), traj.tangents, traj.energy);
}

std::vector<FrontSample> trajectory_samples(const Trajectory& traj)
{
    std::vector<FrontSample> out;
    out.reserve(traj.t.size());
    for (size_t i = 0; i < traj.t.size(); ++i)
        out.push_back(make_sample(*traj.H, traj.t[i], traj.psi, traj.y[i], traj.tangents, traj.energy));
    return out;
}

std::vector<double> uniform_psi_grid(int n)
{
    if (n < 1) throw DomainError("psi grid needs at least one point");
    std::vector<double> g(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) g[static_cast<size_t>(j)] = two_pi * j / n;
    return g;
}

std::vector<double> uniform_t_grid(double t_max, int n)
{
    if (n < 2 || !(t_max > 0)) throw DomainError("t grid needs n >= 2 and t_max > 0");
    std::vector<double> g(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = t_max * i / (n - 1);
    return g;
}

int resolve_threads(int requested)
{
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SGF_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int n, int threads, const std::function<void(int)>& f)
{
    const int nt = std::min(resolve_threads(threads), std::max(n, 1));
    if (nt <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nt));
    for (int w = 0; w < nt; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!err) err = std::current_exception();
                    next.store(n);
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

std::vector<Tangent> boundary_tangents(const BoundaryParam& b, double psi)
{
    std::vector<Tangent> tan;
    const PhasePoint dp = b.d_psi(psi);
    tan.push_back({dp.x, dp.p});
    if (b.kind == BoundaryParam::Kind::cylinder) {
        const PhasePoint df = b.d_phi(psi);
        tan.push_back({df.x, df.p});
    }
    return tan;
}

Front::Front(const HomHamiltonian& H, const BoundaryParam& boundary, double t_max, int n_psi, const RayOptions& opts,
             int threads)
    : H_(std::make_shared<const HomHamiltonian>(H)), boundary_(boundary), t_max_(t_max), opts_(opts),
      psi_grid_(uniform_psi_grid(n_psi))
{
    columns_.resize(psi_grid_.size());
    failures_.resize(psi_grid_.size());
    parallel_for(n_psi, threads, [&](int j) {
        try {
            columns_[static_cast<size_t>(j)] = ray(psi_grid_[static_cast<size_t>(j)]);
        } catch (const IntegrationError& e) {
            failures_[static_cast<size_t>(j)] = e.what();
        }
    });
}

const Trajectory& Front::column(int j) const
{
    const auto& c = columns_.at(static_cast<size_t>(j));
    if (!c) throw IntegrationError("front column failed: " + failures_[static_cast<size_t>(j)], 0.0);
    return *c;
}

Trajectory Front::ray(double psi, double t_end) const
{
    const double te = t_end < 0 ? t_max_ : t_end;
    return integrate_ray(*H_, boundary_.point(psi), te, opts_, boundary_tangents(boundary_, psi), psi);
}

FrontSample Front::sample(double t, double psi) const
{
    const double w = wrap_angle(psi);
    const double step = two_pi / n_psi();
    const double jf = w / step;
    const long j = std::lround(jf);
    if (std::fabs(jf - static_cast<double>(j)) < 1e-12) {
        const int jj = static_cast<int>(j % n_psi());
        if (column_ok(jj)) {
            FrontSample s = dense_sample(column(jj), t);
            s.psi = psi;
            return s;
        }
    }
    FrontSample s = dense_sample(ray(psi), t);
    s.psi = psi;
    return s;
}

Vec2 Front::ppsi_psi(double t, double psi, double delta) const
{
    const FrontSample a = dense_sample(ray(psi + delta), t);
    const FrontSample b = dense_sample(ray(psi - delta), t);
    return (a.Ppsi - b.Ppsi) / (2.0 * delta);
}

FrontGrid Front::grid(const std::vector<double>& t_grid) const
{
    FrontGrid g;
    g.t_grid = t_grid;
    g.psi_grid = psi_grid_;
    g.samples.resize(psi_grid_.size());
    g.failures = failures_;
    for (size_t j = 0; j < psi_grid_.size(); ++j) {
        if (!columns_[j]) continue;
        auto& col = g.samples[j];
        col.reserve(t_grid.size());
        for (double t : t_grid) {
            if (t > columns_[j]->t_end()) break;
            col.push_back(dense_sample(*columns_[j], t));
        }
    }
    return g;
}

FrontGrid integrate_front(const HomHamiltonian& H, const BoundaryParam& boundary, const std::vector<double>& t_grid,
                          int n_psi, const RayOptions& opts, int threads)
{
    if (t_grid.empty()) throw DomainError("integrate_front: empty time grid");
    const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
    if (!(t_max > 0)) throw DomainError("integrate_front: time grid must reach t > 0");
    const Front f(H, boundary, t_max, n_psi, opts, threads);
    return f.grid(t_grid);
}

}  // namespace sgf

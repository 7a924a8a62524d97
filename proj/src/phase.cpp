#include "sgf/phase.hpp"

#include <algorithm>
#include <cmath>

namespace sgf {

namespace {

void check_time(const Front& front, double t)
{
    if (!(t >= 0.0 && t <= front.t_max())) throw DomainError("generating family: t outside the integrated front");
}

double mE_of(const Front& front) { return front.m() * front.energy(); }

}  // namespace

GeneratingFamilyEval family_from_sample(const HomHamiltonian& H, const FrontSample& s, const Vec2& ppsi_psi,
                                        const Vec2& x, double lambda, double mE)
{
    const HamDerivs hd = H.derivs(s.X, s.P);
    const Vec2 D = x - s.X;
    const Vec2 Pddot = -hd.hxx * s.Xdot - hd.hxp * s.Pdot;
    const Vec2 Pdot_psi = -hd.hxx * s.Xpsi - hd.hxp * s.Ppsi;

    const double a = s.Pdot.dot(s.Xpsi);
    const double c = s.Ppsi.dot(s.Xpsi);
    const double d = s.Pdot.dot(s.Xdot);
    const double pxd = s.P.dot(s.Xdot);
    const double pxp = s.P.dot(s.Xpsi);

    GeneratingFamilyEval e;
    e.value = mE * s.t + lambda * s.P.dot(D);
    e.grad << mE + lambda * (s.Pdot.dot(D) - pxd), lambda * (s.Ppsi.dot(D) - pxp), s.P.dot(D);

    const double tt = lambda * (Pddot.dot(D) - d);
    const double tp = lambda * (Pdot_psi.dot(D) - a);
    const double tl = s.Pdot.dot(D) - pxd;
    const double pp = lambda * (ppsi_psi.dot(D) - c);
    const double pl = s.Ppsi.dot(D) - pxp;
    e.hess << tt, tp, tl, tp, pp, pl, tl, pl, 0.0;

    e.grad_x = lambda * s.P;
    e.mixed.row(0) = lambda * s.Pdot.transpose();
    e.mixed.row(1) = lambda * s.Ppsi.transpose();
    e.mixed.row(2) = s.P.transpose();
    return e;
}

GeneratingFamilyEval eval_family_plane(const Front& front, const Vec2& x, double t, double psi, double lambda,
                                       const FamilyOptions& opts)
{
    check_time(front, t);
    const FrontSample s = front.sample(t, psi);
    const Vec2 pp = opts.second_order ? front.ppsi_psi(t, psi, opts.step) : Vec2::Zero();
    return family_from_sample(front.hamiltonian(), s, pp, x, lambda, mE_of(front));
}

FrontSample cylinder_sample(const Front& front, double t, double phi, double psi)
{
    BoundaryParam b = front.boundary();
    if (b.kind != BoundaryParam::Kind::cylinder) throw UnsupportedError("cylinder family needs a cylinder front");
    check_time(front, t);
    b.phi = phi;
    const Trajectory tr = integrate_ray(front.hamiltonian(), b.point(psi), std::max(t, 1e-3), front.options(),
                                        boundary_tangents(b, psi), psi);
    FrontSample s = dense_sample(tr, t);
    s.psi = psi;
    return s;
}

GeneratingFamilyEval eval_family_cylinder_extended(const Front& front, const Vec2& x, double t, double phi,
                                                   double psi, double lambda, const FamilyOptions& opts)
{
    if (front.m() != 1.0) throw UnsupportedError("extended cylinder family requires m = 1");
    const FrontSample s = cylinder_sample(front, t, phi, psi);
    const Vec2 D = x - s.X;

    Vec2 Pff = Vec2::Zero(), Pfp = Vec2::Zero(), Ppp = Vec2::Zero();
    if (opts.second_order) {
        const double h = opts.step;
        const FrontSample fp = cylinder_sample(front, t, phi + h, psi);
        const FrontSample fm = cylinder_sample(front, t, phi - h, psi);
        const FrontSample pp = cylinder_sample(front, t, phi, psi + h);
        const FrontSample pm = cylinder_sample(front, t, phi, psi - h);
        Pff = (fp.Pphi - fm.Pphi) / (2 * h);
        Pfp = (pp.Pphi - pm.Pphi) / (2 * h);
        Ppp = (pp.Ppsi - pm.Ppsi) / (2 * h);
    }

    const double pxf = s.P.dot(s.Xphi);
    const double pxp = s.P.dot(s.Xpsi);
    GeneratingFamilyEval e;
    e.value = phi + lambda * s.P.dot(D);
    e.grad << s.P.dot(D), 1.0 + lambda * (s.Pphi.dot(D) - pxf), lambda * (s.Ppsi.dot(D) - pxp);

    const double lf = s.Pphi.dot(D) - pxf;
    const double lp = s.Ppsi.dot(D) - pxp;
    const double ff = lambda * (Pff.dot(D) - s.Pphi.dot(s.Xphi));
    const double fp = lambda * (Pfp.dot(D) - s.Pphi.dot(s.Xpsi));
    const double pp = lambda * (Ppp.dot(D) - s.Ppsi.dot(s.Xpsi));
    e.hess << 0.0, lf, lp, lf, ff, fp, lp, fp, pp;

    e.grad_x = lambda * s.P;
    e.mixed.row(0) = s.P.transpose();
    e.mixed.row(1) = lambda * s.Pphi.transpose();
    e.mixed.row(2) = lambda * s.Ppsi.transpose();
    return e;
}

GeneratingFamilyEval eval_family_cylinder_energy(const Front& front, const Vec2& x, double t, double psi,
                                                 double lambda, const FamilyOptions& opts)
{
    if (front.boundary().kind != BoundaryParam::Kind::cylinder)
        throw UnsupportedError("cylinder family needs a cylinder front");
    return eval_family_plane(front, x, t, psi, lambda, opts);
}

double cylinder_energy_D(const FrontSample& s)
{
    const double c = s.Ppsi.dot(s.Xpsi);
    const double d = s.Pdot.dot(s.Xdot);
    const double b = s.Ppsi.dot(s.Xdot);
    return d * c - b * b;
}

double cylinder_energy_D0(const HomHamiltonian& H, double phi, double psi)
{
    const HamDerivs hd = H.derivs(phi * omega(psi), omega(psi));
    const double b = hd.hp.dot(omega_perp(psi));
    return phi * (-hd.hx).dot(hd.hp) - b * b;
}

BranchSolver::BranchSolver(const Front& front, const BranchOptions& opts)
    : front_(front), opts_(opts), t_grid_(uniform_t_grid(front.t_max(), opts.n_t))
{
    const int n = front.n_psi();
    nodes_.resize(static_cast<size_t>(n));
    parallel_for(n, resolve_threads(opts.threads), [&](int j) {
        if (!front_.column_ok(j)) return;
        const Trajectory& tr = front_.column(j);
        auto& col = nodes_[static_cast<size_t>(j)];
        for (double t : t_grid_) {
            if (t > tr.t_end()) break;
            const FrontSample s = dense_sample(tr, t);
            col.push_back({s.X, s.P, s.Ppsi});
        }
    });
}

std::optional<CriticalBranch> BranchSolver::polish(const Vec2& x, double t0, double psi0) const
{
    const HomHamiltonian& H = front_.hamiltonian();
    const double mE = mE_of(front_);
    const double t_max = front_.t_max();

    struct State {
        Vec3 theta;
        FrontSample s;
        GeneratingFamilyEval e;
        double r;
    };
    auto evaluate = [&](const Vec3& th) -> std::optional<State> {
        if (!(th(0) >= 0.0 && th(0) <= t_max)) return std::nullopt;
        try {
            FrontSample s;
            if (th(0) == 0.0) {
                s = dense_sample(front_.ray(th(1), std::min(t_max, 1e-3)), 0.0);
            } else {
                s = dense_sample(front_.ray(th(1), th(0)), th(0));
            }
            s.psi = th(1);
            const GeneratingFamilyEval e = family_from_sample(H, s, Vec2::Zero(), x, th(2), mE);
            return State{th, s, e, e.grad.norm()};
        } catch (const Error&) {
            return std::nullopt;
        }
    };

    auto cur = evaluate(Vec3(t0, psi0, 1.0));
    if (!cur) return std::nullopt;
    for (int it = 0; it < opts_.max_iter && cur->r > opts_.newton_tol; ++it) {
        const Eigen::FullPivLU<Mat3> lu(cur->e.hess);
        if (!lu.isInvertible()) break;
        const Vec3 step = -lu.solve(cur->e.grad);
        double alpha = 1.0;
        std::optional<State> next;
        for (int k = 0; k < 12; ++k, alpha *= 0.5) {
            auto trial = evaluate(cur->theta + alpha * step);
            if (trial && trial->r < cur->r) {
                next = trial;
                break;
            }
        }
        if (!next) break;
        cur = next;
    }

    const FrontSample& s = cur->s;
    CriticalBranch b;
    b.t_star = cur->theta(0);
    b.psi_star = wrap_angle(cur->theta(1));
    b.lambda_star = cur->theta(2);
    b.phase_value = cur->e.value;
    b.hessian = cur->e.hess;
    b.hessian_det = b.hessian.determinant();
    const Eigen::SelfAdjointEigenSolver<Mat3> es(b.hessian);
    for (int k = 0; k < 3; ++k) b.signature += es.eigenvalues()(k) > 0 ? 1 : -1;
    b.sample = s;
    b.sample.psi = b.psi_star;
    b.residual = cur->r;
    const double scale = std::max(1.0, s.Xpsi.norm() * s.Ppsi.norm());
    b.degenerate = std::fabs(b.hessian_det) < opts_.degeneracy * mE * mE * scale;
    if (b.residual > opts_.accept_tol) {
        // unconverged: keep only when the failure is explained by degeneracy near x
        if (!b.degenerate || (x - s.X).norm() > 1e-6) return std::nullopt;
    }
    return b;
}

std::vector<CriticalBranch> BranchSolver::solve(const Vec2& x) const
{
    struct Root {
        double t, h;
    };
    const int n = front_.n_psi();
    const double dpsi = two_pi / n;
    const double dt = t_grid_.size() > 1 ? t_grid_[1] - t_grid_[0] : front_.t_max();

    std::vector<std::vector<Root>> roots(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        const auto& col = nodes_[static_cast<size_t>(j)];
        auto& out = roots[static_cast<size_t>(j)];
        for (size_t i = 0; i < col.size(); ++i) {
            const double g0 = col[i].P.dot(x - col[i].X);
            const double h0 = col[i].Ppsi.dot(x - col[i].X);
            if (g0 == 0.0) {
                out.push_back({t_grid_[i], h0});
                continue;
            }
            if (i + 1 >= col.size()) continue;
            const double g1 = col[i + 1].P.dot(x - col[i + 1].X);
            if (g1 == 0.0 || (g0 < 0) == (g1 < 0)) continue;
            const double h1 = col[i + 1].Ppsi.dot(x - col[i + 1].X);
            const double s = g0 / (g0 - g1);
            out.push_back({t_grid_[i] + s * dt, (1 - s) * h0 + s * h1});
        }
    }

    struct Seed {
        double t, psi;
    };
    std::vector<Seed> seeds;
    const double link = std::max(10.0 * dt, 0.5);
    for (int j = 0; j < n; ++j) {
        const int jn = (j + 1) % n;
        const auto& a = roots[static_cast<size_t>(j)];
        const auto& b = roots[static_cast<size_t>(jn)];
        const double psi_j = front_.psi_grid()[static_cast<size_t>(j)];
        for (const Root& r : a) {
            const Root* best = nullptr;
            double bd = link;
            for (const Root& q : b) {
                const double dist = std::fabs(q.t - r.t);
                if (dist < bd) {
                    bd = dist;
                    best = &q;
                }
            }
            if (!best) continue;
            if (r.h == 0.0) {
                seeds.push_back({r.t, psi_j});
                continue;
            }
            if ((r.h < 0) == (best->h < 0) && best->h != 0.0) continue;
            const double s = r.h / (r.h - best->h);
            seeds.push_back({r.t + s * (best->t - r.t), psi_j + s * dpsi});
        }
    }

    std::vector<CriticalBranch> out;
    for (const Seed& sd : seeds) {
        auto b = polish(x, sd.t, sd.psi);
        if (!b) continue;
        bool dup = false;
        for (const auto& o : out) {
            double dp = std::fabs(o.psi_star - b->psi_star);
            dp = std::min(dp, two_pi - dp);
            if (std::fabs(o.t_star - b->t_star) < 1e-7 && dp < 1e-7) dup = true;
        }
        if (!dup) out.push_back(*b);
    }
    std::sort(out.begin(), out.end(), [](const auto& p, const auto& q) { return p.t_star < q.t_star; });
    return out;
}

std::vector<CriticalBranch> solve_branches(const Front& front, const Vec2& x, const BranchOptions& opts)
{
    return BranchSolver(front, opts).solve(x);
}

double eikonal_values(EikonalKind kind, double t, double phi, double m, double E, double tau)
{
    const double s = m * (E - tau) * t;
    return kind == EikonalKind::plane ? s : phi + s;
}

double flat_twist_action(double m, const Vec2& x, const Vec2& X)
{
    if (!(m > 1.0)) throw DomainError("flat_twist_action: requires m > 1");
    const double k = m / (m - 1.0);
    return (m - 1.0) * std::pow((x - X).norm() / m, k);
}

std::pair<Vec2, Vec2> flat_twist_gradients(double m, const Vec2& x, const Vec2& X)
{
    if (!(m > 1.0)) throw DomainError("flat_twist_gradients: requires m > 1");
    const Vec2 D = X - x;
    const double r = D.norm();
    if (r == 0.0) return {Vec2::Zero(), Vec2::Zero()};
    const double k = m / (m - 1.0);
    const Vec2 gX = (m - 1.0) * k * std::pow(r / m, k - 1.0) / m * D / r;
    return {-gX, gX};
}

double hj_residual(const Front& front, const Vec2& x, double t, double psi, double lambda)
{
    const GeneratingFamilyEval e = eval_family_plane(front, x, t, psi, lambda, {false, 1e-4});
    return e.grad(0) + front.hamiltonian().derivs(x, e.grad_x).h - front.energy();
}

namespace {

template <int N, class F>
Eigen::Matrix<double, 3, N> central_jacobian(const F& f, const Eigen::Matrix<double, N, 1>& v0, double step)
{
    Eigen::Matrix<double, 3, N> J;
    for (int k = 0; k < N; ++k) {
        Eigen::Matrix<double, N, 1> vp = v0, vm = v0;
        vp(k) += step;
        vm(k) -= step;
        J.col(k) = (f(vp) - f(vm)) / (2 * step);
    }
    return J;
}

}  // namespace

Eigen::Matrix<double, 5, 5> density_jacobian_plane(const Front& front, double t, double psi, double step)
{
    const FrontSample s0 = front.sample(t, psi);
    using V5 = Eigen::Matrix<double, 5, 1>;
    auto grad = [&](const V5& v) -> Vec3 {
        const GeneratingFamilyEval e =
            eval_family_plane(front, Vec2(v(0), v(1)), std::max(0.0, v(2)), v(3), v(4), {false, step});
        return Vec3(e.grad(0), e.grad(2), e.grad(1));  // (d_t, d_lambda, d_psi)
    };
    V5 v0;
    v0 << s0.X.x(), s0.X.y(), t, psi, 1.0;
    const double tstep = t < step ? 0.0 : step;
    Eigen::Matrix<double, 3, 5> J = central_jacobian<5>(grad, v0, step);
    if (tstep == 0.0) {
        V5 vp = v0;
        vp(2) += step;
        J.col(2) = (grad(vp) - grad(v0)) / step;
    }
    Eigen::Matrix<double, 5, 5> M = Eigen::Matrix<double, 5, 5>::Zero();
    M(0, 2) = 1.0;
    M(1, 3) = 1.0;
    M.bottomRows<3>() = J;
    return M;
}

double density_quotient_plane(const Front& front, double t, double psi, double step)
{
    return density_jacobian_plane(front, t, psi, step).determinant();
}

Eigen::Matrix<double, 6, 6> density_jacobian_cylinder(const Front& front, double t, double psi, double step)
{
    const double phi0 = front.boundary().phi;
    const FrontSample s0 = cylinder_sample(front, t, phi0, psi);
    using V6 = Eigen::Matrix<double, 6, 1>;
    auto grad = [&](const V6& v) -> Vec3 {
        const GeneratingFamilyEval e = eval_family_cylinder_extended(front, Vec2(v(0), v(1)), std::max(0.0, v(2)),
                                                                     v(4), v(3), v(5), {false, step});
        return Vec3(e.grad(1), e.grad(0), e.grad(2));  // (d_phi, d_lambda, d_psi)
    };
    V6 v0;
    v0 << s0.X.x(), s0.X.y(), t, psi, phi0, 1.0;
    Eigen::Matrix<double, 3, 6> J = central_jacobian<6>(grad, v0, step);
    if (t < step) {
        V6 vp = v0;
        vp(2) += step;
        J.col(2) = (grad(vp) - grad(v0)) / step;
    }
    Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
    M(0, 2) = 1.0;
    M(1, 3) = 1.0;
    M(2, 4) = 1.0;
    M.bottomRows<3>() = J;
    return M;
}

double density_quotient_cylinder(const Front& front, double t, double psi, double step)
{
    return density_jacobian_cylinder(front, t, psi, step).determinant();
}

double nondegeneracy_margin(const Front& front, double t, double psi)
{
    const FrontSample s = front.sample(t, psi);
    const GeneratingFamilyEval e =
        family_from_sample(front.hamiltonian(), s, Vec2::Zero(), s.X, 1.0, mE_of(front));
    Eigen::MatrixXd A(3, 5);
    A << e.mixed, e.hess;
    return Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(2);
}

}  // namespace sgf

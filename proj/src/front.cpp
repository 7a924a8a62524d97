#include "sgf/front.hpp"

#include <algorithm>
#include <cmath>

namespace sgf {

std::string to_string(PointClass c)
{
    switch (c) {
        case PointClass::ordinary: return "ordinary";
        case PointClass::special: return "special";
        case PointClass::residual: return "residual";
    }
    return "unknown";
}

FrontDiagnostics diagnostics(const FrontSample& s, double m, double E, const DiagnosticTolerances& tol)
{
    FrontDiagnostics g;
    g.a = s.Pdot.dot(s.Xpsi);
    g.c = s.Ppsi.dot(s.Xpsi);
    g.d = s.Pdot.dot(s.Xdot);
    g.alpha = det2(s.P, s.Ppsi);
    g.beta = det2(s.P, s.Pdot);
    g.gamma = det2(s.Pdot, s.Ppsi);
    g.density = m * E * g.alpha;

    const double pd = s.Pdot.norm();
    if (pd <= tol.classify)
        g.cls = PointClass::residual;
    else if (std::fabs(s.Pdot.dot(s.P)) <= tol.classify * pd * s.P.norm())
        g.cls = PointClass::special;

    g.focal_det = det2(s.Xdot, s.Xpsi);
    g.focal = std::fabs(g.focal_det) <= tol.focal * std::max(1.0, s.Xdot.norm() * s.Xpsi.norm());

    Mat2 C;
    C.col(0) = s.Xdot;
    C.col(1) = s.Xpsi;
    const Vec2 sv = Eigen::JacobiSVD<Mat2>(C).singularValues();
    const double floor = tol.rank * std::max(1.0, sv(0));
    g.rank_dpix = (sv(0) > floor ? 1 : 0) + (sv(1) > floor ? 1 : 0);
    return g;
}

HessianTPL hessian_tpl(const FrontSample& s, double, double, double lambda)
{
    const double a = s.Pdot.dot(s.Xpsi);
    const double c = s.Ppsi.dot(s.Xpsi);
    const double d = s.Pdot.dot(s.Xdot);
    const double me = s.P.dot(s.Xdot);
    HessianTPL r;
    r.matrix << lambda * d, lambda * a, me, lambda * a, lambda * c, 0.0, me, 0.0, 0.0;
    r.matrix = -r.matrix;
    r.det = r.matrix.determinant();
    return r;
}

namespace {

int split_index(MixedSplit split) { return split == MixedSplit::x1_xi2 ? 1 : 0; }

}  // namespace

Mat4 mixed_hessian_matrix(const FrontSample& s, double m, double E, MixedSplit split, double lambda)
{
    const int k = split_index(split);
    const double a = s.Pdot.dot(s.Xpsi);
    const double c = s.Ppsi.dot(s.Xpsi);
    const double d = s.Pdot.dot(s.Xdot);
    const double M = m * E;
    const double pk = s.P(k), pdk = s.Pdot(k), ppk = s.Ppsi(k);
    Mat4 H;
    H << 0, lambda * pdk, lambda * ppk, pk,
         lambda * pdk, -lambda * d, -lambda * a, -M,
         lambda * ppk, -lambda * a, -lambda * c, 0,
         pk, -M, 0, 0;
    return H;
}

double mixed_hessian_det(const FrontSample& s, double m, double E, MixedSplit split, double lambda)
{
    const int k = split_index(split);
    const double a = s.Pdot.dot(s.Xpsi);
    const double c = s.Ppsi.dot(s.Xpsi);
    const double d = s.Pdot.dot(s.Xdot);
    const double M = m * E;
    const double pk = s.P(k), pdk = s.Pdot(k), ppk = s.Ppsi(k);
    const double reduced = M * M * ppk * ppk + 2 * M * c * pk * pdk - 2 * M * a * pk * ppk + pk * pk * (a * a - c * d);
    return lambda * lambda * reduced;
}

Mat5 fourier_hessian_matrix(const FrontSample& s, double m, double E, double lambda)
{
    const double a = s.Pdot.dot(s.Xpsi);
    const double c = s.Ppsi.dot(s.Xpsi);
    const double d = s.Pdot.dot(s.Xdot);
    const double M = m * E;
    const Vec2& P = s.P;
    const Vec2& Pd = s.Pdot;
    const Vec2& Pp = s.Ppsi;
    Mat5 H;
    H << 0, 0, lambda * Pd(0), lambda * Pp(0), P(0),
         0, 0, lambda * Pd(1), lambda * Pp(1), P(1),
         lambda * Pd(0), lambda * Pd(1), -lambda * d, -lambda * a, -M,
         lambda * Pp(0), lambda * Pp(1), -lambda * a, -lambda * c, 0,
         P(0), P(1), -M, 0, 0;
    return H;
}

double fourier_hessian_reduced(const FrontSample& s, double m, double E)
{
    const FrontDiagnostics g = diagnostics(s, m, E);
    return g.beta * g.beta * g.c + g.alpha * g.alpha * g.d - 2 * g.alpha * g.beta * g.a -
           2 * m * E * g.alpha * g.gamma;
}

PropA1Report propA1_check(const FrontSample& s, double tol, double sym_tol)
{
    PropA1Report r;
    Mat2 B, C;
    B.col(0) = s.Pdot;
    B.col(1) = s.Ppsi;
    C.col(0) = s.Xdot;
    C.col(1) = s.Xpsi;

    Eigen::Matrix<double, 2, 4> BC;
    BC << B, C;
    const Eigen::Vector2d sv = Eigen::JacobiSVD<Eigen::Matrix<double, 2, 4>>(BC).singularValues();
    r.min_singular = sv(1);
    r.rank_ok = sv(1) > tol * std::max(1.0, sv(0));

    const Mat2 CtB = C.transpose() * B;
    r.symmetry_defect = std::fabs(CtB(0, 1) - CtB(1, 0));
    r.symmetric_ok = r.symmetry_defect <= sym_tol * std::max(1.0, CtB.norm());

    const Eigen::Matrix2cd Cc = C.cast<Complex>();
    const Eigen::Matrix2cd Bc = B.cast<Complex>();
    const Complex I(0.0, 1.0);
    r.det_plus = std::abs((Cc + I * Bc).determinant());
    r.det_minus = std::abs((Cc - I * Bc).determinant());
    const double scale = std::max(1.0, (C.norm() + B.norm()) * (C.norm() + B.norm()));
    r.nondegenerate_ok = r.det_plus > tol * scale && r.det_minus > tol * scale;
    return r;
}

namespace {

double focal_value(const FrontSample& s) { return det2(s.Xdot, s.Xpsi); }

bool lemma_consistent(const HomHamiltonian& H, const FrontSample& s, double tol)
{
    if (!H.conformal()) return true;
    const Vec2 g = H.profile().grad(s.X);
    if (g.norm() <= tol) return true;
    const double pp = s.Ppsi.norm();
    if (pp <= tol) return false;
    const double alpha = det2(s.P, s.Ppsi);
    if (std::fabs(alpha) <= tol * s.P.norm() * pp) return std::fabs(s.P.norm() - 1.0) <= 1e-6;
    return true;
}

CausticPoint make_point(const Front& front, const FrontSample& s, const DiagnosticTolerances& tol)
{
    const FrontDiagnostics g = diagnostics(s, front.m(), front.energy(), tol);
    CausticPoint p;
    p.t = s.t;
    p.psi = s.psi;
    p.x = s.X;
    p.cls = g.cls;
    p.c = g.c;
    p.alpha = g.alpha;
    p.density = g.density;
    p.rank = std::fabs(g.c) <= tol.focal * std::max(1.0, s.Ppsi.norm() * s.Xpsi.norm()) ? 1 : 2;
    p.rank = std::min(p.rank, g.rank_dpix);
    p.lemma_ok = lemma_consistent(front.hamiltonian(), s, 1e-7);
    return p;
}

std::vector<CausticPoint> scan_column(const Front& front, int j, const std::vector<double>& t_grid,
                                      const CausticOptions& opts)
{
    std::vector<CausticPoint> out;
    if (!front.column_ok(j)) return out;
    const Trajectory& traj = front.column(j);
    const double psi = front.psi_grid()[static_cast<size_t>(j)];

    std::vector<FrontSample> ss;
    for (double t : t_grid) {
        if (t > traj.t_end()) break;
        ss.push_back(dense_sample(traj, t));
    }
    auto is_focal = [&](const FrontSample& s) {
        return std::fabs(focal_value(s)) <= opts.tol.focal * std::max(1.0, s.Xdot.norm() * s.Xpsi.norm());
    };
    for (size_t i = 0; i < ss.size(); ++i) {
        const bool fi = is_focal(ss[i]);
        if (fi) {
            // one point per run of consecutive focal nodes
            if (i == 0 || !is_focal(ss[i - 1])) {
                FrontSample s = ss[i];
                s.psi = psi;
                out.push_back(make_point(front, s, opts.tol));
            }
            continue;
        }
        if (i + 1 >= ss.size() || is_focal(ss[i + 1])) continue;
        const double v0 = focal_value(ss[i]);
        const double v1 = focal_value(ss[i + 1]);
        if ((v0 < 0) == (v1 < 0)) continue;
        double lo = ss[i].t, hi = ss[i + 1].t;
        double vlo = v0;
        while (hi - lo > opts.t_tol) {
            const double mid = 0.5 * (lo + hi);
            const double vm = focal_value(dense_sample(traj, mid));
            if (vm == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((vm < 0) == (vlo < 0)) {
                lo = mid;
                vlo = vm;
            } else {
                hi = mid;
            }
        }
        FrontSample s = dense_sample(traj, 0.5 * (lo + hi));
        s.psi = psi;
        out.push_back(make_point(front, s, opts.tol));
    }
    return out;
}

}  // namespace

std::vector<CausticCurve> caustic_scan(const Front& front, const std::vector<double>& t_grid,
                                       const CausticOptions& opts)
{
    const int n = front.n_psi();
    std::vector<std::vector<CausticPoint>> per_column(static_cast<size_t>(n));
    parallel_for(n, resolve_threads(opts.threads),
                 [&](int j) { per_column[static_cast<size_t>(j)] = scan_column(front, j, t_grid, opts); });

    double dt = 0;
    for (size_t i = 1; i < t_grid.size(); ++i) dt = std::max(dt, t_grid[i] - t_grid[i - 1]);
    const double link = 8.0 * std::max(dt, 1e-6);

    // greedy linking of neighbouring columns by nearest time
    std::vector<CausticCurve> curves;
    std::vector<int> open;  // curve index per point of the previous column
    for (int j = 0; j < n; ++j) {
        const auto& pts = per_column[static_cast<size_t>(j)];
        std::vector<int> now(pts.size(), -1);
        std::vector<bool> taken(open.size(), false);
        const auto& prev = j > 0 ? per_column[static_cast<size_t>(j - 1)] : std::vector<CausticPoint>{};
        for (size_t k = 0; k < pts.size(); ++k) {
            int best = -1;
            double bd = link;
            for (size_t q = 0; q < prev.size(); ++q) {
                const double dist = std::fabs(prev[q].t - pts[k].t);
                if (!taken[q] && dist < bd) {
                    bd = dist;
                    best = static_cast<int>(q);
                }
            }
            if (best >= 0) {
                taken[static_cast<size_t>(best)] = true;
                now[k] = open[static_cast<size_t>(best)];
            } else {
                now[k] = static_cast<int>(curves.size());
                curves.emplace_back();
            }
            curves[static_cast<size_t>(now[k])].points.push_back(pts[k]);
        }
        open = std::move(now);
    }
    return curves;
}

double special_function(const HomHamiltonian& H, const FrontSample& s)
{
    return H.profile().grad(s.X).dot(s.P);
}

double special_function_rate(const HomHamiltonian& H, const FrontSample& s)
{
    const DensityProfile& prof = H.profile();
    double rho;
    Vec2 g;
    Mat2 hs;
    prof.eval(s.X, rho, g, hs);
    const double m = H.degree();
    const double r = s.P.norm();
    return m * std::pow(r, m - 2) / rho * (s.P.dot(hs * s.P) + g.squaredNorm() * r * r / (m * rho));
}

int special_sign_changes(const HomHamiltonian& H, const std::vector<FrontSample>& column)
{
    int changes = 0;
    double last = 0;
    bool have = false;
    for (const auto& s : column) {
        const double f = special_function(H, s);
        if (f == 0.0) continue;
        if (have && (f < 0) != (last < 0)) ++changes;
        last = f;
        have = true;
    }
    return changes;
}

}  // namespace sgf

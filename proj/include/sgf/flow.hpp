#pragma once

#include "sgf/hamiltonian.hpp"
#include "sgf/manifolds.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace sgf {

/// (x, p) followed by up to two tangent vectors (dx, dp).
using RayState = std::array<double, 12>;

struct FrontSample {
    double t = 0;
    double psi = 0;
    Vec2 X = Vec2::Zero();
    Vec2 P = Vec2::Zero();
    Vec2 Xpsi = Vec2::Zero();
    Vec2 Ppsi = Vec2::Zero();
    Vec2 Xdot = Vec2::Zero();
    Vec2 Pdot = Vec2::Zero();
    double energy = 0;
    // second tangent (cylinder phi direction), zero when absent
    Vec2 Xphi = Vec2::Zero();
    Vec2 Pphi = Vec2::Zero();
    bool has_phi = false;
};

struct SampleResiduals {
    double energy = 0;   // |H(X,P) - energy|
    double huygens = 0;  // |<P,Xdot> - m energy|
    double orth = 0;     // |<P,Xpsi>|
    double gram = 0;     // |<Xdot,Ppsi> - <Pdot,Xpsi>|
};

SampleResiduals sample_residuals(const HomHamiltonian& H, const FrontSample& s);

struct RayOptions {
    double atol = 1e-10;
    double rtol = 1e-10;
    double energy_tol = 1e-8;
    double initial_step = 0.0;  // 0 selects automatically
    double max_step = 0.1;
    long max_steps = 1000000;
    bool check_invariants = false;
    /// integrate the time-reversed field (xdot = -H_p, pdot = H_x)
    bool reverse = false;
};

struct Tangent {
    Vec2 dx = Vec2::Zero();
    Vec2 dp = Vec2::Zero();
};

class Trajectory {
public:
    double t_end() const { return t.back(); }
    RayState state_at(double time) const;
    const HomHamiltonian& hamiltonian() const { return *H; }

    std::shared_ptr<const HomHamiltonian> H;
    double energy = 0;
    double psi = 0;
    int tangents = 0;
    bool reverse = false;
    std::vector<double> t;
    std::vector<RayState> y;
    std::vector<std::array<RayState, 5>> cont;  // dense output per step
};

Trajectory integrate_ray(const HomHamiltonian& H, const PhasePoint& z0, double t_end, const RayOptions& opts = {},
                         const std::vector<Tangent>& tangents = {}, double psi = 0.0);

FrontSample make_sample(const HomHamiltonian& H, double t, double psi, const RayState& y, int tangents,
                        double energy);

/// Interpolated sample; exact node values at stored times.
FrontSample dense_sample(const Trajectory& traj, double t);

/// Nodal samples of a trajectory, in order.
std::vector<FrontSample> trajectory_samples(const Trajectory& traj);

struct FrontGrid {
    std::vector<double> t_grid;
    std::vector<double> psi_grid;
    /// samples[j][i] at (t_grid[i], psi_grid[j]); a failed column is truncated
    std::vector<std::vector<FrontSample>> samples;
    /// per column: empty when fine, otherwise the failure message
    std::vector<std::string> failures;
};

std::vector<double> uniform_psi_grid(int n);
std::vector<double> uniform_t_grid(double t_max, int n);

/// Number of worker threads: explicit value if > 0, else SGF_THREADS, else hardware.
int resolve_threads(int requested);

/// Run f(i) for i in [0, n) on a worker pool. Exceptions from f propagate.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

/// Initial tangents (d/dpsi and, for the cylinder, d/dphi) of a boundary.
std::vector<Tangent> boundary_tangents(const BoundaryParam& b, double psi);

/// Rays launched from a boundary, integrated to t_max. Grid columns are
/// integrated once; other angles are integrated on demand.
class Front {
public:
    Front(const HomHamiltonian& H, const BoundaryParam& boundary, double t_max, int n_psi = 512,
          const RayOptions& opts = {}, int threads = 0);

    const HomHamiltonian& hamiltonian() const { return *H_; }
    const BoundaryParam& boundary() const { return boundary_; }
    double t_max() const { return t_max_; }
    const RayOptions& options() const { return opts_; }
    double energy() const { return boundary_.E - boundary_.tau; }
    double m() const { return H_->degree(); }
    int n_psi() const { return static_cast<int>(psi_grid_.size()); }
    const std::vector<double>& psi_grid() const { return psi_grid_; }

    /// grid column j; throws if that column failed to integrate
    const Trajectory& column(int j) const;
    bool column_ok(int j) const { return columns_[j].has_value(); }
    /// ray at any angle, integrated to t_end (t_max when negative)
    Trajectory ray(double psi, double t_end = -1.0) const;
    FrontSample sample(double t, double psi) const;
    /// dP_psi/dpsi by central differences of neighbouring rays
    Vec2 ppsi_psi(double t, double psi, double delta = 1e-4) const;

    FrontGrid grid(const std::vector<double>& t_grid) const;

private:
    std::shared_ptr<const HomHamiltonian> H_;
    BoundaryParam boundary_;
    double t_max_;
    RayOptions opts_;
    std::vector<double> psi_grid_;
    std::vector<std::optional<Trajectory>> columns_;
    std::vector<std::string> failures_;
};

FrontGrid integrate_front(const HomHamiltonian& H, const BoundaryParam& boundary, const std::vector<double>& t_grid,
                          int n_psi = 512, const RayOptions& opts = {}, int threads = 0);

}  // namespace sgf

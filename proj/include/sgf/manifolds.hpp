#pragma once

#include "sgf/hamiltonian.hpp"

#include <memory>
#include <vector>

namespace sgf {

struct VerticalPlane {
    Vec2 x0 = Vec2::Zero();
};

/// The manifold (phi, psi) -> (phi omega(psi), omega(psi)).
struct BesselCylinder {
    PhasePoint point(double phi, double psi) const { return {phi * omega(psi), omega(psi)}; }
};

/// Boundary of the outgoing manifold on the shell H = E - tau.
struct BoundaryParam {
    enum class Kind { plane, cylinder };

    Kind kind = Kind::plane;
    double E = 1.0;
    double tau = 0.0;
    double m = 1.0;
    // plane
    Vec2 x0 = Vec2::Zero();
    double radius = 1.0;
    // cylinder
    double phi = 0.0;
    double dphi_dtau = 0.0;
    // generic plane kind: radius depends on psi
    std::shared_ptr<const HomHamiltonian> generic;

    PhasePoint point(double psi) const;
    /// (dX/dpsi, dP/dpsi)
    PhasePoint d_psi(double psi) const;
    /// (dX/dphi, dP/dphi), cylinder only
    PhasePoint d_phi(double psi) const;
    int tangent_count() const { return kind == Kind::plane ? 1 : 2; }
};

BoundaryParam plane_boundary(const HomHamiltonian& H, const Vec2& x0, double E, double tau);

double lambda_tau_map(double E, double m, double tau);
double tau_lambda_map(double E, double m, double lambda);

struct RestrictedH {
    double value;
    Vec2 grad;  // (d/dphi, d/dpsi)
};

RestrictedH cylinder_restricted_h(const HomHamiltonian& H, double phi, double psi);

struct GlancingPoint {
    double phi;
    double psi;
    double grad_norm;
    bool glancing;
    bool special;
    double residual;  // restricted H minus E
};

struct GlancingReport {
    std::vector<GlancingPoint> points;
    size_t glancing_count = 0;
    /// conformal kind: disagreements with the density-based split criterion
    size_t split_mismatches = 0;
};

GlancingReport detect_glancing(const HomHamiltonian& H, double E, const std::vector<double>& phi_grid,
                               const std::vector<double>& psi_grid, double tol = 1e-9);

/// Radial coordinate of the cylinder boundary on the shell H = E - tau.
/// Requires a conformal density that is radially symmetric about the origin.
BoundaryParam cylinder_boundary(const HomHamiltonian& H, double E, double tau, double psi,
                                double phi_lo, double phi_hi);

}  // namespace sgf

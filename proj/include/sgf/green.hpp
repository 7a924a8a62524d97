#pragma once

#include "sgf/oscint.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sgf {

using PlaneAmplitude = std::function<Complex(double psi, double lambda)>;
using CylinderAmplitude = std::function<Complex(double s, double psi)>;

struct SourceSpec {
    enum class Kind { plane, cylinder };
    Kind kind = Kind::plane;
    Vec2 x0 = Vec2::Zero();
    /// plane: a(psi, lambda), multiplied by the lambda window
    PlaneAmplitude plane_amp;
    /// cylinder: a(<omega(psi), x>, psi)
    CylinderAmplitude cylinder_amp;
    double h = 0.1;
    double E = 1.0;
    LambdaWindow window;

    /// Throws DomainError when h, E or the amplitude are invalid.
    void validate() const;
};

SourceSpec plane_source(const Vec2& x0, double h, double E, PlaneAmplitude a = {});
SourceSpec cylinder_source(double h, double E, CylinderAmplitude a = {});

/// Plane: (2 pi h)^{-1} int dpsi int dlambda e^{i lambda <P0(psi), x - x0>/h} |P0|^2 lambda a chi.
/// Cylinder: (2 pi h)^{-1/2} int e^{i <omega(psi), x>/h} a(<omega, x>, psi) dpsi.
Complex synthesize_source(const HomHamiltonian& H, const SourceSpec& spec, const Vec2& x);

/// (mE det(P, Ppsi))^{-1/2} a, principal root. Throws DomainError on vanishing density.
Complex transport_amplitude(const FrontSample& s, Complex a, double m, double E);

enum class Strategy { direct, stationary, automatic };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct FieldSample {
    Vec2 x = Vec2::Zero();
    Complex u{};
    Complex f{};
    OscMethod method = OscMethod::direct;
    std::optional<double> residual;
    double est_error = 0;
    int n_branches = 0;
    bool caustic_adjacent = false;
    bool unreachable = false;
};

struct FieldOptions {
    Strategy strategy = Strategy::automatic;
    double T = 0;              // time cutoff; 0 picks t_factor * latest branch time
    double t_factor = 3.0;
    double t_probe = 0;        // length of the branch-search front; 0 picks from the targets
    int n_psi_branch = 256;
    BranchOptions branch;
    DirectGrid grid;           // starting grid for direct evaluation
    int max_refinements = 6;
    double eps0_factor = 3.0;  // targets must stay eps0_factor * h away from the source point
    double xpsi_switch = 2.0 / 3.0;
    /// a target without branches is unreachable when its direct value is below the quadrature
    /// estimate plus this fraction of the largest |u| among targets with branches
    double unreachable_rel = 1e-2;
    bool compute_source = true;
    int threads = 0;
    RayOptions rays;
};

/// Field of the outgoing parametrix at the targets. Throws DomainError for targets within
/// eps0 of a plane source.
std::vector<FieldSample> evaluate_field(const HomHamiltonian& H, const SourceSpec& spec,
                                        const std::vector<Vec2>& targets, const FieldOptions& opts = {});

/// Regular grid, x index fastest.
struct GridSpec {
    Vec2 origin = Vec2::Zero();
    double step = 0.01;
    int nx = 1;
    int ny = 1;
    std::vector<Vec2> points() const;
};

struct PdeReport {
    std::vector<double> residual;  // NaN on the border
    double max_residual = 0;
    double max_f = 0;
    double max_u = 0;
    double relative_to_f = 0;
    double relative_to_u = 0;
    /// max residual over max(max |f|, |E| max |u|)
    double relative = 0;
    int interior = 0;
};

/// |(-h^2 Delta / rho0 - E) u - f| with the 5-point stencil; m = 2 and constant rho only.
/// Fills the residual of interior samples.
PdeReport verify_pde(const GridSpec& grid, std::vector<FieldSample>& field, const HomHamiltonian& H, double E,
                     double h);

/// -(r / 2h) J1(r/h)
double bessel_pair_u(double r, double h);

/// (-h^2 (d_rr + d_r / r) - E) u at r, fourth-order 5-point differences of step d.
double radial_stencil(const std::function<double(double)>& u, double r, double d, double h, double E);

struct BesselPairReport {
    double max_abs_error = 0;
    double max_j0 = 0;
    double relative = 0;
    int n_points = 0;
};

BesselPairReport bessel_pair_check(double h, double r_lo, double r_hi, int n_r, double step);

/// Same check with the 2-D 5-point cross at (r, 0).
BesselPairReport bessel_pair_check_cross(double h, double r_lo, double r_hi, int n_r, double step);

/// Exact outgoing field for |p|^m / rho0 and a plane source with amplitude a(lambda):
/// (2 pi h)^{-2} 2 pi int r g(r) J0(|x - x0| r / h) / (r^m / rho0 - E - i0) dr,
/// g(r) = 2 pi h a chi at lambda = r / |P0|.
Complex free_field_exact(double m, double rho0, double E, const Vec2& x0, double h,
                         const std::function<Complex(double)>& a, const Vec2& x, const LambdaWindow& w = {});

struct CoeffPair {
    Complex u0{};
    Complex u1{};
};

/// Constant-coefficient m = 2, rho = 1 decomposition for a radial spectral amplitude g, E = k^2 > 0:
/// u0 = i pi g(k) / (2 pi h)^2 int_{-pi/2}^{pi/2} e^{i |x| k cos theta / h} dtheta,
/// u1 = (2 pi h)^{-2} 2 pi int_0^inf J0(|x| r / h) g(r) / (r + k) dr.
CoeffPair constant_coeff_reference(const Vec2& x, double h, double E, const std::function<double(double)>& g,
                                   double r_max = 0);

using CylinderFieldAmp = std::function<Complex(const Vec2& x, double psi)>;

struct CylinderRefOptions {
    std::vector<double> eps{1e-4, 1e-5, 1e-6};
    double tol = 1e-11;
    int max_depth = 15;
};

/// h^{1/2} int_{-pi}^{pi} e^{i |x| sin psi / h} A(x, psi) / (sin^2 psi - E - i0) dpsi.
/// Poles on the real line (0 <= E <= 1) are regularized by eps and extrapolated to eps = 0.
Complex cylinder_field_reference(const Vec2& x, double h, double E, const CylinderFieldAmp& A,
                                 const CylinderRefOptions& opts = {});

}  // namespace sgf

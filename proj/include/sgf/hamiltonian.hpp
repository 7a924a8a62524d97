#pragma once

#include "sgf/core.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sgf {

/// Cubic spline of a radial table, clamped with zero slope at both ends.
/// Constant beyond the last node.
class RadialSpline {
public:
    RadialSpline() = default;
    RadialSpline(std::vector<double> r, std::vector<double> values);

    /// value, first and second derivative at radius r >= 0
    void eval(double r, double& f, double& df, double& d2f) const;
    const std::vector<double>& r() const { return r_; }
    const std::vector<double>& values() const { return f_; }

private:
    std::vector<double> r_, f_, m_;
};

struct DensityProfile {
    enum class Kind { constant, quadratic_well, gaussian_bump, radial_table, linear };

    Kind kind = Kind::constant;
    double rho0 = 1.0;
    double amplitude = 0.0;
    Vec2 center = Vec2::Zero();
    double width = 1.0;
    Vec2 slope = Vec2::Zero();
    RadialSpline table;

    static DensityProfile constant(double rho0);
    /// rho0 + |x - c|^2
    static DensityProfile quadratic_well(double rho0, Vec2 c = Vec2::Zero());
    /// rho0 + A exp(-|x - c|^2 / w^2)
    static DensityProfile gaussian_bump(double rho0, double A, double w, Vec2 c = Vec2::Zero());
    /// rho(|x - c|) from a cubic spline through (r_i, rho_i), r_0 = 0
    static DensityProfile radial_table(std::vector<double> r, std::vector<double> rho,
                                       Vec2 c = Vec2::Zero());
    /// rho0 + <g, x - c>
    static DensityProfile linear(double rho0, Vec2 g, Vec2 c = Vec2::Zero());

    double rho(const Vec2& x) const;
    Vec2 grad(const Vec2& x) const;
    Mat2 hess(const Vec2& x) const;
    void eval(const Vec2& x, double& r, Vec2& g, Mat2& H) const;

    /// true when rho depends on |x| only (about the origin)
    bool radial_about_origin() const;
    std::string kind_name() const;
};

struct PhasePoint {
    Vec2 x = Vec2::Zero();
    Vec2 p = Vec2::Zero();
};

/// Value and derivatives of H at one phase point. Mixed block hxp(i,j) is
/// the derivative in x_i of the p_j-derivative.
struct HamDerivs {
    double h = 0;
    Vec2 hx = Vec2::Zero();
    Vec2 hp = Vec2::Zero();
    Mat2 hxx = Mat2::Zero();
    Mat2 hxp = Mat2::Zero();
    Mat2 hpp = Mat2::Zero();
};

/// User evaluators for a homogeneous Hamiltonian that is not of conformal form.
using GenericEvaluator = std::function<HamDerivs(const Vec2& x, const Vec2& p)>;

class HomHamiltonian {
public:
    /// |p|^m / rho(x)
    HomHamiltonian(double m, DensityProfile profile);
    /// generic homogeneous Hamiltonian of degree m
    HomHamiltonian(double m, GenericEvaluator eval);

    double degree() const { return m_; }
    bool conformal() const { return profile_.has_value(); }
    const DensityProfile& profile() const;

    HamDerivs derivs(const Vec2& x, const Vec2& p) const;

private:
    double m_;
    std::optional<DensityProfile> profile_;
    GenericEvaluator generic_;
};

struct HamiltonField {
    Vec2 xdot;
    Vec2 pdot;
};

double eval_h(const HomHamiltonian& H, const PhasePoint& z);
HamiltonField hamilton_field(const HomHamiltonian& H, const PhasePoint& z);
double euler_residual(const HomHamiltonian& H, const PhasePoint& z);
/// <Hess rho p, p> + |grad rho|^2 |p|^2 / (m rho)
double defocussing_value(const HomHamiltonian& H, const PhasePoint& z);
/// |p| solving H(x0, |p| omega(psi)) = E - tau
double shell_radius(const HomHamiltonian& H, const Vec2& x0, double E, double tau,
                    double psi = 0.0);

}  // namespace sgf

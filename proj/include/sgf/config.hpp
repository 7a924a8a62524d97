#pragma once

#include "sgf/green.hpp"
#include "sgf/modelpair.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sgf {

struct TargetConfig {
    enum class Kind { grid, list, random };
    Kind kind = Kind::grid;
    GridSpec grid;
    std::vector<Vec2> points;
    // random: n points uniform in [lo, hi]^2, seeded by RunConfig::seed
    int n = 0;
    Vec2 lo = Vec2(-1, -1);
    Vec2 hi = Vec2(1, 1);
};

struct ModelConfig {
    double T = 2.0;
    double sigma = 1.0;
    Vec2 center = Vec2::Zero();
    ModelGrid grid;
};

struct Tolerances {
    double invariant = 1e-7;      // trace: every residual column
    double pde_relative = 5e-2;   // green --strict: verify_pde relative residual
    double model_residual = 5e-3; // model --strict
};

struct RunConfig {
    double m = 1.0;
    DensityProfile profile = DensityProfile::constant(1.0);

    SourceSpec::Kind source_kind = SourceSpec::Kind::plane;
    Vec2 x0 = Vec2::Zero();
    std::string amplitude = "unit";  // unit | angular
    double h = 0.1;
    double E = 1.0;

    double t_max = 3.0;
    int n_t = 61;
    int n_psi = 512;
    // cylinder classification grid
    double phi_lo = -1.5, phi_hi = 1.5;
    int n_phi = 11;

    TargetConfig targets;
    Strategy strategy = Strategy::automatic;
    Tolerances tol;
    ModelConfig model;

    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int threads = 0;

    HomHamiltonian hamiltonian() const { return HomHamiltonian(m, profile); }
    SourceSpec source() const;
    std::vector<Vec2> target_points() const;
};

/// Parses and range-checks a JSON document. Unknown keys are rejected. Throws ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// 17 significant digits
std::string format_double(double v);

/// Comma-separated line of formatted values followed by a newline.
void write_csv_row(std::ostream& os, const std::vector<double>& values);

}  // namespace sgf

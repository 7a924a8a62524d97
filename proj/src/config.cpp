#include "sgf/config.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace sgf {

namespace {

using nlohmann::json;

class Reader {
public:
    Reader(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) fail("expected an object");
        for (const auto& [k, v] : j_.items())
            if (!allowed.count(k)) throw ConfigError(path_ + ": unknown key '" + k + "'");
    }

    bool has(const std::string& k) const { return j_.contains(k); }
    const json& at(const std::string& k) const { return j_.at(k); }
    std::string where(const std::string& k) const { return path_ + "." + k; }

    double num(const std::string& k, double def) const
    {
        if (!has(k)) return def;
        if (!at(k).is_number()) throw ConfigError(where(k) + ": expected a number");
        return at(k).get<double>();
    }

    int integer(const std::string& k, int def) const
    {
        if (!has(k)) return def;
        if (!at(k).is_number_integer()) throw ConfigError(where(k) + ": expected an integer");
        return at(k).get<int>();
    }

    std::string str(const std::string& k, const std::string& def) const
    {
        if (!has(k)) return def;
        if (!at(k).is_string()) throw ConfigError(where(k) + ": expected a string");
        return at(k).get<std::string>();
    }

    Vec2 vec(const std::string& k, const Vec2& def) const
    {
        if (!has(k)) return def;
        return to_vec(at(k), where(k));
    }

    std::vector<double> list(const std::string& k) const
    {
        if (!has(k) || !at(k).is_array()) throw ConfigError(where(k) + ": expected an array of numbers");
        std::vector<double> v;
        for (const auto& e : at(k)) {
            if (!e.is_number()) throw ConfigError(where(k) + ": expected an array of numbers");
            v.push_back(e.get<double>());
        }
        return v;
    }

    static Vec2 to_vec(const json& e, const std::string& where)
    {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw ConfigError(where + ": expected [x1, x2]");
        return {e[0].get<double>(), e[1].get<double>()};
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(path_ + ": " + msg); }

private:
    const json& j_;
    std::string path_;
};

void require(bool ok, const std::string& msg)
{
    if (!ok) throw ConfigError(msg);
}

DensityProfile parse_profile(const json& j)
{
    const Reader r(j, "hamiltonian.profile", {"kind", "rho0", "amplitude", "width", "center", "slope", "r", "rho"});
    const std::string kind = r.str("kind", "constant");
    const double rho0 = r.num("rho0", 1.0);
    const Vec2 c = r.vec("center", Vec2::Zero());
    require(rho0 > 0 || kind == "radial_table", "hamiltonian.profile.rho0 must be positive");
    if (kind == "constant") return DensityProfile::constant(rho0);
    if (kind == "quadratic_well") return DensityProfile::quadratic_well(rho0, c);
    if (kind == "gaussian_bump") {
        const double w = r.num("width", 1.0);
        require(w > 0, "hamiltonian.profile.width must be positive");
        return DensityProfile::gaussian_bump(rho0, r.num("amplitude", 0.0), w, c);
    }
    if (kind == "linear") return DensityProfile::linear(rho0, r.vec("slope", Vec2::Zero()), c);
    if (kind == "radial_table") {
        const std::vector<double> rr = r.list("r"), rho = r.list("rho");
        require(rr.size() == rho.size() && rr.size() >= 2, "hamiltonian.profile: r and rho need equal length >= 2");
        for (double v : rho) require(v > 0, "hamiltonian.profile.rho must be positive");
        try {
            return DensityProfile::radial_table(rr, rho, c);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("hamiltonian.profile: ") + e.what());
        }
    }
    throw ConfigError("hamiltonian.profile.kind: unknown kind '" + kind + "'");
}

TargetConfig parse_targets(const json& j)
{
    const Reader r(j, "grids.targets", {"kind", "origin", "step", "nx", "ny", "points", "n", "lo", "hi"});
    TargetConfig t;
    const std::string kind = r.str("kind", "grid");
    if (kind == "grid") {
        t.kind = TargetConfig::Kind::grid;
        t.grid.origin = r.vec("origin", Vec2::Zero());
        t.grid.step = r.num("step", 0.1);
        t.grid.nx = r.integer("nx", 0);
        t.grid.ny = r.integer("ny", 0);
        require(t.grid.step > 0, "grids.targets.step must be positive");
        require(t.grid.nx >= 0 && t.grid.ny >= 0, "grids.targets.nx/ny must be non-negative");
    } else if (kind == "list") {
        t.kind = TargetConfig::Kind::list;
        if (r.has("points")) {
            if (!r.at("points").is_array()) throw ConfigError("grids.targets.points: expected an array");
            for (const auto& e : r.at("points")) t.points.push_back(Reader::to_vec(e, "grids.targets.points"));
        }
    } else if (kind == "random") {
        t.kind = TargetConfig::Kind::random;
        t.n = r.integer("n", 0);
        t.lo = r.vec("lo", t.lo);
        t.hi = r.vec("hi", t.hi);
        require(t.n >= 0, "grids.targets.n must be non-negative");
        require(t.hi.x() > t.lo.x() && t.hi.y() > t.lo.y(), "grids.targets: hi must exceed lo");
    } else {
        throw ConfigError("grids.targets.kind: unknown kind '" + kind + "'");
    }
    return t;
}

}  // namespace

SourceSpec RunConfig::source() const
{
    if (source_kind == SourceSpec::Kind::cylinder) {
        CylinderAmplitude a;
        if (amplitude == "angular") a = [](double, double psi) { return Complex(1.0 + 0.5 * std::cos(psi)); };
        return cylinder_source(h, E, a);
    }
    PlaneAmplitude a;
    if (amplitude == "angular") a = [](double psi, double) { return Complex(1.0 + 0.5 * std::cos(psi)); };
    return plane_source(x0, h, E, a);
}

std::vector<Vec2> RunConfig::target_points() const
{
    switch (targets.kind) {
    case TargetConfig::Kind::grid:
        if (targets.grid.nx == 0 || targets.grid.ny == 0) return {};
        return targets.grid.points();
    case TargetConfig::Kind::list:
        return targets.points;
    case TargetConfig::Kind::random: {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<Vec2> pts;
        for (int k = 0; k < targets.n; ++k) {
            const double a = u(rng), b = u(rng);
            pts.emplace_back(targets.lo.x() + a * (targets.hi.x() - targets.lo.x()),
                             targets.lo.y() + b * (targets.hi.y() - targets.lo.y()));
        }
        return pts;
    }
    }
    return {};
}

RunConfig parse_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    const Reader top(j, "config",
                     {"hamiltonian", "source", "grids", "strategy", "tolerances", "model", "output", "seed", "threads"});
    RunConfig c;

    if (top.has("hamiltonian")) {
        const Reader r(top.at("hamiltonian"), "hamiltonian", {"m", "profile"});
        c.m = r.num("m", 1.0);
        if (r.has("profile")) c.profile = parse_profile(r.at("profile"));
    }
    require(c.m >= 1, "hamiltonian.m must be >= 1");

    if (top.has("source")) {
        const Reader r(top.at("source"), "source", {"kind", "x0", "amplitude", "h", "E"});
        const std::string kind = r.str("kind", "plane");
        if (kind == "plane")
            c.source_kind = SourceSpec::Kind::plane;
        else if (kind == "cylinder")
            c.source_kind = SourceSpec::Kind::cylinder;
        else
            throw ConfigError("source.kind: unknown kind '" + kind + "'");
        c.x0 = r.vec("x0", Vec2::Zero());
        c.amplitude = r.str("amplitude", "unit");
        c.h = r.num("h", c.h);
        c.E = r.num("E", c.E);
    }
    require(c.amplitude == "unit" || c.amplitude == "angular", "source.amplitude: expected 'unit' or 'angular'");
    require(c.h >= 0.02 && c.h <= 0.5, "source.h must lie in [0.02, 0.5]");
    require(c.E != 0 && std::isfinite(c.E), "source.E must be nonzero");

    if (top.has("grids")) {
        const Reader r(top.at("grids"), "grids", {"t_max", "n_t", "n_psi", "phi_lo", "phi_hi", "n_phi", "targets"});
        c.t_max = r.num("t_max", c.t_max);
        c.n_t = r.integer("n_t", c.n_t);
        c.n_psi = r.integer("n_psi", c.n_psi);
        c.phi_lo = r.num("phi_lo", c.phi_lo);
        c.phi_hi = r.num("phi_hi", c.phi_hi);
        c.n_phi = r.integer("n_phi", c.n_phi);
        if (r.has("targets")) c.targets = parse_targets(r.at("targets"));
    }
    require(c.t_max > 0, "grids.t_max must be positive");
    require(c.n_t >= 2, "grids.n_t must be >= 2");
    require(c.n_psi >= 4, "grids.n_psi must be >= 4");
    require(c.n_phi >= 1 && c.phi_hi >= c.phi_lo, "grids: need n_phi >= 1 and phi_hi >= phi_lo");

    if (top.has("strategy")) {
        if (!top.at("strategy").is_string()) throw ConfigError("strategy: expected a string");
        c.strategy = strategy_from_string(top.at("strategy").get<std::string>());
    }

    if (top.has("tolerances")) {
        const Reader r(top.at("tolerances"), "tolerances", {"invariant", "pde_relative", "model_residual"});
        c.tol.invariant = r.num("invariant", c.tol.invariant);
        c.tol.pde_relative = r.num("pde_relative", c.tol.pde_relative);
        c.tol.model_residual = r.num("model_residual", c.tol.model_residual);
        require(c.tol.invariant > 0 && c.tol.pde_relative > 0 && c.tol.model_residual > 0,
                "tolerances must be positive");
    }

    if (top.has("model")) {
        const Reader r(top.at("model"), "model", {"T", "sigma", "center", "grid"});
        c.model.T = r.num("T", c.model.T);
        c.model.sigma = r.num("sigma", c.model.sigma);
        c.model.center = r.vec("center", c.model.center);
        if (r.has("grid")) {
            const Reader g(r.at("grid"), "model.grid", {"x1_lo", "x1_hi", "n1", "x2_lo", "x2_hi", "n2"});
            ModelGrid& mg = c.model.grid;
            mg.x1_lo = g.num("x1_lo", mg.x1_lo);
            mg.x1_hi = g.num("x1_hi", mg.x1_hi);
            mg.n1 = g.integer("n1", mg.n1);
            mg.x2_lo = g.num("x2_lo", mg.x2_lo);
            mg.x2_hi = g.num("x2_hi", mg.x2_hi);
            mg.n2 = g.integer("n2", mg.n2);
        }
    }
    require(c.model.T > 0 && c.model.sigma > 0, "model: T and sigma must be positive");
    require(c.model.grid.n1 >= 1 && c.model.grid.n2 >= 1, "model.grid: n1 and n2 must be >= 1");

    if (top.has("output")) {
        const Reader r(top.at("output"), "output", {"dir"});
        c.out_dir = r.str("dir", c.out_dir);
    }
    if (top.has("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    c.threads = top.integer("threads", 0);
    require(c.threads >= 0, "threads must be non-negative");
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv_row(std::ostream& os, const std::vector<double>& values)
{
    for (size_t k = 0; k < values.size(); ++k) {
        if (k) os << ',';
        os << format_double(values[k]);
    }
    os << '\n';
}

}  // namespace sgf

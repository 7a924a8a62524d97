#include "sgf/cli.hpp"

#include "sgf/suites.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace sgf {

namespace {

using ojson = nlohmann::ordered_json;

std::filesystem::path prepare_dir(const CliOptions& opt)
{
    const std::filesystem::path dir = opt.out_dir.empty() ? "." : opt.out_dir;
    std::filesystem::create_directories(dir);
    return dir;
}

std::ofstream open_out(const std::filesystem::path& p)
{
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + p.string() + "'");
    return os;
}

void write_json(const std::filesystem::path& p, const ojson& j)
{
    std::ofstream os = open_out(p);
    os << j.dump(2) << '\n';
}

double finite_or_null_guard(double v) { return std::isfinite(v) ? v : -1.0; }

Front plane_front(const RunConfig& cfg, const HomHamiltonian& H, const CliOptions& opt, const RayOptions& ro = {})
{
    if (cfg.source_kind != SourceSpec::Kind::plane) throw UnsupportedError("this command needs a plane source");
    return Front(H, plane_boundary(H, cfg.x0, cfg.E, 0.0), cfg.t_max, cfg.n_psi, ro, opt.threads);
}

}  // namespace

int cmd_trace(const RunConfig& cfg, const CliOptions& opt, std::ostream& log)
{
    const HomHamiltonian H = cfg.hamiltonian();
    RayOptions ro;
    ro.atol = ro.rtol = 1e-12;
    const Front f = plane_front(cfg, H, opt, ro);
    const FrontGrid g = f.grid(uniform_t_grid(cfg.t_max, cfg.n_t));
    const auto dir = prepare_dir(opt);

    std::ofstream csv = open_out(dir / "front.csv");
    csv << "t,psi,X1,X2,P1,P2,Xpsi1,Xpsi2,Ppsi1,Ppsi2,res_energy,res_huygens,res_orth,res_gram\n";
    SampleResiduals worst;
    ojson rays = ojson::array();
    ojson failures = ojson::array();
    for (size_t j = 0; j < g.samples.size(); ++j) {
        double rmin = INFINITY, rmax = 0;
        for (const FrontSample& s : g.samples[j]) {
            const SampleResiduals r = sample_residuals(H, s);
            worst.energy = std::max(worst.energy, r.energy);
            worst.huygens = std::max(worst.huygens, r.huygens);
            worst.orth = std::max(worst.orth, r.orth);
            worst.gram = std::max(worst.gram, r.gram);
            rmin = std::min(rmin, s.X.norm());
            rmax = std::max(rmax, s.X.norm());
            write_csv_row(csv, {s.t, s.psi, s.X.x(), s.X.y(), s.P.x(), s.P.y(), s.Xpsi.x(), s.Xpsi.y(), s.Ppsi.x(),
                                s.Ppsi.y(), r.energy, r.huygens, r.orth, r.gram});
        }
        rays.push_back({{"psi", g.psi_grid[j]}, {"min_abs_X", finite_or_null_guard(rmin)}, {"max_abs_X", rmax}});
        if (!g.failures[j].empty()) failures.push_back({{"psi", g.psi_grid[j]}, {"message", g.failures[j]}});
    }
    const double tol = cfg.tol.invariant;
    const bool ok = worst.energy <= tol && worst.huygens <= tol && worst.orth <= tol && worst.gram <= tol;
    ojson rep;
    rep["command"] = "trace";
    rep["n_rays"] = g.samples.size();
    rep["n_t"] = g.t_grid.size();
    rep["tolerance"] = tol;
    rep["max_residuals"] = {{"energy", worst.energy}, {"huygens", worst.huygens}, {"orth", worst.orth},
                            {"gram", worst.gram}};
    rep["passed"] = ok;
    rep["failures"] = failures;
    rep["rays"] = rays;
    write_json(dir / "trace.json", rep);

    log << "trace: " << g.samples.size() << " rays, max residuals energy " << worst.energy << " huygens "
        << worst.huygens << " orth " << worst.orth << " gram " << worst.gram << '\n';
    if (!failures.empty()) {
        log << "trace: " << failures.size() << " rays failed to integrate\n";
        return exit_numerical;
    }
    return ok ? exit_ok : exit_acceptance;
}

int cmd_classify(const RunConfig& cfg, const CliOptions& opt, std::ostream& log)
{
    const HomHamiltonian H = cfg.hamiltonian();
    const auto dir = prepare_dir(opt);

    if (cfg.source_kind == SourceSpec::Kind::cylinder) {
        std::vector<double> phis;
        for (int i = 0; i < cfg.n_phi; ++i)
            phis.push_back(cfg.n_phi == 1 ? cfg.phi_lo : cfg.phi_lo + (cfg.phi_hi - cfg.phi_lo) * i / (cfg.n_phi - 1));
        const GlancingReport rep = detect_glancing(H, cfg.E, phis, uniform_psi_grid(cfg.n_psi));
        ojson pts = ojson::array();
        for (const auto& p : rep.points)
            pts.push_back({{"phi", p.phi},
                           {"psi", p.psi},
                           {"grad_norm", p.grad_norm},
                           {"glancing", p.glancing},
                           {"special", p.special},
                           {"residual", p.residual}});
        ojson j;
        j["command"] = "classify";
        j["source"] = "cylinder";
        j["n_points"] = rep.points.size();
        j["glancing_count"] = rep.glancing_count;
        j["all_glancing"] = rep.glancing_count == rep.points.size();
        j["split_mismatches"] = rep.split_mismatches;
        j["points"] = pts;
        write_json(dir / "glancing.json", j);
        log << "classify: " << rep.glancing_count << " of " << rep.points.size() << " cylinder points glancing\n";
        return exit_ok;
    }

    const Front f = plane_front(cfg, H, opt);
    const std::vector<double> t_grid = uniform_t_grid(cfg.t_max, cfg.n_t);
    const FrontGrid g = f.grid(t_grid);
    const double m = H.degree();

    std::ofstream csv = open_out(dir / "classify.csv");
    csv << "t,psi,x1,x2,class,focal,density\n";
    int max_special = 0;
    for (size_t j = 0; j < g.samples.size(); ++j) {
        for (const FrontSample& s : g.samples[j]) {
            const FrontDiagnostics d = diagnostics(s, m, cfg.E);
            csv << format_double(s.t) << ',' << format_double(s.psi) << ',' << format_double(s.X.x()) << ','
                << format_double(s.X.y()) << ',' << to_string(d.cls) << ',' << (d.focal ? 1 : 0) << ','
                << format_double(d.density) << '\n';
        }
        max_special = std::max(max_special, special_sign_changes(H, g.samples[j]));
    }

    CausticOptions co;
    co.threads = opt.threads;
    const auto curves = caustic_scan(f, t_grid, co);
    std::ofstream cc = open_out(dir / "caustics.csv");
    cc << "curve,t,psi,x1,x2,class,focal,density\n";
    size_t n_points = 0;
    for (size_t k = 0; k < curves.size(); ++k)
        for (const CausticPoint& p : curves[k].points) {
            ++n_points;
            cc << k << ',' << format_double(p.t) << ',' << format_double(p.psi) << ',' << format_double(p.x.x()) << ','
               << format_double(p.x.y()) << ',' << to_string(p.cls) << ",1," << format_double(p.density) << '\n';
        }

    ojson j;
    j["command"] = "classify";
    j["source"] = "plane";
    j["n_rays"] = g.samples.size();
    j["caustic_curves"] = curves.size();
    j["caustic_points"] = n_points;
    j["max_special_points_per_ray"] = max_special;
    write_json(dir / "classify.json", j);
    log << "classify: " << curves.size() << " caustic curves, at most " << max_special << " special points per ray\n";
    return exit_ok;
}

int cmd_green(const RunConfig& cfg, const CliOptions& opt, std::ostream& log)
{
    const HomHamiltonian H = cfg.hamiltonian();
    const SourceSpec spec = cfg.source();
    spec.validate();
    FieldOptions fo;
    fo.strategy = cfg.strategy;
    fo.threads = opt.threads;

    const std::vector<Vec2> all = cfg.target_points();
    std::vector<Vec2> targets;
    const double eps0 = fo.eps0_factor * cfg.h;
    size_t dropped = 0;
    for (const Vec2& x : all) {
        if (spec.kind == SourceSpec::Kind::plane && (x - spec.x0).norm() < eps0)
            ++dropped;
        else
            targets.push_back(x);
    }
    std::vector<FieldSample> field = evaluate_field(H, spec, targets, fo);

    ojson pde = nullptr;
    bool pde_ok = true;
    const bool full_grid = cfg.targets.kind == TargetConfig::Kind::grid && dropped == 0 && !targets.empty();
    const bool pde_possible = full_grid && H.degree() == 2.0 && H.profile().kind == DensityProfile::Kind::constant &&
                              cfg.targets.grid.step <= cfg.h / 10 && cfg.targets.grid.nx >= 3 &&
                              cfg.targets.grid.ny >= 3;
    if (pde_possible) {
        const PdeReport rep = verify_pde(cfg.targets.grid, field, H, cfg.E, cfg.h);
        pde = {{"interior", rep.interior},        {"max_residual", rep.max_residual},
               {"max_f", rep.max_f},              {"max_u", rep.max_u},
               {"relative", rep.relative},        {"relative_to_f", rep.relative_to_f},
               {"relative_to_u", rep.relative_to_u}, {"threshold", cfg.tol.pde_relative}};
        pde_ok = rep.relative <= cfg.tol.pde_relative;
    }

    const auto dir = prepare_dir(opt);
    std::ofstream csv = open_out(dir / "field.csv");
    csv << "x1,x2,re_u,im_u,re_f,im_f,method,residual\n";
    size_t n_unreach = 0, n_adj = 0, n_direct = 0, n_stat = 0;
    for (const FieldSample& s : field) {
        csv << format_double(s.x.x()) << ',' << format_double(s.x.y()) << ',' << format_double(s.u.real()) << ','
            << format_double(s.u.imag()) << ',' << format_double(s.f.real()) << ',' << format_double(s.f.imag()) << ','
            << to_string(s.method) << ',' << (s.residual ? format_double(*s.residual) : std::string()) << '\n';
        n_unreach += s.unreachable;
        n_adj += s.caustic_adjacent;
        (s.method == OscMethod::direct ? n_direct : n_stat) += 1;
    }

    ojson j;
    j["command"] = "green";
    j["h"] = cfg.h;
    j["E"] = cfg.E;
    j["strategy"] = to_string(cfg.strategy);
    j["n_targets"] = field.size();
    j["dropped_near_source"] = dropped;
    j["eps0"] = eps0;
    j["n_unreachable"] = n_unreach;
    j["n_caustic_adjacent"] = n_adj;
    j["methods"] = {{"direct", n_direct}, {"stationary", n_stat}};
    j["pde"] = pde;
    j["strict"] = opt.strict;
    j["passed"] = pde_ok;
    write_json(dir / "green.json", j);

    log << "green: " << field.size() << " targets";
    if (dropped) log << ", " << dropped << " dropped within eps0 = " << eps0 << " of the source";
    if (n_unreach) log << ", " << n_unreach << " unreachable";
    log << '\n';
    if (!pde.is_null()) log << "green: pde relative residual " << pde["relative"].get<double>() << '\n';
    return opt.strict && !pde_ok ? exit_acceptance : exit_ok;
}

int cmd_model(const RunConfig& cfg, const CliOptions& opt, std::ostream& log)
{
    const ModelConfig& mc = cfg.model;
    ModelOptions mo;
    mo.threads = opt.threads;
    mo.x1_max = std::max({std::fabs(mc.grid.x1_lo), std::fabs(mc.grid.x1_hi), 1e-3});
    const ModelSolution sol(gaussian_model_amplitude(mc.sigma, mc.center), cfg.h, mc.T, mo);
    const double residual = model_residual(sol, mc.grid);

    const std::vector<Vec2> pts = mc.grid.points();
    std::vector<Complex> u(pts.size()), f(pts.size()), red(pts.size());
    parallel_for(static_cast<int>(pts.size()), opt.threads, [&](int k) {
        u[k] = sol.u(pts[k]);
        f[k] = sol.f(pts[k]);
        red[k] = sol.reduced(pts[k].x());
    });

    const auto dir = prepare_dir(opt);
    std::ofstream csv = open_out(dir / "model.csv");
    csv << "x1,x2,re_u,im_u,re_f,im_f,re_reduced,im_reduced\n";
    for (size_t k = 0; k < pts.size(); ++k)
        write_csv_row(csv, {pts[k].x(), pts[k].y(), u[k].real(), u[k].imag(), f[k].real(), f[k].imag(),
                            red[k].real(), red[k].imag()});

    const bool ok = residual <= cfg.tol.model_residual;
    ojson j;
    j["command"] = "model";
    j["h"] = cfg.h;
    j["T"] = mc.T;
    j["n_xi1"] = sol.n_xi1();
    j["n_xi2"] = sol.n_xi2();
    j["residual"] = residual;
    j["threshold"] = cfg.tol.model_residual;
    j["strict"] = opt.strict;
    j["passed"] = ok;
    write_json(dir / "model.json", j);
    log << "model: relative residual " << residual << '\n';
    return opt.strict && !ok ? exit_acceptance : exit_ok;
}

int cmd_validate(const std::string& suite, const CliOptions& opt, std::ostream& log)
{
    const std::vector<int> ids = suite_criteria(suite);
    ojson checks = ojson::array();
    bool all = true;
    for (int k : ids) {
        const CheckResult r = acceptance_criterion(k, opt.threads);
        all = all && r.passed;
        checks.push_back({{"id", r.id},
                          {"name", r.name},
                          {"passed", r.passed},
                          {"value", r.value},
                          {"threshold", r.threshold},
                          {"seconds", r.seconds},
                          {"detail", r.detail}});
        log << (r.passed ? "PASS " : "FAIL ") << r.id << ' ' << r.name << ": " << r.detail << '\n';
    }
    ojson j;
    j["suite"] = suite;
    j["passed"] = all;
    j["checks"] = checks;
    write_json(prepare_dir(opt) / ("validate_" + suite + ".json"), j);
    return all ? exit_ok : exit_acceptance;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Semiclassical Green functions for homogeneous Hamiltonians"};
    app.require_subcommand(1);
    std::string config_path, out_dir, suite;
    bool strict = false;
    int threads = 0;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_flag("--strict", strict, "fail when acceptance thresholds are exceeded");
    app.add_option("--threads", threads, "worker threads (overrides SGF_THREADS and the config)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    app.fallthrough();

    CLI::App* trace = app.add_subcommand("trace", "trace the front and check invariants");
    CLI::App* classify = app.add_subcommand("classify", "classify front points, caustics and glancing sets");
    CLI::App* green = app.add_subcommand("green", "evaluate the field at the targets");
    CLI::App* model = app.add_subcommand("model", "evaluate the model pair");
    CLI::App* validate = app.add_subcommand("validate", "run a validation suite");
    validate->add_option("suite", suite, "bessel | flow | stationary | model | geometry | all")->required();
    for (CLI::App* sub : {trace, classify, green, model, validate}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    try {
        CliOptions opt;
        opt.strict = strict;
        RunConfig cfg;
        const bool is_validate = validate->parsed();
        if (!config_path.empty())
            cfg = load_config(config_path);
        else if (!is_validate)
            throw ConfigError("--config is required");
        opt.out_dir = out_dir.empty() ? cfg.out_dir : out_dir;
        if (threads > 0)
            opt.threads = threads;
        else if (std::getenv("SGF_THREADS"))
            opt.threads = 0;  // resolved from the environment by the worker pool
        else
            opt.threads = cfg.threads;

        if (trace->parsed()) return cmd_trace(cfg, opt, out);
        if (classify->parsed()) return cmd_classify(cfg, opt, out);
        if (green->parsed()) return cmd_green(cfg, opt, out);
        if (model->parsed()) return cmd_model(cfg, opt, out);
        return cmd_validate(suite, opt, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_usage;
    } catch (const UnsupportedError& e) {
        err << "unsupported: " << e.what() << '\n';
        return exit_usage;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    }
}

}  // namespace sgf

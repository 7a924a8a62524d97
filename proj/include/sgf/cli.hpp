#pragma once

#include "sgf/config.hpp"

#include <iosfwd>
#include <string>

namespace sgf {

enum ExitCode { exit_ok = 0, exit_acceptance = 1, exit_usage = 2, exit_numerical = 3 };

struct CliOptions {
    bool strict = false;
    int threads = 0;      // already resolved against the flag, SGF_THREADS and the config
    std::string out_dir;  // output directory, created when missing
};

/// front.csv and trace.json. Fails when an invariant residual exceeds tol.invariant.
int cmd_trace(const RunConfig& cfg, const CliOptions& opt, std::ostream& log);
/// classify.csv, caustics.csv, classify.json for plane sources; glancing.json for cylinder sources.
int cmd_classify(const RunConfig& cfg, const CliOptions& opt, std::ostream& log);
/// field.csv and green.json
int cmd_green(const RunConfig& cfg, const CliOptions& opt, std::ostream& log);
/// model.csv and model.json
int cmd_model(const RunConfig& cfg, const CliOptions& opt, std::ostream& log);
/// validate_<suite>.json, one line per criterion on log
int cmd_validate(const std::string& suite, const CliOptions& opt, std::ostream& log);

/// Entry point of the sgf executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sgf

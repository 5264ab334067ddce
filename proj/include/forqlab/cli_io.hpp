#pragma once

// Configuration files, report serialization and the forqlab command line.
//
// Config files are INI text:
//
//   [params]      s, p (number or inf), r, delta, sigma
//   [experiment]  n_values (comma list) or n_min/n_max, times, t_fit_times,
//                 approx_time, sign_compare_n, sign_compare_time, w_sign,
//                 workers, random_fields, seed
//   [tolerances]  any field of forqlab::Tolerances
//   [solver]      dt, cfl, blowup_threshold
//   [grid]        tail_tol, margin, min_half_length, max_points
//
// Absent keys keep their defaults; unknown keys are errors.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "forqlab/experiments.hpp"

namespace forqlab {

inline constexpr const char* kToolVersion = "1.0.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses and validates; throws ConfigError (parse or constraint failure).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// %.17g formatting, round-trip exact for doubles.
std::string format_double(double v);

/// Header experiment,n,t,quantity,value followed by one line per row.
void write_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_csv(const std::filesystem::path& path);

void write_verdicts(const std::filesystem::path& path, const std::vector<Verdict>& verdicts);
void write_fits(const std::filesystem::path& path, const std::vector<FitRecord>& fits);

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"lp-check",    "lemma-scalings", "corollary",
                                              "convergence", "approx-error",   "lower-bound",
                                              "nonuniform",  "evolve",         "all"};
  return names;
}

/// Runs one subcommand into out_dir. Writes manifest.json first, then the
/// CSV tables, verdicts.json and fits.json. Returns 0 iff every verdict passes.
int run(const std::string& subcommand, const ExperimentConfig& cfg,
        const std::filesystem::path& out_dir, std::ostream& log);

/// Full command line: forqlab <subcommand> --config <path> --out <dir>
/// [--workers k] [--w-sign plus|minus]. Exit codes: 0 all verdicts pass,
/// 1 some verdict failed, 2 usage error, 3 configuration error, 4 I/O error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace forqlab

#pragma once

// Numerical experiments for the non-uniform dependence construction. Each
// exp_* function returns rows of measured norms, slope fits against n (or t)
// and pass/fail verdicts. A Laboratory holds the shared grid, partition,
// envelope and the cached solves so several experiments can reuse them.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "forqlab/constructions.hpp"
#include "forqlab/forq_solver.hpp"
#include "forqlab/littlewood_paley.hpp"

namespace forqlab {

struct Tolerances {
  double slope = 0.05;             // initial-data rates and d0 slope
  double corollary_slope = 0.1;
  double approx_slope = 0.1;       // B^sigma approximation-error slope
  double constant_spread = 0.05;   // |u0n|_{B^s} max/min - 1
  double closed_form = 1e-6;       // relative, low-part closed form
  double max_min_ratio = 3.0;      // phi^3 sin quantity and the main term
  double partition = 1e-12;
  double reconstruction = 1e-10;
  double localization = 1e-12;
  double c_hat_stability = 0.2;
  double separation_factor = 0.5;  // d(n_max, t) >= factor * c_hat * t
  double theta_slack = 0.3;
  double aux_growth = 2.0;         // |u_n(t)|_{B^{s+1}} / |u0n|_{B^{s+1}}
  double d0_ratio = 0.1;
  double blocks_ratio_low = 0.5;   // d(n_max, t)/t within [low, high] * c_hat
  double blocks_ratio_high = 2.0;
  double mass_drift = 1e-9;        // relative to |u0|_{L^1}
};

struct ExperimentConfig {
  ConstructionParams params;  // n is overridden per data point
  std::vector<int> n_values{4, 5, 6, 7, 8, 9, 10};
  std::vector<double> times{0.0, 0.025, 0.05, 0.1};
  /// Extra record times for the t-slope of the approximation error.
  std::vector<double> t_fit_times{0.0125, 0.025, 0.05, 0.1};
  double approx_time = 0.05;
  int sign_compare_n = 8;
  double sign_compare_time = 0.05;
  Tolerances tol;
  GridSizing sizing;
  SolverConfig solver;  // dt, cfl, blow-up threshold; times come from above
  WSign w_sign = WSign::minus;
  int workers = 1;
  int random_fields = 20;
  std::uint64_t seed = 20240917;

  /// Throws std::invalid_argument; parameter violations name the inequality.
  void validate() const;
  int n_min() const;
  int n_max() const;
  /// Sorted union of times and t_fit_times.
  std::vector<double> record_times() const;
};

struct ReportRow {
  std::string experiment;
  int n;  // -1 when the row is not tied to a block index
  double t;
  std::string quantity;
  double value;
};

struct ExponentFit {
  double slope;
  double intercept;
  double residual;  // max |log2 value - fitted line|
};

/// Least squares of log2(value) against x. Needs >= 3 points, all values > 0.
ExponentFit fit_exponent(std::span<const std::pair<double, double>> points);

struct FitRecord {
  std::string experiment;
  std::string quantity;
  double slope;
  double predicted;
  double intercept;
  double residual;
  std::size_t points;
};

struct Verdict {
  std::string id;
  double measured;
  double expected;
  double tolerance;
  std::string relation;  // abs_diff, at_most, at_least, below, above
  bool pass;
};

Verdict verdict_close(std::string id, double measured, double expected, double tol);
Verdict verdict_at_most(std::string id, double measured, double bound, double tol = 0.0);
Verdict verdict_at_least(std::string id, double measured, double bound, double tol = 0.0);
/// Strict: measured < bound.
Verdict verdict_below(std::string id, double measured, double bound);
/// Strict: measured > bound.
Verdict verdict_above(std::string id, double measured, double bound);

class ExperimentReport {
 public:
  void add_row(std::string experiment, int n, double t, std::string quantity, double value);
  /// Throws std::invalid_argument when the fit used fewer than 4 points.
  void add_fit(FitRecord fit);
  void add_verdict(Verdict v);
  void append(const ExperimentReport& other);

  const std::vector<ReportRow>& rows() const { return rows_; }
  const std::vector<FitRecord>& fits() const { return fits_; }
  const std::vector<Verdict>& verdicts() const { return verdicts_; }
  bool all_pass() const;

 private:
  std::vector<ReportRow> rows_;
  std::vector<FitRecord> fits_;
  std::vector<Verdict> verdicts_;
};

enum class Family { u, v };

struct SolveOutcome {
  std::optional<Trajectory> trajectory;
  std::string failure;  // blow-up report when trajectory is empty
};

class Laboratory {
 public:
  explicit Laboratory(ExperimentConfig cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const Grid& grid() const { return grid_; }
  const LpPartition& partition() const { return partition_; }
  const Envelope& envelope() const { return envelope_; }

  ConstructionParams params(int n) const;
  RealField u0(int n) const;
  RealField v0(int n) const;
  /// 2^{-n/2} phi(2^{-delta n} x), the low-frequency summand of v0.
  RealField low_part(int n) const;
  /// Exact coefficients of low_part(n), free of sampling roundoff.
  SpectralField low_part_spectrum(int n) const;
  double besov(const RealField& f, double s) const;
  double besov(const SpectralField& F, double s) const;

  /// Cached solve from u0 or v0 over config().record_times(). Thread-safe.
  const SolveOutcome& solution(Family family, int n);
  /// Runs every missing solve for the configured n values on config().workers threads.
  void solve_all(Family family);

 private:
  ExperimentConfig cfg_;
  Envelope envelope_;
  Grid grid_;
  LpPartition partition_;
  std::mutex mutex_;
  std::map<std::pair<int, int>, std::shared_ptr<const SolveOutcome>> cache_;
};

/// Runs body(i) for i in [0, count) on up to `workers` threads.
void parallel_for(int workers, std::size_t count, const std::function<void(std::size_t)>& body);

/// 20 (config) random fields band-limited to K_keep with a fixed seed.
std::vector<RealField> random_band_limited(const Grid& grid, int count, std::uint64_t seed);

ExperimentReport exp_lp_check(Laboratory& lab);
ExperimentReport exp_lemma_scalings(Laboratory& lab);
ExperimentReport exp_corollary(Laboratory& lab);
ExperimentReport exp_convergence_u(Laboratory& lab);
ExperimentReport exp_approx_error(Laboratory& lab);
ExperimentReport exp_lower_bound(Laboratory& lab);
ExperimentReport exp_nonuniform(Laboratory& lab);

struct CHatFit {
  double c_hat;
  std::vector<std::pair<double, double>> per_time;  // (t, |w_n(t) - u0n|_{B^s} / t) at n_max
};

/// Least-squares slope through the origin of |w_{n_max}(t) - u_{0,n_max}|_{B^s}
/// against t over the positive configured times.
CHatFit fit_c_hat(Laboratory& lab);

}  // namespace forqlab

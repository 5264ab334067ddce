#pragma once

// Pseudospectral method-of-lines solver for the FORQ (modified Camassa-Holm)
// equation on the periodic grid,
//
//   u_t = -u^2 u_x + 1/3 u_x^3 - (1 - d^2)^{-1} d (2/3 u^3 + u u_x^2)
//         - (1 - d^2)^{-1} (1/3 u_x^3),
//
// which is the nonlocal form of m_t + ((u^2 - u_x^2) m)_x = 0, m = u - u_xx.
// Every cubic product is formed from dealiased factors and truncated back to
// the retained band, so with the half rule the truncation is alias-free.

#include <span>
#include <stdexcept>
#include <vector>

#include "forqlab/spectral.hpp"

namespace forqlab {

struct SolverConfig {
  double dt = 0.0;  // 0 selects cfl_dt(u0, cfl)
  double final_time = 0.1;
  double cfl = 0.5;
  double blowup_threshold = 1e3;  // abort when |u|_inf > threshold * |u0|_inf
  std::vector<double> record_times;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct StepDiagnostics {
  double time;
  double mass;     // int (u - u_xx) dx
  double linf;     // |u|_inf
  double dx_linf;  // |u_x|_inf
};

struct Snapshot {
  double time;
  /// u(t) minus the (dealiased) initial data, accumulated without cancellation.
  RealField displacement;
};

class Trajectory {
 public:
  Trajectory(RealField initial, std::vector<Snapshot> snapshots,
             std::vector<StepDiagnostics> diagnostics, double dt);

  /// The dealiased initial data; snapshots()[0] is t = 0 with zero displacement.
  const RealField& initial() const { return initial_; }
  std::span<const Snapshot> snapshots() const { return snapshots_; }
  std::span<const StepDiagnostics> diagnostics() const { return diagnostics_; }
  /// Snapshot recorded at `time` (to 1e-12); throws std::out_of_range otherwise.
  const Snapshot& at(double time) const;
  /// u(time) = initial + displacement.
  RealField field_at(double time) const;
  /// Nominal step size chosen at t = 0.
  double dt() const { return dt_; }

 private:
  RealField initial_;
  std::vector<Snapshot> snapshots_;
  std::vector<StepDiagnostics> diagnostics_;
  double dt_;
};

class BlowupError : public std::runtime_error {
 public:
  BlowupError(const std::string& what, double time, double linf)
      : std::runtime_error(what), time_(time), linf_(linf) {}
  double time() const { return time_; }
  double linf() const { return linf_; }

 private:
  double time_;
  double linf_;
};

RealField rhs_nonlocal(const RealField& u);
/// Independent route: -(1 - d^2)^{-1} d [ (u^2 - u_x^2)(u - u_xx) ].
RealField rhs_conservation_form(const RealField& u);

/// One classical RK4 step on rhs_nonlocal; negative dt integrates backwards.
RealField step_rk4(const RealField& u, double dt);

/// cfl / (max|u^2 - u_x^2| K_keep + eps), capped at 1e-2.
double cfl_dt(const RealField& u, double cfl);

/// Integrates to cfg.final_time, recording a snapshot at t = 0 and at every
/// record time. Throws BlowupError on growth past the threshold or non-finite
/// values, std::invalid_argument when cfg.dt exceeds cfl_dt.
Trajectory solve(const RealField& u0, const SolverConfig& cfg);

}  // namespace forqlab

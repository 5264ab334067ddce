// Acceptance run on configs/default.ini: one PASS/FAIL line per criterion.
// Exit status is 0 only when every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <iostream>
#include <string>
#include <vector>

#include "forqlab/cli_io.hpp"
#include "forqlab/experiments.hpp"

using namespace forqlab;

namespace {

struct Criterion {
  std::string name;
  std::vector<std::string> prefixes;  // verdict ids that make up the criterion
};

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

// Every verdict whose id starts with one of the prefixes must pass, and at least one must exist.
bool judge(const ExperimentReport& rep, const Criterion& c, std::string& detail) {
  std::size_t seen = 0;
  bool ok = true;
  for (const auto& v : rep.verdicts()) {
    bool hit = false;
    for (const auto& p : c.prefixes) hit = hit || starts_with(v.id, p);
    if (!hit) continue;
    ++seen;
    if (!v.pass) {
      ok = false;
      detail += " [" + v.id + " measured=" + format_double(v.measured) + "]";
    }
  }
  if (seen == 0) detail += " [no verdicts]";
  return ok && seen > 0;
}

ExperimentReport solver_integrity(Laboratory& lab) {
  ExperimentReport rep;
  const std::string id = "solver";
  const Grid g = make_grid(std::numbers::pi, 256, 48.0);

  // Three-level self-convergence of RK4 from smooth data at the configured CFL number.
  const RealField raw = random_band_limited(make_grid(std::numbers::pi, 256, 8.0), 1, 11)[0];
  const RealField smooth(g, {raw.samples().begin(), raw.samples().end()});
  const RealField u0 = (0.5 / smooth.max_abs()) * smooth;
  const double T = 0.4, h = cfl_dt(u0, lab.config().solver.cfl);
  auto at = [&](double dt) {
    SolverConfig c;
    c.dt = dt;
    c.cfl = 1.0;
    c.final_time = T;
    return solve(u0, c).field_at(T);
  };
  const RealField coarse = at(h), mid = at(h / 2), fine = at(h / 4);
  const double order = std::log2((coarse - mid).max_abs() / (mid - fine).max_abs());
  rep.add_verdict(verdict_close(id + ".rk4_order", order, 4.0, 0.2));

  // Two independent right-hand sides on 100 random band-limited fields.
  double worst = 0.0, homog = 0.0;
  for (const auto& f : random_band_limited(g, 100, 7)) {
    const RealField a = rhs_nonlocal(f), b = rhs_conservation_form(f);
    worst = std::max(worst, (a - b).max_abs() / b.max_abs());
    homog = std::max(homog, (rhs_nonlocal(-1.7 * f) - (-1.7 * -1.7 * -1.7) * a).max_abs() /
                                (4.913 * a.max_abs()));
  }
  rep.add_verdict(verdict_below(id + ".rhs_forms_agree", worst, 1e-10));
  rep.add_verdict(verdict_below(id + ".cubic_homogeneity", homog, 1e-10));

  const RealField c = RealField::from_function(g, [](double) { return 0.6; });
  rep.add_verdict(verdict_below(id + ".constant_fixed_point", (step_rk4(c, 1e-2) - c).max_abs(), 1e-15));

  // Mass drift over T = 0.1 on the experiment trajectories.
  lab.solve_all(Family::v);
  double drift = 0.0;
  for (int n : lab.config().n_values) {
    const auto& s = lab.solution(Family::v, n);
    if (!s.trajectory) {
      drift = INFINITY;
      continue;
    }
    double l1 = 0.0;
    for (double x : s.trajectory->initial().samples()) l1 += std::abs(x);
    l1 *= lab.grid().dx();
    const double m0 = s.trajectory->diagnostics().front().mass;
    for (const auto& d : s.trajectory->diagnostics()) drift = std::max(drift, std::abs(d.mass - m0) / l1);
  }
  rep.add_verdict(verdict_below(id + ".mass_drift", drift, 1e-9));
  return rep;
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = load_config(std::string(FORQLAB_SOURCE_DIR) + "/configs/default.ini");
  Laboratory lab(cfg);
  std::cout << "grid: L=" << lab.grid().half_length() << " N=" << lab.grid().size()
            << " K_keep=" << lab.grid().keep_cutoff() << " q_max=" << lab.partition().q_max() << "\n";

  ExperimentReport all;
  all.append(exp_lp_check(lab));
  all.append(exp_lemma_scalings(lab));
  all.append(exp_corollary(lab));
  all.append(solver_integrity(lab));
  all.append(exp_convergence_u(lab));
  all.append(exp_approx_error(lab));
  all.append(exp_lower_bound(lab));
  all.append(exp_nonuniform(lab));

  const std::vector<Criterion> criteria{
      {"partition of unity and reconstruction", {"lp_check.partition_of_unity", "lp_check.reconstruction"}},
      {"block localization of u0 and the low summand", {"lp_check.block_localization"}},
      {"initial-data rates, constant norm, closed form, phi^3 sin ratio", {"lemma_scalings."}},
      {"corollary slopes within the exponent envelopes", {"corollary.slope."}},
      {"solver integrity", {"solver."}},
      {"u_n(t) - u0n decreasing over the top three n at t=0.1",
       {"convergence.no_blowup", "convergence.top3_decreasing.t=0.1"}},
      {"approximation error sigma-slope and minus beats plus",
       {"approx_error.no_blowup", "approx_error.sigma_slope", "approx_error.minus_beats_plus"}},
      {"d0 -> 0 while d(n_max, t) >= 0.5 c_hat t",
       {"lower_bound.c_hat_positive", "nonuniform.u.no_blowup", "nonuniform.v.no_blowup",
        "nonuniform.d0_slope", "nonuniform.separation."}},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    const bool ok = judge(all, criteria[i], detail);
    failed += ok ? 0 : 1;
    std::cout << (ok ? "PASS" : "FAIL") << "  [" << i + 1 << "] " << criteria[i].name << detail << "\n";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed in " << secs
            << " s\n";
  return failed == 0 ? 0 : 1;
}

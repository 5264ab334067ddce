#include "forqlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

namespace forqlab {

namespace {

constexpr double kTimeTol = 1e-12;

std::string tag(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

std::string s_label(double offset) {
  if (offset == 0.0) return "s";
  return offset > 0 ? "s+" + tag(offset) : "s-" + tag(-offset);
}

bool same_time(double a, double b) { return std::abs(a - b) <= kTimeTol; }

std::vector<double> positive(const std::vector<double>& times) {
  std::vector<double> out;
  for (double t : times)
    if (t > kTimeTol) out.push_back(t);
  return out;
}

// Fits log2(value) against x and records the fit.
ExponentFit record_fit(ExperimentReport& rep, const std::string& experiment,
                       const std::string& quantity, const std::vector<std::pair<double, double>>& pts,
                       double predicted) {
  const ExponentFit f = fit_exponent(pts);
  rep.add_fit({experiment, quantity, f.slope, predicted, f.intercept, f.residual, pts.size()});
  return f;
}

// Block multipliers applied one at a time; returns max|Delta_q f| for each q.
std::vector<double> block_maxima(const SpectralField& F, const LpPartition& P) {
  std::vector<double> out;
  for (int q = -1; q <= P.q_max(); ++q)
    out.push_back(to_physical(apply_multiplier(F, P.multiplier(q))).max_abs());
  return out;
}

RealField cube(const RealField& f) { return pointwise(pointwise(f, f), f); }

RealField dealiased_product(const RealField& a, const RealField& b, const RealField& c) {
  return dealias(pointwise(pointwise(a, b), c));
}

// Collects blow-up failures as verdicts; true when every trajectory exists.
bool require_solves(ExperimentReport& rep, Laboratory& lab, Family family,
                    const std::string& experiment) {
  lab.solve_all(family);
  bool ok = true;
  for (int n : lab.config().n_values) {
    const SolveOutcome& o = lab.solution(family, n);
    if (!o.trajectory) {
      ok = false;
      rep.add_verdict({experiment + ".no_blowup.n=" + std::to_string(n), 1.0, 0.0, 0.0, "at_most",
                       false});
    }
  }
  if (ok) rep.add_verdict(verdict_at_most(experiment + ".no_blowup", 0.0, 0.0));
  return ok;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_values.size() < 4) throw std::invalid_argument("need at least 4 n values for slope fits");
  for (std::size_t i = 1; i < n_values.size(); ++i)
    if (n_values[i] <= n_values[i - 1])
      throw std::invalid_argument("n values must be strictly increasing");
  for (int n : n_values) {
    ConstructionParams P = params;
    P.n = n;
    const auto violations = validate_params(P);
    if (!violations.empty()) throw std::invalid_argument(describe(violations));
  }
  for (const auto* list : {&times, &t_fit_times})
    for (double t : *list)
      if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("times must be >= 0");
  if (positive(times).empty()) throw std::invalid_argument("need at least one positive time");
  if (positive(t_fit_times).size() < 4)
    throw std::invalid_argument("need at least 4 positive t_fit_times");
  const auto rec = record_times();
  auto recorded = [&](double t) {
    return std::any_of(rec.begin(), rec.end(), [&](double r) { return same_time(r, t); });
  };
  if (!recorded(approx_time) || !recorded(sign_compare_time))
    throw std::invalid_argument("approx_time and sign_compare_time must be recorded times");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (random_fields < 1) throw std::invalid_argument("random_fields must be >= 1");
  SolverConfig s = solver;
  s.final_time = rec.back();
  s.record_times = rec;
  s.validate();
}

int ExperimentConfig::n_min() const { return n_values.front(); }
int ExperimentConfig::n_max() const { return n_values.back(); }

std::vector<double> ExperimentConfig::record_times() const {
  std::vector<double> all(times);
  all.insert(all.end(), t_fit_times.begin(), t_fit_times.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end(), same_time), all.end());
  return all;
}

ExponentFit fit_exponent(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw std::invalid_argument("exponent fit needs at least 3 points");
  std::vector<double> xs, ys;
  for (const auto& [x, v] : points) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("exponent fit needs positive finite values");
    xs.push_back(x);
    ys.push_back(std::log2(v));
  }
  const double m = static_cast<double>(xs.size());
  const double xbar = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (sxx == 0.0) throw std::invalid_argument("exponent fit needs distinct abscissae");
  const double slope = sxy / sxx;
  const double intercept = ybar - slope * xbar;
  double residual = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    residual = std::max(residual, std::abs(ys[i] - (intercept + slope * xs[i])));
  return {slope, intercept, residual};
}

Verdict verdict_close(std::string id, double measured, double expected, double tol) {
  return {std::move(id), measured, expected, tol, "abs_diff", std::abs(measured - expected) <= tol};
}

Verdict verdict_at_most(std::string id, double measured, double bound, double tol) {
  return {std::move(id), measured, bound, tol, "at_most", measured <= bound + tol};
}

Verdict verdict_at_least(std::string id, double measured, double bound, double tol) {
  return {std::move(id), measured, bound, tol, "at_least", measured >= bound - tol};
}

Verdict verdict_below(std::string id, double measured, double bound) {
  return {std::move(id), measured, bound, 0.0, "below", measured < bound};
}

Verdict verdict_above(std::string id, double measured, double bound) {
  return {std::move(id), measured, bound, 0.0, "above", measured > bound};
}

void ExperimentReport::add_row(std::string experiment, int n, double t, std::string quantity,
                               double value) {
  rows_.push_back({std::move(experiment), n, t, std::move(quantity), value});
}

void ExperimentReport::add_fit(FitRecord fit) {
  if (fit.points < 4)
    throw std::invalid_argument("fit '" + fit.quantity + "' uses fewer than 4 points");
  fits_.push_back(std::move(fit));
}

void ExperimentReport::add_verdict(Verdict v) {
  if (std::isnan(v.measured)) v.pass = false;
  verdicts_.push_back(std::move(v));
}

void ExperimentReport::append(const ExperimentReport& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
  fits_.insert(fits_.end(), other.fits_.begin(), other.fits_.end());
  verdicts_.insert(verdicts_.end(), other.verdicts_.begin(), other.verdicts_.end());
}

bool ExperimentReport::all_pass() const {
  return std::all_of(verdicts_.begin(), verdicts_.end(), [](const Verdict& v) { return v.pass; });
}

void parallel_for(int workers, std::size_t count, const std::function<void(std::size_t)>& body) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(threads, count); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<RealField> random_band_limited(const Grid& grid, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<RealField> out;
  for (int c = 0; c < count; ++c) {
    std::vector<Complex> coeffs(grid.spectral_size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      const double re = unit(rng), im = unit(rng);
      if (!grid.retained(i)) continue;
      coeffs[i] = i == 0 ? Complex(re, 0.0) : Complex(re, im);
    }
    out.push_back(to_physical(SpectralField(grid, std::move(coeffs))));
  }
  return out;
}

Laboratory::Laboratory(ExperimentConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      envelope_(reference_envelope()),
      grid_(experiment_grid(cfg_.params.delta, cfg_.n_min(), cfg_.n_max(), envelope_, cfg_.sizing)),
      partition_(grid_) {}

ConstructionParams Laboratory::params(int n) const {
  ConstructionParams P = cfg_.params;
  P.n = n;
  return P;
}

RealField Laboratory::u0(int n) const { return initial_u0(params(n), grid_, envelope_); }
RealField Laboratory::v0(int n) const { return initial_v0(params(n), grid_, envelope_); }

RealField Laboratory::low_part(int n) const {
  const ConstructionParams P = params(n);
  return P.amplitude_lo() * envelope_.on(grid_, P.dilation());
}

SpectralField Laboratory::low_part_spectrum(int n) const {
  const ConstructionParams P = params(n);
  SpectralField F = envelope_.spectrum_on(grid_, P.dilation());
  for (auto& c : F.half_mut()) c *= P.amplitude_lo();
  return F;
}

double Laboratory::besov(const RealField& f, double s) const {
  return besov_norm(f, BesovIndex(s, cfg_.params.p, cfg_.params.r), partition_);
}

double Laboratory::besov(const SpectralField& F, double s) const {
  return besov_norm(F, BesovIndex(s, cfg_.params.p, cfg_.params.r), partition_);
}

const SolveOutcome& Laboratory::solution(Family family, int n) {
  const auto key = std::make_pair(static_cast<int>(family), n);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return *it->second;
  }
  SolverConfig sc = cfg_.solver;
  sc.record_times = cfg_.record_times();
  sc.final_time = sc.record_times.back();
  auto outcome = std::make_shared<SolveOutcome>();
  try {
    outcome->trajectory.emplace(solve(family == Family::u ? u0(n) : v0(n), sc));
  } catch (const BlowupError& e) {
    outcome->failure = e.what();
  }
  std::lock_guard lock(mutex_);
  auto [it, inserted] = cache_.emplace(key, std::move(outcome));
  return *it->second;
}

void Laboratory::solve_all(Family family) {
  const auto& ns = cfg_.n_values;
  // Largest n first: those solves take the most steps.
  parallel_for(cfg_.workers, ns.size(),
               [&](std::size_t i) { solution(family, ns[ns.size() - 1 - i]); });
}

ExperimentReport exp_lp_check(Laboratory& lab) {
  const std::string id = "lp_check";
  const ExperimentConfig& cfg = lab.config();
  const LpPartition& P = lab.partition();
  ExperimentReport rep;

  const double residual = P.partition_residual();
  rep.add_row(id, -1, 0.0, "partition_residual", residual);
  rep.add_row(id, -1, 0.0, "q_max", P.q_max());
  rep.add_verdict(verdict_below(id + ".partition_of_unity", residual, cfg.tol.partition));

  double worst = 0.0;
  const auto fields = random_band_limited(lab.grid(), cfg.random_fields, cfg.seed);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const SpectralField F = to_spectral(fields[i]);
    std::vector<double> sum(lab.grid().size(), 0.0);
    for (int q = -1; q <= P.q_max(); ++q) {
      const RealField block = to_physical(apply_multiplier(F, P.multiplier(q)));
      for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += block[j];
    }
    const RealField recon(lab.grid(), std::move(sum));
    const double err = (recon - fields[i]).max_abs() / fields[i].max_abs();
    rep.add_row(id, -1, 0.0, "reconstruction_error_field_" + std::to_string(i), err);
    worst = std::max(worst, err);
  }
  rep.add_verdict(verdict_at_most(id + ".reconstruction", worst, cfg.tol.reconstruction));

  double hi_leak = 0.0, lo_leak = 0.0, lo_mismatch = 0.0;
  for (int n : cfg.n_values) {
    if (n > P.q_max()) throw std::invalid_argument("block n exceeds q_max of the grid");
    const RealField u = lab.u0(n);
    const auto maxima = block_maxima(to_spectral(u), P);
    double leak = 0.0;
    for (int q = -1; q <= P.q_max(); ++q)
      if (q != n) leak = std::max(leak, maxima[static_cast<std::size_t>(q + 1)]);
    leak /= u.max_abs();
    rep.add_row(id, n, 0.0, "u0_off_block_leak", leak);
    hi_leak = std::max(hi_leak, leak);

    const RealField low = lab.low_part(n);
    const SpectralField L = to_spectral(low);
    const auto low_maxima = block_maxima(L, P);
    const double low_leak =
        *std::max_element(low_maxima.begin() + 1, low_maxima.end()) / low.max_abs();
    const double mismatch =
        (to_physical(apply_multiplier(L, P.multiplier(-1))) - low).max_abs() / low.max_abs();
    rep.add_row(id, n, 0.0, "low_part_off_block_leak", low_leak);
    rep.add_row(id, n, 0.0, "low_part_block_minus1_mismatch", mismatch);
    lo_leak = std::max(lo_leak, low_leak);
    lo_mismatch = std::max(lo_mismatch, mismatch);
  }
  rep.add_verdict(verdict_below(id + ".block_localization.u0", hi_leak, cfg.tol.localization));
  rep.add_verdict(verdict_below(id + ".block_localization.low", lo_leak, cfg.tol.localization));
  rep.add_verdict(
      verdict_below(id + ".block_localization.low_identity", lo_mismatch, cfg.tol.localization));
  return rep;
}

ExperimentReport exp_lemma_scalings(Laboratory& lab) {
  const std::string id = "lemma_scalings";
  const ExperimentConfig& cfg = lab.config();
  const ConstructionParams& base = cfg.params;
  const double s = base.s;
  const double phi_lp = lp_norm(lab.envelope().profile, base.p);
  ExperimentReport rep;

  double worst_closed = 0.0;
  std::vector<double> offsets{-1.0, 0.0, 1.0};
  std::vector<std::vector<std::pair<double, double>>> cos_pts(3), sin_pts(3);
  std::vector<std::pair<double, double>> quartic;
  for (int n : cfg.n_values) {
    const ConstructionParams P = lab.params(n);
    const RealField bump = lab.envelope().on(lab.grid(), P.dilation());
    const RealField c = P.amplitude_hi() * pointwise(bump, carrier_wave(lab.grid(), P.carrier()));
    const RealField sn = carrier_wave(lab.grid(), P.carrier(), true);
    const RealField si = P.amplitude_hi() * pointwise(bump, sn);
    // Sampled fields carry ~1e-16 noise in every mode, which 2^{s' q_max} would
    // amplify past the closed-form tolerance; the low part is known exactly.
    const SpectralField Low = lab.low_part_spectrum(n);
    const SpectralField C = to_spectral(c), S = to_spectral(si);
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      const double sp = s + offsets[k];
      const std::string lab_s = s_label(offsets[k]);
      const double first = lab.besov(Low, sp);
      const double closed = std::exp2(-sp) * std::exp2((P.delta_over_p() - 0.5) * n) * phi_lp;
      const double rel = std::abs(first - closed) / closed;
      worst_closed = std::max(worst_closed, rel);
      rep.add_row(id, n, 0.0, "low_part_B" + lab_s, first);
      rep.add_row(id, n, 0.0, "low_part_closed_form_B" + lab_s, closed);
      const double bc = lab.besov(C, sp), bs = lab.besov(S, sp);
      rep.add_row(id, n, 0.0, "u0_cos_B" + lab_s, bc);
      rep.add_row(id, n, 0.0, "u0_sin_B" + lab_s, bs);
      cos_pts[k].emplace_back(n, bc);
      sin_pts[k].emplace_back(n, bs);
    }
    const double q4 = lab.besov(P.amplitude_hi() * pointwise(cube(bump), sn), s);
    rep.add_row(id, n, 0.0, "phi3_sin_Bs", q4);
    quartic.emplace_back(n, q4);
  }
  rep.add_verdict(verdict_at_most(id + ".closed_form_rel_error", worst_closed, cfg.tol.closed_form));

  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const std::string lab_s = s_label(offsets[k]);
    for (auto [name, pts] : {std::pair{"cos", &cos_pts[k]}, std::pair{"sin", &sin_pts[k]}}) {
      const std::string q = std::string("u0_") + name + "_B" + lab_s;
      const auto f = record_fit(rep, id, q, *pts, offsets[k]);
      rep.add_verdict(verdict_close(id + ".slope." + q, f.slope, offsets[k], cfg.tol.slope));
    }
  }

  auto spread = [](const std::vector<std::pair<double, double>>& pts) {
    double lo = pts.front().second, hi = lo;
    for (const auto& pt : pts) {
      lo = std::min(lo, pt.second);
      hi = std::max(hi, pt.second);
    }
    return std::pair{lo, hi};
  };
  const auto [lo_c, hi_c] = spread(cos_pts[1]);
  rep.add_verdict(
      verdict_at_most(id + ".u0_Bs_constant_spread", hi_c / lo_c - 1.0, cfg.tol.constant_spread));

  const auto [lo_q, hi_q] = spread(quartic);
  rep.add_row(id, -1, 0.0, "phi3_sin_Bs_min", lo_q);
  rep.add_row(id, -1, 0.0, "phi3_sin_Bs_max", hi_q);
  record_fit(rep, id, "phi3_sin_Bs", quartic, 0.0);
  rep.add_verdict(verdict_above(id + ".phi3_sin_lower", lo_q, 0.0));
  rep.add_verdict(verdict_at_most(id + ".phi3_sin_max_min_ratio", hi_q / lo_q, cfg.tol.max_min_ratio));
  return rep;
}

ExperimentReport exp_corollary(Laboratory& lab) {
  const std::string id = "corollary";
  const ExperimentConfig& cfg = lab.config();
  const double s = cfg.params.s, d = cfg.params.delta, dp = cfg.params.delta_over_p();
  const double tol = cfg.tol.corollary_slope;
  ExperimentReport rep;

  struct Quantity {
    std::string name;
    double predicted;
    bool two_sided;  // "≈" estimates; "≲" estimates are upper bounds on the rate
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Quantity> qs;
  qs.push_back({"u0_Linf", -(s + dp), true, {}});
  qs.push_back({"v0_Linf", -0.5, true, {}});
  qs.push_back({"dx_v0_Linf", -(0.5 + d), false, {}});
  qs.push_back({"dxx_v0_Linf", std::max(-(0.5 + 2 * d), 2 - s - dp), false, {}});
  const std::vector<double> offsets{-1.0, 0.0, 1.0};
  for (double o : offsets) {
    const std::string sl = s_label(o);
    qs.push_back({"u0_B" + sl, o, false, {}});
    qs.push_back({"v0_B" + sl, std::max(o, dp - 0.5), false, {}});
    qs.push_back({"dx_v0_B" + sl, std::max(dp - 0.5 - d, o + 1), false, {}});
    qs.push_back({"dxx_v0_B" + sl, std::max(-(0.5 - dp + 2 * d), o + 2), false, {}});
  }

  for (int n : cfg.n_values) {
    const RealField u = lab.u0(n), v = lab.v0(n);
    const RealField vx = derivative(v, 1), vxx = derivative(v, 2);
    const SpectralField U = to_spectral(u), V = to_spectral(v);
    const SpectralField Vx = to_spectral(vx), Vxx = to_spectral(vxx);
    std::size_t i = 0;
    auto put = [&](double value) {
      rep.add_row(id, n, 0.0, qs[i].name, value);
      qs[i++].pts.emplace_back(n, value);
    };
    put(u.max_abs());
    put(v.max_abs());
    put(vx.max_abs());
    put(vxx.max_abs());
    for (double o : offsets) {
      put(lab.besov(U, s + o));
      put(lab.besov(V, s + o));
      put(lab.besov(Vx, s + o));
      put(lab.besov(Vxx, s + o));
    }
  }
  for (const auto& q : qs) {
    const auto f = record_fit(rep, id, q.name, q.pts, q.predicted);
    const std::string vid = id + ".slope." + q.name;
    rep.add_verdict(q.two_sided ? verdict_close(vid, f.slope, q.predicted, tol)
                                : verdict_at_most(vid, f.slope, q.predicted, tol));
  }
  return rep;
}

ExperimentReport exp_convergence_u(Laboratory& lab) {
  const std::string id = "convergence";
  const ExperimentConfig& cfg = lab.config();
  const double s = cfg.params.s;
  ExperimentReport rep;
  if (!require_solves(rep, lab, Family::u, id)) return rep;

  std::map<std::pair<int, double>, double> diff;
  double aux_worst = 0.0, zero_at_start = 0.0;
  for (int n : cfg.n_values) {
    const Trajectory& tr = *lab.solution(Family::u, n).trajectory;
    const double base = lab.besov(tr.initial(), s + 1.0);
    for (double t : cfg.times) {
      const double value = lab.besov(tr.at(t).displacement, s);
      diff[{n, t}] = value;
      rep.add_row(id, n, t, "u_minus_u0_Bs", value);
      if (t <= kTimeTol) zero_at_start = std::max(zero_at_start, value);
      const double aux = lab.besov(tr.field_at(t), s + 1.0) / base;
      rep.add_row(id, n, t, "aux_Bs+1_ratio", aux);
      aux_worst = std::max(aux_worst, aux);
    }
    const auto diags = tr.diagnostics();
    const double mass0 = diags.front().mass;
    double drift = 0.0;
    for (const auto& dg : diags) drift = std::max(drift, std::abs(dg.mass - mass0));
    rep.add_row(id, n, 0.0, "mass_abs_drift", drift);
    rep.add_row(id, n, 0.0, "dt", tr.dt());
  }
  rep.add_verdict(verdict_at_most(id + ".zero_at_t0", zero_at_start, 0.0));
  rep.add_verdict(verdict_below(id + ".aux_bound", aux_worst, cfg.tol.aux_growth));

  const auto& ns = cfg.n_values;
  for (double t : positive(cfg.times)) {
    double worst = 0.0;
    for (std::size_t i = 1; i < ns.size(); ++i)
      worst = std::max(worst, diff[{ns[i], t}] / diff[{ns[i - 1], t}]);
    rep.add_verdict(verdict_below(id + ".monotone_in_n.t=" + tag(t), worst, 1.0));
  }
  const double T = positive(cfg.times).back();
  const std::size_t m = ns.size();
  const double top = std::max(diff[{ns[m - 1], T}] / diff[{ns[m - 2], T}],
                              diff[{ns[m - 2], T}] / diff[{ns[m - 3], T}]);
  rep.add_verdict(verdict_below(id + ".top3_decreasing.t=" + tag(T), top, 1.0));
  return rep;
}

ExperimentReport exp_approx_error(Laboratory& lab) {
  const std::string id = "approx_error";
  const ExperimentConfig& cfg = lab.config();
  const ConstructionParams& base = cfg.params;
  const double s = base.s, sigma = base.sigma;
  ExperimentReport rep;
  if (!require_solves(rep, lab, Family::v, id)) return rep;

  const std::string chosen = cfg.w_sign == WSign::minus ? "minus" : "plus";
  const auto rec = cfg.record_times();
  std::map<std::tuple<int, double, std::string>, std::pair<double, double>> err;  // (sigma, s)
  double zero_at_start = 0.0;
  for (int n : cfg.n_values) {
    const Trajectory& tr = *lab.solution(Family::v, n).trajectory;
    const RealField T = transport_term(tr.initial());
    for (double t : rec) {
      const RealField& disp = tr.at(t).displacement;
      // v_n(t) - w_n(t) = displacement -/+ (-t T) for the minus/plus variants.
      for (const auto& [name, sign] : {std::pair{"minus", 1.0}, std::pair{"plus", -1.0}}) {
        const SpectralField E = to_spectral(disp + (sign * t) * T);
        const double es = lab.besov(E, sigma), eb = lab.besov(E, s);
        err[{n, t, name}] = {es, eb};
        rep.add_row(id, n, t, std::string("err_Bsigma_") + name, es);
        rep.add_row(id, n, t, std::string("err_Bs_") + name, eb);
        if (t <= kTimeTol) zero_at_start = std::max({zero_at_start, es, eb});
      }
      const RealField omega = derivative(tr.field_at(t), 1);
      rep.add_row(id, n, t, "omega_Bsigma-1", lab.besov(omega, sigma - 1.0));
    }
  }
  rep.add_verdict(verdict_at_most(id + ".zero_at_t0", zero_at_start, 0.0));

  const double dp = base.delta_over_p();
  const double bound = std::max(sigma + dp - base.delta - s, sigma - s);
  std::vector<std::pair<double, double>> pts;
  for (int n : cfg.n_values) pts.emplace_back(n, err[{n, cfg.approx_time, chosen}].first);
  const auto f = record_fit(rep, id, "err_Bsigma_" + chosen + ".t=" + tag(cfg.approx_time), pts,
                            bound);
  rep.add_verdict(verdict_at_most(id + ".sigma_slope.t=" + tag(cfg.approx_time), f.slope, bound,
                                  cfg.tol.approx_slope));

  const auto& ns = cfg.n_values;
  const int nc = *std::min_element(ns.begin(), ns.end(), [&](int a, int b) {
    return std::abs(a - cfg.sign_compare_n) < std::abs(b - cfg.sign_compare_n);
  });
  const double tc = cfg.sign_compare_time;
  const double e_minus = err[{nc, tc, "minus"}].second, e_plus = err[{nc, tc, "plus"}].second;
  rep.add_row(id, nc, tc, "err_Bs_minus_over_plus", e_minus / e_plus);
  rep.add_verdict(verdict_below(
      id + ".minus_beats_plus.n=" + std::to_string(nc) + ".t=" + tag(tc), e_minus, e_plus));

  const double theta = 2.0 / (2.0 + s - sigma);
  std::vector<std::pair<double, double>> tpts;
  for (double t : positive(cfg.t_fit_times))
    tpts.emplace_back(std::log2(t), err[{cfg.n_max(), t, chosen}].second);
  const auto ft = record_fit(rep, id, "err_Bs_" + chosen + "_vs_t.n=" + std::to_string(cfg.n_max()),
                             tpts, 2.0 * theta);
  rep.add_row(id, cfg.n_max(), 0.0, "theta", theta);
  rep.add_verdict(verdict_at_least(id + ".t_exponent.n=" + std::to_string(cfg.n_max()), ft.slope,
                                   2.0 * theta, cfg.tol.theta_slack));
  return rep;
}

namespace {

// |w_n(t) - u0n|_{B^s} with w_n - u0n = low part -/+ t v0^2 d_x v0.
double w_minus_u0(Laboratory& lab, double t, const RealField& low, const RealField& T) {
  const double sign = lab.config().w_sign == WSign::minus ? -1.0 : 1.0;
  return lab.besov(low + (sign * t) * T, lab.config().params.s);
}

}  // namespace

CHatFit fit_c_hat(Laboratory& lab) {
  const ExperimentConfig& cfg = lab.config();
  const int n = cfg.n_max();
  const RealField low = lab.low_part(n);
  const RealField T = transport_term(lab.v0(n));
  CHatFit out{0.0, {}};
  double sty = 0.0, stt = 0.0;
  for (double t : positive(cfg.times)) {
    const double y = w_minus_u0(lab, t, low, T);
    out.per_time.emplace_back(t, y / t);
    sty += t * y;
    stt += t * t;
  }
  out.c_hat = sty / stt;
  return out;
}

ExperimentReport exp_lower_bound(Laboratory& lab) {
  const std::string id = "lower_bound";
  const ExperimentConfig& cfg = lab.config();
  const double s = cfg.params.s;
  ExperimentReport rep;

  std::vector<std::pair<double, double>> at_zero, main_pts;
  std::vector<std::vector<std::pair<double, double>>> cross(3);
  const std::vector<std::string> cross_names{"cross_low2_dx_low", "cross_u0_low_dx_v0",
                                             "cross_u02_dx_v0"};
  for (int n : cfg.n_values) {
    const RealField low = lab.low_part(n);
    const RealField u = lab.u0(n), v = lab.v0(n);
    const RealField T = transport_term(v);
    for (double t : cfg.times) {
      const double value = w_minus_u0(lab, t, low, T);
      rep.add_row(id, n, t, "w_minus_u0_Bs", value);
      if (t <= kTimeTol) at_zero.emplace_back(n, value);
    }
    const RealField vx = derivative(v, 1);
    const double main = lab.besov(dealiased_product(low, low, derivative(u, 1)), s);
    const double c1 = lab.besov(dealiased_product(low, low, derivative(low, 1)), s);
    const double c2 = lab.besov(dealiased_product(u, low, vx), s);
    const double c3 = lab.besov(dealiased_product(u, u, vx), s);
    rep.add_row(id, n, 0.0, "main_low2_dx_u0", main);
    main_pts.emplace_back(n, main);
    for (std::size_t k = 0; k < 3; ++k) {
      const double value = k == 0 ? c1 : (k == 1 ? c2 : c3);
      rep.add_row(id, n, 0.0, cross_names[k], value);
      cross[k].emplace_back(n, value);
    }
  }

  if (at_zero.size() >= 4) {
    const auto f = record_fit(rep, id, "w_minus_u0_Bs.t=0", at_zero,
                              cfg.params.delta_over_p() - 0.5);
    rep.add_verdict(verdict_below(id + ".t0_vanishes_slope", f.slope, 0.0));
  }
  for (std::size_t k = 0; k < 3; ++k) {
    const auto f = record_fit(rep, id, cross_names[k], cross[k], 0.0);
    rep.add_verdict(verdict_below(id + ".slope." + cross_names[k], f.slope, 0.0));
  }
  record_fit(rep, id, "main_low2_dx_u0", main_pts, 0.0);
  double lo = main_pts.front().second, hi = lo;
  for (const auto& p : main_pts) {
    lo = std::min(lo, p.second);
    hi = std::max(hi, p.second);
  }
  rep.add_verdict(verdict_above(id + ".main_term_positive", lo, 0.0));
  rep.add_verdict(verdict_at_most(id + ".main_term_max_min_ratio", hi / lo, cfg.tol.max_min_ratio));

  const CHatFit ch = fit_c_hat(lab);
  rep.add_row(id, cfg.n_max(), 0.0, "c_hat", ch.c_hat);
  rep.add_verdict(verdict_above(id + ".c_hat_positive", ch.c_hat, 0.0));
  for (const auto& [t, ratio] : ch.per_time) {
    rep.add_row(id, cfg.n_max(), t, "c_hat_at_t", ratio);
    rep.add_verdict(verdict_close(id + ".c_hat_stable.t=" + tag(t), ratio / ch.c_hat, 1.0,
                                  cfg.tol.c_hat_stability));
  }
  return rep;
}

ExperimentReport exp_nonuniform(Laboratory& lab) {
  const std::string id = "nonuniform";
  const ExperimentConfig& cfg = lab.config();
  const double s = cfg.params.s, dp = cfg.params.delta_over_p();
  ExperimentReport rep;
  const bool ok_u = require_solves(rep, lab, Family::u, id + ".u");
  const bool ok_v = require_solves(rep, lab, Family::v, id + ".v");

  std::map<int, double> d0;
  std::vector<std::pair<double, double>> pts;
  for (int n : cfg.n_values) {
    d0[n] = lab.besov(lab.u0(n) - lab.v0(n), s);
    rep.add_row(id, n, 0.0, "d0", d0[n]);
    pts.emplace_back(n, d0[n]);
  }
  const auto f = record_fit(rep, id, "d0", pts, dp - 0.5);
  rep.add_verdict(verdict_close(id + ".d0_slope", f.slope, dp - 0.5, cfg.tol.slope));
  const int n_hi = cfg.n_max(), n_lo = n_hi - 4;
  if (d0.count(n_lo)) {
    const double expected = std::exp2(4.0 * (dp - 0.5));
    rep.add_verdict(verdict_close(
        id + ".d0_ratio.n=" + std::to_string(n_hi) + "/" + std::to_string(n_lo),
        d0[n_hi] / d0[n_lo] / expected, 1.0, cfg.tol.d0_ratio));
  }

  const CHatFit ch = fit_c_hat(lab);
  rep.add_row(id, n_hi, 0.0, "c_hat", ch.c_hat);
  if (!ok_u || !ok_v) return rep;

  std::map<std::pair<int, double>, double> d;
  double start_gap = 0.0;
  for (int n : cfg.n_values) {
    const Trajectory& tu = *lab.solution(Family::u, n).trajectory;
    const Trajectory& tv = *lab.solution(Family::v, n).trajectory;
    const RealField gap0 = tu.initial() - tv.initial();
    for (double t : cfg.times) {
      const double value =
          lab.besov(gap0 + (tu.at(t).displacement - tv.at(t).displacement), s);
      d[{n, t}] = value;
      rep.add_row(id, n, t, "d", value);
      if (t <= kTimeTol) start_gap = std::max(start_gap, std::abs(value - d0[n]) / d0[n]);
    }
  }
  rep.add_verdict(verdict_at_most(id + ".d_at_t0_equals_d0", start_gap, 1e-10));
  for (double t : positive(cfg.times)) {
    rep.add_verdict(verdict_at_least(id + ".separation.t=" + tag(t), d[{n_hi, t}],
                                     cfg.tol.separation_factor * ch.c_hat * t));
  }
  const double ta = cfg.approx_time;
  if (std::any_of(cfg.times.begin(), cfg.times.end(), [&](double t) { return same_time(t, ta); })) {
    const double ratio = d[{n_hi, ta}] / ta / ch.c_hat;
    rep.add_verdict(verdict_at_least(id + ".rate_lower.t=" + tag(ta), ratio, cfg.tol.blocks_ratio_low));
    rep.add_verdict(verdict_at_most(id + ".rate_upper.t=" + tag(ta), ratio, cfg.tol.blocks_ratio_high));
  }
  return rep;
}

}  // namespace forqlab

#include "forqlab/forq_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace forqlab {

namespace {

constexpr double kDtCap = 1e-2;
constexpr double kTimeTol = 1e-12;
constexpr double kInfinityValue = std::numeric_limits<double>::infinity();

using Coeffs = std::vector<Complex>;

Coeffs coeffs_of(const SpectralField& F) { return Coeffs(F.half().begin(), F.half().end()); }

// Forward transform of a physical product, truncated to the retained band.
Coeffs truncated(const Grid& g, std::vector<double> samples) {
  return coeffs_of(dealias(to_spectral(RealField(g, std::move(samples)))));
}

std::vector<double> physical(const Grid& g, const Coeffs& c, int order = 0) {
  SpectralField F(g, c);
  const RealField f = to_physical(order == 0 ? F : derivative(F, order));
  return {f.samples().begin(), f.samples().end()};
}

Coeffs nonlocal_rhs(const Grid& g, const Coeffs& U) {
  const auto u = physical(g, U);
  const auto ux = physical(g, U, 1);
  const std::size_t N = u.size();
  std::vector<double> local(N), inner(N), cube(N);
  for (std::size_t j = 0; j < N; ++j) {
    const double a = u[j], b = ux[j];
    local[j] = -a * a * b + b * b * b / 3.0;
    inner[j] = 2.0 / 3.0 * a * a * a + a * b * b;
    cube[j] = b * b * b / 3.0;
  }
  Coeffs out = truncated(g, std::move(local));
  const Coeffs B = truncated(g, std::move(inner));
  const Coeffs C = truncated(g, std::move(cube));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double k = g.wavenumber(i);
    const double h = 1.0 / (1.0 + k * k);
    const Complex ikB(-k * B[i].imag(), k * B[i].real());
    out[i] -= h * (ikB + C[i]);
  }
  return out;
}

Coeffs conservation_rhs(const Grid& g, const Coeffs& U) {
  const auto u = physical(g, U);
  const auto ux = physical(g, U, 1);
  const auto uxx = physical(g, U, 2);
  std::vector<double> flux(u.size());
  for (std::size_t j = 0; j < u.size(); ++j)
    flux[j] = (u[j] * u[j] - ux[j] * ux[j]) * (u[j] - uxx[j]);
  Coeffs F = truncated(g, std::move(flux));
  for (std::size_t i = 0; i < F.size(); ++i) {
    const double k = g.wavenumber(i);
    const Complex ikF(-k * F[i].imag(), k * F[i].real());
    F[i] = -ikF / (1.0 + k * k);
  }
  return F;
}

Coeffs dealiased_coeffs(const RealField& u) { return coeffs_of(dealias(to_spectral(u))); }

// base + scale * incr
Coeffs axpy(const Coeffs& base, double scale, const Coeffs& incr) {
  Coeffs out(base);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * incr[i];
  return out;
}

// RK4 increment dt/6 (k1 + 2k2 + 2k3 + k4) for the state base + disp.
Coeffs rk4_increment(const Grid& g, const Coeffs& base, const Coeffs& disp, double dt) {
  Coeffs state = axpy(base, 1.0, disp);
  const Coeffs k1 = nonlocal_rhs(g, state);
  const Coeffs k2 = nonlocal_rhs(g, axpy(state, 0.5 * dt, k1));
  const Coeffs k3 = nonlocal_rhs(g, axpy(state, 0.5 * dt, k2));
  const Coeffs k4 = nonlocal_rhs(g, axpy(state, dt, k3));
  Coeffs inc(k1.size());
  for (std::size_t i = 0; i < inc.size(); ++i)
    inc[i] = dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return inc;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return x;
    m = std::max(m, std::abs(x));
  }
  return m;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be >= 0");
  if (!(final_time >= 0.0) || !std::isfinite(final_time))
    throw std::invalid_argument("final time must be >= 0");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("cfl must lie in (0, 1]");
  if (!(blowup_threshold > 1.0)) throw std::invalid_argument("blow-up threshold must exceed 1");
  for (double t : record_times)
    if (!(t >= 0.0 && t <= final_time + kTimeTol))
      throw std::invalid_argument("record times must lie in [0, final_time]");
}

Trajectory::Trajectory(RealField initial, std::vector<Snapshot> snapshots,
                       std::vector<StepDiagnostics> diagnostics, double dt)
    : initial_(std::move(initial)),
      snapshots_(std::move(snapshots)),
      diagnostics_(std::move(diagnostics)),
      dt_(dt) {}

RealField Trajectory::field_at(double time) const { return initial_ + at(time).displacement; }

const Snapshot& Trajectory::at(double time) const {
  for (const auto& s : snapshots_)
    if (std::abs(s.time - time) <= kTimeTol) return s;
  throw std::out_of_range("no snapshot at t = " + std::to_string(time));
}

RealField rhs_nonlocal(const RealField& u) {
  const Grid& g = u.grid();
  return to_physical(SpectralField(g, nonlocal_rhs(g, dealiased_coeffs(u))));
}

RealField rhs_conservation_form(const RealField& u) {
  const Grid& g = u.grid();
  return to_physical(SpectralField(g, conservation_rhs(g, dealiased_coeffs(u))));
}

RealField step_rk4(const RealField& u, double dt) {
  const Grid& g = u.grid();
  const Coeffs U = dealiased_coeffs(u);
  const Coeffs zero(U.size());
  return to_physical(SpectralField(g, axpy(U, 1.0, rk4_increment(g, U, zero, dt))));
}

double cfl_dt(const RealField& u, double cfl) {
  const RealField ux = derivative(dealias(u), 1);
  double speed = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j)
    speed = std::max(speed, std::abs(u[j] * u[j] - ux[j] * ux[j]));
  return std::min(kDtCap, cfl / (speed * u.grid().keep_cutoff() + 1e-12));
}

Trajectory solve(const RealField& u0, const SolverConfig& cfg) {
  cfg.validate();
  const Grid& g = u0.grid();
  const Coeffs U0 = dealiased_coeffs(u0);
  const RealField initial = to_physical(SpectralField(g, U0));

  const double dt_cfl = cfl_dt(initial, cfg.cfl);
  if (cfg.dt > dt_cfl * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt " << cfg.dt << " rejected by CFL bound " << dt_cfl;
    throw std::invalid_argument(os.str());
  }
  const double dt = cfg.dt > 0.0 ? cfg.dt : dt_cfl;

  std::vector<double> stops;
  for (double t : cfg.record_times)
    if (t > kTimeTol) stops.push_back(std::min(t, cfg.final_time));
  stops.push_back(cfg.final_time);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end(),
                          [](double a, double b) { return std::abs(a - b) <= kTimeTol; }),
              stops.end());
  if (!stops.empty() && stops.front() <= kTimeTol) stops.erase(stops.begin());

  auto is_recorded = [&](double t) {
    return std::any_of(cfg.record_times.begin(), cfg.record_times.end(),
                       [&](double r) { return std::abs(r - t) <= kTimeTol; });
  };

  const double linf0 = initial.max_abs();
  auto diagnose = [&](double t, const Coeffs& disp) {
    const Coeffs state = axpy(U0, 1.0, disp);
    double linf = 0.0, dx_linf = 0.0;
    try {
      linf = max_abs(physical(g, state));
      dx_linf = max_abs(physical(g, state, 1));
    } catch (const std::invalid_argument&) {
      throw BlowupError("non-finite values at t = " + std::to_string(t), t, kInfinityValue);
    }
    if (linf > cfg.blowup_threshold * std::max(linf0, 1e-300) && linf > 0.0)
      throw BlowupError("|u|_inf grew past the blow-up threshold at t = " + std::to_string(t), t,
                        linf);
    return StepDiagnostics{t, state[0].real(), linf, dx_linf};
  };

  Coeffs disp(U0.size());
  std::vector<Snapshot> snaps;
  std::vector<StepDiagnostics> diags;
  snaps.push_back({0.0, RealField::zeros(g)});
  diags.push_back(diagnose(0.0, disp));

  double t = 0.0;
  for (double stop : stops) {
    const double span = stop - t;
    const auto steps = static_cast<long>(std::max(1.0, std::ceil(span / dt - 1e-9)));
    const double h = span / static_cast<double>(steps);
    for (long s = 0; s < steps; ++s) {
      Coeffs inc;
      try {
        inc = rk4_increment(g, U0, disp, h);
      } catch (const std::invalid_argument&) {
        throw BlowupError("non-finite values after t = " + std::to_string(t), t, kInfinityValue);
      }
      for (std::size_t i = 0; i < disp.size(); ++i) disp[i] += inc[i];
      t = (s + 1 == steps) ? stop : t + h;
      diags.push_back(diagnose(t, disp));
    }
    if (is_recorded(stop) || std::abs(stop - cfg.final_time) <= kTimeTol) {
      snaps.push_back({stop, to_physical(SpectralField(g, disp))});
    }
  }
  return Trajectory(initial, std::move(snaps), std::move(diags), dt);
}

}  // namespace forqlab

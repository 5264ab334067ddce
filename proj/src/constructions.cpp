#include "forqlab/constructions.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "forqlab/littlewood_paley.hpp"

namespace forqlab {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kCarrierRatio = 17.0 / 12.0;

void check_less(std::vector<ParamViolation>& out, const std::string& what, double lhs, double rhs) {
  if (!(lhs < rhs)) out.push_back({what, rhs - lhs});
}

}  // namespace

double ConstructionParams::delta_over_p() const { return std::isinf(p) ? 0.0 : delta / p; }
double ConstructionParams::carrier() const { return kCarrierRatio * std::ldexp(1.0, n); }
double ConstructionParams::dilation() const { return std::exp2(-delta * n); }
double ConstructionParams::amplitude_hi() const { return std::exp2(-n * s - delta_over_p() * n); }
double ConstructionParams::amplitude_lo() const { return std::exp2(-0.5 * n); }

std::vector<ParamViolation> validate_params(const ConstructionParams& P) {
  std::vector<ParamViolation> out;
  if (P.n < 1) out.push_back({"n >= 1", static_cast<double>(P.n - 1)});
  if (!(P.p > 1.0)) out.push_back({"p > 1 (the case p=1 is not covered)", P.p - 1.0});
  if (!(P.r >= 1.0)) out.push_back({"1 <= r", P.r - 1.0});
  if (std::isinf(P.r)) out.push_back({"r < inf", -kInfinity});
  if (!out.empty() && !(P.p > 1.0)) return out;

  const double inv_p = std::isinf(P.p) ? 0.0 : 1.0 / P.p;
  check_less(out, "s > max{2 + 1/p, 5/2}", std::max(2.0 + inv_p, 2.5), P.s);
  check_less(out, "0 < delta < 1/8", 0.0, P.delta);
  check_less(out, "0 < delta < 1/8", P.delta, 0.125);
  check_less(out, "max{1 + 1/p, s - 9/8} < sigma", std::max(1.0 + inv_p, P.s - 9.0 / 8.0), P.sigma);
  check_less(out, "sigma < s - 1", P.sigma, P.s - 1.0);
  const double eight_delta_p = 8.0 * P.delta_over_p();
  // For p = inf the lower bound degenerates to 0 < 0; delta > 0 is checked above.
  if (!std::isinf(P.p)) check_less(out, "0 < 8 delta/p", 0.0, eight_delta_p);
  check_less(out, "8 delta/p < s - sigma - 1", eight_delta_p, P.s - P.sigma - 1.0);
  return out;
}

std::string describe(const std::vector<ParamViolation>& violations) {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << "violated " << violations[i].inequality << " (slack " << violations[i].slack << ")";
  }
  return os.str();
}

double envelope_hat(double xi) { return 1.0 - smooth_step((std::abs(xi) - 0.25) / 0.25); }

double Envelope::radius_below(double tol) const {
  const Grid& g = profile.grid();
  double radius = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (std::abs(profile[j]) >= tol) radius = std::max(radius, std::abs(g.x(j)));
  }
  return std::min(radius + g.dx(), g.half_length());
}

RealField Envelope::on(const Grid& grid, double dilation) const {
  return to_physical(spectrum_on(grid, dilation));
}

SpectralField Envelope::spectrum_on(const Grid& grid, double dilation) const {
  if (!(dilation > 0.0)) throw std::invalid_argument("envelope dilation must be positive");
  if (0.5 * dilation > grid.keep_cutoff())
    throw std::invalid_argument("grid does not retain the envelope spectrum");
  std::vector<Complex> c(grid.spectral_size());
  const double scale = 2.0 * pi / dilation;
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = scale * envelope_hat(grid.wavenumber(i) / dilation);
  c[grid.size() / 2] = 0.0;
  return SpectralField(grid, std::move(c));
}

Envelope build_envelope(const Grid& reference) {
  if (reference.keep_cutoff() < 0.5)
    throw std::invalid_argument("reference grid too coarse to resolve |xi| <= 1/2");
  std::vector<Complex> hat(reference.spectral_size());
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] = envelope_hat(reference.wavenumber(i));
  SpectralField spectral(reference, hat);
  for (auto& h : hat) h *= 2.0 * pi;
  Envelope env{to_physical(SpectralField(reference, std::move(hat))), std::move(spectral), 0.0};
  env.decay_radius = env.radius_below(1e-12);
  return env;
}

Envelope reference_envelope() { return build_envelope(make_grid(4096.0, std::size_t{1} << 16, 1.0)); }

RealField carrier_wave(const Grid& grid, double c, bool use_sin) {
  const double lattice = c * grid.half_length() / pi;
  const double nearest = std::round(lattice);
  const std::size_t N = grid.size();
  std::vector<double> out(N);
  if (std::abs(lattice - nearest) <= 1e-9 * std::max(1.0, std::abs(lattice))) {
    // c x_j = -pi M + 2 pi M j / N with integer M.
    const auto M = static_cast<std::int64_t>(nearest);
    const double sign = (M % 2 == 0) ? 1.0 : -1.0;
    const auto n = static_cast<std::int64_t>(N);
    const std::int64_t step = ((M % n) + n) % n;
    for (std::size_t j = 0; j < N; ++j) {
      const std::int64_t r = (step * static_cast<std::int64_t>(j)) % n;
      const double angle = 2.0 * pi * static_cast<double>(r) / static_cast<double>(N);
      out[j] = sign * (use_sin ? std::sin(angle) : std::cos(angle));
    }
  } else {
    for (std::size_t j = 0; j < N; ++j) {
      const double a = c * grid.x(j);
      out[j] = use_sin ? std::sin(a) : std::cos(a);
    }
  }
  return RealField(grid, std::move(out));
}

namespace {

void require_admissible(const ConstructionParams& P, const Grid& grid) {
  const auto violations = validate_params(P);
  if (!violations.empty()) throw std::invalid_argument(describe(violations));
  if (P.carrier() + 0.5 * P.dilation() > grid.keep_cutoff())
    throw std::invalid_argument("grid cannot resolve the carrier 17/12 2^n = " +
                                std::to_string(P.carrier()));
}

}  // namespace

RealField initial_u0(const ConstructionParams& P, const Grid& grid, const Envelope& env) {
  require_admissible(P, grid);
  const RealField bump = env.on(grid, P.dilation());
  const RealField wave = carrier_wave(grid, P.carrier());
  return P.amplitude_hi() * pointwise(bump, wave);
}

RealField initial_v0(const ConstructionParams& P, const Grid& grid, const Envelope& env) {
  require_admissible(P, grid);
  const RealField bump = env.on(grid, P.dilation());
  const RealField wave = carrier_wave(grid, P.carrier());
  return P.amplitude_hi() * pointwise(bump, wave) + P.amplitude_lo() * bump;
}

RealField transport_term(const RealField& v) {
  const RealField vx = derivative(v, 1);
  return dealias(pointwise(pointwise(v, v), vx));
}

RealField approx_solution_w(const ConstructionParams& P, double t, const Grid& grid,
                            const Envelope& env, WSign sign) {
  if (!(t >= 0.0)) throw std::invalid_argument("approximate solution needs t >= 0");
  const RealField v0 = initial_v0(P, grid, env);
  const double factor = sign == WSign::minus ? -t : t;
  return v0 + factor * transport_term(v0);
}

RealField peakon(double c, double t, const Grid& grid) {
  if (!(c > 0.0)) throw std::invalid_argument("peakon speed must be positive");
  const double centre = c * t;
  if (std::abs(centre) >= grid.half_length())
    throw std::invalid_argument("peakon centre outside the domain");
  const double height = std::sqrt(0.5 * c);
  return RealField::from_function(grid,
                                  [&](double x) { return height * std::exp(-std::abs(x - centre)); });
}

Grid experiment_grid(double delta, int n_min, int n_max, const Envelope& env,
                     const GridSizing& sizing) {
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("need 1 <= n_min <= n_max");
  const double top = env.profile.max_abs();
  const double tail_radius = env.radius_below(sizing.tail_tol * top);
  const double wanted = std::max(tail_radius * std::exp2(delta * n_max), sizing.min_half_length);

  // Every carrier 17/12 2^n = pi M / L with integer M when L is a multiple of this unit.
  const double unit = 12.0 * pi / (17.0 * std::ldexp(1.0, n_min));
  const double L = std::ceil(wanted / unit) * unit;

  const double k_min = kCarrierRatio * std::ldexp(1.0, n_max) + std::exp2(1.0 - delta * n_min) +
                       sizing.margin;
  std::size_t N = 4;
  while (pi * static_cast<double>(N / 4 - 1) / L < k_min) {
    N *= 2;
    if (N > sizing.max_points)
      throw std::invalid_argument("experiment grid would need more than max_points samples");
  }
  return make_grid(L, N, pi * static_cast<double>(N / 4 - 1) / L);
}

}  // namespace forqlab

#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "forqlab/constructions.hpp"
#include "forqlab/littlewood_paley.hpp"

using namespace forqlab;
constexpr double pi = std::numbers::pi;

namespace {

const Envelope& env() {
  static const Envelope e = reference_envelope();
  return e;
}

// Shared grid for n = 4..6 under the default sizing rule.
const Grid& grid46() {
  static const Grid g = experiment_grid(0.02, 4, 6, env());
  return g;
}

ConstructionParams defaults(int n) {
  ConstructionParams P;
  P.n = n;
  return P;
}

bool mentions(const std::vector<ParamViolation>& v, const std::string& text) {
  for (const auto& x : v)
    if (x.inequality.find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("parameter constraints") {
  CHECK(validate_params(defaults(10)).empty());

  ConstructionParams P = defaults(10);
  P.delta = 0.2;
  auto v = validate_params(P);
  REQUIRE_FALSE(v.empty());
  CHECK(mentions(v, "0 < delta < 1/8"));
  CHECK(v.front().slack < 0.0);

  P = defaults(10);
  P.sigma = P.s - 1.0;
  CHECK(mentions(validate_params(P), "sigma < s - 1"));

  P = defaults(10);
  P.p = 1.0;
  CHECK(mentions(validate_params(P), "p=1 is not covered"));

  P = defaults(10);
  P.s = 2.4;
  CHECK(mentions(validate_params(P), "s > max{2 + 1/p, 5/2}"));

  P = defaults(10);
  P.delta = 0.05;  // 8 delta/p = 0.2 >= s - sigma - 1 = 0.1
  CHECK(mentions(validate_params(P), "8 delta/p < s - sigma - 1"));

  ConstructionParams Q;
  Q.s = 3.2;
  Q.p = kInfinity;
  Q.r = 1.0;
  Q.delta = 0.1;
  Q.sigma = 2.1;
  CHECK(validate_params(Q).empty());
  CHECK(describe(validate_params(P)).find("violated") != std::string::npos);
}

TEST_CASE("derived construction quantities") {
  const ConstructionParams P = defaults(6);
  CHECK(P.carrier() == doctest::Approx(17.0 / 12.0 * 64.0));
  CHECK(P.dilation() == doctest::Approx(std::exp2(-0.12)));
  CHECK(P.amplitude_hi() == doctest::Approx(std::exp2(-6 * 3.0 - 0.01 * 6)));
  CHECK(P.amplitude_lo() == doctest::Approx(0.125));
}

TEST_CASE("envelope bump in frequency and space") {
  CHECK(envelope_hat(0.0) == 1.0);
  CHECK(envelope_hat(0.25) == 1.0);
  CHECK(envelope_hat(0.6) == 0.0);
  CHECK(envelope_hat(0.5) == 0.0);
  for (double xi = -1.0; xi <= 1.0; xi += 0.001) {
    CHECK(envelope_hat(xi) >= 0.0);
    CHECK(envelope_hat(xi) <= 1.0);
  }

  const RealField& phi = env().profile;
  const std::size_t N = phi.size();
  double asym = 0.0, integral = 0.0;
  for (std::size_t j = 1; j < N; ++j) asym = std::max(asym, std::abs(phi[j] - phi[N - j]));
  for (double v : phi.samples()) integral += v;
  integral *= phi.grid().dx();
  CHECK(asym < 1e-12);
  CHECK(integral == doctest::Approx(2.0 * pi).epsilon(1e-10));
  CHECK(phi[N / 2] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(env().decay_radius > 100.0);
  CHECK(env().decay_radius < phi.grid().half_length());
  CHECK(env().radius_below(1e-7 * 0.75) < env().decay_radius);
  CHECK_THROWS_AS(build_envelope(make_grid(100.0, 64, 0.4)), std::invalid_argument);
}

TEST_CASE("carriers sit on the lattice and integer phase reduction is exact") {
  const Grid& g = grid46();
  for (int n = 4; n <= 6; ++n) {
    const double m = defaults(n).carrier() * g.half_length() / pi;
    CHECK(std::abs(m - std::round(m)) < 1e-9);
  }
  const Grid small = make_grid(pi, 256, 60.0);
  const RealField a = carrier_wave(small, 17.0);
  const RealField b = RealField::from_function(small, [](double x) { return std::cos(17.0 * x); });
  CHECK((a - b).max_abs() < 1e-13);
  const RealField c = carrier_wave(small, 17.5, true);
  const RealField d = RealField::from_function(small, [](double x) { return std::sin(17.5 * x); });
  CHECK((c - d).max_abs() < 1e-13);
}

TEST_CASE("u0 and v0: amplitude, block support, admissibility") {
  const Grid& g = grid46();
  const LpPartition P(g);
  const double top = env().profile.max_abs();
  for (int n = 4; n <= 6; ++n) {
    const ConstructionParams C = defaults(n);
    const RealField u = initial_u0(C, g, env());
    CHECK(u.max_abs() == doctest::Approx(C.amplitude_hi() * top).epsilon(0.01));
    for (int q = -1; q <= P.q_max(); ++q)
      if (q != n) CHECK(delta_q(u, q, P).max_abs() < 1e-12 * u.max_abs());

    const RealField v = initial_v0(C, g, env());
    for (int q = 0; q <= P.q_max(); ++q)
      if (q != n) CHECK(delta_q(v, q, P).max_abs() < 1e-12 * v.max_abs());
    const RealField low = v - u;
    CHECK((delta_q(low, -1, P) - low).max_abs() < 1e-12 * low.max_abs());
    if (n >= 6) {
      const double ratio = v.max_abs() / (std::exp2(-0.5 * n) * top);
      CHECK(ratio < 1.2);
      CHECK(ratio > 1.0 / 1.2);
    }
  }
  ConstructionParams bad = defaults(9);  // carrier beyond this grid's K_keep
  CHECK_THROWS_AS(initial_u0(bad, g, env()), std::invalid_argument);
  bad = defaults(5);
  bad.delta = 0.5;
  CHECK_THROWS_AS(initial_v0(bad, g, env()), std::invalid_argument);
}

TEST_CASE("Besov norm of the low part matches its closed form") {
  const Grid& g = grid46();
  const LpPartition P(g);
  const double phi_l2 = lp_norm(env().profile, 2.0);
  for (int n = 4; n <= 6; ++n) {
    const ConstructionParams C = defaults(n);
    const RealField low = C.amplitude_lo() * env().on(g, C.dilation());
    for (double s : {2.0, 3.0}) {
      const double closed = std::exp2(-s) * std::exp2((0.01 - 0.5) * n) * phi_l2;
      CHECK(besov_norm(low, BesovIndex(s, 2.0, 2.0), P) == doctest::Approx(closed).epsilon(1e-6));
    }
  }
}

TEST_CASE("approximate solution w_n") {
  const Grid& g = grid46();
  const ConstructionParams C = defaults(5);
  const RealField v = initial_v0(C, g, env());
  const RealField w0 = approx_solution_w(C, 0.0, g, env());
  for (std::size_t j = 0; j < v.size(); ++j) REQUIRE(w0[j] == v[j]);

  const RealField w1 = approx_solution_w(C, 0.03, g, env());
  const RealField w2 = approx_solution_w(C, 0.06, g, env());
  CHECK(((w2 - w0) - 2.0 * (w1 - w0)).max_abs() < 1e-15 * v.max_abs());

  const RealField plus = approx_solution_w(C, 0.03, g, env(), WSign::plus);
  CHECK(((plus - v) + (w1 - v)).max_abs() < 1e-15);
  CHECK_THROWS_AS(approx_solution_w(C, -0.1, g, env()), std::invalid_argument);

  const RealField T = transport_term(v);
  const RealField direct = pointwise(pointwise(v, v), derivative(v, 1));
  CHECK((T - dealias(direct)).max_abs() < 1e-12 * direct.max_abs());
  // Only the part above the retained band is discarded.
  CHECK((T - direct).max_abs() < 1e-6 * direct.max_abs());
}

TEST_CASE("peakon formula") {
  const Grid g = make_grid(40.0, std::size_t{1} << 16, 1000.0);
  const double c = 2.0, t = 1.5;
  const RealField u = peakon(c, t, g);
  std::size_t arg = 0;
  for (std::size_t j = 0; j < u.size(); ++j)
    if (u[j] > u[arg]) arg = j;
  CHECK(std::abs(g.x(arg) - c * t) <= g.dx());
  CHECK(u.max_abs() == doctest::Approx(std::sqrt(c / 2.0)).epsilon(1e-3));

  // int_{-L}^{L} (c/2) e^{-2|x - x0|} dx = c/4 (2 - e^{-2(L - x0)} - e^{-2(L + x0)}) ~ c/2.
  const double L = g.half_length(), x0 = c * t;
  const double exact = c / 4.0 * (2.0 - std::exp(-2.0 * (L - x0)) - std::exp(-2.0 * (L + x0)));
  const double l2sq = std::pow(lp_norm(u, 2.0), 2);
  CHECK(std::abs(l2sq - exact) < 2.0 * g.dx() * g.dx() * c + 1e-12);
  CHECK(exact == doctest::Approx(c / 2.0).epsilon(1e-12));

  CHECK_THROWS_AS(peakon(-1.0, 0.0, g), std::invalid_argument);
  CHECK_THROWS_AS(peakon(2.0, 30.0, g), std::invalid_argument);
}

TEST_CASE("peakon block norms decay like 2^{-3q/2}") {
  const Grid g = make_grid(40.0, std::size_t{1} << 16, 1200.0);
  const LpPartition P(g);
  const RealField u = peakon(1.0, 0.0, g);
  const auto blocks = block_lp_norms(to_spectral(u), 2.0, P);
  // Mid-range blocks, away from the low-frequency transient and the cutoff.
  const double rate = std::log2(blocks[9] / blocks[5]) / 4.0;  // q = 8 vs q = 4
  CHECK(rate == doctest::Approx(-1.5).epsilon(0.05));

  auto truncated = [&](double s, int top) { return besov_from_blocks(blocks, s, 2.0, top); };
  // s < 3/2: the truncated norms settle; s >= 3/2: they keep growing with the top block.
  CHECK(truncated(1.0, 9) / truncated(1.0, 7) < 1.05);
  CHECK(truncated(2.0, 9) / truncated(2.0, 7) > 1.4);
}

TEST_CASE("experiment grid sizing") {
  const Grid& g = grid46();
  CHECK(g.keep_cutoff() >= 17.0 / 12.0 * 64.0 + std::exp2(1.0 - 0.08) + 8.0);
  CHECK(g.keep_cutoff() <= g.half_rule_limit());
  CHECK(g.half_length() >= 64.0);
  GridSizing tight;
  tight.max_points = 1024;
  CHECK_THROWS_AS(experiment_grid(0.02, 4, 10, env(), tight), std::invalid_argument);
  CHECK_THROWS_AS(experiment_grid(0.02, 6, 4, env()), std::invalid_argument);
}

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "forqlab/constructions.hpp"
#include "forqlab/littlewood_paley.hpp"
#include "oracles.hpp"

using namespace forqlab;
constexpr double pi = std::numbers::pi;

namespace {

// L = 32 pi puts k = m/32 on the lattice; K_keep = 200 gives q_max = 8.
Grid lp_grid() { return make_grid(32.0 * pi, std::size_t{1} << 15, 200.0); }

RealField random_field(const Grid& g, std::uint64_t seed, double k_max = 190.0) {
  const long m_max = static_cast<long>(k_max * g.half_length() / pi);
  return RealField(g, oracle::random_trig(g.size(), g.half_length(), m_max, seed, 2e-4));
}

std::vector<RealField> family(const Grid& g) {
  std::vector<RealField> out;
  for (std::uint64_t s = 0; s < 6; ++s) out.push_back(random_field(g, 100 + s));
  return out;
}

}  // namespace

TEST_CASE("smooth step and the chi/phi pair") {
  CHECK(smooth_step(-1.0) == 0.0);
  CHECK(smooth_step(0.0) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
  for (double t = 0.01; t < 1.0; t += 0.01) CHECK(smooth_step(t) + smooth_step(1.0 - t) == doctest::Approx(1.0));

  CHECK(lp_chi(0.0) == 1.0);
  for (double xi = 0.0; xi <= 0.75; xi += 0.01) CHECK(lp_chi(xi) == 1.0);
  for (double xi = 4.0 / 3.0; xi < 5.0; xi += 0.01) CHECK(lp_chi(xi) == 0.0);
  for (double xi = -3.0; xi < 3.0; xi += 0.003) {
    CHECK(lp_chi(xi) >= 0.0);
    CHECK(lp_chi(xi) <= 1.0);
    CHECK(lp_chi(xi) == lp_chi(-xi));
    CHECK(lp_phi(xi) >= 0.0);
    CHECK(lp_phi(xi) <= 1.0);
  }
}

TEST_CASE("partition multipliers: supports and unity") {
  const Grid g = lp_grid();
  const LpPartition P = build_partition(g);
  CHECK(P.q_max() == 8);
  CHECK(P.partition_residual() < 1e-12);
  for (int q = 0; q <= P.q_max(); ++q) {
    const auto m = P.multiplier(q);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double k = std::abs(g.wavenumber(i));
      if (k < 0.75 * std::ldexp(1.0, q) || k > 8.0 / 3.0 * std::ldexp(1.0, q)) CHECK(m[i] == 0.0);
    }
  }
  // Unity on every retained mode.
  double worst = 0.0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    if (!g.retained(i)) continue;
    double sum = 0.0;
    for (int q = -1; q <= P.q_max(); ++q) sum += P.multiplier(q)[i];
    worst = std::max(worst, std::abs(1.0 - sum));
  }
  CHECK(worst < 1e-12);
  CHECK_THROWS_AS(P.multiplier(-2), std::out_of_range);
  CHECK_THROWS_AS(P.multiplier(P.q_max() + 1), std::out_of_range);
}

TEST_CASE("delta_q: reconstruction, near-orthogonality and range checks") {
  const Grid g = lp_grid();
  const LpPartition P(g);
  const RealField f = random_field(g, 1);
  std::vector<double> sum(g.size(), 0.0);
  for (int q = -1; q <= P.q_max(); ++q) {
    const RealField b = delta_q(f, q, P);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += b[j];
  }
  CHECK((RealField(g, sum) - f).max_abs() < 1e-10 * f.max_abs());

  for (int p = -1; p <= P.q_max(); ++p)
    for (int q = p + 2; q <= P.q_max(); ++q)
      CHECK(delta_q(delta_q(f, q, P), p, P).max_abs() < 1e-12 * f.max_abs());

  CHECK_THROWS_AS(delta_q(f, P.q_max() + 1, P), std::out_of_range);
  CHECK_THROWS_AS(delta_q(f, -2, P), std::out_of_range);
}

TEST_CASE("dilated envelope lives in block -1 only") {
  const Grid g = lp_grid();
  const LpPartition P(g);
  const RealField e = reference_envelope().on(g, std::exp2(-0.02 * 8));
  CHECK((delta_q(e, -1, P) - e).max_abs() < 1e-12 * e.max_abs());
  for (int q = 0; q <= P.q_max(); ++q) CHECK(delta_q(e, q, P).max_abs() < 1e-12 * e.max_abs());
}

TEST_CASE("S_q: definition, telescoping sum and L^p bound") {
  const Grid g = lp_grid();
  const LpPartition P(g);
  const RealField f = random_field(g, 2);
  CHECK((s_q(f, 0, P) - delta_q(f, -1, P)).max_abs() < 1e-12 * f.max_abs());
  for (int q = 1; q <= P.q_max() + 1; ++q) {
    RealField acc = RealField::zeros(g);
    for (int p = -1; p <= q - 1; ++p) acc = acc + delta_q(f, p, P);
    CHECK((s_q(f, q, P) - acc).max_abs() < 1e-12 * f.max_abs());
  }
  CHECK((s_q(f, P.q_max() + 1, P) - f).max_abs() < 1e-12 * f.max_abs());
  CHECK_THROWS_AS(s_q(f, -1, P), std::out_of_range);

  double worst = 0.0;
  for (const auto& h : family(g))
    for (int q = 0; q <= P.q_max(); ++q)
      for (double p : {2.0, 4.0, kInfinity}) worst = std::max(worst, lp_norm(s_q(h, q, P), p) / lp_norm(h, p));
  CHECK(worst < 2.0);
}

TEST_CASE("block boundedness in L^2 and L^inf") {
  const Grid g = lp_grid();
  const LpPartition P(g);
  for (const auto& f : family(g))
    for (int q = -1; q <= P.q_max(); ++q)
      for (double p : {2.0, kInfinity}) CHECK(lp_norm(delta_q(f, q, P), p) <= (1.0 + 1e-6) * lp_norm(f, p));
}

TEST_CASE("lp_norm closed forms") {
  const Grid g = make_grid(8.0, 4096, 100.0);
  std::vector<double> pulse(g.size(), 0.0);
  pulse[100] = 1.0;
  CHECK(lp_norm(RealField(g, pulse), 2.0) == doctest::Approx(std::sqrt(g.dx())).epsilon(1e-15));
  CHECK(lp_norm(RealField::from_function(g, [](double) { return 1.0; }), kInfinity) == 1.0);
  // int exp(-2 x^2) dx = sqrt(pi/2)
  const RealField gauss = RealField::from_function(g, [](double x) { return std::exp(-x * x); });
  const double exact = std::pow(pi / 2.0, 0.25);
  CHECK(std::abs(lp_norm(gauss, 2.0) - exact) < 1e-10 * exact);
  // int exp(-4 x^2) dx = sqrt(pi)/2
  CHECK(std::abs(lp_norm(gauss, 4.0) - std::pow(std::sqrt(pi) / 2.0, 0.25)) < 1e-10);
  CHECK_THROWS_AS(lp_norm(gauss, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(lp_norm(gauss, 0.5), std::invalid_argument);
}

TEST_CASE("BesovIndex validation") {
  CHECK_NOTHROW(BesovIndex(3.0, 2.0, 2.0));
  CHECK_NOTHROW(BesovIndex(3.0, kInfinity, 1.0));
  CHECK_THROWS_AS(BesovIndex(3.0, 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(BesovIndex(3.0, 2.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(BesovIndex(3.0, 2.0, kInfinity), std::invalid_argument);
  CHECK_THROWS_AS(BesovIndex(NAN, 2.0, 2.0), std::invalid_argument);
}

TEST_CASE("Besov norm of a single-block field") {
  const Grid g = lp_grid();
  const LpPartition P(g);
  // phi(2^-3 k) = 1 for 32/3 <= |k| <= 12; k = 11 is a lattice point.
  const RealField c = RealField::from_function(g, [](double x) { return std::cos(11.0 * x); });
  CHECK((delta_q(c, 3, P) - c).max_abs() < 1e-12);
  for (double s : {-1.0, 0.5, 3.0}) {
    for (double p : {2.0, 3.0, kInfinity}) {
      const double expected = std::exp2(3.0 * s) * lp_norm(c, p);
      CHECK(besov_norm(c, BesovIndex(s, p, 2.0), P) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("Besov norm homogeneity, r-monotonicity and interpolation") {
  const Grid g = lp_grid();
  const LpPartition P(g);
  for (const auto& f : family(g)) {
    const double a = besov_norm(f, BesovIndex(2.0, 2.0, 2.0), P);
    const double b = besov_norm(-3.5 * f, BesovIndex(2.0, 2.0, 2.0), P);
    CHECK(b == doctest::Approx(3.5 * a).epsilon(1e-14));

    for (double p : {2.0, kInfinity}) {
      double prev = kInfinity;
      for (double r : {1.0, 1.5, 2.0, 4.0, 16.0}) {
        const double v = besov_norm(f, BesovIndex(1.0, p, r), P);
        CHECK(v <= prev);
        prev = v;
      }
      const double s1 = -0.5, s2 = 2.5;
      const double n1 = besov_norm(f, BesovIndex(s1, p, 2.0), P);
      const double n2 = besov_norm(f, BesovIndex(s2, p, 2.0), P);
      for (double th : {0.0, 0.25, 0.5, 0.9, 1.0}) {
        const double mid = besov_norm(f, BesovIndex(th * s1 + (1 - th) * s2, p, 2.0), P);
        CHECK(mid <= std::pow(n1, th) * std::pow(n2, 1 - th) * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("Besov norm from spectral and physical input agree; grid mismatch is rejected") {
  const Grid g = lp_grid();
  const LpPartition P(g);
  const RealField f = random_field(g, 3);
  const BesovIndex idx(1.5, 2.0, 2.0);
  CHECK(besov_norm(f, idx, P) == doctest::Approx(besov_norm(to_spectral(f), idx, P)).epsilon(1e-15));
  const Grid other = make_grid(10.0, 1024, 50.0);
  CHECK_THROWS_AS(besov_norm(RealField::zeros(other), idx, P), std::invalid_argument);
  // p = 2 via Parseval equals the physical-space rectangle rule.
  const auto blocks = block_lp_norms(to_spectral(f), 2.0, P);
  for (int q = -1; q <= P.q_max(); ++q) {
    const double direct = lp_norm(delta_q(f, q, P), 2.0);
    CHECK(blocks[static_cast<std::size_t>(q + 1)] == doctest::Approx(direct).epsilon(1e-10));
  }
}

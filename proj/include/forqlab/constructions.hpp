#pragma once

// Initial data for the non-uniform dependence construction:
//
//   u_{0,n}(x) = 2^{-ns - (delta/p) n} phi(2^{-delta n} x) cos(17/12 2^n x)
//   v_{0,n}(x) = u_{0,n}(x) + 2^{-n/2} phi(2^{-delta n} x)
//   w_n(x, t)  = v_{0,n} - t v_{0,n}^2 d_x v_{0,n}
//
// where phi is the inverse transform of a smooth bump phihat equal to 1 on
// |xi| <= 1/4 and supported in |xi| < 1/2.

#include <cstddef>
#include <string>
#include <vector>

#include "forqlab/spectral.hpp"

namespace forqlab {

struct ConstructionParams {
  int n = 10;
  double s = 3.0;
  double p = 2.0;
  double r = 2.0;
  double delta = 0.02;
  double sigma = 1.9;

  /// delta / p, zero for p = inf.
  double delta_over_p() const;
  double carrier() const;       // 17/12 * 2^n
  double dilation() const;      // 2^{-delta n}
  double amplitude_hi() const;  // 2^{-ns - (delta/p) n}
  double amplitude_lo() const;  // 2^{-n/2}
};

struct ParamViolation {
  std::string inequality;
  double slack;  // right side minus left side of the violated strict inequality
};

/// Every violated constraint, empty when the parameters are admissible.
std::vector<ParamViolation> validate_params(const ConstructionParams& P);
std::string describe(const std::vector<ParamViolation>& violations);

/// The bump phihat: 1 on |xi| <= 1/4, 0 on |xi| >= 1/2.
double envelope_hat(double xi);

struct Envelope {
  /// phi(x) = int exp(i x xi) phihat(xi) dxi sampled on the reference grid,
  /// so int phi dx = 2 pi phihat(0) = 2 pi and phi(0) = 3/4.
  RealField profile;
  /// phihat sampled on the reference lattice.
  SpectralField spectral_profile;
  /// Smallest |x| beyond which |phi| < 1e-12 on the reference grid.
  double decay_radius;

  /// Smallest |x| beyond which |phi| < tol on the reference grid.
  double radius_below(double tol) const;
  /// Periodized samples of phi(dilation * x) on grid, synthesized from phihat.
  RealField on(const Grid& grid, double dilation) const;
  /// The exact coefficients (2 pi / dilation) phihat(k / dilation) behind on().
  SpectralField spectrum_on(const Grid& grid, double dilation) const;
};

/// Throws std::invalid_argument when the grid does not retain |xi| <= 1/2.
Envelope build_envelope(const Grid& reference);
/// Envelope on the default reference grid (L = 4096, N = 2^16).
Envelope reference_envelope();

/// cos(c x) (or sin) sampled on grid. Lattice wavenumbers are evaluated with
/// integer phase reduction so large c x loses no accuracy.
RealField carrier_wave(const Grid& grid, double c, bool use_sin = false);

RealField initial_u0(const ConstructionParams& P, const Grid& grid, const Envelope& env);
RealField initial_v0(const ConstructionParams& P, const Grid& grid, const Envelope& env);

enum class WSign { minus, plus };

/// Dealiased cubic term v^2 d_x v.
RealField transport_term(const RealField& v);

RealField approx_solution_w(const ConstructionParams& P, double t, const Grid& grid,
                            const Envelope& env, WSign sign = WSign::minus);

/// sqrt(c/2) exp(-|x - ct|), formula evaluation.
RealField peakon(double c, double t, const Grid& grid);

struct GridSizing {
  double tail_tol = 1e-7;        // relative pointwise envelope tail at the boundary
  double margin = 8.0;           // wavenumber safety margin above the top carrier
  double min_half_length = 64.0;
  std::size_t max_points = std::size_t{1} << 22;
};

/// Grid shared by every n in [n_min, n_max]: carriers on the lattice,
/// K_keep >= 17/12 2^{n_max} + 2^{1 - delta n_min} + margin, envelope tail
/// below tail_tol * max|phi| at the boundary for the widest dilation.
Grid experiment_grid(double delta, int n_min, int n_max, const Envelope& env,
                     const GridSizing& sizing = {});

}  // namespace forqlab

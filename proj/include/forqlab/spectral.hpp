#pragma once

// Periodic grids, discrete Fourier transforms and the spectral multipliers
// used by every other part of forqlab.
//
// Transform convention. On the grid x_j = -L + j dx, j = 0..N-1, with
// wavenumbers k_m = pi m / L, m = -N/2..N/2-1:
//
//   forward   F(k_m) = dx * sum_j f(x_j) exp(-i k_m x_j)
//   inverse   f(x_j) = 1/(2L) * sum_m F(k_m) exp(i k_m x_j)
//
// so F approximates the continuum transform  int f(x) exp(-i k x) dx  and the
// multipliers 1/(1+k^2), (ik)^n, chi(2^-q k) need no extra constants.
// Parseval reads  dx * sum_j |f(x_j)|^2 = 1/(2L) * sum_m |F(k_m)|^2.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace forqlab {

using Complex = std::complex<double>;

class Grid {
 public:
  /// Validating constructor (make_grid). Throws std::invalid_argument when N is
  /// not a power of two, L <= 0, or K_keep is outside (0, pi N / (4L)].
  Grid(double half_length, std::size_t num_points, double keep_cutoff);

  double half_length() const { return half_length_; }
  std::size_t size() const { return num_points_; }
  double dx() const { return 2.0 * half_length_ / static_cast<double>(num_points_); }
  double keep_cutoff() const { return keep_cutoff_; }

  /// Largest representable wavenumber, pi N / (2L).
  double nyquist() const;
  /// Largest keep cutoff allowed by the half rule, pi N / (4L).
  double half_rule_limit() const;

  double x(std::size_t j) const { return -half_length_ + static_cast<double>(j) * dx(); }

  /// Number of stored coefficients of a real field, N/2 + 1.
  std::size_t spectral_size() const { return num_points_ / 2 + 1; }
  /// Signed lattice index of half-spectrum slot i (slot N/2 is m = -N/2).
  long mode(std::size_t i) const;
  /// Wavenumber of half-spectrum slot i.
  double wavenumber(std::size_t i) const;
  /// True when slot i survives dealiasing.
  bool retained(std::size_t i) const;

  bool operator==(const Grid&) const = default;

 private:
  double half_length_;
  std::size_t num_points_;
  double keep_cutoff_;
  std::size_t keep_index_;  // retained slots are i < keep_index_
};

inline Grid make_grid(double half_length, std::size_t num_points, double keep_cutoff) {
  return Grid(half_length, num_points, keep_cutoff);
}

/// Real samples on a grid. Immutable; construction rejects NaN/Inf.
class RealField {
 public:
  RealField(Grid grid, std::vector<double> samples);

  static RealField zeros(const Grid& grid);
  static RealField from_function(const Grid& grid, const std::function<double(double)>& f);

  const Grid& grid() const { return grid_; }
  std::span<const double> samples() const { return samples_; }
  double operator[](std::size_t j) const { return samples_[j]; }
  std::size_t size() const { return samples_.size(); }

  double max_abs() const;

 private:
  Grid grid_;
  std::vector<double> samples_;
};

RealField operator+(const RealField& a, const RealField& b);
RealField operator-(const RealField& a, const RealField& b);
RealField operator*(double alpha, const RealField& a);
/// Pointwise product, no dealiasing.
RealField pointwise(const RealField& a, const RealField& b);

/// Discrete Fourier coefficients of a real field (nonnegative half; the
/// negative wavenumbers follow from conjugate symmetry).
class SpectralField {
 public:
  SpectralField(Grid grid, std::vector<Complex> half_coeffs);

  static SpectralField zeros(const Grid& grid);

  const Grid& grid() const { return grid_; }
  std::span<const Complex> half() const { return coeffs_; }
  std::span<Complex> half_mut() { return coeffs_; }
  /// Coefficient at signed lattice index m in [-N/2, N/2).
  Complex coeff(long m) const;

 private:
  Grid grid_;
  std::vector<Complex> coeffs_;
};

SpectralField to_spectral(const RealField& f);
RealField to_physical(const SpectralField& F);

/// Multiplication by (ik)^order; the Nyquist slot is zeroed.
SpectralField derivative(const SpectralField& F, int order);
RealField derivative(const RealField& f, int order);

/// Multiplier 1/(1+k^2), i.e. (1 - d_x^2)^{-1}.
SpectralField helmholtz_inverse(const SpectralField& F);
RealField helmholtz_inverse(const RealField& f);

/// Zero every slot the grid does not retain. Idempotent.
SpectralField dealias(const SpectralField& F);
RealField dealias(const RealField& f);

/// Apply a real multiplier given on the half spectrum.
SpectralField apply_multiplier(const SpectralField& F, std::span<const double> multiplier);

/// dx * sum |f|^2 evaluated from coefficients (discrete Parseval).
double parseval_energy(const SpectralField& F);

}  // namespace forqlab

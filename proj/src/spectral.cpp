#include "forqlab/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fft_plan.hpp"

namespace forqlab {

namespace {

constexpr double pi = std::numbers::pi;

// exp(i k_m L) = (-1)^m on the lattice.
double lattice_phase(long m) { return (m % 2 == 0) ? 1.0 : -1.0; }

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw std::invalid_argument("fields live on different grids");
}

}  // namespace

Grid::Grid(double half_length, std::size_t num_points, double keep_cutoff)
    : half_length_(half_length), num_points_(num_points), keep_cutoff_(keep_cutoff) {
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw std::invalid_argument("grid half length must be positive and finite");
  if (num_points < 4 || !std::has_single_bit(num_points))
    throw std::invalid_argument("grid size must be a power of two >= 4, got " +
                                std::to_string(num_points));
  const double limit = half_rule_limit();
  if (!(keep_cutoff > 0.0) || keep_cutoff > limit * (1.0 + 1e-14))
    throw std::invalid_argument("keep cutoff " + std::to_string(keep_cutoff) +
                                " violates the half rule 0 < K <= pi N/(4L) = " +
                                std::to_string(limit));

  std::size_t top = static_cast<std::size_t>(std::floor(keep_cutoff * half_length / pi));
  while (wavenumber(top + 1) <= keep_cutoff && top + 1 < num_points / 2) ++top;
  while (top > 0 && wavenumber(top) > keep_cutoff) --top;
  keep_index_ = std::min(num_points / 4, top + 1);
}

double Grid::nyquist() const { return pi * static_cast<double>(num_points_) / (2.0 * half_length_); }

double Grid::half_rule_limit() const {
  return pi * static_cast<double>(num_points_) / (4.0 * half_length_);
}

long Grid::mode(std::size_t i) const {
  return i == num_points_ / 2 ? -static_cast<long>(num_points_ / 2) : static_cast<long>(i);
}

double Grid::wavenumber(std::size_t i) const {
  return pi * static_cast<double>(mode(i)) / half_length_;
}

bool Grid::retained(std::size_t i) const { return i < keep_index_; }

RealField::RealField(Grid grid, std::vector<double> samples)
    : grid_(grid), samples_(std::move(samples)) {
  if (samples_.size() != grid_.size())
    throw std::invalid_argument("sample count does not match grid size");
  for (double v : samples_)
    if (!std::isfinite(v)) throw std::invalid_argument("field contains NaN or Inf");
}

RealField RealField::zeros(const Grid& grid) {
  return RealField(grid, std::vector<double>(grid.size(), 0.0));
}

RealField RealField::from_function(const Grid& grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.x(j));
  return RealField(grid, std::move(v));
}

double RealField::max_abs() const {
  double m = 0.0;
  for (double v : samples_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

template <typename Op>
RealField combine(const RealField& a, const RealField& b, Op op) {
  require_same_grid(a.grid(), b.grid());
  std::vector<double> out(a.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = op(a[j], b[j]);
  return RealField(a.grid(), std::move(out));
}

}  // namespace

RealField operator+(const RealField& a, const RealField& b) {
  return combine(a, b, [](double x, double y) { return x + y; });
}

RealField operator-(const RealField& a, const RealField& b) {
  return combine(a, b, [](double x, double y) { return x - y; });
}

RealField operator*(double alpha, const RealField& a) {
  std::vector<double> out(a.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = alpha * a[j];
  return RealField(a.grid(), std::move(out));
}

RealField pointwise(const RealField& a, const RealField& b) {
  return combine(a, b, [](double x, double y) { return x * y; });
}

SpectralField::SpectralField(Grid grid, std::vector<Complex> half_coeffs)
    : grid_(grid), coeffs_(std::move(half_coeffs)) {
  if (coeffs_.size() != grid_.spectral_size())
    throw std::invalid_argument("coefficient count does not match grid");
}

SpectralField SpectralField::zeros(const Grid& grid) {
  return SpectralField(grid, std::vector<Complex>(grid.spectral_size()));
}

Complex SpectralField::coeff(long m) const {
  const long half = static_cast<long>(grid_.size() / 2);
  if (m < -half || m >= half) throw std::out_of_range("lattice index out of range");
  if (m == -half) return coeffs_[static_cast<std::size_t>(half)];
  if (m >= 0) return coeffs_[static_cast<std::size_t>(m)];
  return std::conj(coeffs_[static_cast<std::size_t>(-m)]);
}

SpectralField to_spectral(const RealField& f) {
  const Grid& g = f.grid();
  std::vector<Complex> out(g.spectral_size());
  detail::fft_r2c(g.size(), f.samples().data(), out.data());
  const double dx = g.dx();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= dx * lattice_phase(g.mode(i));
  return SpectralField(g, std::move(out));
}

RealField to_physical(const SpectralField& F) {
  const Grid& g = F.grid();
  const double scale = 1.0 / (2.0 * g.half_length());
  std::vector<Complex> scratch(F.half().begin(), F.half().end());
  for (std::size_t i = 0; i < scratch.size(); ++i) scratch[i] *= scale * lattice_phase(g.mode(i));
  std::vector<double> out(g.size());
  detail::fft_c2r(g.size(), scratch.data(), out.data());
  return RealField(g, std::move(out));
}

SpectralField derivative(const SpectralField& F, int order) {
  if (order < 0) throw std::invalid_argument("derivative order must be nonnegative");
  const Grid& g = F.grid();
  std::vector<Complex> out(F.half().begin(), F.half().end());
  const std::size_t nyq = g.size() / 2;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i == nyq) {
      out[i] = 0.0;
      continue;
    }
    const double k = g.wavenumber(i);
    Complex z = out[i];
    // (ik)^order applied one factor at a time so that repeated first
    // derivatives reproduce higher orders bit for bit.
    for (int o = 0; o < order; ++o) z = Complex(-k * z.imag(), k * z.real());
    out[i] = z;
  }
  return SpectralField(g, std::move(out));
}

RealField derivative(const RealField& f, int order) {
  return to_physical(derivative(to_spectral(f), order));
}

SpectralField helmholtz_inverse(const SpectralField& F) {
  const Grid& g = F.grid();
  std::vector<Complex> out(F.half().begin(), F.half().end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double k = g.wavenumber(i);
    out[i] /= 1.0 + k * k;
  }
  return SpectralField(g, std::move(out));
}

RealField helmholtz_inverse(const RealField& f) {
  return to_physical(helmholtz_inverse(to_spectral(f)));
}

SpectralField dealias(const SpectralField& F) {
  const Grid& g = F.grid();
  std::vector<Complex> out(F.half().begin(), F.half().end());
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!g.retained(i)) out[i] = 0.0;
  return SpectralField(g, std::move(out));
}

RealField dealias(const RealField& f) { return to_physical(dealias(to_spectral(f))); }

SpectralField apply_multiplier(const SpectralField& F, std::span<const double> multiplier) {
  if (multiplier.size() != F.half().size())
    throw std::invalid_argument("multiplier length does not match spectrum");
  std::vector<Complex> out(F.half().begin(), F.half().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= multiplier[i];
  return SpectralField(F.grid(), std::move(out));
}

double parseval_energy(const SpectralField& F) {
  const auto c = F.half();
  const std::size_t nyq = F.grid().size() / 2;
  double sum = std::norm(c[0]) + std::norm(c[nyq]);
  for (std::size_t i = 1; i < nyq; ++i) sum += 2.0 * std::norm(c[i]);
  return sum / (2.0 * F.grid().half_length());
}

}  // namespace forqlab

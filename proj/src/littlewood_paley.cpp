#include "forqlab/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace forqlab {

namespace {

constexpr double kInner = 3.0 / 4.0;
constexpr double kOuter = 4.0 / 3.0;

double glue(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

double lp_sum(std::span<const double> terms, double r) {
  double top = 0.0;
  for (double t : terms) top = std::max(top, t);
  if (top == 0.0) return 0.0;
  double acc = 0.0;
  for (double t : terms) acc += std::pow(t / top, r);
  return top * std::pow(acc, 1.0 / r);
}

}  // namespace

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = glue(t);
  return a / (a + glue(1.0 - t));
}

double lp_chi(double xi) { return 1.0 - smooth_step((std::abs(xi) - kInner) / (kOuter - kInner)); }

double lp_phi(double xi) { return lp_chi(0.5 * xi) - lp_chi(xi); }

LpPartition::LpPartition(const Grid& grid) : grid_(grid), q_max_(0) {
  const double K = grid.keep_cutoff();
  while (kInner * std::ldexp(1.0, q_max_ + 1) < K) ++q_max_;

  const std::size_t m = grid.spectral_size();
  blocks_.assign(static_cast<std::size_t>(q_max_ + 2), std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const double k = grid.wavenumber(i);
    blocks_[0][i] = lp_chi(k);
    for (int q = 0; q <= q_max_; ++q) blocks_[q + 1][i] = lp_phi(std::ldexp(k, -q));
  }
}

std::span<const double> LpPartition::multiplier(int q) const {
  if (q < -1 || q > q_max_)
    throw std::out_of_range("block index " + std::to_string(q) + " outside [-1, " +
                            std::to_string(q_max_) + "]");
  return blocks_[static_cast<std::size_t>(q + 1)];
}

std::vector<double> LpPartition::low_pass(int q) const {
  std::vector<double> out(grid_.spectral_size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lp_chi(std::ldexp(grid_.wavenumber(i), -q));
  return out;
}

double LpPartition::partition_residual() const {
  const double reach = kInner * std::ldexp(1.0, q_max_ + 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid_.spectral_size(); ++i) {
    if (std::abs(grid_.wavenumber(i)) > reach) continue;
    double sum = 0.0;
    for (const auto& b : blocks_) sum += b[i];
    worst = std::max(worst, std::abs(1.0 - sum));
  }
  return worst;
}

RealField delta_q(const RealField& f, int q, const LpPartition& P) {
  return to_physical(apply_multiplier(to_spectral(f), P.multiplier(q)));
}

RealField s_q(const RealField& f, int q, const LpPartition& P) {
  if (q < 0) throw std::out_of_range("S_q needs q >= 0");
  return to_physical(apply_multiplier(to_spectral(f), P.low_pass(q)));
}

double lp_norm(const RealField& f, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("L^p norm needs p > 1");
  const double top = f.max_abs();
  if (std::isinf(p) || top == 0.0) return top;
  double acc = 0.0;
  if (p == 2.0) {
    for (double v : f.samples()) acc += (v / top) * (v / top);
  } else {
    for (double v : f.samples()) acc += std::pow(std::abs(v) / top, p);
  }
  return top * std::pow(acc * f.grid().dx(), 1.0 / p);
}

BesovIndex::BesovIndex(double s_, double p_, double r_) : s(s_), p(p_), r(r_) {
  if (!std::isfinite(s)) throw std::invalid_argument("Besov regularity must be finite");
  if (!(p > 1.0)) throw std::invalid_argument("Besov integrability must satisfy p > 1");
  if (!(r >= 1.0) || std::isinf(r))
    throw std::invalid_argument("Besov summability must satisfy 1 <= r < inf");
}

std::vector<double> block_lp_norms(const SpectralField& F, double p, const LpPartition& P) {
  if (!(F.grid() == P.grid())) throw std::invalid_argument("partition built for another grid");
  if (!(p > 1.0)) throw std::invalid_argument("L^p norm needs p > 1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(P.q_max() + 2));
  for (int q = -1; q <= P.q_max(); ++q) {
    const auto mult = P.multiplier(q);
    if (p == 2.0) {
      const auto c = F.half();
      const std::size_t nyq = F.grid().size() / 2;
      double sum = std::norm(c[0] * mult[0]) + std::norm(c[nyq] * mult[nyq]);
      for (std::size_t i = 1; i < nyq; ++i) {
        if (mult[i] != 0.0) sum += 2.0 * std::norm(c[i] * mult[i]);
      }
      out.push_back(std::sqrt(sum / (2.0 * F.grid().half_length())));
    } else {
      out.push_back(lp_norm(to_physical(apply_multiplier(F, mult)), p));
    }
  }
  return out;
}

double besov_from_blocks(std::span<const double> block_norms, double s, double r, int max_block) {
  std::vector<double> terms;
  terms.reserve(block_norms.size());
  for (std::size_t j = 0; j < block_norms.size(); ++j) {
    const int q = static_cast<int>(j) - 1;
    if (q > max_block) break;
    terms.push_back(std::exp2(s * q) * block_norms[j]);
  }
  return lp_sum(terms, r);
}

double besov_norm(const SpectralField& F, const BesovIndex& idx, const LpPartition& P) {
  return besov_from_blocks(block_lp_norms(F, idx.p, P), idx.s, idx.r);
}

double besov_norm(const RealField& f, const BesovIndex& idx, const LpPartition& P) {
  return besov_norm(to_spectral(f), idx, P);
}

}  // namespace forqlab

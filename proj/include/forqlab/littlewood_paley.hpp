#pragma once

// Littlewood-Paley blocks and Besov norms on a periodic grid.
//
// chi is a smooth radial cutoff equal to 1 on |xi| <= 3/4 and 0 on
// |xi| >= 4/3, phi(xi) = chi(xi/2) - chi(xi) lives on the ring
// 3/4 <= |xi| <= 8/3, and
//
//   Delta_{-1} f = chi(D) f,   Delta_q f = phi(2^-q D) f  (q >= 0),
//   S_q f = chi(2^-q D) f = sum_{p=-1}^{q-1} Delta_p f,
//   |f|_{B^s_{p,r}} = ( sum_{q>=-1} (2^{sq} |Delta_q f|_{L^p})^r )^{1/r}.

#include <limits>
#include <span>
#include <vector>

#include "forqlab/spectral.hpp"

namespace forqlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// C-infinity transition: 0 for t <= 0, 1 for t >= 1, built from exp(-1/t).
double smooth_step(double t);
double lp_chi(double xi);
double lp_phi(double xi);

class LpPartition {
 public:
  explicit LpPartition(const Grid& grid);

  const Grid& grid() const { return grid_; }
  /// Top block index; chi + sum_{q <= q_max} phi_q = 1 on every retained mode.
  int q_max() const { return q_max_; }
  /// Half-spectrum samples of chi (q = -1) or phi(2^-q k) (q >= 0).
  std::span<const double> multiplier(int q) const;
  /// Half-spectrum samples of chi(2^-q k).
  std::vector<double> low_pass(int q) const;
  /// max |1 - chi - sum phi_q| over lattice modes with |k| <= 3/4 * 2^(q_max+1).
  double partition_residual() const;

 private:
  Grid grid_;
  int q_max_;
  std::vector<std::vector<double>> blocks_;  // blocks_[q+1]
};

inline LpPartition build_partition(const Grid& grid) { return LpPartition(grid); }

/// Throws std::out_of_range for q < -1 or q > q_max.
RealField delta_q(const RealField& f, int q, const LpPartition& P);
/// Low-frequency cutoff chi(2^-q D) f, q >= 0.
RealField s_q(const RealField& f, int q, const LpPartition& P);

/// Rectangle-rule L^p norm; p = kInfinity gives the max norm. Rejects p <= 1.
double lp_norm(const RealField& f, double p);

struct BesovIndex {
  double s;
  double p;
  double r;

  /// Validates p in (1, inf] and r in [1, inf).
  BesovIndex(double s, double p, double r);
};

/// |Delta_q f|_{L^p} for q = -1..q_max (entry q+1). p = 2 uses Parseval.
std::vector<double> block_lp_norms(const SpectralField& F, double p, const LpPartition& P);

/// l^r aggregation of 2^{sq} * block_norms[q+1], optionally truncated at max_block.
double besov_from_blocks(std::span<const double> block_norms, double s, double r,
                         int max_block = std::numeric_limits<int>::max());

double besov_norm(const SpectralField& F, const BesovIndex& idx, const LpPartition& P);
double besov_norm(const RealField& f, const BesovIndex& idx, const LpPartition& P);

}  // namespace forqlab

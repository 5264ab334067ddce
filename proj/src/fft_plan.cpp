#include "fft_plan.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace forqlab::detail {
namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// The FFTW planner is not reentrant; execution with the new-array interface is.
std::mutex planner_mutex;

const PlanPair& plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(planner_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // FFTW_UNALIGNED keeps the chosen codelets independent of buffer alignment,
  // which keeps results bit-reproducible across runs.
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::vector<double> real(n);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
  const int len = static_cast<int>(n);
  PlanPair pair;
  pair.forward = fftw_plan_dft_r2c_1d(len, real.data(), cplx, flags);
  pair.backward = fftw_plan_dft_c2r_1d(len, cplx, real.data(), flags);
  return cache.emplace(n, pair).first->second;
}

}  // namespace

void fft_r2c(std::size_t n, const double* in, std::complex<double>* out) {
  const PlanPair& p = plans_for(n);
  fftw_execute_dft_r2c(p.forward, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
}

void fft_c2r(std::size_t n, std::complex<double>* in, double* out) {
  const PlanPair& p = plans_for(n);
  fftw_execute_dft_c2r(p.backward, reinterpret_cast<fftw_complex*>(in), out);
}

}  // namespace forqlab::detail

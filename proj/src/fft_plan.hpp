#pragma once

#include <complex>
#include <cstddef>

namespace forqlab::detail {

// Unnormalized FFTW real transforms of length n, planned once per length.
// out has n/2+1 entries. c2r overwrites its input.
void fft_r2c(std::size_t n, const double* in, std::complex<double>* out);
void fft_c2r(std::size_t n, std::complex<double>* in, double* out);

}  // namespace forqlab::detail

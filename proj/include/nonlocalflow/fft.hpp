#pragma once

#include <complex>
#include <span>
#include <vector>

#include "nonlocalflow/grid.hpp"

namespace nlf {

// Complex spectrum in FFT index order. Coefficient m is the amplitude of
// e^{i k_m x}, so a real field satisfies c[m] = conj(c[n-m]).
using Spectrum = std::vector<std::complex<double>>;

// Forward transform of one real channel: c_m = (1/n) sum_j f_j e^{-i k_m x_j}.
Spectrum spectrum(const PeriodicGrid& grid, std::span<const double> values);

// Inverse transform; enforces realness of the output (imaginary parts from
// rounding are dropped).
std::vector<double> inverse(const PeriodicGrid& grid, const Spectrum& coeff);

// In-place complex transforms (unscaled inverse of `spectrum` pairing).
void fft_forward(Spectrum& data);   // divides by n
void fft_backward(Spectrum& data);  // no scaling

}  // namespace nlf

#pragma once

#include <complex>
#include <vector>

#include "nonlocalflow/fft.hpp"
#include "nonlocalflow/grid.hpp"

namespace nlf {

// Fourier multiplier sampled on a grid's wavenumbers, one complex value per
// mode. For real-output operators m(-k) = conj(m(k)) and the unpaired
// Nyquist mode is forced real (zero for odd multipliers).
struct MultiplierOp {
  PeriodicGrid grid;
  std::vector<std::complex<double>> values;

  static MultiplierOp fractional_laplacian(const PeriodicGrid& grid, double s);
  static MultiplierOp hilbert(const PeriodicGrid& grid);
  static MultiplierOp derivative(const PeriodicGrid& grid, unsigned order);
  // Sampling of the trig interpolant at x - alpha; the Nyquist cosine picks
  // up the factor cos(k alpha), the value its samples take on the grid.
  static MultiplierOp shift(const PeriodicGrid& grid, double alpha);
  static MultiplierOp dealias(const PeriodicGrid& grid);  // 2/3 rule
};

// Applies the multiplier channel-wise.
PeriodicField apply(const MultiplierOp& op, const PeriodicField& f);

PeriodicField fractional_laplacian(const PeriodicField& f, double s);
PeriodicField hilbert_transform(const PeriodicField& f);
PeriodicField derivative(const PeriodicField& f, unsigned order);
PeriodicField dealias(const PeriodicField& f);

// f(. - alpha) by trigonometric interpolation (exact index shift when alpha
// is a grid multiple).
PeriodicField shift(const PeriodicField& f, double alpha);

// delta_alpha f = f - f(. - alpha); slope form divides by alpha (alpha != 0).
PeriodicField finite_difference(const PeriodicField& f, double alpha);
PeriodicField slope(const PeriodicField& f, double alpha);

// Discrete Parseval energy: sum over modes of |c_m|^2 (per channel summed).
double spectral_energy(const PeriodicField& f);
double grid_energy(const PeriodicField& f);  // (1/n) sum_j |f_j|^2

}  // namespace nlf

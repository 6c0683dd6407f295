#pragma once

#include <functional>
#include <vector>

#include "nonlocalflow/grid.hpp"

namespace nlf {

// Half-offset quadrature lattice alpha_j = (j + 1/2) h_alpha covering one
// period (-pi L/2pi, pi L/2pi], j = -M..M-1, with h_alpha = h / refine.
// alpha = 0 is never sampled; the lattice is symmetric, so odd-singular
// kernels cancel in +-alpha pairs.
struct OffsetLattice {
  PeriodicGrid grid;
  std::size_t refine = 1;

  std::size_t half_count() const { return refine * grid.n / 2; }  // M
  double step() const { return grid.spacing() / static_cast<double>(refine); }
  // offsets indexed p = 0..2M-1 mapping to j = p - M
  double offset(std::size_t p) const {
    const long j = static_cast<long>(p) - static_cast<long>(half_count());
    return (static_cast<double>(j) + 0.5) * step();
  }
  std::size_t count() const { return 2 * half_count(); }
};

// Periodized singular kernels on the 2pi-torus.
double cot_half_weight(double alpha);   // sum_n 1/(alpha+2pi n)     = (1/2) cot(alpha/2)
double csc2_weight(double alpha);       // sum_n 1/(alpha+2pi n)^2   = 1/(4 sin^2(alpha/2))
double abs32_weight(double alpha);      // sum_n |alpha+2pi n|^{-3/2}

// Kernel constant of Lambda^{1/2} on the line: Lambda^{1/2} f
//   = lambda_half_constant * int delta_alpha f |alpha|^{-3/2} d alpha.
inline constexpr double lambda_half_constant = 0.19947114020071633897;  // 1/(2 sqrt(2 pi))

// Exact moment of the periodic singularity-subtraction profile
// p(alpha) = 2(1 - cos alpha) against the |alpha|^{-3/2} image kernel:
// int_{-pi}^{pi} p W32 = int_R 2(1-cos a)|a|^{-3/2} da = 4 sqrt(2 pi).
// (Equivalently Lambda^{1/2}[2 cos](0) / lambda_half_constant.)
inline constexpr double abs32_sin2_moment = 10.026513098524001045;  // 4 sqrt(2 pi)

// Samples of f(x_i - alpha_j) for every node and offset of a lattice,
// realized as `refine` spectrally shifted copies of each channel.
class ShiftedSamples {
 public:
  ShiftedSamples(const PeriodicField& f, const OffsetLattice& lattice);

  // value of channel c at x_i - alpha_{p} (p = 0..2M-1)
  double operator()(std::size_t c, std::size_t i, std::size_t p) const {
    const long j = static_cast<long>(p) - static_cast<long>(half_count_);
    const long q = j >= 0 ? j / static_cast<long>(refine_)
                          : -((-j - 1) / static_cast<long>(refine_)) - 1;  // floor division
    const long r = j - q * static_cast<long>(refine_);
    long idx = (static_cast<long>(i) - q) % static_cast<long>(n_);
    if (idx < 0) idx += static_cast<long>(n_);
    return copies_[static_cast<std::size_t>(r)]
                  [c * n_ + static_cast<std::size_t>(idx)];
  }

  std::size_t channels() const { return channels_; }

 private:
  std::size_t n_ = 0, refine_ = 1, half_count_ = 0, channels_ = 0;
  // copies_[r][c*n + m] = f_c(x_m - (2r+1) h / (2 refine))
  std::vector<std::vector<double>> copies_;
};

// Aborted quadrature diagnostics: the offending sample location.
struct QuadratureError : std::runtime_error {
  double x, alpha;
  QuadratureError(double x_, double alpha_, const std::string& what)
      : std::runtime_error(what), x(x_), alpha(alpha_) {}
};

// Trapezoid (midpoint) sum over the offset lattice of
// weight(alpha) * integrand(x, alpha), accumulated in symmetric +-alpha
// pairs from the smallest |alpha| outward. Non-finite samples abort with the
// offending (x, alpha).
PeriodicField pv_quadrature(const OffsetLattice& lattice,
                            const std::function<double(double)>& weight,
                            const std::function<double(double, double)>& integrand,
                            Exec exec = Exec::parallel);

}  // namespace nlf

#include "nonlocalflow/pvquad.hpp"

#include <cmath>

#include "nonlocalflow/spectral.hpp"

namespace nlf {

double cot_half_weight(double alpha) { return 0.5 / std::tan(0.5 * alpha); }

double csc2_weight(double alpha) {
  const double s = std::sin(0.5 * alpha);
  return 0.25 / (s * s);
}

double abs32_weight(double alpha) {
  // Direct sum of the image series plus a midpoint Euler-Maclaurin tail:
  // sum_{n>N} g(n) = int_{N+1/2} g + g'(N+1/2)/24 + O(g''').
  const double p = 1.5;
  double w = std::pow(std::abs(alpha), -p);
  const int N = 512;
  for (int n = 1; n <= N; ++n)
    w += std::pow(two_pi * n + alpha, -p) + std::pow(two_pi * n - alpha, -p);
  const double edge = two_pi * (N + 0.5);
  w += (2.0 / two_pi) * (std::pow(edge + alpha, -0.5) + std::pow(edge - alpha, -0.5));
  w -= (p * two_pi / 24.0) * (std::pow(edge + alpha, -p - 1.0) + std::pow(edge - alpha, -p - 1.0));
  return w;
}

ShiftedSamples::ShiftedSamples(const PeriodicField& f, const OffsetLattice& lattice)
    : n_(f.grid().n),
      refine_(lattice.refine),
      half_count_(lattice.half_count()),
      channels_(f.channels()) {
  copies_.resize(refine_);
  const double h = f.grid().spacing();
  for (std::size_t r = 0; r < refine_; ++r) {
    const double s = (2.0 * static_cast<double>(r) + 1.0) * h /
                     (2.0 * static_cast<double>(refine_));
    PeriodicField shifted = shift(f, s);
    copies_[r] = shifted.raw();
  }
}

PeriodicField pv_quadrature(const OffsetLattice& lattice,
                            const std::function<double(double)>& weight,
                            const std::function<double(double, double)>& integrand,
                            Exec exec) {
  const PeriodicGrid& grid = lattice.grid;
  const std::size_t M = lattice.half_count();
  const double h_alpha = lattice.step();

  std::vector<double> w_pos(M), alpha_pos(M);
  for (std::size_t j = 0; j < M; ++j) {
    alpha_pos[j] = (static_cast<double>(j) + 0.5) * h_alpha;
    w_pos[j] = weight(alpha_pos[j]);
  }
  // the lattice is symmetric: offset(-1-j) = -alpha_pos[j]
  std::vector<double> w_neg(M);
  for (std::size_t j = 0; j < M; ++j) w_neg[j] = weight(-alpha_pos[j]);

  PeriodicField out(grid, 1);
  // Exceptions may not escape an OpenMP region; record the first bad sample
  // and rethrow afterwards.
  bool bad = false;
  double bad_x = 0.0, bad_alpha = 0.0;

  auto body = [&](std::size_t i) {
    const double x = grid.node(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      const double a = alpha_pos[j];
      const double up = integrand(x, a);
      const double un = integrand(x, -a);
      if (!std::isfinite(up) || !std::isfinite(un)) {
#pragma omp critical(nlf_pvquad_err)
        if (!bad) {
          bad = true;
          bad_x = x;
          bad_alpha = std::isfinite(up) ? -a : a;
        }
        return;
      }
      acc += w_pos[j] * up + w_neg[j] * un;
    }
    out(0, i) = acc * h_alpha;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < grid.n; ++i) body(i);
  } else {
    for (std::size_t i = 0; i < grid.n; ++i) body(i);
  }
  if (bad) throw QuadratureError(bad_x, bad_alpha, "pv_quadrature: non-finite integrand");
  return out;
}

}  // namespace nlf

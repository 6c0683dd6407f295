#include "nonlocalflow/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace nlf {

namespace {
constexpr std::complex<double> I{0.0, 1.0};
}

MultiplierOp MultiplierOp::fractional_laplacian(const PeriodicGrid& grid, double s) {
  if (!(s >= 0.0) || !std::isfinite(s))
    throw std::invalid_argument("fractional_laplacian: order s must be finite and >= 0");
  MultiplierOp op{grid, std::vector<std::complex<double>>(grid.n)};
  for (std::size_t m = 0; m < grid.n; ++m) {
    const double k = grid.wavenumber(m);
    op.values[m] = (k == 0.0) ? (s > 0.0 ? 0.0 : 1.0) : std::pow(std::abs(k), s);
  }
  return op;
}

MultiplierOp MultiplierOp::hilbert(const PeriodicGrid& grid) {
  MultiplierOp op{grid, std::vector<std::complex<double>>(grid.n)};
  for (std::size_t m = 0; m < grid.n; ++m) {
    const long mode = grid.signed_mode(m);
    if (mode == 0 || m == grid.n / 2)
      op.values[m] = 0.0;  // sgn(0) = 0; odd multiplier zeroes the Nyquist
    else
      op.values[m] = -I * static_cast<double>(mode > 0 ? 1 : -1);
  }
  return op;
}

MultiplierOp MultiplierOp::derivative(const PeriodicGrid& grid, unsigned order) {
  if (order > 12) throw std::invalid_argument("derivative: order must be <= 12");
  MultiplierOp op{grid, std::vector<std::complex<double>>(grid.n)};
  for (std::size_t m = 0; m < grid.n; ++m) {
    if (m == grid.n / 2 && order % 2 == 1) {
      op.values[m] = 0.0;
      continue;
    }
    op.values[m] = std::pow(I * grid.wavenumber(m), static_cast<double>(order));
  }
  return op;
}

MultiplierOp MultiplierOp::shift(const PeriodicGrid& grid, double alpha) {
  MultiplierOp op{grid, std::vector<std::complex<double>>(grid.n)};
  for (std::size_t m = 0; m < grid.n; ++m) {
    const double k = grid.wavenumber(m);
    op.values[m] = (m == grid.n / 2) ? std::cos(k * alpha) : std::exp(-I * k * alpha);
  }
  return op;
}

MultiplierOp MultiplierOp::dealias(const PeriodicGrid& grid) {
  MultiplierOp op{grid, std::vector<std::complex<double>>(grid.n)};
  const long cutoff = static_cast<long>(grid.n) / 3;
  for (std::size_t m = 0; m < grid.n; ++m)
    op.values[m] = std::abs(grid.signed_mode(m)) > cutoff ? 0.0 : 1.0;
  return op;
}

PeriodicField apply(const MultiplierOp& op, const PeriodicField& f) {
  PeriodicField out(f.grid(), f.channels());
  for (std::size_t c = 0; c < f.channels(); ++c) {
    Spectrum coeff = spectrum(f.grid(), f.channel(c));
    for (std::size_t m = 0; m < coeff.size(); ++m) coeff[m] *= op.values[m];
    auto vals = inverse(f.grid(), coeff);
    std::copy(vals.begin(), vals.end(), out.channel(c).begin());
  }
  return out;
}

PeriodicField fractional_laplacian(const PeriodicField& f, double s) {
  return apply(MultiplierOp::fractional_laplacian(f.grid(), s), f);
}

PeriodicField hilbert_transform(const PeriodicField& f) {
  return apply(MultiplierOp::hilbert(f.grid()), f);
}

PeriodicField derivative(const PeriodicField& f, unsigned order) {
  return apply(MultiplierOp::derivative(f.grid(), order), f);
}

PeriodicField dealias(const PeriodicField& f) {
  return apply(MultiplierOp::dealias(f.grid()), f);
}

PeriodicField shift(const PeriodicField& f, double alpha) {
  const double h = f.grid().spacing();
  const double steps = alpha / h;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) < 1e-12) {
    // exact index shift
    const long n = static_cast<long>(f.grid().n);
    long off = static_cast<long>(rounded) % n;
    if (off < 0) off += n;
    PeriodicField out(f.grid(), f.channels());
    for (std::size_t c = 0; c < f.channels(); ++c)
      for (long i = 0; i < n; ++i)
        out(c, static_cast<std::size_t>(i)) =
            f(c, static_cast<std::size_t>((i - off + n) % n));
    return out;
  }
  return apply(MultiplierOp::shift(f.grid(), alpha), f);
}

PeriodicField finite_difference(const PeriodicField& f, double alpha) {
  PeriodicField shifted = shift(f, alpha);
  PeriodicField out(f.grid(), f.channels());
  for (std::size_t i = 0; i < f.raw().size(); ++i)
    out.raw()[i] = f.raw()[i] - shifted.raw()[i];
  return out;
}

PeriodicField slope(const PeriodicField& f, double alpha) {
  if (alpha == 0.0) throw std::invalid_argument("slope: alpha must be nonzero");
  PeriodicField out = finite_difference(f, alpha);
  for (double& v : out.raw()) v /= alpha;
  return out;
}

double spectral_energy(const PeriodicField& f) {
  double e = 0.0;
  for (std::size_t c = 0; c < f.channels(); ++c) {
    Spectrum coeff = spectrum(f.grid(), f.channel(c));
    for (const auto& z : coeff) e += std::norm(z);
  }
  return e;
}

double grid_energy(const PeriodicField& f) {
  double e = 0.0;
  for (double v : f.raw()) e += v * v;
  return e / static_cast<double>(f.grid().n);
}

}  // namespace nlf

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlf {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Uniform periodic grid on [0, L) with n equispaced nodes x_j = j L / n.
// Wavenumbers follow the usual FFT layout: mode index m < n/2 carries the
// signed mode m, index m >= n/2 carries m - n.
struct PeriodicGrid {
  std::size_t n = 0;
  double period = two_pi;

  double spacing() const { return period / static_cast<double>(n); }
  double node(std::size_t i) const { return spacing() * static_cast<double>(i); }

  long signed_mode(std::size_t idx) const {
    return idx < n / 2 ? static_cast<long>(idx)
                       : static_cast<long>(idx) - static_cast<long>(n);
  }
  double wavenumber(std::size_t idx) const {
    return two_pi / period * static_cast<double>(signed_mode(idx));
  }

  bool operator==(const PeriodicGrid&) const = default;
};

inline bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

inline PeriodicGrid make_grid(std::size_t n, double period = two_pi) {
  if (n < 16 || !is_power_of_two(n))
    throw std::invalid_argument("PeriodicGrid: n must be a power of two, n >= 16 (got " +
                                std::to_string(n) + ")");
  if (!(period > 0.0) || !std::isfinite(period))
    throw std::invalid_argument("PeriodicGrid: period must be positive and finite");
  return PeriodicGrid{n, period};
}

// Sampled field on a PeriodicGrid with one or more real value channels.
// Complex-valued quantities are stored as two real channels.
class PeriodicField {
 public:
  PeriodicField() = default;
  PeriodicField(PeriodicGrid grid, std::size_t channels, double fill = 0.0)
      : grid_(grid), channels_(channels), data_(channels * grid.n, fill) {}

  const PeriodicGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.n; }
  std::size_t channels() const { return channels_; }

  double& operator()(std::size_t c, std::size_t i) { return data_[c * grid_.n + i]; }
  double operator()(std::size_t c, std::size_t i) const { return data_[c * grid_.n + i]; }

  std::span<double> channel(std::size_t c) { return {data_.data() + c * grid_.n, grid_.n}; }
  std::span<const double> channel(std::size_t c) const {
    return {data_.data() + c * grid_.n, grid_.n};
  }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  PeriodicGrid grid_{};
  std::size_t channels_ = 0;
  std::vector<double> data_;
};

// Execution policy for the data-parallel kernels. The parallel path writes
// only disjoint output slots and keeps every inner reduction in a fixed
// serial order, so serial and parallel results are bit-identical.
enum class Exec { serial, parallel };

inline double linf_diff(const PeriodicField& a, const PeriodicField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i)
    m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
  return m;
}

}  // namespace nlf

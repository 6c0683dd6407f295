#include "nonlocalflow/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace nlf {
namespace {

// FFTW plans are cached per size; the planner is not thread-safe, execution
// with fftw_execute_dft on distinct buffers is.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

std::mutex planner_mutex;
std::map<std::size_t, PlanPair>& plan_cache() {
  static std::map<std::size_t, PlanPair> cache;
  return cache;
}

PlanPair get_plans(std::size_t n) {
  std::lock_guard<std::mutex> lock(planner_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  fftw_complex* buf = fftw_alloc_complex(n);
  PlanPair plans;
  plans.forward = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  plans.backward = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(buf);
  cache[n] = plans;
  return plans;
}

}  // namespace

void fft_forward(Spectrum& data) {
  const std::size_t n = data.size();
  PlanPair plans = get_plans(n);
  fftw_execute_dft(plans.forward, reinterpret_cast<fftw_complex*>(data.data()),
                   reinterpret_cast<fftw_complex*>(data.data()));
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& c : data) c *= scale;
}

void fft_backward(Spectrum& data) {
  const std::size_t n = data.size();
  PlanPair plans = get_plans(n);
  fftw_execute_dft(plans.backward, reinterpret_cast<fftw_complex*>(data.data()),
                   reinterpret_cast<fftw_complex*>(data.data()));
}

Spectrum spectrum(const PeriodicGrid& grid, std::span<const double> values) {
  Spectrum data(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) data[i] = values[i];
  fft_forward(data);
  return data;
}

std::vector<double> inverse(const PeriodicGrid& grid, const Spectrum& coeff) {
  Spectrum data = coeff;
  fft_backward(data);
  std::vector<double> out(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) out[i] = data[i].real();
  return out;
}

}  // namespace nlf

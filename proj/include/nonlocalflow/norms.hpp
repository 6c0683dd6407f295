#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "nonlocalflow/grid.hpp"

namespace nlf {

// Estimated homogeneous Holder seminorm, with the node/offset pair that
// attains the supremum and the window (in grid steps) that was scanned.
struct HolderReport {
  double order = 0.0;
  double value = 0.0;
  double argmax_x = 0.0;
  double argmax_alpha = 0.0;
  std::size_t window = 0;
};

// Per-block Littlewood-Paley values 2^{js} ||block_j f||_inf and their max.
struct BesovReport {
  double order = 0.0;
  double value = 0.0;
  std::vector<int> blocks;
  std::vector<double> block_values;  // weighted by 2^{js}
  int argmax_block = 0;
};

// Frozen dyadic bump: psi = 1 on [0,2], 0 on [8/3,inf), cos^2-type ramp
// psi(r) = sin^2((pi/2)(8/3 - r)/(2/3)) in between; phi(r) = psi(r) - psi(2r)
// has support in [1, 8/3] and the blocks telescope exactly to 1 on every
// nonzero mode.
double dyadic_bump(double r);

// sup over node/offset pairs of |delta_alpha grad^[a] f| / |alpha|^{a-[a]}
// with the torus metric for |alpha|. Exhaustive when window >= n/2.
// Applied channel-wise, the max over channels is reported. Integer a is
// rejected (use sup-norms of derivatives instead).
HolderReport holder_seminorm(const PeriodicField& f, double a,
                             std::size_t window = SIZE_MAX, Exec exec = Exec::parallel);

BesovReport besov_seminorm(const PeriodicField& f, double s);

// sup-norm helpers used by traces: ||f||_inf and ||f'||_inf.
double sup_norm(const PeriodicField& f);
double lip_norm(const PeriodicField& f);

// Arc-chord constant of a two-channel curve: sup over node pairs of
// torus-distance / chord-length. Throws on chords below 1e-14.
struct ArcChordError : std::runtime_error {
  std::size_t i, j;
  ArcChordError(std::size_t i_, std::size_t j_, const std::string& what)
      : std::runtime_error(what), i(i_), j(j_) {}
};
double arc_chord(const PeriodicField& X, Exec exec = Exec::parallel);

// One record of a diagnostics trace.
struct TraceRecord {
  double t = 0.0;
  double linf = 0.0;
  double lip = 0.0;
  std::vector<double> holder;    // one per requested order
  std::vector<double> weighted;  // t^w * holder value, parallel arrays
  std::optional<double> arc_chord;
  std::optional<double> q;
  std::optional<std::complex<double>> z0, z1;
};

class DiagnosticsTrace {
 public:
  DiagnosticsTrace() = default;
  DiagnosticsTrace(std::vector<double> orders, std::vector<double> weights)
      : orders_(std::move(orders)), weights_(std::move(weights)) {}

  const std::vector<double>& orders() const { return orders_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<TraceRecord>& records() const { return records_; }

  // Appends a record at time t (strictly increasing), computing the norm
  // columns from f and the weighted values t^w * holder_a.
  const TraceRecord& update(double t, const PeriodicField& f,
                            std::size_t holder_window = SIZE_MAX);

  void annotate_arc_chord(double theta) { records_.back().arc_chord = theta; }
  void annotate_q(double q) { records_.back().q = q; }
  void annotate_projection(std::complex<double> z0, std::complex<double> z1) {
    records_.back().z0 = z0;
    records_.back().z1 = z1;
  }

  std::string csv() const;

 private:
  std::vector<double> orders_;
  std::vector<double> weights_;
  std::vector<TraceRecord> records_;
};

// Q-quantity of a trace of two-channel states: sup over recorded t > 0,
// nodes and grid offsets of (|alpha|/t)^eps |1/|D_a X(t)| - 1/|D_a X(0)||,
// with D_a the slope delta_alpha/alpha. Chords below 1e-14 abort.
double q_quantity(const std::vector<std::pair<double, PeriodicField>>& trace,
                  double eps = 0.05);

// Incremental form: the inner sup at one time level against the base state.
double q_increment(const PeriodicField& X0, const PeriodicField& Xt, double t,
                   double eps = 0.05);

}  // namespace nlf

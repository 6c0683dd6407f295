#include "nonlocalflow/norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "nonlocalflow/fft.hpp"
#include "nonlocalflow/spectral.hpp"

namespace nlf {

namespace {

bool is_integer(double a) { return a == std::floor(a); }

double torus_distance(double d, double period) {
  d = std::fmod(std::abs(d), period);
  return std::min(d, period - d);
}

}  // namespace

double dyadic_bump(double r) {
  r = std::abs(r);
  auto psi = [](double v) {
    if (v <= 2.0) return 1.0;
    if (v >= 8.0 / 3.0) return 0.0;
    const double u = (8.0 / 3.0 - v) / (2.0 / 3.0);
    const double s = std::sin(0.5 * std::numbers::pi * u);
    return s * s;
  };
  return psi(r) - psi(2.0 * r);
}

HolderReport holder_seminorm(const PeriodicField& f, double a, std::size_t window,
                             Exec exec) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument("holder_seminorm: order must be positive and finite");
  if (is_integer(a))
    throw std::invalid_argument(
        "holder_seminorm: integer orders are sup-norms of derivatives, not Holder "
        "seminorms");
  const unsigned whole = static_cast<unsigned>(std::floor(a));
  const double frac = a - whole;
  const PeriodicField g = whole == 0 ? f : derivative(f, whole);
  const PeriodicGrid& grid = f.grid();
  const std::size_t n = grid.n;
  const std::size_t kmax = std::min(window, n / 2);
  const double h = grid.spacing();

  // best ratio per offset k (disjoint writes; deterministic inner order)
  std::vector<double> best(kmax + 1, 0.0);
  std::vector<std::size_t> best_i(kmax + 1, 0);

  auto body = [&](std::size_t k) {
    const double denom = std::pow(torus_distance(static_cast<double>(k) * h, grid.period), frac);
    double b = 0.0;
    std::size_t bi = 0;
    for (std::size_t c = 0; c < g.channels(); ++c) {
      auto vals = g.channel(c);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = std::abs(vals[i] - vals[(i + n - k) % n]);
        if (d > b) {
          b = d;
          bi = i;
        }
      }
    }
    best[k] = b / denom;
    best_i[k] = bi;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t k = 1; k <= kmax; ++k) body(k);
  } else {
    for (std::size_t k = 1; k <= kmax; ++k) body(k);
  }

  HolderReport rep;
  rep.order = a;
  rep.window = kmax;
  for (std::size_t k = 1; k <= kmax; ++k) {
    if (best[k] > rep.value) {
      rep.value = best[k];
      rep.argmax_x = grid.node(best_i[k]);
      rep.argmax_alpha = static_cast<double>(k) * h;
    }
  }
  return rep;
}

BesovReport besov_seminorm(const PeriodicField& f, double s) {
  const PeriodicGrid& grid = f.grid();
  BesovReport rep;
  rep.order = s;

  // resolvable blocks: every mode of the block must lie within |k| <= n/2
  const double kmax = static_cast<double>(grid.n) / 2.0;
  const int j_hi = static_cast<int>(std::floor(std::log2(kmax / (8.0 / 3.0))));
  const int j_lo = -2;

  for (int j = j_lo; j <= j_hi; ++j) {
    const double scale = std::pow(2.0, -j);
    PeriodicField block(grid, f.channels());
    for (std::size_t c = 0; c < f.channels(); ++c) {
      Spectrum coeff = spectrum(grid, f.channel(c));
      for (std::size_t m = 0; m < coeff.size(); ++m)
        coeff[m] *= dyadic_bump(scale * std::abs(grid.wavenumber(m)));
      auto vals = inverse(grid, coeff);
      std::copy(vals.begin(), vals.end(), block.channel(c).begin());
    }
    const double weighted = std::pow(2.0, j * s) * block.max_abs();
    rep.blocks.push_back(j);
    rep.block_values.push_back(weighted);
    if (weighted > rep.value) {
      rep.value = weighted;
      rep.argmax_block = j;
    }
  }
  return rep;
}

double sup_norm(const PeriodicField& f) { return f.max_abs(); }

double lip_norm(const PeriodicField& f) { return derivative(f, 1).max_abs(); }

double arc_chord(const PeriodicField& X, Exec exec) {
  if (X.channels() != 2)
    throw std::invalid_argument("arc_chord: expects a two-channel curve");
  const PeriodicGrid& grid = X.grid();
  const std::size_t n = grid.n;
  const double h = grid.spacing();
  auto x1 = X.channel(0);
  auto x2 = X.channel(1);

  std::vector<double> best(n / 2 + 1, 0.0);
  bool degenerate = false;
  std::size_t bad_i = 0, bad_j = 0;

  auto body = [&](std::size_t k) {
    const double dist = torus_distance(static_cast<double>(k) * h, grid.period);
    double worst_chord = std::numeric_limits<double>::infinity();
    std::size_t wi = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + k) % n;
      const double dx = x1[i] - x1[j];
      const double dy = x2[i] - x2[j];
      const double chord = std::sqrt(dx * dx + dy * dy);
      if (chord < worst_chord) {
        worst_chord = chord;
        wi = i;
      }
    }
    if (worst_chord < 1e-14) {
#pragma omp critical(nlf_arc_chord_err)
      {
        if (!degenerate) {
          degenerate = true;
          bad_i = wi;
          bad_j = (wi + k) % n;
        }
      }
      return;
    }
    best[k] = dist / worst_chord;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t k = 1; k <= n / 2; ++k) body(k);
  } else {
    for (std::size_t k = 1; k <= n / 2; ++k) body(k);
  }
  if (degenerate)
    throw ArcChordError(bad_i, bad_j,
                        "arc_chord: chord below 1e-14 at distinct nodes (self-intersection?)");
  double theta = 0.0;
  for (std::size_t k = 1; k <= n / 2; ++k) theta = std::max(theta, best[k]);
  return theta;
}

const TraceRecord& DiagnosticsTrace::update(double t, const PeriodicField& f,
                                            std::size_t holder_window) {
  if (!records_.empty() && !(t > records_.back().t))
    throw std::invalid_argument("DiagnosticsTrace: time must be strictly increasing");
  TraceRecord rec;
  rec.t = t;
  rec.linf = sup_norm(f);
  rec.lip = lip_norm(f);
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    const double v = holder_seminorm(f, orders_[i], holder_window).value;
    rec.holder.push_back(v);
    const double w = i < weights_.size() ? weights_[i] : 0.0;
    rec.weighted.push_back(std::pow(t, w) * v);
  }
  if (!std::isfinite(rec.linf) || !std::isfinite(rec.lip))
    throw std::runtime_error("DiagnosticsTrace: non-finite record");
  for (double v : rec.holder)
    if (!std::isfinite(v)) throw std::runtime_error("DiagnosticsTrace: non-finite record");
  records_.push_back(std::move(rec));
  return records_.back();
}

namespace {
std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

std::string DiagnosticsTrace::csv() const {
  const bool has_arc = !records_.empty() && records_.front().arc_chord.has_value();
  const bool has_q = !records_.empty() && records_.front().q.has_value();
  const bool has_z = !records_.empty() && records_.front().z0.has_value();

  std::string out = "t,linf,lip";
  for (double a : orders_) out += ",holder_" + fmt17(a);
  for (std::size_t i = 0; i < orders_.size(); ++i)
    out += ",wnorm_" + fmt17(orders_[i]) + "_" + fmt17(i < weights_.size() ? weights_[i] : 0.0);
  if (has_arc) out += ",arcchord";
  if (has_q) out += ",q";
  if (has_z) out += ",z0_re,z0_im,z1_re,z1_im";
  out += "\n";

  for (const auto& r : records_) {
    out += fmt17(r.t) + "," + fmt17(r.linf) + "," + fmt17(r.lip);
    for (double v : r.holder) out += "," + fmt17(v);
    for (double v : r.weighted) out += "," + fmt17(v);
    if (has_arc) out += "," + fmt17(r.arc_chord.value_or(0.0));
    if (has_q) out += "," + fmt17(r.q.value_or(0.0));
    if (has_z) {
      out += "," + fmt17(r.z0->real()) + "," + fmt17(r.z0->imag());
      out += "," + fmt17(r.z1->real()) + "," + fmt17(r.z1->imag());
    }
    out += "\n";
  }
  return out;
}

double q_increment(const PeriodicField& X0, const PeriodicField& Xt, double t, double eps) {
  const PeriodicGrid& grid = X0.grid();
  const std::size_t n = grid.n;
  const double h = grid.spacing();
  auto chord = [&](const PeriodicField& X, std::size_t i, std::size_t k) {
    const std::size_t j = (i + n - k) % n;
    double s2 = 0.0;
    for (std::size_t c = 0; c < X.channels(); ++c) {
      const double d = X(c, i) - X(c, j);
      s2 += d * d;
    }
    return std::sqrt(s2);
  };
  double q = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    double alpha = static_cast<double>(k) * h;
    if (alpha > grid.period / 2) alpha -= grid.period;  // offsets in (-L/2, L/2)
    const double weight = std::pow(std::abs(alpha) / t, eps);
    for (std::size_t i = 0; i < n; ++i) {
      const double c0 = chord(X0, i, k) / std::abs(alpha);
      const double ct = chord(Xt, i, k) / std::abs(alpha);
      if (c0 < 1e-14 || ct < 1e-14) throw std::runtime_error("q_quantity: degenerate chord");
      q = std::max(q, weight * std::abs(1.0 / ct - 1.0 / c0));
    }
  }
  return q;
}

double q_quantity(const std::vector<std::pair<double, PeriodicField>>& trace, double eps) {
  if (trace.size() < 2)
    throw std::invalid_argument("q_quantity: needs at least two time records");
  const PeriodicField& X0 = trace.front().second;
  double q = 0.0;
  for (std::size_t r = 1; r < trace.size(); ++r) {
    const double t = trace[r].first;
    if (!(t > 0.0)) continue;
    q = std::max(q, q_increment(X0, trace[r].second, t, eps));
  }
  return q;
}

}  // namespace nlf

#include "nonlocalflow/muskat.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "nonlocalflow/norms.hpp"
#include "nonlocalflow/spectral.hpp"

namespace nlf {

namespace {

constexpr double inv_pi = 1.0 / std::numbers::pi;

// cached periodized weights per lattice geometry
struct Weights {
  std::vector<double> cot, csc2;
};
const Weights& lattice_weights(const OffsetLattice& lat) {
  static std::mutex mu;
  static std::map<std::tuple<std::size_t, std::size_t, double>, Weights> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(lat.grid.n, lat.refine, lat.grid.period);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  Weights w;
  w.cot.resize(lat.count());
  w.csc2.resize(lat.count());
  for (std::size_t p = 0; p < lat.count(); ++p) {
    const double a = lat.offset(p);
    w.cot[p] = cot_half_weight(a);
    w.csc2[p] = csc2_weight(a);
  }
  return cache.emplace(key, std::move(w)).first->second;
}

struct MuskatPrecompute {
  PeriodicField bundle;  // 0:f 1:f' 2:f'' 3:Ups 4:curv' 5:d/dx(curv - rho0 f)
  PeriodicField lam1, lam3;
};

MuskatPrecompute precompute(const PeriodicField& f, double rho0) {
  const PeriodicGrid& g = f.grid();
  MuskatPrecompute pre{PeriodicField(g, 6), PeriodicField(g, 1), PeriodicField(g, 1)};
  PeriodicField fp = derivative(f, 1);
  PeriodicField fpp = derivative(f, 2);
  PeriodicField curv(g, 1);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double d = fp(0, i);
    curv(0, i) = fpp(0, i) / std::pow(1.0 + d * d, 1.5);
  }
  PeriodicField curvp = derivative(curv, 1);
  pre.lam1 = fractional_laplacian(f, 1.0);
  pre.lam3 = fractional_laplacian(f, 3.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double d = fp(0, i);
    pre.bundle(0, i) = f(0, i);
    pre.bundle(1, i) = d;
    pre.bundle(2, i) = fpp(0, i);
    pre.bundle(3, i) = std::pow(1.0 + d * d, -1.5);
    pre.bundle(4, i) = curvp(0, i);
    pre.bundle(5, i) = curvp(0, i) - rho0 * fp(0, i);
  }
  return pre;
}

struct BadSample {
  bool bad = false;
  double x = 0.0, alpha = 0.0;
};

}  // namespace

PeriodicField curvature(const PeriodicField& f) {
  const PeriodicGrid& g = f.grid();
  PeriodicField fp = derivative(f, 1);
  PeriodicField fpp = derivative(f, 2);
  PeriodicField out(g, 1);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double d = fp(0, i);
    out(0, i) = fpp(0, i) / std::pow(1.0 + d * d, 1.5);
  }
  return out;
}

MuskatRhs rhs_reformulated(const PeriodicField& f, double rho0, std::size_t refine, Exec exec) {
  const PeriodicGrid& g = f.grid();
  OffsetLattice lat{g, refine};
  const auto& w = lattice_weights(lat);
  auto pre = precompute(f, rho0);
  ShiftedSamples table(pre.bundle, lat);
  const std::size_t M = lat.half_count();
  const double scale = lat.step() * inv_pi;

  MuskatRhs out;
  out.n1 = PeriodicField(g, 1);
  out.n2 = PeriodicField(g, 1);
  out.n3 = PeriodicField(g, 1);
  out.dissipation = PeriodicField(g, 1);
  out.total = PeriodicField(g, 1);
  BadSample bad;

  auto body = [&](std::size_t i) {
    const double fx = pre.bundle(0, i);
    const double fpx = pre.bundle(1, i);
    const double upsx = pre.bundle(3, i);
    double n1 = 0.0, n2 = 0.0, n3i = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      // symmetric +-alpha pair, smallest |alpha| first
      for (std::size_t p : {M + j, M - 1 - j}) {
        const double wc = w.cot[p];
        const double slope = (fx - table(0, i, p)) * wc;
        const double escr = fpx - slope;
        const double denom = 1.0 + slope * slope;
        const double bracket = slope * escr / denom;
        n1 += bracket * table(4, i, p) * wc;
        n3i += bracket * table(1, i, p) * wc;
        n2 += table(2, i, p) * (table(3, i, p) - upsx) * w.csc2[p];
      }
    }
    n1 *= scale;
    n2 *= -scale;
    const double n3 = -n3i * scale - pre.lam1(0, i);
    const double diss = -pre.lam3(0, i) * upsx;
    if (!std::isfinite(n1) || !std::isfinite(n2) || !std::isfinite(n3)) {
#pragma omp critical(nlf_muskat_err)
      if (!bad.bad) {
        bad.bad = true;
        bad.x = g.node(i);
      }
      return;
    }
    out.n1(0, i) = n1;
    out.n2(0, i) = n2;
    out.n3(0, i) = n3;
    out.dissipation(0, i) = diss;
    out.total(0, i) = diss + n1 + n2 + rho0 * n3;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < g.n; ++i) body(i);
  } else {
    for (std::size_t i = 0; i < g.n; ++i) body(i);
  }
  if (bad.bad) throw QuadratureError(bad.x, bad.alpha, "rhs_reformulated: non-finite integrand");

  double mean = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) mean += out.total(0, i);
  out.mean_drift = mean / static_cast<double>(g.n);
  return out;
}

PeriodicField rhs_original(const PeriodicField& f, double rho0, std::size_t refine, Exec exec) {
  const PeriodicGrid& g = f.grid();
  OffsetLattice lat{g, refine};
  const auto& w = lattice_weights(lat);
  auto pre = precompute(f, rho0);
  ShiftedSamples table(pre.bundle, lat);
  const std::size_t M = lat.half_count();
  const double scale = lat.step() * inv_pi;

  PeriodicField out(g, 1);
  BadSample bad;

  auto body = [&](std::size_t i) {
    const double fx = pre.bundle(0, i);
    const double fpx = pre.bundle(1, i);
    double acc = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      for (std::size_t p : {M + j, M - 1 - j}) {
        const double wc = w.cot[p];
        const double slope = (fx - table(0, i, p)) * wc;
        const double denom = 1.0 + slope * slope;
        acc += ((1.0 + fpx * slope) / denom) * table(5, i, p) * wc;
      }
    }
    if (!std::isfinite(acc)) {
#pragma omp critical(nlf_muskat_err2)
      if (!bad.bad) {
        bad.bad = true;
        bad.x = g.node(i);
      }
      return;
    }
    out(0, i) = acc * scale;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < g.n; ++i) body(i);
  } else {
    for (std::size_t i = 0; i < g.n; ++i) body(i);
  }
  if (bad.bad) throw QuadratureError(bad.x, bad.alpha, "rhs_original: non-finite integrand");
  return out;
}

PeriodicField coefficient_forcing_G(const PeriodicField& g1, const PeriodicField& g2) {
  const PeriodicGrid& g = g1.grid();
  PeriodicField d1 = derivative(g1, 1);
  PeriodicField d2 = derivative(g2, 1);
  PeriodicField lam3 = fractional_laplacian(g1, 3.0);
  PeriodicField out(g, 1);
  for (std::size_t i = 0; i < g.n; ++i) {
    const double u1 = std::pow(1.0 + d1(0, i) * d1(0, i), -1.5);
    const double u2 = std::pow(1.0 + d2(0, i) * d2(0, i), -1.5);
    out(0, i) = (u2 - u1) * lam3(0, i);
  }
  return out;
}

NonlinearEstimateReport nonlinear_estimate_diagnostic(
    const std::vector<std::pair<double, PeriodicField>>& snaps, double rho0, int m,
    double kappa, std::size_t refine) {
  NonlinearEstimateReport rep;
  for (const auto& [t, f] : snaps) {
    if (!(t > 0.0)) {
      rep.per_record.push_back(0.0);
      continue;
    }
    auto rhs = rhs_reformulated(f, rho0, refine);
    PeriodicField nonlinear(f.grid(), 1);
    for (std::size_t i = 0; i < f.grid().n; ++i)
      nonlinear(0, i) = rhs.n1(0, i) + rhs.n2(0, i) + rho0 * rhs.n3(0, i);
    double value = 0.0;
    for (int j = 0; j <= m; ++j) {
      const double order = j + kappa - 2.0;
      value += std::pow(t, (j + kappa) / 3.0) * besov_seminorm(nonlinear, order).value;
    }
    rep.per_record.push_back(value);
    if (value > rep.sup_value) {
      rep.sup_value = value;
      rep.argmax_t = t;
    }
  }
  return rep;
}

}  // namespace nlf

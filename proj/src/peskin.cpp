#include "nonlocalflow/peskin.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "nonlocalflow/norms.hpp"
#include "nonlocalflow/spectral.hpp"

namespace nlf {

namespace {

constexpr double inv_4pi = 1.0 / (4.0 * std::numbers::pi);

struct Weights {
  std::vector<double> cot, w32, sin2;
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
  w.w32.resize(lat.count());
  w.sin2.resize(lat.count());
  for (std::size_t p = 0; p < lat.count(); ++p) {
    const double a = lat.offset(p);
    w.cot[p] = cot_half_weight(a);
    w.w32[p] = abs32_weight(a);
    w.sin2[p] = 2.0 * (1.0 - std::cos(a));
  }
  return cache.emplace(key, std::move(w)).first->second;
}

TensionLaw validated(TensionLaw law) {
  double c_lo = std::numeric_limits<double>::infinity();
  double c_hi = 0.0;
  for (int i = 1; i <= 400; ++i) {
    const double r = law.lambda_max * static_cast<double>(i) / 400.0;
    const double tp = law.dT(r);
    const double tr = law.T(r) / r;
    c_lo = std::min({c_lo, tp, tr});
    c_hi = std::max({c_hi, std::abs(law.T(r)), std::abs(tp), std::abs(law.ddT(r)),
                     std::abs(law.dddT(r))});
  }
  if (!(c_lo > 0.0) || !std::isfinite(c_hi))
    throw std::invalid_argument("TensionLaw '" + law.family +
                                "': needs min{T'(r), T(r)/r} > 0 and bounded derivatives "
                                "on (0, lambda_max]");
  law.c_lower = c_lo;
  law.c_upper = c_hi;
  return law;
}

// Bundle channel layout used by the quadrature tables.
enum : std::size_t { CH_X1 = 0, CH_X2, CH_XP1, CH_XP2, CH_W1, CH_W2, CH_TBAR, CH_COUNT };

struct PeskinPrecompute {
  PeriodicField bundle;       // the channels above
  PeriodicField xp;           // X' (2ch)
  PeriodicField w;            // Tbar(|X'|) X' (2ch)
  PeriodicField tbar;         // Tbar(|X'|)
  PeriodicField tbar_x;       // d/dx Tbar(|X'|)
  PeriodicField tbar_xx;      // second derivative
  PeriodicField xpp, xppp;    // X'' and X''' (2ch each)
  double min_speed = 0.0;     // min |X'|
};

PeskinPrecompute precompute(const PeriodicField& X, const TensionLaw& law) {
  const PeriodicGrid& g = X.grid();
  PeskinPrecompute pre{PeriodicField(g, CH_COUNT), derivative(X, 1), PeriodicField(g, 2),
                       PeriodicField(g, 1),        PeriodicField(g, 1),
                       PeriodicField(g, 1),        derivative(X, 2),
                       derivative(X, 3),           0.0};
  pre.min_speed = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.n; ++i) {
    const double p1 = pre.xp(0, i), p2 = pre.xp(1, i);
    const double speed = std::sqrt(p1 * p1 + p2 * p2);
    pre.min_speed = std::min(pre.min_speed, speed);
    const double tb = law.Tbar(speed);
    pre.tbar(0, i) = tb;
    pre.w(0, i) = tb * p1;
    pre.w(1, i) = tb * p2;
    pre.bundle(CH_X1, i) = X(0, i);
    pre.bundle(CH_X2, i) = X(1, i);
    pre.bundle(CH_XP1, i) = p1;
    pre.bundle(CH_XP2, i) = p2;
    pre.bundle(CH_W1, i) = pre.w(0, i);
    pre.bundle(CH_W2, i) = pre.w(1, i);
    pre.bundle(CH_TBAR, i) = tb;
  }
  pre.tbar_x = derivative(pre.tbar, 1);
  pre.tbar_xx = derivative(pre.tbar, 2);
  return pre;
}

struct BadSample {
  bool bad = false;
  double x = 0.0, alpha = 0.0;
};

}  // namespace

TensionLaw hookean_tension(double k) {
  TensionLaw law;
  law.family = "hookean";
  law.T = [k](double r) { return k * r; };
  law.dT = [k](double) { return k; };
  law.ddT = [](double) { return 0.0; };
  law.dddT = [](double) { return 0.0; };
  return validated(law);
}

// T(r) = r + r^beta: the linear part keeps min{T', T/r} bounded below near
// r = 0 (a bare power violates that), the power part makes the law
// genuinely non-Hookean.
TensionLaw power_tension(double beta) {
  TensionLaw law;
  law.family = "power";
  law.T = [beta](double r) { return r + std::pow(r, beta); };
  law.dT = [beta](double r) { return 1.0 + beta * std::pow(r, beta - 1.0); };
  law.ddT = [beta](double r) { return beta * (beta - 1.0) * std::pow(r, beta - 2.0); };
  law.dddT = [beta](double r) {
    return beta * (beta - 1.0) * (beta - 2.0) * std::pow(r, beta - 3.0);
  };
  return validated(law);
}

TensionLaw exponential_tension(double a) {
  TensionLaw law;
  law.family = "exponential";
  law.T = [a](double r) { return std::exp(a * r) - 1.0; };
  law.dT = [a](double r) { return a * std::exp(a * r); };
  law.ddT = [a](double r) { return a * a * std::exp(a * r); };
  law.dddT = [a](double r) { return a * a * a * std::exp(a * r); };
  return validated(law);
}

TensionLaw make_tension(const std::string& family, std::function<double(double)> T,
                        std::function<double(double)> dT, std::function<double(double)> ddT,
                        std::function<double(double)> dddT, double lambda_max) {
  TensionLaw law;
  law.family = family;
  law.T = std::move(T);
  law.dT = std::move(dT);
  law.ddT = std::move(ddT);
  law.dddT = std::move(dddT);
  law.lambda_max = lambda_max;
  return validated(law);
}

Eigen::Matrix2d stokeslet(const Eigen::Vector2d& Z) {
  const double r2 = Z.squaredNorm();
  if (r2 < 1e-28) throw std::invalid_argument("stokeslet: |Z| below 1e-14");
  Eigen::Matrix2d out = -0.5 * std::log(r2) * Eigen::Matrix2d::Identity();
  out += Z * Z.transpose() / r2;
  return inv_4pi * out;
}

PeriodicField rhs_contour(const PeriodicField& X, const TensionLaw& law, std::size_t refine,
                          Exec exec) {
  const PeriodicGrid& g = X.grid();
  arc_chord(X, exec);  // throws when degenerate
  OffsetLattice lat{g, refine};
  auto pre = precompute(X, law);
  ShiftedSamples table(pre.bundle, lat);
  const std::size_t M = lat.half_count();
  const double h_alpha = lat.step();

  PeriodicField out(g, 2);
  BadSample bad;

  auto body = [&](std::size_t i) {
    const double x1 = pre.bundle(CH_X1, i), x2 = pre.bundle(CH_X2, i);
    const double w1 = pre.bundle(CH_W1, i), w2 = pre.bundle(CH_W2, i);
    double acc1 = 0.0, acc2 = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      for (std::size_t p : {M + j, M - 1 - j}) {
        const double z1 = x1 - table(CH_X1, i, p);
        const double z2 = x2 - table(CH_X2, i, p);
        const double r2 = z1 * z1 + z2 * z2;
        if (r2 < 1e-28) {
#pragma omp critical(nlf_peskin_err)
          if (!bad.bad) {
            bad.bad = true;
            bad.x = g.node(i);
            bad.alpha = lat.offset(p);
          }
          return;
        }
        const double zp1 = table(CH_XP1, i, p);  // X'(x - alpha)
        const double zp2 = table(CH_XP2, i, p);
        const double v1 = w1 - table(CH_W1, i, p);  // delta_alpha W
        const double v2 = w2 - table(CH_W2, i, p);
        const double u = (z1 * zp1 + z2 * zp2) / r2;
        const double zv = z1 * v1 + z2 * v2;
        const double zpv = zp1 * v1 + zp2 * v2;
        // dG(Z)v = inv4pi [ -u v + (Z'(Z.v) + Z(Z'.v))/r2 - 2u Z (Z.v)/r2 ]
        const double t1 = -u * v1 + (zp1 * zv + z1 * zpv) / r2 - 2.0 * u * z1 * zv / r2;
        const double t2 = -u * v2 + (zp2 * zv + z2 * zpv) / r2 - 2.0 * u * z2 * zv / r2;
        acc1 -= t1;
        acc2 -= t2;
      }
    }
    out(0, i) = acc1 * h_alpha * inv_4pi;
    out(1, i) = acc2 * h_alpha * inv_4pi;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < g.n; ++i) body(i);
  } else {
    for (std::size_t i = 0; i < g.n; ++i) body(i);
  }
  if (bad.bad)
    throw QuadratureError(bad.x, bad.alpha, "rhs_contour: degenerate chord (arc-chord)");
  return out;
}

PeriodicField nonlinearity_script_N(const PeriodicField& X, const TensionLaw& law,
                                    std::size_t refine, Exec exec) {
  const PeriodicGrid& g = X.grid();
  OffsetLattice lat{g, refine};
  const auto& w = lattice_weights(lat);
  auto pre = precompute(X, law);
  ShiftedSamples table(pre.bundle, lat);
  const std::size_t M = lat.half_count();
  const double h_alpha = lat.step();

  PeriodicField out(g, 2);
  BadSample bad;

  auto body = [&](std::size_t i) {
    const double x1 = pre.bundle(CH_X1, i), x2 = pre.bundle(CH_X2, i);
    const double w1 = pre.bundle(CH_W1, i), w2 = pre.bundle(CH_W2, i);
    double acc1 = 0.0, acc2 = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      for (std::size_t p : {M + j, M - 1 - j}) {
        const double wc = w.cot[p];
        const double d1 = (x1 - table(CH_X1, i, p)) * wc;  // tilde Delta X
        const double d2 = (x2 - table(CH_X2, i, p)) * wc;
        const double b2 = d1 * d1 + d2 * d2;
        if (b2 < 1e-28) {
#pragma omp critical(nlf_peskin_err2)
          if (!bad.bad) {
            bad.bad = true;
            bad.x = g.node(i);
            bad.alpha = lat.offset(p);
          }
          return;
        }
        const double e1 = table(CH_XP1, i, p) - d1;  // tilde E X
        const double e2 = table(CH_XP2, i, p) - d2;
        const double v1 = w1 - table(CH_W1, i, p);
        const double v2 = w2 - table(CH_W2, i, p);
        const double a = d1 * e1 + d2 * e2;
        const double dv = d1 * v1 + d2 * v2;
        const double ev = e1 * v1 + e2 * v2;
        const double c1 = a * v1 - (e1 * dv + d1 * ev) + 2.0 * a * dv * d1 / b2;
        const double c2 = a * v2 - (e2 * dv + d2 * ev) + 2.0 * a * dv * d2 / b2;
        acc1 += wc * c1 / b2;
        acc2 += wc * c2 / b2;
      }
    }
    out(0, i) = acc1 * h_alpha * inv_4pi;
    out(1, i) = acc2 * h_alpha * inv_4pi;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < g.n; ++i) body(i);
  } else {
    for (std::size_t i = 0; i < g.n; ++i) body(i);
  }
  if (bad.bad)
    throw QuadratureError(bad.x, bad.alpha, "nonlinearity_script_N: degenerate periodized slope");
  return out;
}

Eigen::Matrix2d coeff_matrix_A(const Eigen::Vector2d& b, const TensionLaw& law) {
  const double r = b.norm();
  if (r < 1e-14) throw std::invalid_argument("coeff_matrix_A: |b| below 1e-14");
  return 0.25 * law.Tbar(r) * Eigen::Matrix2d::Identity() +
         0.25 * law.dTbar(r) * (b * b.transpose()) / r;
}

PeriodicField remainder_M(const PeriodicField& X, const TensionLaw& law, std::size_t refine,
                          Exec exec) {
  const PeriodicGrid& g = X.grid();
  OffsetLattice lat{g, refine};
  const auto& w = lattice_weights(lat);
  auto pre = precompute(X, law);
  if (pre.min_speed < 1e-6)
    throw std::runtime_error("remainder_M: |X'| degenerates below 1e-6");
  ShiftedSamples table(pre.bundle, lat);
  const std::size_t M = lat.half_count();
  const double h_alpha = lat.step();
  const double q = 0.25 * lambda_half_constant;

  PeriodicField out(g, 2);

  auto body = [&](std::size_t i) {
    const double xp1 = pre.xp(0, i), xp2 = pre.xp(1, i);
    const double speed = std::sqrt(xp1 * xp1 + xp2 * xp2);
    const double tb = pre.tbar(0, i);
    // grad_b Tbar(|b|) at b = X'(x)
    const double gt1 = law.dTbar(speed) * xp1 / speed;
    const double gt2 = law.dTbar(speed) * xp2 / speed;
    const double xpp1 = pre.xpp(0, i), xpp2 = pre.xpp(1, i);
    // quadratic Taylor coefficients for the singularity subtraction:
    // delta T delta X' ~ alpha^2 T_x X'', and the compensated bracket
    // ~ alpha^2 (X''' . grad T - T_xx)/2
    const double c2a1 = pre.tbar_x(0, i) * xpp1;
    const double c2a2 = pre.tbar_x(0, i) * xpp2;
    const double c2b =
        0.5 * (pre.xppp(0, i) * gt1 + pre.xppp(1, i) * gt2 - pre.tbar_xx(0, i));

    double i1_1 = 0.0, i1_2 = 0.0, i2 = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      for (std::size_t p : {M + j, M - 1 - j}) {
        const double ww = w.w32[p];
        const double s2 = w.sin2[p];
        const double dt = tb - table(CH_TBAR, i, p);         // delta Tbar
        const double dxp1 = xp1 - table(CH_XP1, i, p);       // delta X'
        const double dxp2 = xp2 - table(CH_XP2, i, p);
        i1_1 += ww * (dt * dxp1 - c2a1 * s2);
        i1_2 += ww * (dt * dxp2 - c2a2 * s2);
        i2 += ww * (dt - (dxp1 * gt1 + dxp2 * gt2) - c2b * s2);
      }
    }
    const double I1_1 = i1_1 * h_alpha + c2a1 * abs32_sin2_moment;
    const double I1_2 = i1_2 * h_alpha + c2a2 * abs32_sin2_moment;
    const double I2 = i2 * h_alpha + c2b * abs32_sin2_moment;
    out(0, i) = q * (-I1_1 + xp1 * I2);
    out(1, i) = q * (-I1_2 + xp2 * I2);
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < g.n; ++i) body(i);
  } else {
    for (std::size_t i = 0; i < g.n; ++i) body(i);
  }
  if (!out.all_finite()) throw std::runtime_error("remainder_M: non-finite result");
  return out;
}

double decomposition_check(const PeriodicField& X, const TensionLaw& law, std::size_t refine,
                           Exec exec) {
  auto pre = precompute(X, law);
  PeriodicField lhs = fractional_laplacian(pre.w, 0.5);
  PeriodicField lam_xp = fractional_laplacian(pre.xp, 0.5);
  PeriodicField m = remainder_M(X, law, refine, exec);
  double worst = 0.0;
  for (std::size_t i = 0; i < X.grid().n; ++i) {
    const Eigen::Vector2d b(pre.xp(0, i), pre.xp(1, i));
    const Eigen::Matrix2d A = coeff_matrix_A(b, law);
    const Eigen::Vector2d lx(lam_xp(0, i), lam_xp(1, i));
    const Eigen::Vector2d al = A * lx;
    const double r1 = 0.25 * lhs(0, i) - al(0) - m(0, i);
    const double r2 = 0.25 * lhs(1, i) - al(1) - m(1, i);
    worst = std::max({worst, std::abs(r1), std::abs(r2)});
  }
  return worst;
}

CircleProjection project_circle_space(const PeriodicField& X) {
  const PeriodicGrid& g = X.grid();
  const std::size_t n = g.n;
  std::complex<double> z0 = 0.0, z1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::complex<double> z(X(0, i), X(1, i));
    const double x = g.node(i);
    z0 += z;
    z1 += z * std::exp(std::complex<double>(0.0, -x));
  }
  z0 /= static_cast<double>(n);
  z1 /= static_cast<double>(n);
  CircleProjection proj{z0, z1, PeriodicField(g, 2)};
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g.node(i);
    const std::complex<double> fit = z0 + z1 * std::exp(std::complex<double>(0.0, x));
    proj.residual(0, i) = X(0, i) - fit.real();
    proj.residual(1, i) = X(1, i) - fit.imag();
  }
  return proj;
}

double l2_norm(const PeriodicField& f) {
  double s = 0.0;
  for (double v : f.raw()) s += v * v;
  return std::sqrt(s / static_cast<double>(f.grid().n));
}

DecayFit decay_diagnostic(const std::vector<std::pair<double, double>>& t_and_l2) {
  DecayFit fit;
  if (t_and_l2.size() < 4) return fit;
  double peak = 0.0;
  for (const auto& [t, v] : t_and_l2) peak = std::max(peak, v);
  if (peak < 1e-13) return fit;  // stationary residual: rate undefined

  const std::size_t lo = t_and_l2.size() / 2;
  double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
  std::size_t cnt = 0;
  for (std::size_t i = lo; i < t_and_l2.size(); ++i) {
    const auto [t, v] = t_and_l2[i];
    if (v <= 0.0) continue;
    const double y = std::log(v);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    syy += y * y;
    ++cnt;
  }
  if (cnt < 3) return fit;
  const double den = cnt * stt - st * st;
  const double slope = (cnt * sty - st * sy) / den;
  fit.defined = true;
  fit.rate = -slope;
  const double ss_tot = syy - sy * sy / cnt;
  const double ss_res = ss_tot - slope * (sty - st * sy / cnt);
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  for (std::size_t i = 1; i < t_and_l2.size(); ++i)
    if (t_and_l2[i].second > t_and_l2[i - 1].second * (1.0 + 1e-9)) fit.monotone = false;
  return fit;
}

}  // namespace nlf

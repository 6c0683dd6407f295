#include "nonlocalflow/kernels.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "nonlocalflow/fft.hpp"
#include "nonlocalflow/spectral.hpp"

namespace nlf {

namespace {

Eigen::MatrixXd sym_part(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// ascending xi index <-> FFT mode index
std::vector<double> ascending_xis(const PeriodicGrid& grid) {
  std::vector<double> xis(grid.n);
  const double k0 = two_pi / grid.period;
  const long half = static_cast<long>(grid.n) / 2;
  for (std::size_t q = 0; q < grid.n; ++q)
    xis[q] = k0 * static_cast<double>(static_cast<long>(q) - half);
  return xis;
}

std::size_t fft_index_of(const PeriodicGrid& grid, std::size_t q) {
  const long half = static_cast<long>(grid.n) / 2;
  long mode = static_cast<long>(q) - half;
  if (mode < 0) mode += static_cast<long>(grid.n);
  return static_cast<std::size_t>(mode);
}

}  // namespace

SymbolSpec heat_symbol() {
  SymbolSpec s;
  s.dim = 1;
  s.order = 2.0;
  s.c0 = 1.0;
  s.c1 = 3.0;
  s.eval = [](double, double, double xi) {
    Eigen::MatrixXd a(1, 1);
    a(0, 0) = xi * xi;
    return a;
  };
  s.eval1 = [](double, double, double xi) { return xi * xi; };
  return s;
}

SymbolSpec oscillating_symbol() {
  SymbolSpec s;
  s.dim = 1;
  s.order = 1.0;
  s.c0 = 0.5;
  s.c1 = 2.0;
  s.eval = [](double t, double, double xi) {
    Eigen::MatrixXd a(1, 1);
    a(0, 0) = (1.0 + 0.5 * std::sin(t)) * std::abs(xi);
    return a;
  };
  s.eval1 = [](double t, double, double xi) {
    return (1.0 + 0.5 * std::sin(t)) * std::abs(xi);
  };
  return s;
}

SymbolSpec rotating_matrix_symbol(double order) {
  SymbolSpec s;
  s.dim = 2;
  s.order = order;
  s.c0 = 2.0;
  s.c1 = 3.0 * (order + 1.0) * (order + 2.0);
  s.eval = [order](double, double, double xi) {
    Eigen::MatrixXd a(2, 2);
    const double m = std::pow(std::abs(xi), order);
    a << 2.0 * m, -m, m, 2.0 * m;
    return a;
  };
  s.eval2 = [order](double, double, double xi) {
    Eigen::Matrix2d a;
    const double m = std::pow(std::abs(xi), order);
    a << 2.0 * m, -m, m, 2.0 * m;
    return a;
  };
  return s;
}

SymbolSpec constant_scalar_symbol(double order, double c) {
  SymbolSpec s;
  s.dim = 1;
  s.order = order;
  s.c0 = c;
  s.c1 = c * (std::max(1.0, order) * std::max(1.0, std::abs(order - 1.0)) *
                  std::max(1.0, std::abs(order - 2.0)) +
              1.0);
  s.eval = [order, c](double, double, double xi) {
    Eigen::MatrixXd a(1, 1);
    a(0, 0) = c * std::pow(std::abs(xi), order);
    return a;
  };
  s.eval1 = [order, c](double, double, double xi) {
    return c * std::pow(std::abs(xi), order);
  };
  return s;
}

SymbolCheck validate_symbol(const SymbolSpec& sym, double t_max, double xi_max) {
  SymbolCheck out;
  out.worst_coercivity_margin = std::numeric_limits<double>::infinity();
  const double ts[] = {0.0, 0.37 * t_max, t_max};
  std::vector<double> xis;
  for (double xi = 0.25; xi <= xi_max; xi *= 1.7) {
    xis.push_back(xi);
    xis.push_back(-xi);
  }
  for (double t : ts) {
    for (double xi : xis) {
      const double pow_s = std::pow(std::abs(xi), sym.order);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym_part(sym(t, 0.0, xi)));
      const double margin = (es.eigenvalues().minCoeff() - sym.c0 * pow_s) / pow_s;
      out.worst_coercivity_margin = std::min(out.worst_coercivity_margin, margin);
      if (margin < -1e-9) out.coercive = false;

      // centered differences in xi for l = 1..3
      const double d = 1e-3 * std::max(1.0, std::abs(xi));
      auto A = [&](double z) { return sym(t, 0.0, z); };
      const Eigen::MatrixXd a_m2 = A(xi - 2 * d), a_m1 = A(xi - d), a_p1 = A(xi + d),
                            a_p2 = A(xi + 2 * d);
      const Eigen::MatrixXd d1 = (a_p1 - a_m1) / (2 * d);
      const Eigen::MatrixXd d2 = (a_p1 - 2.0 * A(xi) + a_m1) / (d * d);
      const Eigen::MatrixXd d3 = (a_p2 - 2.0 * a_p1 + 2.0 * a_m1 - a_m2) / (2 * d * d * d);
      const Eigen::MatrixXd* ders[] = {&d1, &d2, &d3};
      for (int l = 1; l <= 3; ++l) {
        const double env = sym.c1 * std::pow(std::abs(xi), sym.order - l);
        out.worst_derivative_ratio =
            std::max(out.worst_derivative_ratio, ders[l - 1]->norm() / env);
      }
    }
  }
  return out;
}

namespace {

// One forward march for a single xi, saving tau_count + 1 snapshots.
// Scalar and 2x2 symbols use allocation-free loops; the resolvent product is
// m <- m (Id + dtau A)^{-1} with A at the right endpoint, the exponential
// stepper uses the midpoint.
std::vector<Eigen::MatrixXd> march_one(const SymbolSpec& sym, double t, double x0, double xi,
                                       std::size_t tau_count, std::size_t substeps,
                                       KernelStepper stepper) {
  const std::size_t per = substeps / tau_count;
  const double dtau = t / static_cast<double>(substeps);
  std::vector<Eigen::MatrixXd> snaps;
  snaps.reserve(tau_count + 1);

  if (sym.dim == 1 && sym.eval1) {
    double m = 1.0;
    Eigen::MatrixXd cell(1, 1);
    cell(0, 0) = m;
    snaps.push_back(cell);
    for (std::size_t j = 0; j < substeps; ++j) {
      if (stepper == KernelStepper::implicit_euler) {
        const double a = sym.eval1(dtau * static_cast<double>(j + 1), x0, xi);
        m /= 1.0 + dtau * a;
      } else {
        const double a = sym.eval1(dtau * (static_cast<double>(j) + 0.5), x0, xi);
        m *= std::exp(-dtau * a);
      }
      if ((j + 1) % per == 0) {
        cell(0, 0) = m;
        snaps.push_back(cell);
      }
    }
    return snaps;
  }

  if (sym.dim == 2 && sym.eval2) {
    Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
    snaps.push_back(m);
    for (std::size_t j = 0; j < substeps; ++j) {
      if (stepper == KernelStepper::implicit_euler) {
        const Eigen::Matrix2d a = sym.eval2(dtau * static_cast<double>(j + 1), x0, xi);
        const Eigen::Matrix2d b = Eigen::Matrix2d::Identity() + dtau * a;
        const double det = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
        Eigen::Matrix2d binv;
        binv << b(1, 1), -b(0, 1), -b(1, 0), b(0, 0);
        m = (m * binv) / det;
      } else {
        const Eigen::Matrix2d a = sym.eval2(dtau * (static_cast<double>(j) + 0.5), x0, xi);
        m = m * Eigen::MatrixXd(-dtau * a).exp();
      }
      if ((j + 1) % per == 0) snaps.push_back(m);
    }
    return snaps;
  }

  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(sym.dim, sym.dim);
  snaps.push_back(m);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(sym.dim, sym.dim);
  for (std::size_t j = 0; j < substeps; ++j) {
    if (stepper == KernelStepper::implicit_euler) {
      const double tau_right = dtau * static_cast<double>(j + 1);
      const Eigen::MatrixXd a = sym(tau_right, x0, xi);
      m = (id + dtau * a).transpose().partialPivLu().solve(m.transpose()).transpose();
    } else {
      const double tau_mid = dtau * (static_cast<double>(j) + 0.5);
      const Eigen::MatrixXd a = sym(tau_mid, x0, xi);
      m = m * (-dtau * a).exp();
    }
    if ((j + 1) % per == 0) snaps.push_back(m);
  }
  return snaps;
}

}  // namespace

KernelTable solve_kernel_fourier(const SymbolSpec& sym, double t, double x0,
                                 const PeriodicGrid& grid, std::size_t tau_count,
                                 std::size_t substeps, KernelStepper stepper, Exec exec) {
  if (!(t > 0.0)) throw std::invalid_argument("solve_kernel_fourier: t must be positive");
  if (tau_count == 0) throw std::invalid_argument("solve_kernel_fourier: tau_count >= 1");

  KernelTable tab;
  tab.t = t;
  tab.x0 = x0;
  tab.order = sym.order;
  tab.dim = sym.dim;
  tab.grid = grid;
  tab.xis = ascending_xis(grid);

  // accuracy floor c1 max|xi|^s dtau <= 0.1 for the resolvent products,
  // rounded up to a multiple of tau_count
  const double ximax = std::abs(tab.xis.front());
  const double rate = sym.c1 * std::pow(ximax, sym.order);
  std::size_t nsub = substeps;
  if (stepper == KernelStepper::implicit_euler)
    nsub = std::max(nsub, static_cast<std::size_t>(std::ceil(10.0 * rate * t)));
  nsub = std::max<std::size_t>(nsub, tau_count);
  nsub = ((nsub + tau_count - 1) / tau_count) * tau_count;
  tab.substeps = nsub;

  for (std::size_t i = 0; i <= tau_count; ++i)
    tab.taus.push_back(t * static_cast<double>(i) / static_cast<double>(tau_count));

  const std::size_t nxi = tab.xis.size();
  tab.values.assign((tau_count + 1) * nxi, Eigen::MatrixXd());
  std::vector<double> errs(nxi, 0.0);

  auto body = [&](std::size_t q) {
    const double xi = tab.xis[q];
    auto snaps = march_one(sym, t, x0, xi, tau_count, nsub, stepper);
    auto snaps2 = march_one(sym, t, x0, xi, tau_count, 2 * nsub, stepper);
    double err = 0.0;
    for (std::size_t i = 0; i <= tau_count; ++i) {
      // K(t, tau_i) = Kcal(t - tau_i): snapshot index tau_count - i
      tab.values[i * nxi + q] = snaps[tau_count - i];
      err = std::max(err, (snaps[i] - snaps2[i]).norm());
    }
    errs[q] = err;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t q = 0; q < nxi; ++q) body(q);
  } else {
    for (std::size_t q = 0; q < nxi; ++q) body(q);
  }
  tab.ode_error = *std::max_element(errs.begin(), errs.end());
  return tab;
}

BoundReport check_exp_bound(const KernelTable& tab, double c0) {
  BoundReport rep;
  rep.bound_id = "exp_bound";
  const double logsqrtN = 0.5 * std::log(static_cast<double>(tab.dim));
  for (std::size_t i = 0; i < tab.taus.size(); ++i) {
    const double dt = tab.t - tab.taus[i];
    for (std::size_t q = 0; q < tab.xis.size(); ++q) {
      const double norm = tab.at(i, q).norm();
      if (norm <= 0.0) continue;
      const double log_env = logsqrtN - c0 * dt * std::pow(std::abs(tab.xis[q]), tab.order);
      const double ratio = std::exp(std::log(norm) - log_env);
      if (ratio > rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.worst_xi = tab.xis[q];
        rep.worst_tau = tab.taus[i];
      }
    }
  }
  rep.pass = rep.worst_ratio <= 1.0 + 1e-3;
  return rep;
}

BoundReport check_derivative_bound(const KernelTable& tab, double c0, int l) {
  if (l < 1 || l > 3) throw std::invalid_argument("check_derivative_bound: l in 1..3");
  BoundReport rep;
  rep.bound_id = "derivative_bound_l" + std::to_string(l);
  const std::size_t nxi = tab.xis.size();
  const double dxi = tab.xis[1] - tab.xis[0];

  for (std::size_t i = 0; i < tab.taus.size(); ++i) {
    const double dt = tab.t - tab.taus[i];
    if (dt <= 0.0) continue;
    for (std::size_t q = 2; q + 2 < nxi; ++q) {
      const double xi = tab.xis[q];
      if (std::abs(xi) < 0.5) continue;  // keep clear of the |xi|^{s-l} blowup
      Eigen::MatrixXd der;
      const auto& m2 = tab.at(i, q - 2);
      const auto& m1 = tab.at(i, q - 1);
      const auto& z0 = tab.at(i, q);
      const auto& p1 = tab.at(i, q + 1);
      const auto& p2 = tab.at(i, q + 2);
      if (l == 1)
        der = (p1 - m1) / (2 * dxi);
      else if (l == 2)
        der = (p1 - 2.0 * z0 + m1) / (dxi * dxi);
      else
        der = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2 * dxi * dxi * dxi);
      const double env = dt * std::pow(std::abs(xi), tab.order - l) *
                         std::exp(-0.5 * c0 * dt * std::pow(std::abs(xi), tab.order));
      if (env < 1e-290) continue;
      const double ratio = der.norm() / env;
      if (ratio > rep.worst_ratio) {
        rep.worst_ratio = ratio;
        rep.worst_xi = xi;
        rep.worst_tau = tab.taus[i];
      }
    }
  }
  rep.fitted_constant = rep.worst_ratio;
  rep.pass = std::isfinite(rep.fitted_constant) && rep.fitted_constant > 0.0;
  return rep;
}

PhysicalKernel kernel_physical(const KernelTable& tab, std::size_t tau_idx) {
  const PeriodicGrid& grid = tab.grid;
  const int N = tab.dim;
  const std::size_t n = grid.n;
  const double dt = tab.t - tab.taus[tau_idx];
  if (!(dt > 0.0)) throw std::invalid_argument("kernel_physical: need tau < t");

  // spectral decay precondition at the top mode
  double edge = 0.0, peak = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    const double v = tab.at(tau_idx, q).norm();
    peak = std::max(peak, v);
    if (std::abs(std::abs(tab.xis[q]) - std::abs(tab.xis.front())) < 1e-12)
      edge = std::max(edge, v);
  }
  if (edge > 1e-10 * peak) {
    const double target = std::log(peak / (1e-10 * peak));
    const double kreq = std::pow(target / (tab.order > 0 ? dt : 1.0), 1.0 / tab.order);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "kernel_physical: insufficient spectral decay at |xi|=%g "
                  "(need roughly |xi| ~ %g; raise the grid size)",
                  std::abs(tab.xis.front()), kreq);
    throw std::runtime_error(buf);
  }

  PhysicalKernel out;
  out.values = PeriodicField(grid, static_cast<std::size_t>(N * N));
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      Spectrum coeff(n);
      for (std::size_t q = 0; q < n; ++q)
        coeff[fft_index_of(grid, q)] = tab.at(tau_idx, q)(a, b) / grid.period;
      auto vals = inverse(grid, coeff);
      auto ch = out.values.channel(static_cast<std::size_t>(a * N + b));
      std::copy(vals.begin(), vals.end(), ch.begin());
    }

  const double h = grid.spacing();
  PeriodicField dx = derivative(out.values, 1);
  double l1 = 0.0, dxl1 = 0.0;
  std::vector<double> fro(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0, sd = 0.0;
    for (std::size_t c = 0; c < out.values.channels(); ++c) {
      s += out.values(c, i) * out.values(c, i);
      sd += dx(c, i) * dx(c, i);
    }
    fro[i] = std::sqrt(s);
    l1 += fro[i];
    dxl1 += std::sqrt(sd);
  }
  out.l1_norm = l1 * h;
  out.dx_l1_norm = dxl1 * h;

  // binned far-field envelope fit of log|K| vs log(1 + |x|/lambda)
  const double lambda = std::pow(dt, 1.0 / tab.order);
  const double floor = 1e-13 * *std::max_element(fro.begin(), fro.end());
  const double rmin = 8.0 * lambda, rmax = grid.period / 2.0;
  const int nbins = 12;
  std::vector<double> bin_best(nbins, -1.0), bin_u(nbins, 0.0);
  if (rmin < rmax) {
    for (std::size_t i = 0; i < n; ++i) {
      double x = grid.node(i);
      if (x > grid.period / 2) x = grid.period - x;  // distance to the origin
      if (x < rmin || fro[i] < floor) continue;
      const double frac = (std::log(x) - std::log(rmin)) / (std::log(rmax) - std::log(rmin));
      int bin = std::min(nbins - 1, static_cast<int>(frac * nbins));
      if (fro[i] > bin_best[bin]) {
        bin_best[bin] = fro[i];
        bin_u[bin] = std::log(1.0 + x / lambda);
      }
    }
    double su = 0, sy = 0, suu = 0, suy = 0;
    int cnt = 0;
    for (int b = 0; b < nbins; ++b) {
      if (bin_best[b] <= 0.0) continue;
      const double u = bin_u[b], y = std::log(bin_best[b]);
      su += u;
      sy += y;
      suu += u * u;
      suy += u * y;
      ++cnt;
    }
    if (cnt >= 3) out.decay_slope = (cnt * suy - su * sy) / (cnt * suu - su * su);
  }
  out.decay_pass = out.decay_slope <= -(1.0 + tab.order) + 0.5;
  return out;
}

PeriodicField duhamel_evolve(const SymbolSpec& sym, const PeriodicField& u0,
                             const std::function<PeriodicField(double)>& forcing,
                             double t_end, std::size_t steps, std::size_t substeps_per_step) {
  const PeriodicGrid& grid = u0.grid();
  if (static_cast<int>(u0.channels()) != sym.dim)
    throw std::invalid_argument("duhamel_evolve: channel count must match symbol dimension");
  // reject x-dependent symbols (the remainder term would not vanish)
  for (double xi : {1.0, 3.0, 17.0})
    if ((sym(0.3 * t_end, 0.0, xi) - sym(0.3 * t_end, 1.234, xi)).norm() > 1e-12)
      throw std::invalid_argument("duhamel_evolve: x-dependent symbol rejected");

  const std::size_t n = grid.n;
  const int N = sym.dim;
  const double dt = t_end / static_cast<double>(steps);

  std::vector<Spectrum> u0_hat(static_cast<std::size_t>(N));
  for (int c = 0; c < N; ++c) u0_hat[static_cast<std::size_t>(c)] = spectrum(grid, u0.channel(c));
  std::vector<std::vector<Spectrum>> f_hat(steps + 1);
  bool any_forcing = false;
  for (std::size_t j = 0; j <= steps; ++j) {
    const double tau = dt * static_cast<double>(j);
    PeriodicField fj = forcing(tau);
    f_hat[j].resize(static_cast<std::size_t>(N));
    if (fj.max_abs() > 0.0) any_forcing = true;
    for (int c = 0; c < N; ++c)
      f_hat[j][static_cast<std::size_t>(c)] = spectrum(grid, fj.channel(c));
  }

  PeriodicField out(grid, static_cast<std::size_t>(N));
  std::vector<Spectrum> result(static_cast<std::size_t>(N), Spectrum(n));

#pragma omp parallel for schedule(static)
  for (std::size_t m = 0; m < n; ++m) {
    const double xi = grid.wavenumber(m);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(N, N);
    std::vector<Eigen::MatrixXd> kcal(steps + 1);
    kcal[0] = id;
    Eigen::MatrixXd cur = id;
    const double dsub = dt / static_cast<double>(substeps_per_step);
    double cur1 = 1.0;  // scalar fast path
    for (std::size_t j = 0; j < steps; ++j) {
      if (N == 1 && sym.eval1) {
        for (std::size_t r = 0; r < substeps_per_step; ++r) {
          const double sigma = dt * static_cast<double>(j) + dsub * static_cast<double>(r + 1);
          cur1 /= 1.0 + dsub * sym.eval1(sigma, 0.0, xi);
        }
        cur(0, 0) = cur1;
      } else {
        for (std::size_t r = 0; r < substeps_per_step; ++r) {
          const double sigma = dt * static_cast<double>(j) + dsub * static_cast<double>(r + 1);
          cur = (id + dsub * sym(sigma, 0.0, xi))
                    .transpose()
                    .partialPivLu()
                    .solve(cur.transpose())
                    .transpose();
        }
      }
      kcal[j + 1] = cur;
    }
    Eigen::VectorXcd u0v(N);
    for (int c = 0; c < N; ++c) u0v(c) = u0_hat[static_cast<std::size_t>(c)][m];
    Eigen::VectorXcd acc = kcal[steps].cast<std::complex<double>>() * u0v;
    if (any_forcing) {
      for (std::size_t j = 0; j <= steps; ++j) {
        const double w = (j == 0 || j == steps) ? 0.5 : 1.0;
        Eigen::VectorXcd fv(N);
        for (int c = 0; c < N; ++c) fv(c) = f_hat[j][static_cast<std::size_t>(c)][m];
        // K(t, tau_j) = Kcal(t - tau_j)
        acc += (w * dt) * (kcal[steps - j].cast<std::complex<double>>() * fv);
      }
    }
    for (int c = 0; c < N; ++c) result[static_cast<std::size_t>(c)][m] = acc(c);
  }

  for (int c = 0; c < N; ++c) {
    auto vals = inverse(grid, result[static_cast<std::size_t>(c)]);
    std::copy(vals.begin(), vals.end(), out.channel(static_cast<std::size_t>(c)).begin());
  }
  return out;
}

std::string bound_report_csv_header() { return "bound_id,worst_ratio,xi,tau,pass"; }

std::string bound_report_csv_row(const BoundReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%d", r.bound_id.c_str(), r.worst_ratio,
                r.worst_xi, r.worst_tau, r.pass ? 1 : 0);
  return buf;
}

}  // namespace nlf

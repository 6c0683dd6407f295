#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "nonlocalflow/grid.hpp"

namespace nlf {

// Matrix-valued Fourier symbol A(t, x0, xi) of a coercive pseudo-differential
// operator of order s, with constants 0 < c0 < c1:
//   sym part of A >= c0 |xi|^s Id,   |grad_xi^l A| <= c1 |xi|^{s-l}.
struct SymbolSpec {
  int dim = 1;  // N
  double order = 1.0;
  double c0 = 0.0, c1 = 0.0;
  std::function<Eigen::MatrixXd(double t, double x0, double xi)> eval;
  // optional allocation-free fast paths used by the ODE marches
  std::function<double(double t, double x0, double xi)> eval1;
  std::function<Eigen::Matrix2d(double t, double x0, double xi)> eval2;

  Eigen::MatrixXd operator()(double t, double x0, double xi) const { return eval(t, x0, xi); }
};

SymbolSpec heat_symbol();                       // |xi|^2 Id, c0 = 1
SymbolSpec oscillating_symbol();                // (1 + sin(t)/2)|xi| Id, c0 = 1/2
SymbolSpec rotating_matrix_symbol(double s = 3.0);  // |xi|^s (2 Id + antisym), c0 = 2
SymbolSpec constant_scalar_symbol(double s, double c = 1.0);  // c |xi|^s

// Sampled validation of the SymbolSpec invariants.
struct SymbolCheck {
  bool coercive = true;
  double worst_coercivity_margin = 0.0;   // min over samples of (eig_min - c0|xi|^s)/|xi|^s
  double worst_derivative_ratio = 0.0;    // max over l<=3 of |D^l A| / (c1 |xi|^{s-l})
};
SymbolCheck validate_symbol(const SymbolSpec& sym, double t_max, double xi_max);

enum class KernelStepper { implicit_euler, matrix_exponential };

// Fundamental solution table: Khat(t, tau_i, xi_m) with Khat(t, t, xi) = Id,
// obtained from the forward resolvent-product march of
// d/dtau Khat + Khat A(tau, x0, xi) = 0, Khat(0) = Id, via
// K(t, tau) = Khat(t - tau).
struct KernelTable {
  double t = 0.0;
  double x0 = 0.0;
  double order = 1.0;
  int dim = 1;
  PeriodicGrid grid;                   // supplies the xi lattice
  std::vector<double> taus;            // tau_0 = 0 < ... < tau_count = t
  std::vector<double> xis;             // signed grid wavenumbers, ascending
  // values[i * xis.size() + m] is Khat(t, taus[i], xis[m])
  std::vector<Eigen::MatrixXd> values;
  std::size_t substeps = 0;
  double ode_error = 0.0;              // Richardson estimate vs doubled substeps

  const Eigen::MatrixXd& at(std::size_t tau_idx, std::size_t xi_idx) const {
    return values[tau_idx * xis.size() + xi_idx];
  }
};

KernelTable solve_kernel_fourier(const SymbolSpec& sym, double t, double x0,
                                 const PeriodicGrid& grid, std::size_t tau_count,
                                 std::size_t substeps,
                                 KernelStepper stepper = KernelStepper::implicit_euler,
                                 Exec exec = Exec::parallel);

struct BoundReport {
  std::string bound_id;
  double worst_ratio = 0.0;
  double worst_xi = 0.0;
  double worst_tau = 0.0;
  bool pass = false;
  double fitted_constant = 0.0;  // derivative-envelope checks only
};

// |Khat(t,tau,xi)|_F <= sqrt(N) e^{-c0 (t-tau)|xi|^s}; PASS iff the worst
// ratio is <= 1 + 1e-3.
BoundReport check_exp_bound(const KernelTable& tab, double c0);

// |grad_xi^l Khat| against (t-tau)|xi|^{s-l} e^{-c0/2 (t-tau)|xi|^s} with a
// single fitted constant (the c0^-l c1^l prefactor is absorbed into it).
BoundReport check_derivative_bound(const KernelTable& tab, double c0, int l);

// Physical-space kernel at one tau index: inverse transform per matrix
// entry, L1 norms, and a binned far-field envelope fit of log|K| against
// log(1 + |x| / (t-tau)^{1/s}).
struct PhysicalKernel {
  PeriodicField values;      // N*N channels, entry (a,b) at channel a*N+b
  double l1_norm = 0.0;      // of the Frobenius norm field
  double dx_l1_norm = 0.0;   // of the entrywise x-derivative
  double decay_slope = 0.0;  // fitted far-field slope
  bool decay_pass = false;   // slope <= -(1 + s) + 0.5
};
PhysicalKernel kernel_physical(const KernelTable& tab, std::size_t tau_idx);

// Duhamel evolution for x-independent symbols:
// u(t) = K(t,0) * u0 + int_0^t K(t,tau) * f(tau) dtau, convolutions in
// Fourier space, trapezoid in tau on `steps` intervals.
PeriodicField duhamel_evolve(const SymbolSpec& sym, const PeriodicField& u0,
                             const std::function<PeriodicField(double)>& forcing,
                             double t_end, std::size_t steps,
                             std::size_t substeps_per_step = 32);

std::string bound_report_csv_header();
std::string bound_report_csv_row(const BoundReport& r);

}  // namespace nlf

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "nonlocalflow/grid.hpp"
#include "nonlocalflow/pvquad.hpp"

namespace nlf {

// Elastic tension T(r) with derivatives; admissibility on (0, lambda_max]
// requires min{T'(r), T(r)/r} >= c_lower > 0 with bounded derivatives up to
// third order. Tbar(r) = T(r)/r is the coefficient the reformulation uses.
struct TensionLaw {
  std::string family;
  std::function<double(double)> T, dT, ddT, dddT;
  double c_lower = 0.0;  // sampled lower envelope of min{T', T/r}
  double c_upper = 0.0;  // sampled upper envelope of |T^{(k)}|, k <= 3
  double lambda_max = 4.0;

  double Tbar(double r) const { return T(r) / r; }
  double dTbar(double r) const { return (dT(r) * r - T(r)) / (r * r); }
};

TensionLaw hookean_tension(double k = 1.0);
TensionLaw power_tension(double beta);       // T(r) = r^beta
TensionLaw exponential_tension(double a);    // T(r) = e^{a r} - 1
// Validates and fills the envelopes; throws on inadmissible laws.
TensionLaw make_tension(const std::string& family, std::function<double(double)> T,
                        std::function<double(double)> dT, std::function<double(double)> ddT,
                        std::function<double(double)> dddT, double lambda_max = 4.0);

struct PeskinState {
  double t = 0.0;
  PeriodicField X;  // two channels
  TensionLaw tension;
};

// 2D Stokes fundamental solution (1/4pi)(-log|Z| Id + Z Z^T / |Z|^2).
Eigen::Matrix2d stokeslet(const Eigen::Vector2d& Z);

// Boundary-integral form after integration by parts:
// -int dG(delta_a X) delta_a(Tbar(|X'|) X') da over one period.
PeriodicField rhs_contour(const PeriodicField& X, const TensionLaw& law,
                          std::size_t refine = 1, Exec exec = Exec::parallel);

// Lower-order nonlinearity of the Hilbert-transform form
// dX/dt = -1/4 H(Tbar(|X'|) X') + N(X).
PeriodicField nonlinearity_script_N(const PeriodicField& X, const TensionLaw& law,
                                    std::size_t refine = 1, Exec exec = Exec::parallel);

// Coefficient matrix of the quasilinear principal part:
// A(b) = (1/4) Tbar(|b|) Id + (1/4) Tbar'(|b|) (b x b)/|b|
//      = (1/4)(T(|b|)/|b|)(Id - bb/|b|^2) + (1/4) T'(|b|) bb/|b|^2.
Eigen::Matrix2d coeff_matrix_A(const Eigen::Vector2d& b, const TensionLaw& law);

// Bilinear remainder of the half-Laplacian product rule, with the constant
// (1/4) / (2 sqrt(2 pi)) that makes the decomposition identity exact:
// M = -q int delta_a(Tbar) delta_a X' W32 da
//     + q X' int [delta_a(Tbar) - delta_a X' . grad(Tbar)] W32 da.
PeriodicField remainder_M(const PeriodicField& X, const TensionLaw& law,
                          std::size_t refine = 1, Exec exec = Exec::parallel);

// sup-norm of (1/4) Lambda^{1/2}(Tbar X') - A(X') Lambda^{1/2} X' - M(X').
double decomposition_check(const PeriodicField& X, const TensionLaw& law,
                           std::size_t refine = 1, Exec exec = Exec::parallel);

struct CircleProjection {
  std::complex<double> z0, z1;
  PeriodicField residual;  // two channels: X - z0 - z1 e^{ix}
};
CircleProjection project_circle_space(const PeriodicField& X);

// Least-squares exponential fit of a residual-size history over the second
// half of the samples; `defined` is false for identically tiny residuals.
struct DecayFit {
  bool defined = false;
  double rate = 0.0;
  double r_squared = 0.0;
  bool monotone = true;
};
DecayFit decay_diagnostic(const std::vector<std::pair<double, double>>& t_and_l2);

// L2 norm (normalized by the period) of a field.
double l2_norm(const PeriodicField& f);

}  // namespace nlf

#pragma once

#include <vector>

#include "nonlocalflow/grid.hpp"
#include "nonlocalflow/pvquad.hpp"

namespace nlf {

// Interface height and physical parameters (permeability 2, viscosity 1 and
// unit surface tension are fixed, so the kernel prefactor is 1/pi; the
// gravity coefficient rho0 stays free).
struct MuskatState {
  double t = 0.0;
  PeriodicField f;
  double rho0 = 0.0;
};

// Right-hand side split into the cubic dissipation and the three nonlinear
// integrals; total = dissipation + n1 + n2 + rho0 * n3 by construction.
struct MuskatRhs {
  PeriodicField total;
  PeriodicField dissipation;
  PeriodicField n1, n2, n3;
  double mean_drift = 0.0;  // grid mean of total (discretization diagnostic)
};

// curvature of the graph: f'' / <f'>^3, computed spectrally
PeriodicField curvature(const PeriodicField& f);

// The contour-integral form: (1/pi) PV int (1 + f'(x) D) / <D>^2 *
// d/dx(curv - rho0 f)(x - alpha) w(alpha) d alpha with the periodized
// slope D and weight w = (1/2)cot(alpha/2).
PeriodicField rhs_original(const PeriodicField& f, double rho0, std::size_t refine = 1,
                           Exec exec = Exec::parallel);

// The quasilinear form: -Lambda^3 f / <f'>^3 + N1 + N2 + rho0 N3, parts kept.
MuskatRhs rhs_reformulated(const PeriodicField& f, double rho0, std::size_t refine = 1,
                           Exec exec = Exec::parallel);

// Frozen-coefficient forcing (<g2'>^-3 - <g1'>^-3) Lambda^3 g1.
PeriodicField coefficient_forcing_G(const PeriodicField& g1, const PeriodicField& g2);

// Weighted norms of N[f] along a run: sup over records of
// sum_j t^{(j+kappa)/3} ||N[f](t)||_{B^{j+kappa-2}} for j = 0..m.
struct NonlinearEstimateReport {
  double sup_value = 0.0;
  double argmax_t = 0.0;
  std::vector<double> per_record;
};
NonlinearEstimateReport nonlinear_estimate_diagnostic(
    const std::vector<std::pair<double, PeriodicField>>& snaps, double rho0, int m = 3,
    double kappa = 2.9, std::size_t refine = 1);

}  // namespace nlf

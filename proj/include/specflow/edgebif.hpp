#pragma once

#include <functional>
#include <string>
#include <vector>

#include "specflow/charmatrix.hpp"
#include "specflow/discretize.hpp"
#include "specflow/symbol.hpp"

namespace specflow {

// Separable localized perturbation V(xi) (K0(zeta) + P delta(zeta)), |V(xi)| <= C e^{-delta |xi|}.
struct Perturbation {
  std::function<double(double)> V;
  Kernel K0;
  Mat P;
  double C = 1.0, delta = 1.0;
  std::string description;

  // int int K~(zeta; xi) dzeta dxi restricted to the V factor: (K0^(0) + P) times int V.
  Mat kernel_mass(int n) const;
};

// Eigenvalue problem U' + (K + eps K~_xi) * U - lambda B U = 0. The base operator U' + K*U is
// stored as a Symbol, whose characteristic matrix Delta(nu) equals nu I + K^(nu).
struct EdgeModel {
  int n = 2;
  Symbol base;
  RMat B;
  Perturbation perturbation;
  double eps0 = 0;  // 0: use 0.05 / |M|

  // K^(nu) of the base operator and its nu-derivatives at real nu.
  RMat khat(double nu, int order) const;
  // Symbol of U' + K*U - lambda B U (without the perturbation).
  Symbol symbol_at(double lambda) const;
  // Operator in xi including eps V(xi) (K0 + P delta).
  SpatialOperator spatial(double lambda, double eps) const;
  void validate() const;
};

struct DiffusiveReport {
  double d00 = 0, d_nu = 0, d_nunu = 0, d_lambda = 0;
  bool condition1 = false, condition2 = false, condition3 = false;
  double axis_margin = 0;  // min |det Delta(i l)| over |l| >= 1e-3
  bool pass = false;
  std::vector<std::string> failures;
};

DiffusiveReport diffusive_check(const EdgeModel& m);

struct EdgeData {
  RVec e0, e0_adj, e1, e1_adj;
  double d_lambda = 0, d_nunu = 0;
  double slope = 0;  // sqrt(-2 d_lambda / d_nunu)
  double denominator = 0;
  // residuals of the defining identities
  double kernel_residual = 0, adjoint_kernel_residual = 0;
  double compat1 = 0, compat3 = 0, compat4 = 0;
  double nondegeneracy = 0;
};

EdgeData edge_vectors(const EdgeModel& m);
// <2 (I + K^'(0)) e1 + K^''(0) e0, e0*>
double edge_denominator(const EdgeModel& m, const RVec& e0, const RVec& e0_adj, const RVec& e1);
double edge_constant(const EdgeModel& m, const EdgeData& data);
double edge_constant(const EdgeModel& m);

// Odd ramp: tanh(2 xi) blended smoothly into sign(xi) over 1/2 <= |xi| <= 1.
double ramp(double xi);
double ramp_dx(double xi);

struct EdgeOptions {
  double L = 12;
  double h = 0.02;
  double tol = 1e-12;
  int max_iterations = 30;
};

struct EdgeEigen {
  double eps = 0;
  double lambda = 0;
  double gamma = 0;
  double a_minus = 1;
  double nu_plus = 0, nu_minus = 0;
  bool resonance = false;
  int iterations = 0;
  double residual = 0;
  std::vector<double> x;
  std::vector<RVec> U;
  double decay_fit = 0;  // log-slope of |U| over the right half of the grid
};

EdgeEigen edge_eigenvalue(const EdgeModel& m, double eps, const EdgeOptions& opt = {});

struct ScalingTable {
  std::vector<EdgeEigen> points;
  double M = 0;
  double intercept = 0, slope = 0;  // least-squares fit of lambda / eps^2 = intercept + slope eps
  double relative_error = 0;        // |intercept - M^2| / M^2
};

ScalingTable edge_scaling(const EdgeModel& m, const std::vector<double>& eps, const EdgeOptions& opt = {},
                          int jobs = 1);

// Kernel dimension of the discretized eigenvalue problem at (lambda, eps).
NullityResult edge_nullity(const EdgeModel& m, double lambda, double eps, const Grid& grid,
                           const NullityOptions& opt = {});

}  // namespace specflow

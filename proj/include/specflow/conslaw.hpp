#pragma once

#include <functional>
#include <string>
#include <vector>

#include "specflow/spectralflow.hpp"
#include "specflow/symbol.hpp"

namespace specflow {

// Componentwise polynomial flux J u + q o u^2 + r o u^3.
struct PolyFlux {
  RMat J;
  RVec quad, cubic;

  static PolyFlux linear(const RMat& J);
  RVec value(const RVec& u) const;
  RMat jacobian(const RVec& u) const;
};

// Localized source H(x, U, U_x) with |H| <= C e^{-delta |x|}.
struct Source {
  std::function<RVec(double, const RVec&, const RVec&)> eval;
  // Optional partial derivatives in U and U_x; finite differences otherwise.
  std::function<void(double, const RVec&, const RVec&, RMat&, RMat&)> jacobian;
  bool depends_on_state = false;
  double C = 1.0, delta = 1.0;
  std::string description;

  // g(x) (amplitude + Cu U + Dux U_x), g(x) = x^power exp(-(x - center)^2 / width^2)
  static Source gaussian(const RVec& amplitude, double center = 0, double width = 1, int power = 0,
                         const RMat& Cu = RMat(), const RMat& Dux = RMat());
  static Source table(std::vector<double> x, std::vector<RVec> values);
  static Source zero(int n);
};

struct ShockModel {
  int n = 1;
  Kernel kernel;   // real n x n kernel with unit-free amplitude
  double eta0 = 1.0;  // kernel decay rate
  PolyFlux F, G;
  Source H;
  double eps_max = 0.05;

  RMat khat0() const;
  RMat khat0_derivative() const;
  RMat Phi() const;  // dG + K^(0) dF
  void validate() const;
};

struct Speeds {
  std::vector<double> c;  // ascending
  RMat e;                 // columns: orthonormal eigenvectors, (dG + K^(0)dF) e_j = -c_j e_j
};

Speeds characteristic_speeds(const ShockModel& m);

// Symbol of U_x + dG^{-1} K_x * (dF U), strip half-width below the kernel decay.
Symbol linearization_symbol(const ShockModel& m);
int linearization_index(const ShockModel& m, double eta, const FlowOptions& opt = {});

RVec jump_leading_order(const ShockModel& m);

struct ShockOptions {
  double L = 30;
  double h = 0.05;
  double tol = 1e-10;
  int max_iterations = 50;
  int max_halvings = 6;
};

struct ShockSolution {
  RVec a, b;
  std::vector<double> x;
  std::vector<RVec> U, W;
  int iterations = 0;
  double residual = 0;           // integrated stationary equation, max norm
  double profile_residual = 0;   // differentiated form on the interior
  double tail_ratio = 0;         // ||W|| on |x| > L/2 over ||W||
};

ShockSolution shock_profile(const ShockModel& m, const RVec& b, double eps, const ShockOptions& opt = {});

struct ZeroSpeedResult {
  int j0 = 0;
  double a_j0 = 0, b_j0 = 0;
  double M = 0;
  double pairing = 0;
  ShockSolution solution;
};

// Moment constant int x <H(x,0,0), e_j0> dx / <K^'(0) dF e_j0, e_j0>.
double zero_speed_constant(const ShockModel& m, int* j0 = nullptr, double* pairing = nullptr);
// Solves for (a, b_j0, W) with the remaining b components given; the free constant shift
// along e_j0 is fixed by a_j0 + b_j0 = 0.
ZeroSpeedResult zero_speed_selection(const ShockModel& m, const RVec& b, double eps, const ShockOptions& opt = {});

}  // namespace specflow

#pragma once

#include <optional>
#include <vector>

#include "specflow/symbol.hpp"

namespace specflow {

// Delta(nu) = nu I - K^(nu) - sum_j A_j e^{-nu xi_j}, or its nu-derivative of given order.
Mat char_matrix(const Symbol& S, cplx nu, int order = 0);
cplx char_det(const Symbol& S, cplx nu);

struct CharEval {
  cplx nu;
  Mat delta;
  cplx d;
  std::optional<cplx> d1, d2;
};

// max_order selects which determinant derivatives are filled (0, 1 or 2).
CharEval char_eval(const Symbol& S, cplx nu, int max_order = 0);

double smallest_singular_value(const Mat& M);

struct AxisBounds {
  double kernel_sup = 0;
  double kernel_derivative_sup = 0;
  double shift_sum = 0;
  double shift_moment = 0;  // sum_j |xi_j| ||A_j||
  double ell_cap = 0;
  double lipschitz = 0;
};

AxisBounds axis_bounds(const Symbol& S);

struct HyperbolicityOptions {
  double rel_tol = 0.1;
  double floor_step = 1e-9;
  long max_evaluations = 4'000'000;
};

struct HyperbolicityResult {
  bool hyperbolic = false;
  bool inconclusive = false;
  double margin = 0;
  double ell_cap = 0;
  std::vector<double> witnesses;
  long evaluations = 0;
};

HyperbolicityResult is_hyperbolic(const Symbol& S, const HyperbolicityOptions& opt = {});
// Same certification restricted to l in [ell_lo, ell_hi] (both clipped to +-ell_cap).
HyperbolicityResult axis_margin(const Symbol& S, double ell_lo, double ell_hi,
                                const HyperbolicityOptions& opt = {});

Symbol adjoint_symbol(const Symbol& S);

}  // namespace specflow

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "specflow/spectralflow.hpp"
#include "specflow/symbol.hpp"

namespace specflow {

// Eigenvalue problem whose limit symbols are Delta_pm(nu) - lambda B.
struct LambdaFamily {
  Symbol minus, plus;
  Mat B;

  Symbol at(bool plus_side, cplx lambda) const;
};

struct SpecMapPoint {
  cplx lambda;
  bool hyperbolic_minus = false, hyperbolic_plus = false;
  double margin_minus = 0, margin_plus = 0;
  // right-half root count of each limit; -1 if not hyperbolic, -2 if the count failed
  int state_minus = -1, state_plus = -1;
  std::optional<int> index;
  std::string error;
};

// lambda on a hyperbolicity border: d(i ell, lambda) = 0 for the given limit.
struct BorderPoint {
  cplx lambda;
  double ell = 0;
  bool plus_side = false;
  double residual = 0;
};

struct SpecMapOptions {
  FlowOptions flow;
  int bisection_steps = 30;
  double border_tol = 1e-8;
};

struct SpecMapResult {
  std::vector<double> re, im;
  std::vector<SpecMapPoint> points;  // im-major: points[j * re.size() + i]
  std::vector<BorderPoint> borders;

  const SpecMapPoint& at(size_t i_re, size_t j_im) const { return points[j_im * re.size() + i_re]; }
};

std::vector<double> linspace(double lo, double hi, int count);

SpecMapResult specmap(const LambdaFamily& F, const std::vector<double>& re, const std::vector<double>& im,
                      const SpecMapOptions& opt = {});

// Newton on (ell, t) for d(i ell, lambda_a + t (lambda_b - lambda_a)) = 0.
std::optional<BorderPoint> refine_border(const LambdaFamily& F, bool plus_side, cplx lambda_a, cplx lambda_b, double t0,
                                         double ell0, double tol = 1e-8);

}  // namespace specflow

#include "specflow/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace specflow {

namespace {

using VecFn = std::function<RVec(double)>;

RVec simpson_step(double a, double b, const RVec& fa, const RVec& fm, const RVec& fb) {
  return (b - a) / 6 * (fa + 4 * fm + fb);
}

RVec adaptive_simpson(const VecFn& f, double a, double b, const RVec& fa, const RVec& fm, const RVec& fb,
                      const RVec& whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  RVec flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
  RVec left = simpson_step(a, m, fa, flm, fm), right = simpson_step(m, b, fm, frm, fb);
  RVec delta = left + right - whole;
  if (depth <= 0 || delta.lpNorm<Eigen::Infinity>() <= 15 * tol) return left + right + delta / 15;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

RVec integrate_line(const VecFn& f, double C, double delta, double tol) {
  double X = std::max(10.0, std::log(std::max(C, 1.0) / (delta * tol * 1e-2)) / delta);
  // Split into unit panels so that localized features are not skipped.
  int panels = static_cast<int>(std::ceil(2 * X));
  RVec acc;
  for (int p = 0; p < panels; ++p) {
    double a = -X + 2 * X * p / panels, b = -X + 2 * X * (p + 1) / panels;
    RVec fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
    RVec s = adaptive_simpson(f, a, b, fa, fm, fb, simpson_step(a, b, fa, fm, fb), tol / panels, 40);
    acc = p == 0 ? s : RVec(acc + s);
  }
  return acc;
}

double integrate_line(const std::function<double(double)>& f, double C, double delta, double tol) {
  RVec v = integrate_line(
      [&](double x) {
        RVec r(1);
        r(0) = f(x);
        return r;
      },
      C, delta, tol);
  return v(0);
}

}  // namespace specflow

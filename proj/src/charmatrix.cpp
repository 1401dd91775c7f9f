#include "specflow/charmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "specflow/errors.hpp"

namespace specflow {

namespace {

double opnorm(const Mat& M) {
  if (M.rows() == 1) return std::abs(M(0, 0));
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()(0);
}

cplx det_of(const Mat& M) {
  if (M.rows() == 1) return M(0, 0);
  if (M.rows() == 2) return M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
  return M.partialPivLu().determinant();
}

}  // namespace

Mat char_matrix(const Symbol& S, cplx nu, int order) {
  S.check_strip(nu);
  Mat D = -S.nonlocal_transform(nu, order);
  if (order == 0) D += nu * Mat::Identity(S.n, S.n);
  if (order == 1) D += Mat::Identity(S.n, S.n);
  return D;
}

cplx char_det(const Symbol& S, cplx nu) { return det_of(char_matrix(S, nu)); }

CharEval char_eval(const Symbol& S, cplx nu, int max_order) {
  CharEval r;
  r.nu = nu;
  r.delta = char_matrix(S, nu);
  r.d = det_of(r.delta);
  if (max_order < 1) return r;

  Eigen::PartialPivLU<Mat> lu(r.delta);
  const bool invertible = r.d != 0.0 && lu.rcond() > 1e-10;
  if (invertible) {
    Mat X = lu.solve(char_matrix(S, nu, 1));
    cplx t = X.trace();
    r.d1 = r.d * t;
    if (max_order >= 2) {
      Mat Y = lu.solve(char_matrix(S, nu, 2));
      r.d2 = r.d * (t * t - (X * X).trace() + Y.trace());
    }
    return r;
  }

  // Cauchy integrals over a small circle stay accurate at and near roots.
  double dist = S.eta - std::abs(nu.real() - S.center);
  double rad = std::min(1e-3, 0.5 * dist);
  const int N = 64;
  cplx s1 = 0, s2 = 0;
  for (int k = 0; k < N; ++k) {
    double th = 2 * kPi * k / N;
    cplx e(std::cos(th), std::sin(th));
    cplx dz = char_det(S, nu + rad * e);
    s1 += dz / e;
    s2 += dz / (e * e);
  }
  r.d1 = s1 / (N * rad);
  if (max_order >= 2) r.d2 = 2.0 * s2 / (N * rad * rad);
  return r;
}

double smallest_singular_value(const Mat& M) {
  if (M.rows() == 1) return std::abs(M(0, 0));
  if (M.rows() == 2) {
    double s = M.squaredNorm();
    double det = std::abs(M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0));
    double smax = std::sqrt(0.5 * (s + std::sqrt(std::max(0.0, s * s - 4 * det * det))));
    return smax > 0 ? det / smax : 0.0;
  }
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()(M.rows() - 1);
}

AxisBounds axis_bounds(const Symbol& S) {
  AxisBounds b;
  b.kernel_sup = S.kernel.axis_sup();
  b.kernel_derivative_sup = S.kernel.axis_sup_derivative();
  for (const auto& s : S.shifts) {
    double a = opnorm(s.A);
    b.shift_sum += a;
    b.shift_moment += std::abs(s.xi) * a;
  }
  b.ell_cap = S.n * (b.kernel_sup + b.shift_sum) + 1.0;
  b.lipschitz = 1.0 + b.kernel_derivative_sup + b.shift_moment;
  return b;
}

HyperbolicityResult axis_margin(const Symbol& S, double ell_lo, double ell_hi, const HyperbolicityOptions& opt) {
  S.validate();
  if (S.center - S.eta >= 0 || S.center + S.eta <= 0) throw StripViolation("imaginary axis outside declared strip");
  const AxisBounds ab = axis_bounds(S);
  if (!std::isfinite(ab.ell_cap) || !std::isfinite(ab.lipschitz))
    throw ValidationError("axis bounds are not finite for this symbol");

  HyperbolicityResult r;
  r.ell_cap = ab.ell_cap;
  const double lo = std::max(ell_lo, -ab.ell_cap);
  const double hi = std::min(ell_hi, ab.ell_cap);
  const double L = ab.lipschitz;
  const double scale = ab.ell_cap;
  const double zero_tol = 1e-12 * scale;

  auto f = [&](double l) {
    ++r.evaluations;
    return smallest_singular_value(char_matrix(S, cplx(0.0, l)));
  };

  if (!(hi > lo)) {
    r.margin = std::numeric_limits<double>::infinity();
    r.hyperbolic = true;
    return r;
  }

  struct Interval {
    double a, b, fa, fb;
  };
  const double xi_max = S.max_abs_shift();
  const int N0 = static_cast<int>(std::clamp(std::ceil((hi - lo) * (1.0 + xi_max) / 0.1), 64.0, 40000.0));
  std::vector<double> grid(N0 + 1), vals(N0 + 1);
  double best = std::numeric_limits<double>::infinity(), best_l = lo, best_h = (hi - lo) / N0;
  for (int i = 0; i <= N0; ++i) {
    grid[i] = lo + (hi - lo) * i / N0;
    vals[i] = f(grid[i]);
    if (vals[i] < best) {
      best = vals[i];
      best_l = grid[i];
    }
  }
  std::deque<Interval> work;
  for (int i = 0; i < N0; ++i) work.push_back({grid[i], grid[i + 1], vals[i], vals[i + 1]});

  bool floor_hit = false;
  while (!work.empty()) {
    if (best <= 1e-3 * zero_tol) break;
    if (r.evaluations > opt.max_evaluations) {
      floor_hit = true;
      break;
    }
    Interval I = work.front();
    work.pop_front();
    double w = I.b - I.a;
    double lb = 0.5 * (I.fa + I.fb) - 0.5 * L * w;
    if (lb > 0 && lb >= (1.0 - opt.rel_tol) * best) continue;
    if (w < opt.floor_step) {
      floor_hit = true;
      continue;
    }
    double m = 0.5 * (I.a + I.b);
    double fm = f(m);
    if (fm < best) {
      best = fm;
      best_l = m;
      best_h = 0.5 * w;
    }
    work.push_back({I.a, m, I.fa, fm});
    work.push_back({m, I.b, fm, I.fb});
  }

  // Golden-section polish of the best sample.
  {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::max(lo, best_l - best_h), b = std::min(hi, best_l + best_h);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 100 && b - a > 1e-15 * (1.0 + std::abs(best_l)); ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = f(d);
      }
    }
    double l = fc < fd ? c : d;
    double fl = std::min(fc, fd);
    if (fl < best) {
      best = fl;
      best_l = l;
    }
  }

  r.margin = best;
  r.witnesses = {best_l};
  if (best <= zero_tol) {
    r.hyperbolic = false;
  } else if (floor_hit) {
    r.hyperbolic = false;
    r.inconclusive = true;
  } else {
    r.hyperbolic = true;
  }
  return r;
}

HyperbolicityResult is_hyperbolic(const Symbol& S, const HyperbolicityOptions& opt) {
  const double inf = std::numeric_limits<double>::infinity();
  return axis_margin(S, -inf, inf, opt);
}

Symbol adjoint_symbol(const Symbol& S) {
  Symbol r;
  r.n = S.n;
  r.eta = S.eta;
  r.center = -S.center;
  r.kernel = S.kernel.adjoint();
  for (const auto& s : S.shifts) add_shift(r.shifts, -s.xi, -s.A.adjoint());
  return r;
}

}  // namespace specflow

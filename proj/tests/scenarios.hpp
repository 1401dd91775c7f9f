#pragma once

// Shared model builders and independent oracles for the unit and acceptance tests.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "specflow/conslaw.hpp"
#include "specflow/edgebif.hpp"
#include "specflow/rootfinder.hpp"
#include "specflow/symbol.hpp"

namespace scenarios {

using namespace specflow;

inline Mat scalar(cplx a) { return Mat::Constant(1, 1, a); }

inline Mat mat2(double a, double b, double c, double d) {
  Mat M(2, 2);
  M << a, b, c, d;
  return M;
}

// Delta(nu) = nu: a single simple root on the axis.
inline Symbol simple_axis_local() { return Symbol::local(scalar(0.0), 0.5); }

// Delta(nu) = nu + k - k / (1 - nu^2): simple root at 0 (two-sided kernel of mass k).
inline Symbol simple_axis_nonlocal(double k = 0.5) {
  Symbol S;
  S.n = 1;
  S.kernel = Kernel::exponential(1.0, scalar(k));
  add_shift(S.shifts, 0.0, scalar(-k));
  S.eta = 0.5;
  return S;
}

// Jordan block: det Delta = nu^2.
inline Symbol double_axis_local() { return Symbol::local(mat2(0, 1, 0, 0), 0.5); }

// Scalar nu - A - k/(1-nu^2) - s e^{-nu xi}, affine in A between two hyperbolic ends with one
// real crossing through nu = 0.
struct CrossingFamily {
  OperatorFamily family;
  double A0, A1, k, s, xi;
};

inline Symbol crossing_symbol(double A, double k, double s, double xi) {
  Symbol S;
  S.n = 1;
  S.kernel = Kernel::exponential(1.0, scalar(k));
  add_shift(S.shifts, 0.0, scalar(A));
  if (s != 0) add_shift(S.shifts, xi, scalar(s));
  S.eta = 0.5;
  return S;
}

inline std::vector<CrossingFamily> crossing_families(int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0, 1);
  std::vector<CrossingFamily> out;
  for (int i = 0; i < count; ++i) {
    CrossingFamily c{OperatorFamily(), 0, 0, 0, 0, 0};
    c.k = -0.3 + 0.6 * U(rng);
    c.s = (i % 2 ? 0.1 * (U(rng) - 0.5) : 0.0);
    c.xi = 0.5 + U(rng);
    // d(0) = -A - k - s: the ends sit on opposite sides of the crossing.
    double A_cross = -c.k - c.s;
    bool up = U(rng) < 0.5;
    c.A0 = A_cross + (up ? -1 : 1) * (0.4 + 0.5 * U(rng));
    c.A1 = A_cross + (up ? 1 : -1) * (0.4 + 0.5 * U(rng));
    c.family = OperatorFamily::affine(crossing_symbol(c.A0, c.k, c.s, c.xi), crossing_symbol(c.A1, c.k, c.s, c.xi));
    out.push_back(c);
  }
  return out;
}

// Random hyperbolic symbol: local part with eigenvalues away from the axis plus a small kernel.
inline Symbol random_hyperbolic(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> U(0, 1);
  Mat D = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) D(i, i) = (U(rng) < 0.5 ? -1.0 : 1.0) * (0.6 + U(rng));
  Mat Q = Mat::Identity(n, n);
  if (n == 2) {
    double t = 2 * kPi * U(rng);
    Q << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    Q(0, 1) += 0.3 * U(rng);
  }
  Mat A = Q * D * Q.inverse();
  Symbol S = Symbol::local(A, 0.5);
  Mat Kc = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Kc(i, j) = 0.1 * (U(rng) - 0.5);
  S.kernel = Kernel::exponential(1.0 + U(rng), Kc);
  return S;
}

// Scalar or 2 x 2 symbol nu I - A - M / (nu + a). The roots of det Delta are the eigenvalues
// of the companion linearization of (nu + a)(nu I - A) - M.
struct RationalInstance {
  Symbol S;
  std::vector<cplx> roots;  // all roots of the polynomial, with repetition
  bool double_root = false;
};

inline Kernel right_exponential(double a, const Mat& M) {
  KernelTerm t;
  t.profile = Profile::RightExp;
  t.rate = a;
  t.M = M;
  Kernel K;
  K.add(t);
  return K;
}

inline std::vector<cplx> companion_roots(const Mat& A, const Mat& M, double a) {
  const int n = static_cast<int>(A.rows());
  Mat C = Mat::Zero(2 * n, 2 * n);
  C.topRightCorner(n, n) = Mat::Identity(n, n);
  C.bottomLeftCorner(n, n) = a * A + M;
  C.bottomRightCorner(n, n) = A - a * Mat::Identity(n, n);
  Eigen::ComplexEigenSolver<Mat> es(C);
  std::vector<cplx> r;
  for (int i = 0; i < 2 * n; ++i) r.push_back(es.eigenvalues()(i));
  return r;
}

inline RationalInstance rational_instance(std::mt19937& rng, int kind) {
  std::uniform_real_distribution<double> U(0, 1);
  RationalInstance R;
  double a = 1.5 + 1.5 * U(rng);
  Mat A, M;
  if (kind == 0) {
    // Scalar with a double root at (A - a) / 2.
    double Ac = -0.5 + 2 * U(rng);
    A = scalar(Ac);
    M = scalar(-(a + Ac) * (a + Ac) / 4);
    R.double_root = true;
  } else if (kind == 1) {
    A = scalar(-0.5 + 2 * U(rng));
    M = scalar(3 * (U(rng) - 0.5));
  } else {
    A = mat2(-0.5 + 2 * U(rng), U(rng) - 0.5, U(rng) - 0.5, -0.5 + 2 * U(rng));
    M = mat2(U(rng) - 0.5, U(rng) - 0.5, U(rng) - 0.5, U(rng) - 0.5);
    if (kind == 3) {
      // Scalar multiple of the identity: every root is double.
      double d = -0.5 + 2 * U(rng);
      A = mat2(d, 0, 0, d);
      M = mat2(0.2 * (U(rng) - 0.5), 0, 0, 0.2 * (U(rng) - 0.5));
      M(1, 1) = M(0, 0);
      R.double_root = true;
    }
  }
  const int n = static_cast<int>(A.rows());
  R.S.n = n;
  R.S.kernel = right_exponential(a, M);
  add_shift(R.S.shifts, 0.0, A);
  R.S.center = 1.0;
  R.S.eta = 2.0;
  R.roots = companion_roots(A, M, a);
  return R;
}

inline Rectangle rational_box() { return Rectangle{-0.8, 2.8, -3.0, 3.0}; }

// Distance from z to the boundary of b.
inline double box_distance(const Rectangle& b, cplx z) {
  double dx = std::max({b.re_lo - z.real(), z.real() - b.re_hi, 0.0});
  double dy = std::max({b.im_lo - z.imag(), z.imag() - b.im_hi, 0.0});
  double outside = std::hypot(dx, dy);
  if (outside > 0) return outside;
  return std::min({z.real() - b.re_lo, b.re_hi - z.real(), z.imag() - b.im_lo, b.im_hi - z.imag()});
}

inline bool contains(const Rectangle& b, cplx z) {
  return z.real() > b.re_lo && z.real() < b.re_hi && z.imag() > b.im_lo && z.imag() < b.im_hi;
}

// Scalar conservation law: F(u) = u + u^2/2, G(u) = u, unit Gaussian kernel, H = exp(-x^2).
inline ShockModel scalar_shock() {
  ShockModel m;
  m.n = 1;
  m.kernel = Kernel::gaussian(1.0, scalar(1.0));
  m.eta0 = 1.0;
  m.F = PolyFlux::linear(RMat::Identity(1, 1));
  m.F.quad = RVec::Constant(1, 0.5);
  m.G = PolyFlux::linear(RMat::Identity(1, 1));
  m.H = Source::gaussian(RVec::Ones(1));
  return m;
}

// Exact far-field value a(eps) for scalar_shock with b = 0.
inline double scalar_shock_a(double eps) { return -2 + std::sqrt(4 - 2 * eps * std::sqrt(kPi)); }

// 2 x 2 system with speeds -3 and -2.
inline ShockModel system_shock() {
  ShockModel m;
  m.n = 2;
  m.kernel = Kernel::gaussian(1.0, Mat::Identity(2, 2));
  m.eta0 = 1.0;
  RMat dG(2, 2);
  dG << 1, 0, 0, 2;
  m.F = PolyFlux::linear(RMat::Identity(2, 2));
  m.F.quad = RVec::Constant(2, 0.5);
  m.G = PolyFlux::linear(dG);
  RVec amp(2);
  amp << 1, 0.5;
  m.H = Source::gaussian(amp);
  return m;
}

// 2 x 2 system with one zero speed; the source has a first moment along the zero-speed mode.
inline ShockModel zero_speed_shock() {
  ShockModel m;
  m.n = 2;
  m.kernel = Kernel::gaussian(1.0, Mat::Identity(2, 2), -1.0);
  m.eta0 = 1.0;
  RMat dG(2, 2);
  dG << -1, 0, 0, 1;
  m.F = PolyFlux::linear(RMat::Identity(2, 2));
  m.G = PolyFlux::linear(dG);
  RVec amp(2);
  amp << 1, 0;
  m.H = Source::gaussian(amp, 0, 1, 1);
  return m;
}

// u'' = (lambda - eps V) u with V = exp(-x^2) written as a first-order system.
inline EdgeModel schrodinger_well() {
  EdgeModel m;
  m.n = 2;
  m.base = Symbol::local(mat2(0, 1, 0, 0), 1.0);
  m.B = RMat::Zero(2, 2);
  m.B(1, 0) = 1;
  m.perturbation.V = [](double x) { return std::exp(-x * x); };
  m.perturbation.P = mat2(0, 0, 1, 0);
  m.perturbation.C = 1.0;
  m.perturbation.delta = 1.0;
  m.perturbation.description = "exp(-x^2)";
  return m;
}

// Ground state of u'' = (lambda - eps V) u by RK4 shooting from the even initial data
// u(0) = 1, u'(0) = 0 to X, matched to the decaying exterior solution u' = -sqrt(lambda) u.
inline double shooting_mismatch(double lambda, double eps, double X = 9.0, double h = 1e-3) {
  auto f = [&](double x, const Eigen::Vector2d& y) {
    return Eigen::Vector2d(y(1), (lambda - eps * std::exp(-x * x)) * y(0));
  };
  Eigen::Vector2d y(1.0, 0.0);
  double x = 0;
  const int steps = static_cast<int>(std::round(X / h));
  for (int i = 0; i < steps; ++i) {
    Eigen::Vector2d k1 = f(x, y), k2 = f(x + h / 2, y + h / 2 * k1), k3 = f(x + h / 2, y + h / 2 * k2),
                    k4 = f(x + h, y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    x += h;
  }
  return (y(1) + std::sqrt(lambda) * y(0)) / std::hypot(y(0), y(1));
}

inline double shooting_eigenvalue(double eps) {
  // The bound state satisfies lambda ~ (pi/4) eps^2; bracket generously around it.
  double lo = 0.05 * eps * eps, hi = 3.0 * eps * eps;
  double flo = shooting_mismatch(lo, eps);
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = shooting_mismatch(mid, eps);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace scenarios

#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <random>

#include "../scenarios.hpp"
#include "specflow/charmatrix.hpp"
#include "specflow/rootfinder.hpp"

using namespace specflow;
using scenarios::mat2;
using scenarios::scalar;

namespace {

// nu + c - a^2 / (a^2 - nu^2) with the two-sided exponential kernel of unit mass.
Symbol cubic_symbol(double a, double c) {
  Symbol S;
  S.kernel = Kernel::exponential(a, scalar(1.0));
  add_shift(S.shifts, 0.0, scalar(-c));
  S.eta = 0.95 * a;
  return S;
}

// Roots of (nu + c)(a^2 - nu^2) - a^2, i.e. nu^3 + c nu^2 - a^2 nu + a^2 (1 - c).
std::vector<cplx> cubic_roots(double a, double c) {
  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
  C(0, 2) = -a * a * (1 - c);
  C(1, 2) = a * a;
  C(2, 2) = -c;
  C(1, 0) = C(2, 1) = 1;
  Eigen::EigenSolver<Eigen::Matrix3d> es(C);
  std::vector<cplx> r;
  for (int i = 0; i < 3; ++i) r.push_back(es.eigenvalues()(i));
  return r;
}

}  // namespace

TEST_CASE("characteristic determinant examples") {
  SUBCASE("affine scalar") {
    Symbol S = Symbol::local(scalar(0.4), 1.0);
    CharEval ce = char_eval(S, cplx(0.3, 0.7), 1);
    CHECK(std::abs(ce.d - (cplx(0.3, 0.7) - 0.4)) < 1e-15);
    CHECK(std::abs(*ce.d1 - 1.0) < 1e-15);
  }
  SUBCASE("unit-mass kernel at the origin") {
    const double c = 0.3;
    Symbol S;
    S.kernel = Kernel::exponential(2.0, scalar(1.0));
    add_shift(S.shifts, 0.0, scalar(-c));
    S.eta = 1.0;
    CHECK(std::abs(char_det(S, 0.0) - (-1.0 + c)) < 1e-14);
  }
  SUBCASE("first-order form of u'' = lambda u") {
    const double lambda = 0.01;
    Symbol S = Symbol::local(mat2(0, 1, lambda, 0), 1.0);
    CHECK(std::abs(char_det(S, 0.1)) < 1e-15);
    CHECK(std::abs(char_det(S, cplx(0.3, 0.2)) - (cplx(0.3, 0.2) * cplx(0.3, 0.2) - lambda)) < 1e-14);
  }
}

TEST_CASE("determinant derivatives match central differences") {
  std::mt19937 rng(5);
  const double h = 1e-5;
  for (int trial = 0; trial < 6; ++trial) {
    Symbol S = scenarios::random_hyperbolic(rng, 1 + trial % 2);
    add_shift(S.shifts, 0.8, Mat::Constant(S.n, S.n, 0.2));
    for (cplx nu : {cplx(0.1, 0.3), cplx(-0.2, 1.7), cplx(0.3, -0.9)}) {
      CharEval ce = char_eval(S, nu, 2);
      if (std::abs(ce.d) < 1e-6) continue;
      cplx fd1 = (char_det(S, nu + h) - char_det(S, nu - h)) / (2 * h);
      CHECK(std::abs(*ce.d1 - fd1) <= 1e-6 * std::max(1.0, std::abs(*ce.d1)));
      cplx fd2 = (char_eval(S, nu + h, 1).d1.value() - char_eval(S, nu - h, 1).d1.value()) / (2 * h);
      CHECK(std::abs(*ce.d2 - fd2) <= 1e-6 * std::max(1.0, std::abs(*ce.d2)));
    }
  }
}

TEST_CASE("hyperbolicity certification") {
  SUBCASE("nu - 1 has margin 1 at the origin") {
    HyperbolicityResult h = is_hyperbolic(Symbol::local(scalar(1.0), 0.5));
    CHECK(h.hyperbolic);
    CHECK(h.margin == doctest::Approx(1.0).epsilon(1e-9));
    REQUIRE_FALSE(h.witnesses.empty());
    CHECK(std::abs(h.witnesses.front()) < 1e-9);
  }
  SUBCASE("nu has a root on the axis") {
    HyperbolicityResult h = is_hyperbolic(Symbol::local(scalar(0.0), 0.5));
    CHECK_FALSE(h.hyperbolic);
    CHECK_FALSE(h.inconclusive);
  }
  SUBCASE("exponential-kernel cubic agrees with its polynomial roots") {
    for (double c : {2.0, 1.0, 0.5, -0.7}) {
      bool axis_root = false;
      for (cplx r : cubic_roots(2.0, c)) axis_root |= std::abs(r.real()) < 1e-9;
      CHECK(is_hyperbolic(cubic_symbol(2.0, c)).hyperbolic == !axis_root);
    }
    CHECK(is_hyperbolic(cubic_symbol(2.0, 2.0)).hyperbolic);
    // c = 1 puts a root at the origin.
    CHECK_FALSE(is_hyperbolic(cubic_symbol(2.0, 1.0)).hyperbolic);
  }
  SUBCASE("agrees with a thin axis rectangle count") {
    std::mt19937 rng(21);
    std::vector<Symbol> cases{Symbol::local(scalar(0.0), 0.5), Symbol::local(scalar(1.0), 0.5),
                              scenarios::simple_axis_nonlocal(), cubic_symbol(2.0, 2.0)};
    for (int i = 0; i < 4; ++i) cases.push_back(scenarios::random_hyperbolic(rng, 2));
    for (const auto& S : cases) {
      HyperbolicityResult h = is_hyperbolic(S);
      Rectangle thin{-1e-4, 1e-4, -h.ell_cap, h.ell_cap};
      CHECK((count_roots(S, thin) == 0) == h.hyperbolic);
    }
  }
}

TEST_CASE("adjoint symbol") {
  SUBCASE("real scalar") {
    Symbol A = adjoint_symbol(Symbol::local(scalar(0.6), 1.0));
    for (cplx nu : {cplx(0.2, 0.0), cplx(-0.3, 1.1)}) CHECK(std::abs(char_det(A, nu) - (nu + 0.6)) < 1e-15);
  }
  SUBCASE("real 2x2 symbols at real nu") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> U(-0.4, 0.4);
    for (int trial = 0; trial < 3; ++trial) {
      Symbol S = scenarios::random_hyperbolic(rng, 2);
      add_shift(S.shifts, 0.6, mat2(0.1, -0.2, 0.3, 0.05));
      Symbol A = adjoint_symbol(S);
      for (int k = 0; k < 10; ++k) {
        double nu = U(rng);
        cplx lhs = char_det(A, nu), rhs = char_det(S, -nu);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
      }
    }
  }
  SUBCASE("complex symbols in the conjugated form") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> U(-0.4, 0.4);
    for (int n : {1, 2, 3}) {
      Symbol S;
      S.n = n;
      S.eta = 0.5;
      Mat M = Mat::Random(n, n), G = Mat::Random(n, n), A = Mat::Random(n, n);
      S.kernel = Kernel::two_sided(1.0, M, 2.0, G) + Kernel::gaussian(0.5, A, 0.4);
      add_shift(S.shifts, 0.0, A);
      add_shift(S.shifts, -0.9, 0.3 * G);
      Symbol Sa = adjoint_symbol(S);
      const double sign = n % 2 ? -1.0 : 1.0;
      for (int k = 0; k < 10; ++k) {
        cplx nu(U(rng), 5 * U(rng));
        cplx lhs = char_det(Sa, nu), rhs = sign * std::conj(char_det(S, -std::conj(nu)));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
      }
    }
  }
  SUBCASE("hyperbolic exactly when the adjoint is") {
    std::mt19937 rng(13);
    std::vector<Symbol> cases{Symbol::local(scalar(0.0), 0.5), scenarios::double_axis_local(),
                              scenarios::simple_axis_nonlocal()};
    for (int i = 0; i < 5; ++i) cases.push_back(scenarios::random_hyperbolic(rng, 1 + i % 2));
    for (const auto& S : cases) CHECK(is_hyperbolic(S).hyperbolic == is_hyperbolic(adjoint_symbol(S)).hyperbolic);
  }
}

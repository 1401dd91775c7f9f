#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <random>

#include "../scenarios.hpp"
#include "specflow/spectralflow.hpp"

using namespace specflow;
using scenarios::mat2;
using scenarios::scalar;

namespace {

OperatorFamily tanh_family() {
  return OperatorFamily::rule(-3, 3, [](double rho) { return Symbol::local(scalar(std::tanh(rho)), 1.5); });
}

// diag(nu - tanh(rho), nu + tanh(rho - 5) - i/2): crossings at rho = 0 (rightward) and rho = 5
// (leftward); the imaginary offset keeps the two roots apart in between.
OperatorFamily opposite_crossings() {
  return OperatorFamily::rule(-3, 8, [](double rho) {
    Mat A = mat2(std::tanh(rho), 0, 0, -std::tanh(rho - 5));
    A(1, 1) += cplx(0, 0.5);
    return Symbol::local(A, 1.5);
  });
}

Symbol cubic_symbol(double a, double c) {
  Symbol S;
  S.kernel = Kernel::exponential(a, scalar(1.0));
  add_shift(S.shifts, 0.0, scalar(-c));
  S.eta = 0.98 * a;
  return S;
}

int cubic_right_count(double a, double c, double re_max) {
  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
  C(0, 2) = -a * a * (1 - c);
  C(1, 2) = a * a;
  C(2, 2) = -c;
  C(1, 0) = C(2, 1) = 1;
  Eigen::EigenSolver<Eigen::Matrix3d> es(C);
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    double re = es.eigenvalues()(i).real();
    n += re > 0 && re < re_max;
  }
  return n;
}

}  // namespace

TEST_CASE("tanh family crossing") {
  auto cr = find_crossings(tanh_family());
  REQUIRE(cr.size() == 1);
  CHECK(std::abs(cr[0].rho) < 1e-6);
  CHECK(cr[0].M == 1);
  CHECK(cr[0].simple);
  CHECK(cr[0].speed == doctest::Approx(1.0).epsilon(1e-4));
  FlowResult R = crossing_number(tanh_family());
  CHECK(R.cross == 1);
  CHECK(R.index == -1);
  CHECK(crossing_number(tanh_family().reversed()).cross == -1);
}

TEST_CASE("constant hyperbolic family has no crossings") {
  std::mt19937 rng(2);
  Symbol S = scenarios::random_hyperbolic(rng, 2);
  CHECK(find_crossings(OperatorFamily::affine(S, S)).empty());
  CHECK(fredholm_index(S, S) == 0);
}

TEST_CASE("two opposite crossings in a block family") {
  auto cr = find_crossings(opposite_crossings());
  REQUIRE(cr.size() == 2);
  CHECK(std::abs(cr[0].rho) < 1e-6);
  CHECK(cr[0].contribution() == 1);
  CHECK(std::abs(cr[1].rho - 5) < 1e-6);
  CHECK(cr[1].contribution() == -1);
  CHECK(crossing_number(opposite_crossings()).cross == 0);
}

TEST_CASE("crossing number equals the signed count from root continuation") {
  for (const auto& c : scenarios::crossing_families(4, 77)) {
    FlowResult R = crossing_number(c.family);
    ContinuationCount C = continuation_cross(c.family);
    CHECK(R.cross == C.cross);
    int signs = 0;
    for (const auto& x : R.crossings) {
      REQUIRE(x.simple);
      signs += x.speed > 0 ? 1 : -1;
    }
    CHECK(signs == R.cross);
  }
  ContinuationCount C = continuation_cross(opposite_crossings());
  CHECK(C.cross == 0);
  CHECK(C.crossing_speeds.size() == 2);
}

TEST_CASE("weighted index around axis roots") {
  for (double g : {0.05, 0.1}) {
    CHECK(weighted_index(scenarios::simple_axis_local(), -g, g) == -1);
    CHECK(weighted_index(scenarios::simple_axis_local(), g, -g) == 1);
    CHECK(weighted_index(scenarios::simple_axis_nonlocal(), -g, g) == -1);
    CHECK(weighted_index(scenarios::simple_axis_nonlocal(), g, -g) == 1);
  }
  Symbol J = scenarios::double_axis_local();
  RootSet rs = locate_roots(J, Rectangle{-0.2, 0.25, -0.3, 0.35});
  REQUIRE(rs.roots.size() == 1);
  REQUIRE(rs.roots[0].multiplicity == 2);
  CHECK(weighted_index(J, -0.05, 0.05) == -2);
  CHECK(crossing_number(OperatorFamily::affine(weight_shift(J, -0.05), weight_shift(J, 0.05))).cross == 2);
}

TEST_CASE("index of a cubic pair matches the right-half root counts") {
  const double a = 2;
  const double re_max = 0.9 * 0.98 * a;
  for (auto [cm, cp] : {std::pair{1.5, 0.5}, std::pair{0.8, 1.2}, std::pair{2.0, 1.2}}) {
    FlowResult R;
    int idx = fredholm_index(cubic_symbol(a, cm), cubic_symbol(a, cp), {}, &R);
    REQUIRE_FALSE(R.side_exit);
    CHECK(idx == -(cubic_right_count(a, cp, re_max) - cubic_right_count(a, cm, re_max)));
  }
}

TEST_CASE("cocycle identity") {
  SUBCASE("equal symbols") {
    Symbol S = Symbol::local(scalar(1.0), 0.5);
    CocycleResult c = cocycle_check(S, S, S);
    CHECK(c.i01 == 0);
    CHECK(c.i12 == 0);
    CHECK(c.i02 == 0);
    CHECK(c.holds);
  }
  SUBCASE("weight chain over two simple roots") {
    Symbol S = Symbol::local(mat2(0, 0, 0, -0.2), 1.0);
    const double g = 0.1;
    CocycleResult c = cocycle_check(weight_shift(S, -g), weight_shift(S, g), weight_shift(S, 3 * g));
    CHECK(c.i01 == -1);
    CHECK(c.i12 == -1);
    CHECK(c.i02 == -2);
    CHECK(c.holds);
  }
  SUBCASE("random hyperbolic triples") {
    std::mt19937 rng(55);
    for (int trial = 0; trial < 3; ++trial) {
      Symbol S0 = scenarios::random_hyperbolic(rng, 1), S1 = scenarios::random_hyperbolic(rng, 1),
             S2 = scenarios::random_hyperbolic(rng, 1);
      CHECK(cocycle_check(S0, S1, S2).holds);
    }
  }
}

TEST_CASE("index does not depend on the path between fixed endpoints") {
  std::mt19937 rng(63);
  for (int trial = 0; trial < 3; ++trial) {
    Symbol Sm = scenarios::random_hyperbolic(rng, 2), Sp = scenarios::random_hyperbolic(rng, 2),
           Smid = scenarios::random_hyperbolic(rng, 2);
    int direct = fredholm_index(Sm, Sp);
    OperatorFamily bent = OperatorFamily::tabulated({0.0, 0.5, 1.0}, {Sm, Smid, Sp});
    CHECK(crossing_number(bent).index == direct);
  }
}

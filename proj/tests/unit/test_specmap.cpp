#include "doctest.h"

#include <cmath>
#include <random>

#include "../scenarios.hpp"
#include "specflow/specmap.hpp"

using namespace specflow;
using scenarios::scalar;

namespace {

// Limits nu - a_pm - lambda: the borders are the vertical lines Re lambda = -a_pm. The strip is
// wide enough to hold the root for every lambda on the test grids.
LambdaFamily shifted_scalar() {
  LambdaFamily F;
  F.minus = Symbol::local(scalar(1.0), 4.0);
  F.plus = Symbol::local(scalar(-1.0), 4.0);
  F.B = scalar(1.0);
  return F;
}

// nu - a_pm - k a^2 / (a^2 - nu^2) + k - lambda: borders bend away from Re lambda = -a_pm, and the
// roots near the kernel poles stay outside the strip.
LambdaFamily nonlocal_scalar() {
  LambdaFamily F;
  F.minus = Symbol::local(scalar(0.5), 2.5);
  F.plus = Symbol::local(scalar(-0.5), 2.5);
  for (Symbol* S : {&F.minus, &F.plus}) {
    S->kernel = Kernel::exponential(3.0, scalar(0.1));
    add_shift(S->shifts, 0.0, scalar(-0.1));
  }
  F.B = scalar(1.0);
  return F;
}

struct MapCase {
  LambdaFamily F;
  std::vector<double> re, im;
};

}  // namespace

TEST_CASE("index far to the right") {
  SpecMapResult R = specmap(shifted_scalar(), linspace(3, 4, 3), linspace(-1, 1, 3));
  for (const auto& p : R.points) {
    CHECK(p.hyperbolic_minus);
    CHECK(p.hyperbolic_plus);
    REQUIRE(p.index.has_value());
    CHECK(*p.index == 0);
  }
}

TEST_CASE("map structure") {
  for (const MapCase& c : {MapCase{shifted_scalar(), linspace(-1.7, 1.9, 7), linspace(-1.2, 1.2, 5)},
                           MapCase{nonlocal_scalar(), linspace(-1.3, 1.1, 7), linspace(-1.2, 1.2, 5)}}) {
    const LambdaFamily& F = c.F;
    const auto &re = c.re, &im = c.im;
    SpecMapResult R = specmap(F, re, im);

    SUBCASE("conjugate symmetry") {
      for (size_t i = 0; i < re.size(); ++i)
        for (size_t j = 0; j < im.size(); ++j) {
          const auto &p = R.at(i, j), &q = R.at(i, im.size() - 1 - j);
          CHECK(p.index.has_value() == q.index.has_value());
          if (p.index && q.index) CHECK(*p.index == *q.index);
        }
    }

    SUBCASE("borders lie on the root loci") {
      REQUIRE(!R.borders.empty());
      for (const auto& b : R.borders) {
        CHECK(b.residual < 1e-8);
        CHECK(std::abs(char_det(F.at(b.plus_side, b.lambda), cplx(0, b.ell))) < 1e-8);
      }
    }

    SUBCASE("index jump across a border is the crossing count of that limit") {
      for (size_t j = 0; j < im.size(); ++j)
        for (size_t i = 0; i + 1 < re.size(); ++i) {
          const auto &p = R.at(i, j), &q = R.at(i + 1, j);
          if (!p.index || !q.index) continue;
          if (p.state_minus != q.state_minus) {
            auto path = OperatorFamily::affine(F.at(false, p.lambda), F.at(false, q.lambda));
            CHECK(*q.index - *p.index == crossing_number(path).cross);
          }
          if (p.state_plus != q.state_plus) {
            auto path = OperatorFamily::affine(F.at(true, p.lambda), F.at(true, q.lambda));
            CHECK(*q.index - *p.index == -crossing_number(path).cross);
          }
        }
    }

    SUBCASE("index is locally constant between borders") {
      std::mt19937 rng(3);
      std::uniform_int_distribution<size_t> I(0, re.size() - 2), J(0, im.size() - 1);
      int checked = 0;
      for (int t = 0; t < 40; ++t) {
        size_t i = I(rng), j = J(rng);
        const auto &p = R.at(i, j), &q = R.at(i + 1, j);
        bool separated = false;
        for (const auto& b : R.borders)
          separated = separated || (std::abs(b.lambda.imag() - im[j]) < 1e-9 && b.lambda.real() >= re[i] - 1e-9 &&
                                    b.lambda.real() <= re[i + 1] + 1e-9);
        if (separated || !p.index || !q.index) continue;
        ++checked;
        CHECK(*p.index == *q.index);
      }
      CHECK(checked > 0);
    }
  }
}

TEST_CASE("scalar map values") {
  SpecMapResult R = specmap(shifted_scalar(), linspace(-1.7, 1.9, 7), {0.3});
  // Re lambda in (-1, 1) sits between the borders, where exactly one limit has a right root.
  for (size_t i = 0; i < R.re.size(); ++i) {
    const auto& p = R.at(i, 0);
    REQUIRE(p.index.has_value());
    const double x = R.re[i];
    CHECK(std::abs(*p.index) == (std::abs(x) < 1 ? 1 : 0));
    CHECK(p.state_minus == (x > -1 ? 1 : 0));
    CHECK(p.state_plus == (x > 1 ? 1 : 0));
  }
  int minus_borders = 0, plus_borders = 0;
  for (const auto& b : R.borders) {
    if (b.plus_side) {
      ++plus_borders;
      CHECK(std::abs(b.lambda.real() - 1) < 1e-8);
    } else {
      ++minus_borders;
      CHECK(std::abs(b.lambda.real() + 1) < 1e-8);
    }
  }
  CHECK(minus_borders == 1);
  CHECK(plus_borders == 1);
}

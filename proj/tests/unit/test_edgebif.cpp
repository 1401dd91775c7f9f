#include "doctest.h"

#include <cmath>
#include <random>

#include "../scenarios.hpp"
#include "specflow/edgebif.hpp"
#include "specflow/errors.hpp"

using namespace specflow;
using scenarios::mat2;
using scenarios::scalar;

namespace {

// d(nu, lambda) by direct determinant evaluation.
double det_at(const EdgeModel& m, double nu, double lambda) { return char_det(m.symbol_at(lambda), nu).real(); }

// Scalar model nu - K^(nu) + 1 - lambda B with a unit Gaussian centered at -1.
EdgeModel gaussian_scalar(double b) {
  EdgeModel m;
  m.n = 1;
  m.base.n = 1;
  m.base.kernel = Kernel::gaussian(1.0, scalar(1.0), -1.0);
  add_shift(m.base.shifts, 0.0, scalar(-1.0));
  m.base.eta = 1.0;
  m.B = RMat::Constant(1, 1, b);
  m.perturbation.V = [](double x) { return std::exp(-x * x); };
  m.perturbation.P = scalar(1.0);
  return m;
}

// Nilpotent local part conjugated by a random change of basis; B random.
EdgeModel random_diffusive(std::mt19937& rng) {
  std::uniform_real_distribution<double> U(-1, 1);
  for (;;) {
    RMat Q(2, 2), B(2, 2);
    Q << U(rng), U(rng), U(rng), U(rng);
    B << U(rng), U(rng), U(rng), U(rng);
    if (std::abs(Q.determinant()) < 0.3) continue;
    RMat J = RMat::Zero(2, 2);
    J(0, 1) = 1;
    RMat A = Q * J * Q.inverse();
    EdgeModel m = scenarios::schrodinger_well();
    m.base = Symbol::local(A.cast<cplx>(), 1.0);
    m.B = B;
    m.perturbation.P = mat2(U(rng), U(rng), U(rng), U(rng));
    if (diffusive_check(m).pass) return m;
  }
}

}  // namespace

TEST_CASE("diffusive dispersion checks") {
  SUBCASE("Schrodinger system") {
    DiffusiveReport r = diffusive_check(scenarios::schrodinger_well());
    CHECK(std::abs(r.d00) <= 1e-12);
    CHECK(std::abs(r.d_nu) <= 1e-12);
    CHECK(r.d_nunu == doctest::Approx(2).epsilon(1e-10));
    CHECK(r.d_lambda == doctest::Approx(-1).epsilon(1e-10));
    CHECK(r.pass);
  }
  SUBCASE("without a lambda coupling the model is not diffusive") {
    EdgeModel m = scenarios::schrodinger_well();
    m.B = RMat::Zero(2, 2);
    DiffusiveReport r = diffusive_check(m);
    CHECK(std::abs(r.d_lambda) <= 1e-12);
    CHECK_FALSE(r.condition2);
    CHECK_FALSE(r.pass);
    CHECK_THROWS_AS(edge_vectors(m), ValidationError);
  }
  SUBCASE("shifted Gaussian kernel against finite differences") {
    EdgeModel m = gaussian_scalar(-1.0);
    DiffusiveReport r = diffusive_check(m);
    const double h = 1e-3;
    double d0 = det_at(m, 0, 0);
    double dnu = (det_at(m, h, 0) - det_at(m, -h, 0)) / (2 * h);
    double dnunu = (det_at(m, h, 0) - 2 * d0 + det_at(m, -h, 0)) / (h * h);
    double dlam = (det_at(m, 0, h) - det_at(m, 0, -h)) / (2 * h);
    CHECK(std::abs(r.d00 - d0) <= 1e-6);
    CHECK(std::abs(r.d_nu - dnu) <= 1e-6);
    CHECK(std::abs(r.d_nunu - dnunu) <= 1e-6);
    CHECK(std::abs(r.d_lambda - dlam) <= 1e-6);
    CHECK(r.condition1);
    CHECK(r.condition2);
    CHECK(r.pass);
    CHECK_FALSE(diffusive_check(gaussian_scalar(1.0)).condition2);
  }
}

TEST_CASE("edge vectors") {
  SUBCASE("Schrodinger system") {
    EdgeData d = edge_vectors(scenarios::schrodinger_well());
    CHECK(std::abs(std::abs(d.e0(0)) - 1) <= 1e-12);
    CHECK(std::abs(d.e0(1)) <= 1e-12);
    CHECK(std::abs(d.e0_adj(0)) <= 1e-12);
    CHECK(std::abs(std::abs(d.e0_adj(1)) - 1) <= 1e-12);
    CHECK(d.slope == doctest::Approx(1).epsilon(1e-10));
  }
  SUBCASE("identities hold on random diffusive models") {
    std::mt19937 rng(31);
    for (int t = 0; t < 20; ++t) {
      EdgeModel m = random_diffusive(rng);
      EdgeData d = edge_vectors(m);
      CHECK(d.kernel_residual <= 1e-10);
      CHECK(d.adjoint_kernel_residual <= 1e-10);
      CHECK(d.compat1 <= 1e-10);
      CHECK(d.compat3 <= 1e-10);
      CHECK(d.compat4 <= 1e-10);
      CHECK(std::abs(d.nondegeneracy) > 1e-10);
    }
  }
}

TEST_CASE("edge constant") {
  EdgeModel m = scenarios::schrodinger_well();
  const double M = edge_constant(m);
  SUBCASE("shallow-well value") { CHECK(std::abs(M - std::sqrt(kPi) / 2) <= 1e-9); }
  SUBCASE("no perturbation, no constant") {
    EdgeModel z = m;
    z.perturbation.P = Mat::Zero(2, 2);
    CHECK(edge_constant(z) == 0.0);
  }
  SUBCASE("sign conventions leave the square fixed") {
    EdgeData d = edge_vectors(m);
    for (int flip = 1; flip < 4; ++flip) {
      EdgeData f = d;
      if (flip & 1) {
        f.e0 = -d.e0;
        f.e1 = -d.e1;
      }
      if (flip & 2) f.e0_adj = -d.e0_adj;
      f.denominator = edge_denominator(m, f.e0, f.e0_adj, f.e1);
      double Mf = edge_constant(m, f);
      CHECK(std::abs(Mf * Mf - M * M) <= 1e-12);
    }
  }
  SUBCASE("gauge freedom in e1") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(-3, 3);
    for (int t = 0; t < 5; ++t) {
      EdgeModel r = random_diffusive(rng);
      EdgeData d = edge_vectors(r);
      const double M0 = edge_constant(r, d);
      EdgeData g = d;
      g.e1 = d.e1 + U(rng) * d.e0;
      g.denominator = edge_denominator(r, g.e0, g.e0_adj, g.e1);
      CHECK(std::abs(edge_constant(r, g) - M0) <= 1e-10 * (1 + std::abs(M0)));
    }
  }
  SUBCASE("linear in the perturbation") {
    EdgeModel twice = m;
    twice.perturbation.P = 2 * m.perturbation.P;
    CHECK(std::abs(edge_constant(twice) - 2 * M) <= 1e-10);
  }
}

TEST_CASE("smooth ramp") {
  const double h = 1e-6;
  for (double x = -1.5; x <= 1.5; x += 0.01) {
    CHECK(std::abs(ramp(-x) + ramp(x)) <= 1e-15);
    if (std::abs(x) >= 1) CHECK(std::abs(std::abs(ramp(x)) - 1) <= 1e-15);
    if (std::abs(std::abs(x) - 0.5) > 2 * h && std::abs(std::abs(x) - 1) > 2 * h) {
      double fd = (ramp(x + h) - ramp(x - h)) / (2 * h);
      CHECK(std::abs(ramp_dx(x) - fd) <= 1e-6);
    }
  }
  // continuity of the derivative where the clamp starts and ends
  for (double x : {0.5, 1.0}) CHECK(std::abs(ramp_dx(x + 1e-9) - ramp_dx(x - 1e-9)) <= 1e-6);
}

TEST_CASE("bifurcating eigenvalue") {
  EdgeModel m = scenarios::schrodinger_well();
  const double M = edge_constant(m);
  SUBCASE("no perturbation, eigenvalue at the edge") {
    EdgeEigen e = edge_eigenvalue(m, 0.0);
    CHECK(e.lambda == 0.0);
  }
  SUBCASE("shallow well against shooting") {
    const double eps = 0.02;
    EdgeEigen e = edge_eigenvalue(m, eps);
    CHECK_FALSE(e.resonance);
    CHECK(std::abs(e.lambda / (eps * eps) - M * M) <= 0.05 * M * M);
    double oracle = scenarios::shooting_eigenvalue(eps);
    CHECK(std::abs(e.lambda - oracle) <= 0.05 * oracle);
    CHECK(e.residual <= 1e-10);
  }
  SUBCASE("eigenfunction decay rate") {
    const double eps = 0.02;
    EdgeEigen e = edge_eigenvalue(m, eps);
    double want = -edge_vectors(m).slope * M * eps;
    INFO(e.decay_fit, " vs ", want);
    CHECK(std::abs(e.decay_fit - want) <= 0.1 * std::abs(want));
    CHECK(std::abs(e.nu_plus - want) <= 0.1 * std::abs(want));
  }
  SUBCASE("the eigenvalue sits off the essential spectrum") {
    EdgeEigen e = edge_eigenvalue(m, 0.02);
    CHECK(is_hyperbolic(m.symbol_at(e.lambda)).hyperbolic);
  }
  SUBCASE("opposite sign gives a resonance") {
    EdgeEigen e = edge_eigenvalue(m, -0.02);
    CHECK(e.resonance);
  }
}

TEST_CASE("quadratic scaling law") {
  EdgeModel m = scenarios::schrodinger_well();
  ScalingTable T = edge_scaling(m, {0.04, 0.02, 0.01});
  CHECK(T.relative_error <= 0.02);
  for (size_t i = 0; i < T.points.size(); ++i) {
    double q = T.points[i].lambda / (T.points[i].eps * T.points[i].eps);
    CHECK(std::abs(q - T.M * T.M) <= std::abs(T.slope) * T.points[i].eps * 1.5 + 1e-12);
  }
  SUBCASE("doubling the perturbation quadruples the intercept") {
    EdgeModel twice = m;
    twice.perturbation.P = 2 * m.perturbation.P;
    ScalingTable D = edge_scaling(twice, {0.01, 0.005, 0.0025});
    CHECK(std::abs(D.intercept - 4 * T.intercept) <= 0.02 * 4 * T.intercept);
  }
}

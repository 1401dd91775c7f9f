// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "scenarios.hpp"
#include "specflow/charmatrix.hpp"
#include "specflow/discretize.hpp"
#include "specflow/errors.hpp"
#include "specflow/parallel.hpp"
#include "specflow/rootfinder.hpp"
#include "specflow/spectralflow.hpp"

using namespace specflow;
using namespace scenarios;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, double budget_s, const std::function<Outcome()>& run) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = run();
  } catch (const Error& e) {
    o.pass = false;
    o.detail = e.kind() + ": " + e.what();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool in_time = budget_s <= 0 || dt < budget_s;
  bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << "  criterion " << id << "  " << name << "  [" << dt << " s";
  if (budget_s > 0) os << " / " << budget_s << " s";
  os << "]  " << o.detail;
  if (o.pass && !in_time) os << " (over time budget)";
  std::printf("%s\n", os.str().c_str());
  std::fflush(stdout);
}

FlowOptions flow_opts(int jobs) {
  FlowOptions o;
  o.jobs = jobs;
  return o;
}

// Integer outputs of criteria 1-5, reused for the determinism check.
std::vector<int> weight_indices(int jobs) {
  std::vector<int> out;
  for (const Symbol& S : {simple_axis_local(), simple_axis_nonlocal()})
    for (double g : {0.02, 0.05, 0.1}) {
      out.push_back(weighted_index(S, -g, g, flow_opts(jobs)));
      out.push_back(weighted_index(S, g, -g, flow_opts(jobs)));
    }
  return out;
}

std::vector<int> multiplicity_indices(int jobs) {
  std::vector<int> out;
  for (double g : {0.02, 0.05, 0.1}) out.push_back(weighted_index(double_axis_local(), -g, g, flow_opts(jobs)));
  return out;
}

std::vector<int> flow_counts(int jobs) {
  std::vector<int> out;
  for (const auto& c : crossing_families(10, 20261015u)) {
    FlowResult R = crossing_number(c.family, flow_opts(jobs));
    ContinuationCount C = continuation_cross(c.family, flow_opts(jobs));
    int signs = 0;
    for (double s : C.crossing_speeds) signs += s > 0 ? 1 : (s < 0 ? -1 : 0);
    out.push_back(R.cross);
    out.push_back(signs);
  }
  return out;
}

std::vector<int> cocycle_values(int jobs) {
  std::mt19937 rng(4242u);
  std::vector<int> out;
  for (int t = 0; t < 10; ++t) {
    int n = t % 2 ? 2 : 1;
    Symbol S0 = random_hyperbolic(rng, n), S1 = random_hyperbolic(rng, n), S2 = random_hyperbolic(rng, n);
    CocycleResult c = cocycle_check(S0, S1, S2, flow_opts(jobs));
    out.insert(out.end(), {c.i01, c.i12, c.i02, c.holds ? 1 : 0});
  }
  return out;
}

// Per instance: argument-principle count, oracle count, and whether a double root was
// reported with multiplicity 2.
std::vector<int> root_counts(int jobs) {
  std::mt19937 rng(777u);
  Rectangle box = rational_box();
  std::vector<RationalInstance> inst;
  while (inst.size() < 20) {
    RationalInstance r = rational_instance(rng, static_cast<int>(inst.size() % 4));
    bool clear = true;
    for (cplx z : r.roots) clear = clear && box_distance(box, z) > 1e-3;
    if (clear) inst.push_back(r);
  }
  auto rows = parallel_map(20, jobs, [&](int i) {
    const RationalInstance& r = inst[i];
    int oracle = 0;
    for (cplx z : r.roots) oracle += contains(box, z) ? 1 : 0;
    RootSet rs = locate_roots(r.S, box);
    int mult_ok = 1;
    if (r.double_root) {
      for (cplx z : r.roots) {
        if (!contains(box, z)) continue;
        bool found = false;
        for (const auto& e : rs.roots) found = found || (std::abs(e.nu - z) < 1e-5 && e.multiplicity == 2);
        mult_ok = mult_ok && found;
      }
    }
    return std::vector<int>{count_roots(r.S, box), rs.total_count, oracle, mult_ok};
  });
  std::vector<int> out;
  for (auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::string join(const std::vector<int>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

int main() {
  report(1, "weight-shift index", 10, [] {
    auto v = weight_indices(1);
    bool ok = true;
    for (size_t i = 0; i < v.size(); ++i) ok = ok && v[i] == (i % 2 == 0 ? -1 : 1);
    return Outcome{ok, "indices (gamma, -gamma pairs) = " + join(v)};
  });

  report(2, "multiplicity-2 weight index", 10, [] {
    auto v = multiplicity_indices(1);
    bool ok = true;
    for (int x : v) ok = ok && x == -2;
    return Outcome{ok, "indices = " + join(v)};
  });

  report(3, "spectral flow equals continuation count", 60, [] {
    auto v = flow_counts(1);
    bool ok = true;
    int nonzero = 0;
    for (size_t i = 0; i < v.size(); i += 2) {
      ok = ok && v[i] == v[i + 1];
      nonzero += v[i] != 0;
    }
    return Outcome{ok && nonzero == 10, "(cross, sum sign) = " + join(v)};
  });

  report(4, "cocycle identity", 60, [] {
    auto v = cocycle_values(1);
    bool ok = true;
    for (size_t i = 3; i < v.size(); i += 4) ok = ok && v[i] == 1;
    return Outcome{ok, "(i01, i12, i02, holds) = " + join(v)};
  });

  report(5, "root count vs polynomial oracle", 30, [] {
    auto v = root_counts(1);
    bool ok = true;
    for (size_t i = 0; i < v.size(); i += 4) ok = ok && v[i] == v[i + 2] && v[i + 1] == v[i + 2] && v[i + 3] == 1;
    return Outcome{ok, "(count, located, oracle, multiplicity) = " + join(v)};
  });

  report(6, "discretized index agrees with spectral flow", 120, [] {
    struct Case {
      Symbol S;
      double g;
    };
    std::vector<Case> cases;
    for (double g : {0.02, 0.05, 0.1}) {
      cases.push_back({simple_axis_local(), g});
      cases.push_back({simple_axis_local(), -g});
      cases.push_back({double_axis_local(), g});
    }
    Grid grid;
    grid.L = 30;
    grid.h = 0.05;
    int compared = 0, agreed = 0;
    std::ostringstream os;
    for (const auto& c : cases) {
      int flow = weighted_index(c.S, -c.g, c.g);
      IndexEstimate e = index_estimate(SpatialOperator::constant_symbol(c.S), grid, -c.g, c.g);
      bool clear = e.reliable && e.forward.gap >= 1e3 && e.adjoint.gap >= 1e3;
      os << "(" << c.S.n << "," << c.g << ": flow " << flow << ", grid " << e.index << (clear ? "" : " no gap") << ") ";
      if (clear) {
        ++compared;
        agreed += e.index == flow;
      }
    }
    os << compared << " of " << cases.size() << " with clear gap";
    return Outcome{compared == static_cast<int>(cases.size()) && agreed == compared, os.str()};
  });

  report(7, "conservation-law linearization index", 60, [] {
    int i1 = linearization_index(scalar_shock(), 0.05);
    int i2 = linearization_index(system_shock(), 0.05);
    int i3 = linearization_index(zero_speed_shock(), 0.05);
    std::ostringstream os;
    os << "scalar " << i1 << " (want -1), system " << i2 << " (want -2), zero speed " << i3 << " (want -3)";
    return Outcome{i1 == -1 && i2 == -2 && i3 == -3, os.str()};
  });

  report(8, "shock jump formula", 120, [] {
    ShockModel m = scalar_shock();
    const double J = jump_leading_order(m)(0);
    std::vector<double> eps = {4e-3, 2e-3, 1e-3}, q, r;
    std::ostringstream os;
    bool oracle_ok = true;
    for (double e : eps) {
      ShockSolution s = shock_profile(m, RVec::Zero(1), e);
      double a = s.a(0);
      q.push_back((a - s.b(0)) / e);
      r.push_back(q.back() - J);
      oracle_ok = oracle_ok && std::abs(a - scalar_shock_a(e)) <= 1e-8 * std::abs(scalar_shock_a(e)) + 1e-12;
      os << "eps " << e << ": (a-b)/eps " << q.back() << ", exact a " << scalar_shock_a(e) / e << "; ";
    }
    double ratio1 = r[1] / r[0], ratio2 = r[2] / r[1];
    double C = std::abs(r[0]) / eps[0];
    bool linear = true;
    for (size_t i = 0; i < eps.size(); ++i) linear = linear && std::abs(r[i]) <= 1.1 * C * eps[i];
    bool halving = std::abs(ratio1 - 0.5) <= 0.125 && std::abs(ratio2 - 0.5) <= 0.125;
    double richardson = 2 * q[2] - q[1];
    double rel = std::abs(richardson - J) / std::abs(J);
    os << "leading " << J << ", ratios " << ratio1 << " " << ratio2 << ", Richardson " << richardson << " (rel err "
       << rel << ")";
    return Outcome{linear && halving && rel <= 0.02 && oracle_ok, os.str()};
  });

  report(9, "zero-speed selection", 120, [] {
    ShockModel m = zero_speed_shock();
    const double eps = 1e-3;
    RVec b = RVec::Zero(2);
    ZeroSpeedResult z = zero_speed_selection(m, b, eps);
    double ra = z.a_j0 / eps, rb = -z.b_j0 / eps;
    double ea = std::abs(ra - z.M) / std::abs(z.M), eb = std::abs(rb - z.M) / std::abs(z.M);
    std::ostringstream os;
    os << "M " << z.M << ", a_j0/eps " << ra << " (rel " << ea << "), -b_j0/eps " << rb << " (rel " << eb
       << "), (a_j0-b_j0)/eps " << (z.a_j0 - z.b_j0) / eps;
    return Outcome{ea <= 0.03 && eb <= 0.03, os.str()};
  });

  report(10, "edge bifurcation scaling", 180, [] {
    EdgeModel m = schrodinger_well();
    std::vector<double> eps = {0.04, 0.02, 0.01};
    ScalingTable T = edge_scaling(m, eps);
    const double M2 = kPi / 4;
    double rel = std::abs(T.intercept - M2) / M2;
    std::ostringstream os;
    os << "intercept " << T.intercept << " vs pi/4 (rel " << rel << "); ";
    bool pointwise = true;
    for (const auto& p : T.points) {
      double oracle = shooting_eigenvalue(p.eps);
      double e = std::abs(p.lambda - oracle) / oracle;
      pointwise = pointwise && e <= 0.05;
      os << "eps " << p.eps << ": " << p.lambda << " vs shooting " << oracle << " (rel " << e << "); ";
    }
    return Outcome{rel <= 0.02 && pointwise, os.str()};
  });

  report(11, "structural identities", 10, [] {
    std::mt19937 rng(99u);
    std::uniform_real_distribution<double> U(-1, 1);
    double shift_err = 0, adj_err = 0, d1_err = 0, d2_err = 0;
    for (int t = 0; t < 20; ++t) {
      int n = t % 2 ? 2 : 1;
      Symbol S = random_hyperbolic(rng, n);
      add_shift(S.shifts, 0.7 + 0.5 * U(rng), 0.3 * Mat::Random(n, n));
      double g = 0.2 * U(rng);
      Symbol W = weight_shift(S, g);
      Symbol A = adjoint_symbol(S);
      for (int k = 0; k < 5; ++k) {
        cplx nu(0.2 * U(rng), 3 * U(rng));
        Mat lhs = char_matrix(W, nu + g), rhs = char_matrix(S, nu);
        shift_err = std::max(shift_err, (lhs - rhs).norm() / (1 + rhs.norm()));
        // Adjoint: Delta_{S*}(nu) = -Delta_S(-conj nu)^*, so det agrees up to (-1)^n and conjugation.
        cplx da = char_det(A, nu), ds = std::conj(char_det(S, -std::conj(nu))) * (n % 2 ? -1.0 : 1.0);
        adj_err = std::max(adj_err, std::abs(da - ds) / (1 + std::abs(ds)));
        const double h = 1e-4;
        Mat f1 = fourier_eval(S.kernel, nu, 1, n);
        Mat fd1 = (fourier_eval(S.kernel, nu + h, 0, n) - fourier_eval(S.kernel, nu - h, 0, n)) / (2 * h);
        Mat f2 = fourier_eval(S.kernel, nu, 2, n);
        Mat fd2 = (fourier_eval(S.kernel, nu + h, 1, n) - fourier_eval(S.kernel, nu - h, 1, n)) / (2 * h);
        d1_err = std::max(d1_err, (f1 - fd1).norm() / std::max(f1.norm(), 1e-300));
        d2_err = std::max(d2_err, (f2 - fd2).norm() / std::max(f2.norm(), 1e-300));
      }
    }
    std::ostringstream os;
    os << "weight shift " << shift_err << ", adjoint det " << adj_err << ", d/dnu " << d1_err << ", d2/dnu2 "
       << d2_err;
    return Outcome{shift_err <= 1e-12 && adj_err <= 1e-12 && d1_err <= 1e-6 && d2_err <= 1e-6, os.str()};
  });

  report(12, "determinism across --jobs", 0, [] {
    bool same = weight_indices(1) == weight_indices(3) && multiplicity_indices(1) == multiplicity_indices(3) &&
                flow_counts(1) == flow_counts(3) && cocycle_values(1) == cocycle_values(3) &&
                root_counts(1) == root_counts(3);
    return Outcome{same, same ? "criteria 1-5 integer outputs identical for jobs 1 and 3" : "outputs differ"};
  });

  return failures == 0 ? 0 : 1;
}

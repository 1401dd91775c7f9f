#include "specflow/specmap.hpp"

#include <cmath>

#include "specflow/charmatrix.hpp"
#include "specflow/errors.hpp"
#include "specflow/parallel.hpp"

namespace specflow {

Symbol LambdaFamily::at(bool plus_side, cplx lambda) const {
  Symbol S = plus_side ? plus : minus;
  if (lambda != 0.0) add_shift(S.shifts, 0.0, lambda * B);
  return S;
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw ValidationError("grid needs at least one point");
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  return v;
}

namespace {

cplx d_of(const LambdaFamily& F, bool plus_side, cplx nu, cplx lambda) {
  return char_det(F.at(plus_side, lambda), nu);
}

// Hyperbolic limits are labelled by their right-half root count; -1 marks a non-hyperbolic
// limit and -2 a failed count.
int limit_state(const LambdaFamily& F, bool plus_side, cplx lambda, const FlowOptions& opt) {
  try {
    Symbol S = F.at(plus_side, lambda);
    if (!is_hyperbolic(S, opt.hyperbolicity).hyperbolic) return -1;
    return right_count(S, opt.roots);
  } catch (const Error&) {
    return -2;
  }
}

// Imaginary part of the root closest to the axis, as a starting point for border refinement.
std::optional<double> axis_witness(const LambdaFamily& F, bool plus_side, cplx lambda, const FlowOptions& opt) {
  try {
    Symbol S = F.at(plus_side, lambda);
    RootSet rs = locate_roots(S, default_box(S), opt.roots);
    std::optional<double> best;
    double dist = 0;
    for (const auto& r : rs.roots)
      if (!best || std::abs(r.nu.real()) < dist) {
        best = r.nu.imag();
        dist = std::abs(r.nu.real());
      }
    if (best) return best;
    auto h = is_hyperbolic(S, opt.hyperbolicity);
    if (!h.witnesses.empty()) return h.witnesses.front();
  } catch (const Error&) {
  }
  return std::nullopt;
}

}  // namespace

std::optional<BorderPoint> refine_border(const LambdaFamily& F, bool plus_side, cplx la, cplx lb, double t0,
                                         double ell0, double tol) {
  double t = t0, ell = ell0;
  const cplx dl = lb - la;
  for (int it = 0; it < 50; ++it) {
    cplx lambda = la + t * dl;
    Symbol S = F.at(plus_side, lambda);
    CharEval ce = char_eval(S, cplx(0, ell), 1);
    cplx d = ce.d;
    if (std::abs(d) < 1e-3 * tol) break;
    cplx d_ell = cplx(0, 1) * *ce.d1;
    const double e = 1e-6 * (1 + std::abs(lambda));
    cplx d_lam = (d_of(F, plus_side, cplx(0, ell), lambda + e) - d_of(F, plus_side, cplx(0, ell), lambda - e)) / (2 * e);
    cplx d_t = d_lam * dl;
    // Real 2 x 2 system in (ell, t).
    double a11 = d_ell.real(), a12 = d_t.real(), a21 = d_ell.imag(), a22 = d_t.imag();
    double det = a11 * a22 - a12 * a21;
    if (std::abs(det) < 1e-300) return std::nullopt;
    double s_ell = (d.real() * a22 - a12 * d.imag()) / det;
    double s_t = (a11 * d.imag() - a21 * d.real()) / det;
    ell -= s_ell;
    t -= s_t;
    if (!std::isfinite(ell) || !std::isfinite(t)) return std::nullopt;
  }
  cplx lambda = la + t * dl;
  double res = std::abs(d_of(F, plus_side, cplx(0, ell), lambda));
  if (!(res < tol) || t < -0.01 || t > 1.01) return std::nullopt;
  return BorderPoint{lambda, ell, plus_side, res};
}

SpecMapResult specmap(const LambdaFamily& F, const std::vector<double>& re, const std::vector<double>& im,
                      const SpecMapOptions& opt) {
  if (F.minus.n != F.plus.n || F.B.rows() != F.minus.n || F.B.cols() != F.minus.n)
    throw ValidationError("lambda family dimensions disagree");
  SpecMapResult R;
  R.re = re;
  R.im = im;
  const int nre = static_cast<int>(re.size()), nim = static_cast<int>(im.size());
  R.points = parallel_map(nre * nim, opt.flow.jobs, [&](int k) {
    SpecMapPoint p;
    p.lambda = cplx(re[k % nre], im[k / nre]);
    try {
      auto hm = is_hyperbolic(F.at(false, p.lambda), opt.flow.hyperbolicity);
      auto hp = is_hyperbolic(F.at(true, p.lambda), opt.flow.hyperbolicity);
      p.hyperbolic_minus = hm.hyperbolic;
      p.hyperbolic_plus = hp.hyperbolic;
      p.margin_minus = hm.margin;
      p.margin_plus = hp.margin;
      p.state_minus = p.hyperbolic_minus ? limit_state(F, false, p.lambda, opt.flow) : -1;
      p.state_plus = p.hyperbolic_plus ? limit_state(F, true, p.lambda, opt.flow) : -1;
      if (p.hyperbolic_minus && p.hyperbolic_plus) {
        FlowOptions fo = opt.flow;
        fo.jobs = 1;
        p.index = fredholm_index(F.at(false, p.lambda), F.at(true, p.lambda), fo);
      }
    } catch (const Error& e) {
      p.error = e.kind() + ": " + e.what();
    }
    return p;
  });

  // Grid edges across which one limit changes hyperbolicity or its right-half root count: a
  // root of that limit crosses the imaginary axis somewhere on the edge.
  struct Edge {
    int a, b;
    bool plus_side;
  };
  std::vector<Edge> edges;
  auto state = [&](int k, bool plus_side) { return plus_side ? R.points[k].state_plus : R.points[k].state_minus; };
  for (int j = 0; j < nim; ++j)
    for (int i = 0; i < nre; ++i) {
      int k = j * nre + i;
      for (bool side : {false, true}) {
        if (i + 1 < nre && state(k, side) != state(k + 1, side)) edges.push_back({k, k + 1, side});
        if (j + 1 < nim && state(k, side) != state(k + nre, side)) edges.push_back({k, k + nre, side});
      }
    }
  auto found = parallel_map(static_cast<int>(edges.size()), opt.flow.jobs, [&](int e) -> std::optional<BorderPoint> {
    const Edge& E = edges[e];
    cplx la = R.points[E.a].lambda, lb = R.points[E.b].lambda;
    const int sa = state(E.a, E.plus_side);
    double lo = 0, hi = 1;
    for (int s = 0; s < opt.bisection_steps; ++s) {
      double mid = 0.5 * (lo + hi);
      if (limit_state(F, E.plus_side, la + mid * (lb - la), opt.flow) == sa)
        lo = mid;
      else
        hi = mid;
    }
    const double t = 0.5 * (lo + hi);
    auto ell = axis_witness(F, E.plus_side, la + t * (lb - la), opt.flow);
    if (!ell) return std::nullopt;
    try {
      return refine_border(F, E.plus_side, la, lb, t, *ell, opt.border_tol);
    } catch (const Error&) {
      return std::nullopt;
    }
  });
  for (const auto& b : found)
    if (b) R.borders.push_back(*b);
  return R;
}

}  // namespace specflow

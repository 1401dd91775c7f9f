#include "specflow/spectralflow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "specflow/errors.hpp"
#include "specflow/parallel.hpp"

namespace specflow {

namespace {

double margin_at(const OperatorFamily& F, double rho, const FlowOptions& opt) {
  return is_hyperbolic(F.at(rho), opt.hyperbolicity).margin;
}

std::string box_string(const Rectangle& b) {
  std::ostringstream os;
  os << "[" << b.re_lo << "," << b.re_hi << "]x[" << b.im_lo << "," << b.im_hi << "]";
  return os.str();
}

// Golden-section minimization of the margin on [a, b].
std::pair<double, double> refine_minimum(const OperatorFamily& F, double a, double b, const FlowOptions& opt) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = margin_at(F, c, opt), fd = margin_at(F, d, opt);
  while (b - a > opt.bracket) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = margin_at(F, c, opt);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = margin_at(F, d, opt);
    }
    if (std::min(fc, fd) == 0.0) break;
  }
  return fc < fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

struct SideCounts {
  int MR_minus, MR_plus, ML_minus, ML_plus;
  bool operator==(const SideCounts& o) const {
    return MR_minus == o.MR_minus && MR_plus == o.MR_plus && ML_minus == o.ML_minus && ML_plus == o.ML_plus;
  }
};

// Left/right root counts near one axis root cluster, stabilised under halving of the
// parameter offset.
SideCounts local_counts(const OperatorFamily& F, double rho, double ell, int M, double r_loc, double d_loc,
                        const FlowOptions& opt, double* used_delta, std::vector<std::string>& boxes) {
  double drho = 1e-3;
  bool have_prev = false;
  SideCounts prev{};
  for (int k = 0; k < 60; ++k) {
    double lo = std::max(F.rho_min(), rho - drho), hi = std::min(F.rho_max(), rho + drho);
    Symbol Sm = F.at(lo), Sp = F.at(hi);
    Rectangle R{0.0, d_loc, ell - r_loc, ell + r_loc};
    Rectangle L{-d_loc, 0.0, ell - r_loc, ell + r_loc};
    SideCounts c{};
    bool ok = true;
    try {
      c.MR_minus = count_roots(Sm, R, opt.roots);
      c.MR_plus = count_roots(Sp, R, opt.roots);
      c.ML_minus = count_roots(Sm, L, opt.roots);
      c.ML_plus = count_roots(Sp, L, opt.roots);
    } catch (const ContourThroughRoot&) {
      ok = false;
    } catch (const Inconclusive&) {
      ok = false;
    }
    bool consistent = ok && c.MR_minus + c.ML_minus == M && c.MR_plus + c.ML_plus == M;
    if (consistent) {
      if (have_prev && prev == c) {
        *used_delta = 2 * drho;
        boxes.push_back(box_string(R));
        boxes.push_back(box_string(L));
        return c;
      }
      prev = c;
      have_prev = true;
    } else {
      have_prev = false;
      if (ok) {
        d_loc *= 0.5;
        r_loc *= 0.5;
      }
    }
    drho *= 0.5;
    if (drho < 1e-13) break;
  }
  std::ostringstream os;
  os << "left/right counts near rho = " << rho << ", Im nu = " << ell << " did not stabilise";
  throw CrossingsUnresolved(os.str());
}

Crossing analyse_crossing(const OperatorFamily& F, double rho, double margin, const FlowOptions& opt,
                          std::vector<std::string>& boxes) {
  Crossing X;
  X.rho = rho;
  X.margin = margin;
  Symbol S = F.at(rho);
  double cap = axis_bounds(S).ell_cap * 1.001;
  double w = std::min(opt.axis_halfwidth, 0.5 * (S.eta - std::abs(S.center)));
  Rectangle thin{-w, w, -cap, cap};
  RootSet rs = locate_roots(S, thin, opt.roots);
  boxes.push_back(box_string(rs.box));

  // Merge roots that sit at the same axis height.
  std::vector<RootEntry> groups;
  for (const auto& r : rs.roots) {
    if (!groups.empty() && std::abs(groups.back().nu.imag() - r.nu.imag()) < 1e-6) {
      groups.back().multiplicity += r.multiplicity;
    } else {
      groups.push_back(r);
    }
  }
  X.axis_roots = groups;
  for (const auto& g : groups) X.M += g.multiplicity;
  if (X.M == 0) {
    std::ostringstream os;
    os << "no axis root found at rho = " << rho << " although the margin is " << margin;
    throw CrossingsUnresolved(os.str());
  }

  double d_loc = std::min(0.05, 0.45 * (S.eta - std::abs(S.center)));
  for (size_t i = 0; i < groups.size(); ++i) {
    double gap = 0.1;
    for (size_t j = 0; j < groups.size(); ++j)
      if (j != i) gap = std::min(gap, 0.45 * std::abs(groups[i].nu.imag() - groups[j].nu.imag()));
    double used = 0;
    SideCounts c = local_counts(F, rho, groups[i].nu.imag(), groups[i].multiplicity, gap, d_loc, opt, &used, boxes);
    X.MR_minus += c.MR_minus;
    X.MR_plus += c.MR_plus;
    X.ML_minus += c.ML_minus;
    X.ML_plus += c.ML_plus;
    X.delta_rho = std::max(X.delta_rho, used);
  }

  if (X.M == 1 && groups.size() == 1) {
    X.simple = true;
    cplx nu0 = groups[0].nu;
    double e = 1e-5;
    CharEval ce = char_eval(S, nu0, 1);
    cplx drho = (char_det(F.at(rho + e), nu0) - char_det(F.at(rho - e), nu0)) / (2 * e);
    X.speed = (-drho / *ce.d1).real();
  }
  return X;
}

}  // namespace

int right_count(const Symbol& S, const RootOptions& opt) {
  double cap = axis_bounds(S).ell_cap * 1.001;
  double hi = S.center + 0.9 * S.eta;
  if (hi <= 0) return 0;
  return count_roots(S, Rectangle{0.0, hi, -cap, cap}, opt);
}

std::vector<Crossing> find_crossings(const OperatorFamily& F, const FlowOptions& opt, FlowResult* diag) {
  for (bool plus : {false, true}) {
    double rho = plus ? F.rho_max() : F.rho_min();
    auto h = is_hyperbolic(F.at(rho), opt.hyperbolicity);
    if (!h.hyperbolic || h.margin < opt.classify) {
      std::ostringstream os;
      os << "family is not hyperbolic at rho = " << rho << " (margin " << h.margin << ")";
      throw EndpointNotHyperbolic(os.str());
    }
  }

  const int N = std::max(opt.scan_points, 3);
  const double step = (F.rho_max() - F.rho_min()) / (N - 1);
  std::vector<double> rho(N);
  for (int k = 0; k < N; ++k) rho[k] = k == N - 1 ? F.rho_max() : F.rho_min() + step * k;
  std::vector<double> m = parallel_map(N, opt.jobs, [&](int k) { return margin_at(F, rho[k], opt); });

  std::vector<int> candidates;
  for (int k = 1; k + 1 < N; ++k) {
    bool local_min = m[k] < m[k - 1] && m[k] <= m[k + 1];
    if (!local_min) continue;
    double neigh = std::max(m[k - 1], m[k + 1]);
    if (m[k] <= std::max(opt.trigger, neigh - m[k])) candidates.push_back(k);
  }

  // Each candidate bracket is rescanned, since several crossings can share one coarse minimum.
  auto refined = parallel_map(static_cast<int>(candidates.size()), opt.jobs, [&](int i) {
    int k = candidates[i];
    const int M = std::max(opt.subscan_points, 3);
    const double a = rho[k - 1], b = rho[k + 1], sub = (b - a) / (M - 1);
    std::vector<double> r(M), mm(M);
    for (int j = 0; j < M; ++j) {
      r[j] = j == M - 1 ? b : a + sub * j;
      mm[j] = j == 0 ? m[k - 1] : (j == M - 1 ? m[k + 1] : margin_at(F, r[j], opt));
    }
    std::vector<std::pair<double, double>> found;
    for (int j = 1; j + 1 < M; ++j)
      if (mm[j] < mm[j - 1] && mm[j] <= mm[j + 1]) found.push_back(refine_minimum(F, r[j - 1], r[j + 1], opt));
    if (found.empty()) found.push_back(refine_minimum(F, a, b, opt));
    return found;
  });

  std::vector<std::pair<double, double>> hits;
  for (const auto& list : refined)
    for (const auto& r : list)
      if (r.second < opt.classify) hits.push_back(r);
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end(),
                         [&](const auto& a, const auto& b) { return std::abs(a.first - b.first) < 1e3 * opt.bracket; }),
             hits.end());

  std::vector<std::vector<std::string>> boxes(hits.size());
  auto crossings = parallel_map(static_cast<int>(hits.size()), opt.jobs, [&](int i) {
    return analyse_crossing(F, hits[i].first, hits[i].second, opt, boxes[i]);
  });

  if (diag) {
    diag->scan_points = N;
    diag->scan_step = step;
    diag->min_scan_margin = *std::min_element(m.begin(), m.end());
    for (const auto& b : boxes) diag->boxes.insert(diag->boxes.end(), b.begin(), b.end());
  }
  return crossings;
}

FlowResult crossing_number(const OperatorFamily& F, const FlowOptions& opt) {
  int rm = 0, rp = 0;
  bool counted = true;
  try {
    rm = right_count(F.at(F.rho_min()), opt.roots);
    rp = right_count(F.at(F.rho_max()), opt.roots);
  } catch (const Error&) {
    counted = false;
  }
  FlowResult R;
  FlowOptions o = opt;
  for (int attempt = 0; attempt < 2; ++attempt) {
    R = FlowResult();
    R.crossings = find_crossings(F, o, &R);
    for (const auto& c : R.crossings) R.cross += c.contribution();
    R.index = -R.cross;
    R.right_count_minus = rm;
    R.right_count_plus = rp;
    R.side_exit = !counted || (rp - rm) != R.cross;
    // A mismatch with the end-point root counts usually means two crossings fell inside one
    // scan cell; roots escaping through the strip sides also show up here and persist.
    if (!R.side_exit) break;
    o.scan_points *= 4;
    o.subscan_points *= 2;
  }
  return R;
}

int fredholm_index(const Symbol& Sm, const Symbol& Sp, const FlowOptions& opt, FlowResult* result) {
  for (const Symbol* s : {&Sm, &Sp}) {
    auto h = is_hyperbolic(*s, opt.hyperbolicity);
    if (!h.hyperbolic) {
      std::ostringstream os;
      os << "limit symbol is not hyperbolic (margin " << h.margin << " at l = "
         << (h.witnesses.empty() ? 0.0 : h.witnesses[0]) << ")";
      throw NotHyperbolic(os.str());
    }
  }
  if (Sm.n != Sp.n) throw ValidationError("limit symbols differ in dimension");
  OperatorFamily F = OperatorFamily::affine(Sm, Sp);
  FlowResult R = crossing_number(F, opt);
  if (result) *result = R;
  return R.index;
}

int weighted_index(const Symbol& S, double gamma_minus, double gamma_plus, const FlowOptions& opt) {
  return fredholm_index(weight_shift(S, gamma_minus), weight_shift(S, gamma_plus), opt);
}

CocycleResult cocycle_check(const Symbol& S0, const Symbol& S1, const Symbol& S2, const FlowOptions& opt) {
  CocycleResult c;
  c.i01 = fredholm_index(S0, S1, opt);
  c.i12 = fredholm_index(S1, S2, opt);
  c.i02 = fredholm_index(S0, S2, opt);
  c.holds = c.i01 + c.i12 == c.i02;
  return c;
}

namespace {

// Tracks every root found in the default box at r0 up to r1. The segment is halved while the
// surviving trajectories do not account for all roots in the box at r1, which means a root
// entered through the box sides on the way.
// A cut point near the target whose symbol has no axis root, so that no crossing sits on a
// segment boundary where the sign change would be split between two trajectories.
double clear_cut(const OperatorFamily& F, double lo, double hi, double target, const FlowOptions& opt) {
  const double offsets[] = {0.0, 0.137, -0.211, 0.293, -0.347};
  for (double o : offsets) {
    double r = target + o * (hi - lo);
    if (r <= lo || r >= hi) continue;
    HyperbolicityResult h = is_hyperbolic(F.at(r), opt.hyperbolicity);
    if (h.hyperbolic && h.margin > 1e-6) return r;
  }
  return target;
}

void continuation_segment(const OperatorFamily& F, double r0, double r1, int depth, const FlowOptions& opt,
                          std::vector<RootTrajectory>& out) {
  Symbol S0 = F.at(r0), S1 = F.at(r1);
  Rectangle b0 = default_box(S0), b1 = default_box(S1);
  RootSet rs = locate_roots(S0, b0, opt.roots);
  std::vector<RootTrajectory> trajectories;
  int ended_inside = 0;
  for (const auto& r : rs.roots) {
    if (r.multiplicity != 1) throw GenericityViolated("continuation needs simple roots at segment starts");
    trajectories.push_back(track_root(F, r0, r.nu, r1));
    const auto& T = trajectories.back();
    if (T.status == TrackStatus::ReachedEnd && b1.contains(T.samples.back().nu)) ++ended_inside;
  }
  int at_end = -1;
  try {
    at_end = count_roots(S1, b1, opt.roots);
  } catch (const Error&) {
  }
  if (at_end != ended_inside && depth < 14) {
    double mid = clear_cut(F, r0, r1, 0.5 * (r0 + r1), opt);
    continuation_segment(F, r0, mid, depth + 1, opt, out);
    continuation_segment(F, mid, r1, depth + 1, opt, out);
    return;
  }
  out.insert(out.end(), trajectories.begin(), trajectories.end());
}

}  // namespace

ContinuationCount continuation_cross(const OperatorFamily& F, const FlowOptions& opt) {
  const int K = std::max(opt.continuation_segments, 1);
  const double step = (F.rho_max() - F.rho_min()) / K;
  std::vector<double> cuts(K + 1);
  cuts[0] = F.rho_min();
  cuts[K] = F.rho_max();
  auto inner = parallel_map(K - 1, opt.jobs, [&](int k) {
    double target = F.rho_min() + (k + 1) * step;
    return clear_cut(F, target - 0.5 * step, target + 0.5 * step, target, opt);
  });
  for (int k = 1; k < K; ++k) cuts[k] = inner[k - 1];
  auto per_segment = parallel_map(K, opt.jobs, [&](int k) {
    double r0 = cuts[k], r1 = cuts[k + 1];
    std::vector<RootTrajectory> out;
    continuation_segment(F, r0, r1, 0, opt, out);
    return out;
  });
  ContinuationCount C;
  for (const auto& seg : per_segment) {
    C.tracked += static_cast<int>(seg.size());
    for (const auto& T : seg) {
      int sign = 0;
      for (size_t k = 0; k < T.samples.size(); ++k) {
        double re = T.samples[k].nu.real();
        int s = re > 0 ? 1 : (re < 0 ? -1 : 0);
        if (s == 0) continue;
        if (sign != 0 && s != sign) {
          C.cross += s;
          C.crossing_speeds.push_back(0.5 * (T.samples[k].nudot.real() + T.samples[k - 1].nudot.real()));
        }
        sign = s;
      }
    }
  }
  return C;
}

}  // namespace specflow

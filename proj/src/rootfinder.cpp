#include "specflow/rootfinder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "specflow/charmatrix.hpp"
#include "specflow/errors.hpp"

namespace specflow {

namespace {

struct ThroughRoot {};

// Samples below this are treated as lying on a root. Relative to the contour's own scale so
// small boxes around a high-order root stay resolvable.
double near_zero_threshold(double fmax, const RootOptions& opt) { return opt.near_zero * fmax; }

struct Sample {
  cplx z, f;
  double logd;  // |f'/f| at z
};

Sample sample_at(const AnalyticFunction& F, cplx z) {
  cplx f = F.f(z);
  double logd = 0;
  if (F.df && f != 0.0) logd = std::abs(F.df(z) / f);
  return {z, f, logd};
}

// Phase increment of f along [a, b]. Subdivides while the sampled phase step or the
// log-derivative estimate of it is large, so windings concentrated near the segment are not
// aliased away.
double segment_phase(const AnalyticFunction& F, const Sample& a, const Sample& b, double thresh,
                     const RootOptions& opt) {
  double d = std::arg(b.f / a.f);
  const double len = std::abs(b.z - a.z);
  const double est = len * std::max(a.logd, b.logd);
  if (std::abs(d) < opt.max_phase_step && est < opt.max_phase_step) return d;
  // Even-order roots on the segment leave no net phase jump, so running out of length counts
  // as hitting a root.
  if (len < opt.min_segment) throw ThroughRoot{};
  Sample m = sample_at(F, 0.5 * (a.z + b.z));
  if (!(std::abs(m.f) >= thresh)) throw ThroughRoot{};
  return segment_phase(F, a, m, thresh, opt) + segment_phase(F, m, b, thresh, opt);
}

// Argument-principle count without jitter; throws ThroughRoot when d vanishes on or near
// the contour.
int raw_count(const AnalyticFunction& F, const Rectangle& b, const RootOptions& opt) {
  const cplx corners[4] = {{b.re_lo, b.im_lo}, {b.re_hi, b.im_lo}, {b.re_hi, b.im_hi}, {b.re_lo, b.im_hi}};
  std::vector<Sample> ss;
  double fmax = 0;
  for (int e = 0; e < 4; ++e) {
    cplx a = corners[e], c = corners[(e + 1) % 4];
    int m = std::max(4, static_cast<int>(std::ceil(std::abs(c - a) / F.spacing)));
    for (int k = 0; k < m; ++k) {
      Sample s = sample_at(F, a + (c - a) * (static_cast<double>(k) / m));
      if (!std::isfinite(s.f.real()) || !std::isfinite(s.f.imag())) throw ThroughRoot{};
      ss.push_back(s);
      fmax = std::max(fmax, std::abs(s.f));
    }
  }
  const double thresh = near_zero_threshold(fmax, opt);
  for (const auto& s : ss)
    if (!(std::abs(s.f) >= thresh)) throw ThroughRoot{};
  double total = 0;
  const size_t N = ss.size();
  for (size_t i = 0; i < N; ++i) total += segment_phase(F, ss[i], ss[(i + 1) % N], thresh, opt);
  double w = total / (2 * kPi);
  double k = std::round(w);
  if (std::abs(w - k) > opt.residual_tol) {
    std::ostringstream os;
    os << "winding number " << w << " is not near an integer";
    throw Inconclusive(os.str());
  }
  return static_cast<int>(k);
}

void check_box(const AnalyticFunction& F, const Rectangle& b) {
  if (!(b.re_hi > b.re_lo) || !(b.im_hi > b.im_lo)) throw ValidationError("rectangle must be nonempty");
  if (!(b.re_lo > F.re_lo && b.re_hi < F.re_hi)) {
    std::ostringstream os;
    os << "rectangle real range [" << b.re_lo << ", " << b.re_hi << "] leaves the strip (" << F.re_lo << ", "
       << F.re_hi << ")";
    throw StripViolation(os.str());
  }
}

bool newton(const AnalyticFunction& F, cplx& z, const RootOptions& opt, int multiplicity) {
  for (int it = 0; it < opt.newton_iterations; ++it) {
    if (!(z.real() > F.re_lo && z.real() < F.re_hi)) return false;
    cplx fz = F.f(z);
    if (fz == 0.0) return true;
    cplx dz = F.df(z);
    if (dz == 0.0 || !std::isfinite(std::abs(dz))) return false;
    cplx step = static_cast<double>(multiplicity) * fz / dz;
    z -= step;
    if (!std::isfinite(std::abs(z))) return false;
    if (std::abs(step) <= opt.newton_tol * (1.0 + std::abs(z))) return true;
  }
  return false;
}

bool muller(const AnalyticFunction& F, cplx z0, cplx& root, const RootOptions& opt) {
  double h = 1e-3 * (1.0 + std::abs(z0));
  cplx x0 = z0 - h, x1 = z0 + h, x2 = z0;
  auto inside = [&](cplx z) { return z.real() > F.re_lo && z.real() < F.re_hi; };
  if (!inside(x0) || !inside(x1)) {
    x0 = z0 - cplx(0, h);
    x1 = z0 + cplx(0, h);
  }
  cplx f0 = F.f(x0), f1 = F.f(x1), f2 = F.f(x2);
  for (int it = 0; it < 100; ++it) {
    cplx h1 = x1 - x0, h2 = x2 - x1;
    cplx d1 = (f1 - f0) / h1, d2 = (f2 - f1) / h2;
    cplx a = (d2 - d1) / (h2 + h1);
    cplx b = a * h2 + d2;
    cplx disc = std::sqrt(b * b - 4.0 * f2 * a);
    cplx den = std::abs(b + disc) > std::abs(b - disc) ? b + disc : b - disc;
    if (den == 0.0) return false;
    cplx dx = -2.0 * f2 / den;
    cplx x3 = x2 + dx;
    if (!inside(x3) || !std::isfinite(std::abs(x3))) return false;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f2;
    x2 = x3;
    f2 = F.f(x2);
    if (std::abs(dx) <= opt.newton_tol * (1.0 + std::abs(x2)) || f2 == 0.0) {
      root = x2;
      return true;
    }
  }
  return false;
}

double symbol_spacing(const Symbol& S, const Rectangle* b) {
  double freq = S.max_abs_shift();
  double ymax = b ? std::max(std::abs(b->im_lo), std::abs(b->im_hi)) : 10.0;
  double sp = 0.05;
  for (const auto& t : S.kernel.terms()) {
    switch (t.profile) {
      case Profile::RightExp:
      case Profile::LeftExp: {
        double dist = std::max(1e-3, std::min(S.center - S.eta - t.re_lo(), t.re_hi() - S.center - S.eta));
        dist = std::isfinite(dist) ? dist : 1.0;
        sp = std::min(sp, 0.25 * dist);
        break;
      }
      case Profile::Gaussian:
        freq = std::max(freq, std::abs(t.mean) + t.sigma * t.sigma * (ymax + std::abs(t.offset)));
        break;
      case Profile::Sampled:
        freq = std::max(freq, std::max(std::abs(t.sampled->zeta0), std::abs(t.sampled->zeta_max())) * 0.25);
        break;
    }
  }
  return std::min(sp, 0.5 / (1.0 + freq));
}

}  // namespace

Rectangle Rectangle::scaled(double f) const {
  cplx c = center();
  double hw = 0.5 * width() * f, hh = 0.5 * height() * f;
  return {c.real() - hw, c.real() + hw, c.imag() - hh, c.imag() + hh};
}

AnalyticFunction characteristic_function(const Symbol& S) {
  AnalyticFunction F;
  auto sp = std::make_shared<const Symbol>(S);
  F.f = [sp](cplx z) { return char_det(*sp, z); };
  F.df = [sp](cplx z) { return *char_eval(*sp, z, 1).d1; };
  F.re_lo = S.center - S.eta;
  F.re_hi = S.center + S.eta;
  F.spacing = symbol_spacing(S, nullptr);
  F.degree = S.n;
  return F;
}

int count_roots(const AnalyticFunction& F, const Rectangle& box, const RootOptions& opt, Rectangle* used_box) {
  check_box(F, box);
  for (int k = 0; k <= opt.max_jitter; ++k) {
    Rectangle b = box;
    if (k > 0) {
      b = box.scaled(1.0 + 0.013 * k);
      if (!(b.re_lo > F.re_lo && b.re_hi < F.re_hi)) b = box.scaled(1.0 / (1.0 + 0.013 * k));
    }
    try {
      int c = raw_count(F, b, opt);
      if (used_box) *used_box = b;
      return c;
    } catch (const ThroughRoot&) {
    }
  }
  std::ostringstream os;
  os << "contour of [" << box.re_lo << ", " << box.re_hi << "] x [" << box.im_lo << ", " << box.im_hi
     << "] passes through a root after " << opt.max_jitter << " jitters";
  throw ContourThroughRoot(os.str());
}

int count_roots(const Symbol& S, const Rectangle& box, const RootOptions& opt) {
  AnalyticFunction F = characteristic_function(S);
  F.spacing = symbol_spacing(S, &box);
  return count_roots(F, box, opt);
}

bool polish_root(const AnalyticFunction& F, cplx z0, cplx& root, const RootOptions& opt, int multiplicity) {
  cplx z = z0;
  if (newton(F, z, opt, multiplicity)) {
    root = z;
    return true;
  }
  if (multiplicity == 1) return muller(F, z0, root, opt);
  return false;
}

RootSet locate_roots(const AnalyticFunction& F, const Rectangle& box, const RootOptions& opt) {
  RootSet rs;
  rs.total_count = count_roots(F, box, opt, &rs.box);

  auto cluster = [&](const Rectangle& b, int c) {
    cplx r;
    cplx z = b.center();
    if (polish_root(F, z, r, opt, c) && b.scaled(10.0).contains(r)) z = r;
    rs.roots.push_back({z, c});
  };

  static const double fractions[] = {0.5, 0.5137, 0.4781, 0.5413, 0.4567, 0.5291};
  std::function<void(const Rectangle&, int)> process = [&](const Rectangle& b, int c) {
    if (c <= 0) return;
    if (b.diameter() < opt.cluster_diameter) {
      cluster(b, c);
      return;
    }
    if (c == 1) {
      cplx r;
      if (polish_root(F, b.center(), r, opt) && b.contains(r, 1e-12 * (1.0 + std::abs(r)))) {
        rs.roots.push_back({r, 1});
        return;
      }
    }
    // Elongated rectangles are cut across their long side only.
    const bool cut_x = !(b.height() > 4 * b.width());
    const bool cut_y = !(b.width() > 4 * b.height());
    for (double fx : fractions) {
      double fy = 1.0 - fx;
      double xm = b.re_lo + fx * b.width(), ym = b.im_lo + fy * b.height();
      std::vector<Rectangle> kids;
      if (cut_x && cut_y) {
        kids = {{b.re_lo, xm, b.im_lo, ym}, {xm, b.re_hi, b.im_lo, ym}, {b.re_lo, xm, ym, b.im_hi},
                {xm, b.re_hi, ym, b.im_hi}};
      } else if (cut_x) {
        kids = {{b.re_lo, xm, b.im_lo, b.im_hi}, {xm, b.re_hi, b.im_lo, b.im_hi}};
      } else {
        kids = {{b.re_lo, b.re_hi, b.im_lo, ym}, {b.re_lo, b.re_hi, ym, b.im_hi}};
      }
      std::vector<int> counts(kids.size());
      try {
        int sum = 0;
        for (size_t i = 0; i < kids.size(); ++i) {
          counts[i] = raw_count(F, kids[i], opt);
          if (counts[i] < 0) throw ThroughRoot{};
          sum += counts[i];
        }
        if (sum != c) continue;
      } catch (const ThroughRoot&) {
        continue;
      } catch (const Inconclusive&) {
        continue;
      }
      for (size_t i = 0; i < kids.size(); ++i) process(kids[i], counts[i]);
      return;
    }
    if (b.diameter() < opt.cluster_fallback) {
      cluster(b, c);
      return;
    }
    throw Inconclusive("quadrisection could not split a rectangle consistently");
  };
  process(rs.box, rs.total_count);
  for (bool merged = true; merged;) {
    merged = false;
    for (size_t i = 0; i < rs.roots.size() && !merged; ++i)
      for (size_t j = i + 1; j < rs.roots.size() && !merged; ++j) {
        const RootEntry &p = rs.roots[i], &q = rs.roots[j];
        if (std::abs(p.nu - q.nu) > opt.merge_distance * (1.0 + std::abs(p.nu))) continue;
        const int c = p.multiplicity + q.multiplicity;
        cplx z = (static_cast<double>(p.multiplicity) * p.nu + static_cast<double>(q.multiplicity) * q.nu) /
                 static_cast<double>(c);
        cplx r;
        if (polish_root(F, z, r, opt, c) && std::abs(r - z) <= std::abs(p.nu - q.nu)) z = r;
        rs.roots[i] = {z, c};
        rs.roots.erase(rs.roots.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
  }
  std::sort(rs.roots.begin(), rs.roots.end(), [](const RootEntry& a, const RootEntry& b) {
    if (a.nu.imag() != b.nu.imag()) return a.nu.imag() < b.nu.imag();
    return a.nu.real() < b.nu.real();
  });
  return rs;
}

RootSet locate_roots(const Symbol& S, const Rectangle& box, const RootOptions& opt) {
  AnalyticFunction F = characteristic_function(S);
  F.spacing = symbol_spacing(S, &box);
  return locate_roots(F, box, opt);
}

Rectangle default_box(const Symbol& S) {
  double cap = axis_bounds(S).ell_cap;
  return {S.center - 0.9 * S.eta, S.center + 0.9 * S.eta, -cap, cap};
}

std::string to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::ReachedEnd:
      return "reached_end";
    case TrackStatus::LeftStrip:
      return "left_strip";
    case TrackStatus::Merged:
      return "merged";
  }
  return "unknown";
}

RootTrajectory track_root(const OperatorFamily& F, double rho0, cplx nu0, double rho1, const TrackOptions& opt) {
  RootTrajectory T;
  auto scale_at = [](const Symbol& S, cplx nu) {
    return std::max(1.0, std::pow(char_matrix(S, nu).norm(), S.n));
  };
  auto correct = [&](const Symbol& S, cplx& nu, int& iters) {
    for (iters = 1; iters <= opt.max_corrector; ++iters) {
      if (!S.in_strip(nu)) return false;
      CharEval ce = char_eval(S, nu, 1);
      if (ce.d == 0.0) return true;
      if (*ce.d1 == 0.0) return false;
      cplx step = ce.d / *ce.d1;
      nu -= step;
      if (std::abs(step) <= 1e-13 * (1.0 + std::abs(nu))) return true;
    }
    return false;
  };

  Symbol S = F.at(rho0);
  cplx nu = nu0;
  if (std::abs(char_det(S, nu)) > 1e-8 * scale_at(S, nu)) throw NotARoot("starting point is not a root");
  int it = 0;
  if (!correct(S, nu, it)) throw NotARoot("Newton does not converge at the starting point");

  const double dir = rho1 >= rho0 ? 1.0 : -1.0;
  double rho = rho0;
  double h = opt.initial_step;
  while (true) {
    CharEval ce = char_eval(S, nu, 1);
    double sc = scale_at(S, nu);
    double e = opt.rho_fd;
    cplx drho = (char_det(F.at(rho + e), nu) - char_det(F.at(rho - e), nu)) / (2 * e);
    cplx nudot = std::abs(*ce.d1) > 0 ? -drho / *ce.d1 : cplx(0);
    T.samples.push_back({rho, nu, nudot});
    if (std::abs(*ce.d1) < 1e-10 * sc) {
      T.status = TrackStatus::Merged;
      break;
    }
    if (rho == rho1) {
      T.status = TrackStatus::ReachedEnd;
      break;
    }
    if (std::abs(nu.real() - S.center) > opt.strip_fraction * S.eta) {
      T.status = TrackStatus::LeftStrip;
      break;
    }
    double step = std::min(h, std::abs(rho1 - rho));
    if (std::abs(nudot) * step > opt.step_cap) step = opt.step_cap / std::abs(nudot);
    while (true) {
      double rn = std::abs(rho1 - rho) <= step ? rho1 : rho + dir * step;
      Symbol Sn = F.at(rn);
      cplx nn = nu + (rn - rho) * nudot;
      int iters = 0;
      bool ok = false;
      try {
        ok = correct(Sn, nn, iters) && std::abs(nn - nu) <= 1.5 * opt.step_cap;
      } catch (const StripViolation&) {
        ok = false;
      }
      if (ok) {
        rho = rn;
        nu = nn;
        S = Sn;
        h = iters <= 3 ? 1.5 * step : step;
        break;
      }
      step *= 0.5;
      if (step < opt.min_step) {
        std::ostringstream os;
        os << "corrector failed at rho = " << rho;
        throw LostTrack(os.str());
      }
    }
  }
  return T;
}

}  // namespace specflow

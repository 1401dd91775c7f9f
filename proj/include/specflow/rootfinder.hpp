#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "specflow/symbol.hpp"

namespace specflow {

struct Rectangle {
  double re_lo = 0, re_hi = 0, im_lo = 0, im_hi = 0;

  double width() const { return re_hi - re_lo; }
  double height() const { return im_hi - im_lo; }
  double diameter() const { return std::hypot(width(), height()); }
  cplx center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
  bool contains(cplx z, double tol = 0) const {
    return z.real() >= re_lo - tol && z.real() <= re_hi + tol && z.imag() >= im_lo - tol && z.imag() <= im_hi + tol;
  }
  Rectangle scaled(double f) const;
};

// An analytic function on a vertical strip, with derivative and a contour sampling hint.
struct AnalyticFunction {
  std::function<cplx(cplx)> f;
  std::function<cplx(cplx)> df;
  double re_lo = -1e300, re_hi = 1e300;
  double spacing = 0.05;
  int degree = 1;  // growth exponent: |f| is compared with (1 + |z|)^degree
};

AnalyticFunction characteristic_function(const Symbol& S);

struct RootOptions {
  double max_phase_step = 1.5707963267948966;
  double min_segment = 1e-9;
  double residual_tol = 0.05;
  int max_jitter = 10;
  double near_zero = 1e-12;
  double cluster_diameter = 1e-8;
  double cluster_fallback = 1e-4;
  // Located roots closer than this (relative to 1 + |nu|) are one root: rounding splits a
  // double root by about the square root of the evaluation noise.
  double merge_distance = 1e-6;
  double newton_tol = 1e-12;
  int newton_iterations = 50;
};

struct RootEntry {
  cplx nu;
  int multiplicity = 1;
};

struct RootSet {
  std::vector<RootEntry> roots;
  Rectangle box;
  int total_count = 0;
};

int count_roots(const AnalyticFunction& F, const Rectangle& box, const RootOptions& opt = {},
                Rectangle* used_box = nullptr);
int count_roots(const Symbol& S, const Rectangle& box, const RootOptions& opt = {});
RootSet locate_roots(const AnalyticFunction& F, const Rectangle& box, const RootOptions& opt = {});
RootSet locate_roots(const Symbol& S, const Rectangle& box, const RootOptions& opt = {});

// |Re nu - center| <= 0.9 eta, |Im nu| <= ell_cap.
Rectangle default_box(const Symbol& S);

// Newton on F from z0 with Muller fallback; returns false if neither converges.
bool polish_root(const AnalyticFunction& F, cplx z0, cplx& root, const RootOptions& opt = {},
                 int multiplicity = 1);

enum class TrackStatus { ReachedEnd, LeftStrip, Merged };

struct TrajectoryPoint {
  double rho;
  cplx nu;
  cplx nudot;
};

struct RootTrajectory {
  std::vector<TrajectoryPoint> samples;
  TrackStatus status = TrackStatus::ReachedEnd;
};

struct TrackOptions {
  double step_cap = 0.05;
  double initial_step = 0.05;
  double min_step = 1e-10;
  double rho_fd = 1e-5;
  int max_corrector = 8;
  double strip_fraction = 0.98;
};

RootTrajectory track_root(const OperatorFamily& F, double rho0, cplx nu0, double rho1,
                          const TrackOptions& opt = {});

std::string to_string(TrackStatus s);

}  // namespace specflow

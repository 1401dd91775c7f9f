#pragma once

#include <string>
#include <vector>

#include "specflow/charmatrix.hpp"
#include "specflow/rootfinder.hpp"
#include "specflow/symbol.hpp"

namespace specflow {

struct Crossing {
  double rho = 0;
  std::vector<RootEntry> axis_roots;
  int M = 0;
  int MR_minus = 0, MR_plus = 0;
  int ML_minus = 0, ML_plus = 0;
  bool simple = false;
  double speed = 0;  // Re d(nu)/d(rho) of the crossing root, when simple
  double margin = 0;
  double delta_rho = 0;

  int contribution() const { return MR_plus - MR_minus; }
};

struct FlowOptions {
  int scan_points = 400;
  int subscan_points = 41;  // rescan of each candidate bracket
  int continuation_segments = 24;
  int jobs = 1;
  double trigger = 1e-4;
  double classify = 1e-8;
  double bracket = 1e-10;
  double axis_halfwidth = 1e-5;
  HyperbolicityOptions hyperbolicity;
  RootOptions roots;
};

struct FlowResult {
  std::vector<Crossing> crossings;
  int cross = 0;
  int index = 0;
  // diagnostics
  int scan_points = 0;
  double scan_step = 0;
  double min_scan_margin = 0;
  int right_count_minus = 0, right_count_plus = 0;
  bool side_exit = false;
  std::vector<std::string> boxes;
};

std::vector<Crossing> find_crossings(const OperatorFamily& F, const FlowOptions& opt = {},
                                     FlowResult* diagnostics = nullptr);
FlowResult crossing_number(const OperatorFamily& F, const FlowOptions& opt = {});
int fredholm_index(const Symbol& Sm, const Symbol& Sp, const FlowOptions& opt = {},
                   FlowResult* result = nullptr);
int weighted_index(const Symbol& S, double gamma_minus, double gamma_plus, const FlowOptions& opt = {});

struct CocycleResult {
  int i01 = 0, i12 = 0, i02 = 0;
  bool holds = false;
};

CocycleResult cocycle_check(const Symbol& S0, const Symbol& S1, const Symbol& S2, const FlowOptions& opt = {});

// Independent crossing count: locate the roots of F(rho_min) in the strip, continue each to
// rho_max and add +1 (-1) for every passage of Re nu from negative to positive (positive to
// negative).
struct ContinuationCount {
  int cross = 0;
  int tracked = 0;
  std::vector<double> crossing_speeds;
};

ContinuationCount continuation_cross(const OperatorFamily& F, const FlowOptions& opt = {});

// Number of roots with 0 < Re nu < 0.9 eta (with multiplicity).
int right_count(const Symbol& S, const RootOptions& opt = {});

}  // namespace specflow

// Command-line front end: reads a JSON config, runs one computation, writes result.json
// (and CSV tables where relevant) into the output directory.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "specflow/config.hpp"
#include "specflow/conslaw.hpp"
#include "specflow/discretize.hpp"
#include "specflow/edgebif.hpp"
#include "specflow/errors.hpp"
#include "specflow/parallel.hpp"
#include "specflow/specmap.hpp"
#include "specflow/spectralflow.hpp"

namespace fs = std::filesystem;
using namespace specflow;
using config::json;

namespace {

struct Common {
  std::string config_path;
  std::string out = ".";
  int jobs = 1;
  int scan_points = 0;
};

struct Range {
  double lo = 0, hi = 0;
  int count = 0;
};

Range parse_range(const std::string& s, const char* what) {
  Range r;
  char c1 = 0, c2 = 0;
  std::istringstream is(s);
  if (!(is >> r.lo >> c1 >> r.hi >> c2 >> r.count) || c1 != ':' || c2 != ':' || r.count < 1)
    throw ValidationError(std::string(what) + " must look like lo:hi:count");
  return r;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(std::string(what) + ": cannot read \"" + item + "\"");
    }
  }
  if (v.empty()) throw ValidationError(std::string(what) + " is empty");
  return v;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  if (!f) throw ValidationError("cannot write " + p.string());
  f << text;
}

void write_result(const Common& c, const json& j) {
  fs::create_directories(c.out);
  write_file(fs::path(c.out) / "result.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
}

FlowOptions flow_options(const Common& c) {
  FlowOptions o;
  o.jobs = c.jobs;
  if (c.scan_points > 0) o.scan_points = c.scan_points;
  return o;
}

std::string csv_number(double x) {
  std::ostringstream os;
  os << std::setprecision(15) << x;
  return os.str();
}

int run_roots(const Common& c) {
  json root = config::load(c.config_path);
  auto vars = config::params(root);
  Symbol S = config::symbol(root.at("symbol"), vars);
  Rectangle box = root.contains("box") ? config::rectangle(root.at("box"), vars) : default_box(S);
  RootSet rs = locate_roots(S, box);
  write_result(c, config::to_json(rs));
  return 0;
}

int run_flow(const Common& c, bool continuation) {
  json root = config::load(c.config_path);
  auto vars = config::params(root);
  OperatorFamily F = config::family(root.at("family"), vars);
  json out;
  out["hypotheses"] = config::to_json(check_hypotheses(F));
  FlowResult R = crossing_number(F, flow_options(c));
  out["flow"] = config::to_json(R);
  if (continuation) {
    ContinuationCount C = continuation_cross(F, flow_options(c));
    out["continuation"] = {{"cross", C.cross}, {"tracked", C.tracked}, {"crossing_speeds", C.crossing_speeds}};
  }
  write_result(c, out);
  return 0;
}

int run_index(const Common& c) {
  json root = config::load(c.config_path);
  auto vars = config::params(root);
  FlowOptions opt = flow_options(c);
  json out;
  if (root.contains("family")) {
    OperatorFamily F = config::family(root.at("family"), vars);
    FlowResult R = crossing_number(F, opt);
    out = {{"index", R.index}, {"cross", R.cross}, {"crossings", static_cast<int>(R.crossings.size())}};
  } else if (root.contains("minus") && root.contains("plus")) {
    Symbol Sm = config::symbol(root.at("minus"), vars), Sp = config::symbol(root.at("plus"), vars);
    out = {{"index", fredholm_index(Sm, Sp, opt)}};
  } else if (root.contains("symbol") && root.contains("weights")) {
    Symbol S = config::symbol(root.at("symbol"), vars);
    const json& w = root.at("weights");
    if (!w.is_array() || w.size() != 2) throw ValidationError("weights must be [gamma_minus, gamma_plus]");
    double gm = config::number(w[0], vars, "weights"), gp = config::number(w[1], vars, "weights");
    out = {{"index", weighted_index(S, gm, gp, opt)}, {"gamma_minus", gm}, {"gamma_plus", gp}};
    if (root.contains("grid")) {
      Grid g;
      g.L = root["grid"].value("L", 30.0);
      g.h = root["grid"].value("h", 0.05);
      IndexEstimate e = index_estimate(SpatialOperator::constant_symbol(S), g, gm, gp);
      out["discrete"] = {{"index", e.index},
                         {"reliable", e.reliable},
                         {"forward_dim", e.forward.dim},
                         {"adjoint_dim", e.adjoint.dim},
                         {"forward_gap", e.forward.gap},
                         {"adjoint_gap", e.adjoint.gap}};
    }
  } else {
    throw ValidationError("index config needs \"family\", \"minus\"/\"plus\", or \"symbol\" with \"weights\"");
  }
  write_result(c, out);
  return 0;
}

int run_specmap(const Common& c, const std::string& re_s, const std::string& im_s) {
  json root = config::load(c.config_path);
  auto vars = config::params(root);
  const json& sm = root.at("specmap");
  LambdaFamily F;
  F.minus = config::symbol(sm.at("minus"), vars);
  F.plus = config::symbol(sm.at("plus"), vars);
  F.B = config::matrix(sm.at("B"), F.minus.n, vars, "specmap.B");
  Range re = parse_range(re_s, "--re"), im = parse_range(im_s, "--im");
  SpecMapOptions opt;
  opt.flow = flow_options(c);
  SpecMapResult R = specmap(F, linspace(re.lo, re.hi, re.count), linspace(im.lo, im.hi, im.count), opt);

  fs::create_directories(c.out);
  std::ofstream csv(fs::path(c.out) / "specmap.csv");
  csv << "lambda_re,lambda_im,hyperbolic_minus,hyperbolic_plus,margin_minus,margin_plus,index,error\n";
  int indexed = 0, failed = 0;
  for (const auto& p : R.points) {
    csv << csv_number(p.lambda.real()) << "," << csv_number(p.lambda.imag()) << "," << p.hyperbolic_minus << ","
        << p.hyperbolic_plus << "," << csv_number(p.margin_minus) << "," << csv_number(p.margin_plus) << ","
        << (p.index ? std::to_string(*p.index) : "") << "," << p.error << "\n";
    if (p.index) ++indexed;
    if (!p.error.empty()) ++failed;
  }
  std::ofstream bcsv(fs::path(c.out) / "borders.csv");
  bcsv << "lambda_re,lambda_im,ell,side,residual\n";
  for (const auto& b : R.borders)
    bcsv << csv_number(b.lambda.real()) << "," << csv_number(b.lambda.imag()) << "," << csv_number(b.ell) << ","
         << (b.plus_side ? "plus" : "minus") << "," << csv_number(b.residual) << "\n";
  std::map<int, int> histogram;
  for (const auto& p : R.points)
    if (p.index) ++histogram[*p.index];
  json hist = json::object();
  for (auto [k, v] : histogram) hist[std::to_string(k)] = v;
  write_result(c, {{"points", R.points.size()},
                   {"indexed", indexed},
                   {"failed", failed},
                   {"border_points", R.borders.size()},
                   {"index_histogram", hist},
                   {"files", {"specmap.csv", "borders.csv"}}});
  return 0;
}

ShockOptions shock_options(const json& root) {
  ShockOptions o;
  if (root.contains("grid")) {
    o.L = root["grid"].value("L", o.L);
    o.h = root["grid"].value("h", o.h);
  }
  return o;
}

int run_shock(const Common& c, const std::string& eps_s) {
  json root = config::load(c.config_path);
  auto vars = config::params(root);
  ShockModel m = config::shock_model(root.at("model"), vars);
  RVec b = root.contains("b") ? config::real_vector(root.at("b"), m.n, vars, "b") : RVec(RVec::Zero(m.n));
  std::vector<double> eps;
  if (!eps_s.empty()) {
    eps = parse_list(eps_s, "--eps");
  } else if (root.contains("eps")) {
    const json& e = root.at("eps");
    if (e.is_array())
      for (const auto& x : e) eps.push_back(config::number(x, vars, "eps"));
    else
      eps.push_back(config::number(e, vars, "eps"));
  } else {
    eps = {1e-3};
  }
  ShockOptions sopt = shock_options(root);
  Speeds sp = characteristic_speeds(m);
  json out;
  out["speeds"] = sp.c;
  bool zero_speed = false;
  for (double s : sp.c) zero_speed = zero_speed || std::abs(s) < 1e-10 * (1 + std::abs(s));
  double eta = root.contains("eta") ? config::number(root.at("eta"), vars, "eta") : 0.05;
  out["linearization_index"] = linearization_index(m, eta, flow_options(c));
  out["eta"] = eta;
  out["b"] = config::to_json(b);

  std::vector<ShockSolution> sols;
  json points = json::array();
  if (zero_speed) {
    auto res = parallel_map(static_cast<int>(eps.size()), c.jobs,
                            [&](int i) { return zero_speed_selection(m, b, eps[i], sopt); });
    out["M"] = res.empty() ? 0.0 : res.front().M;
    for (size_t i = 0; i < res.size(); ++i) {
      points.push_back(json{{"eps", eps[i]},
                        {"j0", res[i].j0},
                        {"a_j0", res[i].a_j0},
                        {"b_j0", res[i].b_j0},
                        {"a", config::to_json(res[i].solution.a)},
                        {"b", config::to_json(res[i].solution.b)},
                        {"residual", res[i].solution.residual},
                        {"iterations", res[i].solution.iterations}});
      sols.push_back(res[i].solution);
    }
  } else {
    RVec J = jump_leading_order(m);
    out["jump_leading_order"] = config::to_json(J);
    sols = parallel_map(static_cast<int>(eps.size()), c.jobs, [&](int i) { return shock_profile(m, b, eps[i], sopt); });
    for (size_t i = 0; i < sols.size(); ++i) {
      RVec jump = sp.e * (sols[i].a - sols[i].b);
      points.push_back(json{{"eps", eps[i]},
                        {"a", config::to_json(sols[i].a)},
                        {"jump", config::to_json(jump)},
                        {"jump_over_eps", eps[i] != 0 ? config::to_json(RVec(jump / eps[i])) : json(nullptr)},
                        {"residual", sols[i].residual},
                        {"profile_residual", sols[i].profile_residual},
                        {"tail_ratio", sols[i].tail_ratio},
                        {"iterations", sols[i].iterations}});
    }
  }
  out["solutions"] = points;

  fs::create_directories(c.out);
  std::ofstream csv(fs::path(c.out) / "profile.csv");
  csv << "x";
  for (int k = 0; k < m.n; ++k) csv << ",U" << k + 1;
  csv << "\n";
  if (!sols.empty()) {
    const auto& s = sols.back();
    for (size_t i = 0; i < s.x.size(); ++i) {
      csv << csv_number(s.x[i]);
      for (int k = 0; k < m.n; ++k) csv << "," << csv_number(s.U[i](k));
      csv << "\n";
    }
  }
  out["files"] = {"profile.csv"};
  write_result(c, out);
  return 0;
}

int run_edge(const Common& c, const std::string& eps_s) {
  json root = config::load(c.config_path);
  auto vars = config::params(root);
  EdgeModel m = config::edge_model(root.at("edge"), vars);
  std::vector<double> eps;
  if (!eps_s.empty()) {
    eps = parse_list(eps_s, "--eps");
  } else if (root.contains("eps")) {
    for (const auto& x : root.at("eps")) eps.push_back(config::number(x, vars, "eps"));
  } else {
    eps = {0.04, 0.02, 0.01};
  }
  EdgeOptions eo;
  if (root.contains("grid")) {
    eo.L = root["grid"].value("L", eo.L);
    eo.h = root["grid"].value("h", eo.h);
  }
  DiffusiveReport dr = diffusive_check(m);
  EdgeData d = edge_vectors(m);
  ScalingTable T = edge_scaling(m, eps, eo, c.jobs);

  fs::create_directories(c.out);
  std::ofstream csv(fs::path(c.out) / "scaling.csv");
  csv << "eps,lambda_star,ratio\n";
  json pts = json::array();
  for (const auto& p : T.points) {
    csv << csv_number(p.eps) << "," << csv_number(p.lambda) << "," << csv_number(p.lambda / (p.eps * p.eps)) << "\n";
    pts.push_back(json{{"eps", p.eps},
                   {"lambda_star", p.lambda},
                   {"gamma", p.gamma},
                   {"a_minus", p.a_minus},
                   {"nu_plus", p.nu_plus},
                   {"nu_minus", p.nu_minus},
                   {"resonance", p.resonance},
                   {"iterations", p.iterations},
                   {"residual", p.residual}});
  }
  std::ofstream ef(fs::path(c.out) / "eigenfunction.csv");
  ef << "xi";
  for (int k = 0; k < m.n; ++k) ef << ",U" << k + 1;
  ef << "\n";
  if (!T.points.empty()) {
    const auto& p = T.points.front();
    for (size_t i = 0; i < p.x.size(); ++i) {
      ef << csv_number(p.x[i]);
      for (int k = 0; k < m.n; ++k) ef << "," << csv_number(p.U[i](k));
      ef << "\n";
    }
  }
  write_result(c, {{"diffusive",
                    {{"d00", dr.d00}, {"d_nu", dr.d_nu}, {"d_nunu", dr.d_nunu}, {"d_lambda", dr.d_lambda},
                     {"axis_margin", dr.axis_margin}, {"pass", dr.pass}}},
                   {"e0", config::to_json(d.e0)},
                   {"e0_adj", config::to_json(d.e0_adj)},
                   {"e1", config::to_json(d.e1)},
                   {"e1_adj", config::to_json(d.e1_adj)},
                   {"slope", d.slope},
                   {"M", T.M},
                   {"M_squared", T.M * T.M},
                   {"intercept", T.intercept},
                   {"fit_slope", T.slope},
                   {"relative_error", T.relative_error},
                   {"points", pts},
                   {"files", {"scaling.csv", "eigenfunction.csv"}}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fredholm indices, spectral flow and root counts for nonlocal first-order operators"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON configuration")->required();
    sub->add_option("--out", common.out, "output directory");
    sub->add_option("--jobs", common.jobs, "worker threads for independent points")->check(CLI::PositiveNumber);
    sub->add_option("--scan-points", common.scan_points, "parameter scan resolution for crossings");
  };
  auto* roots = app.add_subcommand("roots", "locate roots of det Delta in a box");
  auto* flow = app.add_subcommand("flow", "spectral flow along an operator family");
  bool continuation = false;
  flow->add_flag("--continuation", continuation, "also count crossings by root continuation");
  auto* index = app.add_subcommand("index", "Fredholm index");
  auto* smap = app.add_subcommand("specmap", "Fredholm index map over a lambda rectangle");
  std::string re_s = "-1:1:21", im_s = "-1:1:21";
  smap->add_option("--re", re_s, "lo:hi:count along Re lambda");
  smap->add_option("--im", im_s, "lo:hi:count along Im lambda");
  auto* shock = app.add_subcommand("shock", "stationary shock profiles with a localized source");
  std::string eps_s;
  shock->add_option("--eps", eps_s, "comma-separated eps values");
  auto* edge = app.add_subcommand("edge", "edge bifurcation eigenvalue and its eps^2 scaling");
  edge->add_option("--eps", eps_s, "comma-separated eps values");
  for (auto* s : {roots, flow, index, smap, shock, edge}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*roots) return run_roots(common);
    if (*flow) return run_flow(common, continuation);
    if (*index) return run_index(common);
    if (*smap) return run_specmap(common, re_s, im_s);
    if (*shock) return run_shock(common, eps_s);
    if (*edge) return run_edge(common, eps_s);
  } catch (const Error& e) {
    json err{{"error", e.kind()}, {"message", e.what()}, {"numerical", e.numerical()}};
    try {
      fs::create_directories(common.out);
      write_file(fs::path(common.out) / "result.json", err.dump(2) + "\n");
    } catch (...) {
    }
    std::cerr << err.dump(2) << "\n";
    return e.numerical() ? 3 : 2;
  } catch (const json::exception& e) {
    json err{{"error", "ValidationError"}, {"message", std::string("config: ") + e.what()}, {"numerical", false}};
    std::cerr << err.dump(2) << "\n";
    return 2;
  } catch (const std::exception& e) {
    json err{{"error", "InternalError"}, {"message", e.what()}, {"numerical", true}};
    std::cerr << err.dump(2) << "\n";
    return 3;
  }
  return 0;
}

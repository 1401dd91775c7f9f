#include "specflow/config.hpp"

#include <fstream>
#include <sstream>

#include "specflow/errors.hpp"
#include "specflow/expr.hpp"

namespace specflow::config {

namespace {

[[noreturn]] void invalid(const std::string& what, const std::string& msg) {
  throw ValidationError(what + ": " + msg);
}

const json& need(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) invalid(what, std::string("missing \"") + key + "\"");
  return j.at(key);
}

double opt_number(const json& j, const char* key, double fallback, const Vars& vars, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return number(j.at(key), vars, what + "." + key);
}

Mat parse_real_block(const json& j, int n, const Vars& vars, const std::string& what) {
  Mat M(n, n);
  if (j.is_number() || j.is_string()) {
    if (n != 1) invalid(what, "scalar given for an n x n matrix");
    M(0, 0) = number(j, vars, what);
    return M;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != n) invalid(what, "expected " + std::to_string(n) + " rows");
  for (int r = 0; r < n; ++r) {
    const json& row = j[r];
    if (n == 1 && !row.is_array()) {
      M(0, 0) = number(row, vars, what);
      continue;
    }
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      invalid(what, "row " + std::to_string(r) + " must have " + std::to_string(n) + " entries");
    for (int c = 0; c < n; ++c) M(r, c) = number(row[c], vars, what);
  }
  return M;
}

}  // namespace

json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path + " is not valid JSON: " + e.what());
  }
}

Vars params(const json& root) {
  Vars v;
  if (!root.is_object() || !root.contains("params")) return v;
  const json& p = root.at("params");
  if (!p.is_object()) invalid("params", "must be an object");
  for (auto it = p.begin(); it != p.end(); ++it) v[it.key()] = number(it.value(), v, "params." + it.key());
  return v;
}

double number(const json& j, const Vars& vars, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    try {
      return Expr(j.get<std::string>()).eval(vars);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      invalid(what, e.what());
    }
  }
  invalid(what, "expected a number or an expression string");
}

Mat matrix(const json& j, int n, const Vars& vars, const std::string& what) {
  if (j.is_object()) {
    Mat M = parse_real_block(need(j, "re", what), n, vars, what + ".re");
    if (j.contains("im")) M += cplx(0, 1) * parse_real_block(j.at("im"), n, vars, what + ".im");
    return M;
  }
  return parse_real_block(j, n, vars, what);
}

RMat real_matrix(const json& j, int n, const Vars& vars, const std::string& what) {
  return parse_real_block(j, n, vars, what).real();
}

RVec real_vector(const json& j, int n, const Vars& vars, const std::string& what) {
  RVec v(n);
  if (j.is_number() || j.is_string()) {
    if (n != 1) invalid(what, "scalar given for a vector");
    v(0) = number(j, vars, what);
    return v;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != n) invalid(what, "expected " + std::to_string(n) + " entries");
  for (int i = 0; i < n; ++i) v(i) = number(j[i], vars, what);
  return v;
}

Kernel kernel(const json& terms, int n, const Vars& vars) {
  Kernel K;
  if (terms.is_null()) return K;
  if (!terms.is_array()) invalid("kernel", "must be a list of terms");
  for (size_t i = 0; i < terms.size(); ++i) {
    const json& t = terms[i];
    const std::string what = "kernel[" + std::to_string(i) + "]";
    const std::string type = need(t, "type", what).get<std::string>();
    auto M = [&](const char* key) {
      return t.contains(key) ? matrix(t.at(key), n, vars, what + "." + key) : Mat(Mat::Identity(n, n));
    };
    Kernel k;
    if (type == "exponential") {
      k = Kernel::exponential(number(need(t, "rate", what), vars, what + ".rate"), M("M"));
    } else if (type == "two_sided") {
      k = Kernel::two_sided(number(need(t, "rate_left", what), vars, what), M("M_left"),
                            number(need(t, "rate_right", what), vars, what), M("M_right"));
    } else if (type == "gaussian") {
      k = Kernel::gaussian(number(need(t, "sigma", what), vars, what + ".sigma"), M("M"),
                           opt_number(t, "mean", 0.0, vars, what));
    } else if (type == "exp_poly") {
      k = Kernel::exp_poly(number(need(t, "rate", what), vars, what + ".rate"),
                           static_cast<int>(opt_number(t, "degree", 0, vars, what)), M("M"));
    } else if (type == "right_exp" || type == "left_exp") {
      KernelTerm term;
      term.profile = type == "right_exp" ? Profile::RightExp : Profile::LeftExp;
      term.rate = number(need(t, "rate", what), vars, what + ".rate");
      term.degree = static_cast<int>(opt_number(t, "degree", 0, vars, what));
      if (!(term.rate > 0) || term.degree < 0) invalid(what, "needs rate > 0 and degree >= 0");
      term.M = M("M");
      k.add(term);
    } else if (type == "sampled") {
      std::vector<Mat> values;
      const json& vals = need(t, "values", what);
      if (!vals.is_array()) invalid(what, "values must be a list");
      for (const auto& v : vals) values.push_back(matrix(v, n, vars, what + ".values"));
      k = Kernel::sampled(number(need(t, "h", what), vars, what + ".h"), number(need(t, "zeta0", what), vars, what),
                          std::move(values), number(need(t, "decay", what), vars, what + ".decay"),
                          opt_number(t, "tail_tol", 1e-6, vars, what));
    } else {
      invalid(what, "unknown kernel type \"" + type + "\"");
    }
    if (t.contains("weight")) k = k.weighted(number(t.at("weight"), vars, what + ".weight"));
    K = K + k;
  }
  return K;
}

Symbol symbol(const json& j, const Vars& vars) {
  if (!j.is_object()) invalid("symbol", "must be an object");
  Symbol S;
  S.n = static_cast<int>(opt_number(j, "n", 1, vars, "symbol"));
  if (S.n < 1) invalid("symbol", "n must be positive");
  S.eta = opt_number(j, "eta", 0.5, vars, "symbol");
  S.center = opt_number(j, "center", 0.0, vars, "symbol");
  if (j.contains("kernel")) S.kernel = kernel(j.at("kernel"), S.n, vars);
  if (j.contains("A")) add_shift(S.shifts, 0.0, matrix(j.at("A"), S.n, vars, "symbol.A"));
  if (j.contains("shifts")) {
    const json& sh = j.at("shifts");
    if (!sh.is_array()) invalid("symbol.shifts", "must be a list");
    for (size_t i = 0; i < sh.size(); ++i) {
      std::string what = "symbol.shifts[" + std::to_string(i) + "]";
      double xi = opt_number(sh[i], "xi", 0.0, vars, what);
      add_shift(S.shifts, xi, matrix(need(sh[i], "A", what), S.n, vars, what + ".A"));
    }
  }
  S.validate();
  return S;
}

OperatorFamily family(const json& j, const Vars& vars) {
  const std::string type = need(j, "type", "family").get<std::string>();
  std::optional<Symbol> minus, plus;
  if (type != "affine") {
    if (j.contains("minus")) minus = symbol(j.at("minus"), vars);
    if (j.contains("plus")) plus = symbol(j.at("plus"), vars);
  }
  if (type == "affine") {
    return OperatorFamily::affine(symbol(need(j, "minus", "family"), vars), symbol(need(j, "plus", "family"), vars),
                                  opt_number(j, "half_range", 12.0, vars, "family"));
  }
  if (type == "tabulated") {
    const json& rho = need(j, "rho", "family");
    const json& syms = need(j, "symbols", "family");
    if (!rho.is_array() || !syms.is_array() || rho.size() != syms.size())
      invalid("family", "rho and symbols must be lists of equal length");
    std::vector<double> r;
    std::vector<Symbol> s;
    for (size_t i = 0; i < rho.size(); ++i) {
      r.push_back(number(rho[i], vars, "family.rho"));
      s.push_back(symbol(syms[i], vars));
    }
    return OperatorFamily::tabulated(std::move(r), std::move(s), minus, plus);
  }
  if (type == "rule") {
    const json& range = need(j, "rho", "family");
    if (!range.is_array() || range.size() != 2) invalid("family.rho", "expected [rho_min, rho_max]");
    double lo = number(range[0], vars, "family.rho"), hi = number(range[1], vars, "family.rho");
    json tmpl = need(j, "symbol", "family");
    Vars base = vars;
    Vars probe = vars;
    probe["rho"] = lo;
    symbol(tmpl, probe);  // validate the template once up front
    return OperatorFamily::rule(
        lo, hi,
        [tmpl, base](double rho) {
          Vars v = base;
          v["rho"] = rho;
          return symbol(tmpl, v);
        },
        minus, plus);
  }
  invalid("family", "unknown type \"" + type + "\"");
}

ShockModel shock_model(const json& j, const Vars& vars) {
  ShockModel m;
  m.n = static_cast<int>(opt_number(j, "n", 1, vars, "model"));
  if (m.n < 1) invalid("model", "n must be positive");
  if (j.contains("kernel")) m.kernel = kernel(j.at("kernel"), m.n, vars);
  m.eta0 = opt_number(j, "eta0", 1.0, vars, "model");
  m.eps_max = opt_number(j, "eps_max", 0.05, vars, "model");
  const json& flux = need(j, "flux", "model");
  auto poly = [&](const char* jac, const char* quad, const char* cubic) {
    PolyFlux f = PolyFlux::linear(real_matrix(need(flux, jac, "model.flux"), m.n, vars, std::string("flux.") + jac));
    if (flux.contains(quad)) f.quad = real_vector(flux.at(quad), m.n, vars, quad);
    if (flux.contains(cubic)) f.cubic = real_vector(flux.at(cubic), m.n, vars, cubic);
    return f;
  };
  m.F = poly("dF", "quadF", "cubicF");
  m.G = poly("dG", "quadG", "cubicG");

  const json& src = need(j, "source", "model");
  const std::string type = need(src, "type", "model.source").get<std::string>();
  if (type == "gaussian") {
    RMat C = src.contains("C") ? real_matrix(src.at("C"), m.n, vars, "source.C") : RMat();
    RMat D = src.contains("D") ? real_matrix(src.at("D"), m.n, vars, "source.D") : RMat();
    m.H = Source::gaussian(real_vector(need(src, "amplitude", "source"), m.n, vars, "source.amplitude"),
                           opt_number(src, "center", 0.0, vars, "source"), opt_number(src, "width", 1.0, vars, "source"),
                           static_cast<int>(opt_number(src, "power", 0, vars, "source")), C, D);
  } else if (type == "table") {
    const json& xs = need(src, "x", "source");
    const json& vs = need(src, "values", "source");
    if (!xs.is_array() || !vs.is_array()) invalid("source", "x and values must be lists");
    std::vector<double> x;
    std::vector<RVec> v;
    for (const auto& e : xs) x.push_back(number(e, vars, "source.x"));
    for (const auto& e : vs) v.push_back(real_vector(e, m.n, vars, "source.values"));
    m.H = Source::table(std::move(x), std::move(v));
  } else if (type == "rule") {
    const json& comps = need(src, "components", "source");
    if (!comps.is_array() || static_cast<int>(comps.size()) != m.n) invalid("source.components", "need n expressions");
    std::vector<Expr> ex;
    bool state = false;
    for (const auto& c : comps) {
      ex.emplace_back(c.get<std::string>());
      for (const auto& name : ex.back().variables())
        if (name != "x" && !vars.count(name)) state = true;
    }
    const int n = m.n;
    Vars base = vars;
    m.H.eval = [ex, base, n](double x, const RVec& u, const RVec& ux) {
      Vars v = base;
      v["x"] = x;
      for (int i = 0; i < n; ++i) {
        v["u" + std::to_string(i + 1)] = u(i);
        v["ux" + std::to_string(i + 1)] = ux(i);
      }
      RVec out(n);
      for (int i = 0; i < n; ++i) out(i) = ex[i].eval(v);
      return out;
    };
    m.H.depends_on_state = state;
    m.H.C = opt_number(src, "C", 1.0, vars, "source");
    m.H.delta = opt_number(src, "delta", 1.0, vars, "source");
    m.H.description = "rule";
    RVec z = RVec::Zero(n);
    m.H.eval(0.0, z, z);  // surface unknown variables now
  } else {
    invalid("source", "unknown type \"" + type + "\"");
  }
  m.validate();
  return m;
}

EdgeModel edge_model(const json& j, const Vars& vars) {
  EdgeModel m;
  m.base = symbol(need(j, "base", "edge"), vars);
  m.n = m.base.n;
  m.B = real_matrix(need(j, "B", "edge"), m.n, vars, "edge.B");
  m.eps0 = opt_number(j, "eps0", 0.0, vars, "edge");
  const json& p = need(j, "perturbation", "edge");
  std::string type = p.contains("type") ? p.at("type").get<std::string>() : "separable";
  if (type != "separable") invalid("edge.perturbation", "only separable perturbations are supported");
  Expr V(need(p, "V", "edge.perturbation").get<std::string>());
  Vars base = vars;
  m.perturbation.V = [V, base](double x) {
    Vars v = base;
    v["x"] = x;
    return V.eval(v);
  };
  m.perturbation.V(0.0);
  if (p.contains("K0")) m.perturbation.K0 = kernel(p.at("K0"), m.n, vars);
  m.perturbation.P = p.contains("P") ? matrix(p.at("P"), m.n, vars, "edge.perturbation.P") : Mat::Zero(m.n, m.n);
  m.perturbation.C = opt_number(p, "C", 1.0, vars, "edge.perturbation");
  m.perturbation.delta = opt_number(p, "delta", 1.0, vars, "edge.perturbation");
  m.perturbation.description = V.text();
  m.validate();
  return m;
}

Rectangle rectangle(const json& j, const Vars& vars) {
  if (!j.is_array() || j.size() != 4) invalid("box", "expected [re_lo, re_hi, im_lo, im_hi]");
  Rectangle r{number(j[0], vars, "box"), number(j[1], vars, "box"), number(j[2], vars, "box"),
              number(j[3], vars, "box")};
  if (!(r.re_lo < r.re_hi && r.im_lo < r.im_hi)) invalid("box", "empty rectangle");
  return r;
}

json to_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json to_json(const RVec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const RootSet& r) {
  json roots = json::array();
  for (const auto& e : r.roots) roots.push_back({{"re", e.nu.real()}, {"im", e.nu.imag()}, {"multiplicity", e.multiplicity}});
  return json{{"roots", roots},
              {"total_count", r.total_count},
              {"box", {r.box.re_lo, r.box.re_hi, r.box.im_lo, r.box.im_hi}}};
}

json to_json(const Crossing& c) {
  json axis = json::array();
  for (const auto& e : c.axis_roots) axis.push_back({{"im", e.nu.imag()}, {"multiplicity", e.multiplicity}});
  json j{{"rho", c.rho},     {"multiplicity", c.M},         {"axis_roots", axis},        {"MR_minus", c.MR_minus},
         {"MR_plus", c.MR_plus}, {"ML_minus", c.ML_minus}, {"ML_plus", c.ML_plus},     {"contribution", c.contribution()},
         {"margin", c.margin}, {"delta_rho", c.delta_rho}, {"simple", c.simple}};
  if (c.simple) j["speed"] = c.speed;
  return j;
}

json to_json(const FlowResult& r) {
  json cs = json::array();
  for (const auto& c : r.crossings) cs.push_back(to_json(c));
  return json{{"cross", r.cross},
              {"index", r.index},
              {"crossings", cs},
              {"diagnostics",
               {{"scan_points", r.scan_points},
                {"scan_step", r.scan_step},
                {"min_scan_margin", r.min_scan_margin},
                {"right_count_minus", r.right_count_minus},
                {"right_count_plus", r.right_count_plus},
                {"side_exit", r.side_exit},
                {"boxes", r.boxes}}}};
}

json to_json(const HypothesisReport& r) {
  return json{{"pass", r.pass},
              {"strip_ok", r.strip_ok},
              {"strip_message", r.strip_message},
              {"loc_norm", {r.loc_norm_minus, r.loc_norm_plus}},
              {"kernel_norm", {r.kernel_norm_minus, r.kernel_norm_plus}},
              {"shift_sum", {r.shift_sum_minus, r.shift_sum_plus}},
              {"endpoint_residual", {r.endpoint_residual_minus, r.endpoint_residual_plus}},
              {"margin", {r.margin_minus, r.margin_plus}},
              {"strip_bound", {r.strip_bound_minus, r.strip_bound_plus}},
              {"failures", r.failures}};
}

}  // namespace specflow::config

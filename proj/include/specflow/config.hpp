#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "specflow/conslaw.hpp"
#include "specflow/edgebif.hpp"
#include "specflow/rootfinder.hpp"
#include "specflow/spectralflow.hpp"
#include "specflow/symbol.hpp"

namespace specflow::config {

using json = nlohmann::json;
using Vars = std::map<std::string, double>;

json load(const std::string& path);
// "params" block of a config, evaluated in order (later entries may use earlier ones).
Vars params(const json& root);

// Numbers may be given as JSON numbers or as expression strings over vars.
double number(const json& j, const Vars& vars, const std::string& what);
// n x n matrix: nested arrays, a number when n = 1, or {"re": ..., "im": ...}.
Mat matrix(const json& j, int n, const Vars& vars, const std::string& what);
RMat real_matrix(const json& j, int n, const Vars& vars, const std::string& what);
RVec real_vector(const json& j, int n, const Vars& vars, const std::string& what);

Kernel kernel(const json& terms, int n, const Vars& vars);
Symbol symbol(const json& j, const Vars& vars);
OperatorFamily family(const json& j, const Vars& vars);
ShockModel shock_model(const json& j, const Vars& vars);
EdgeModel edge_model(const json& j, const Vars& vars);
Rectangle rectangle(const json& j, const Vars& vars);

json to_json(cplx z);
json to_json(const RootSet& r);
json to_json(const Crossing& c);
json to_json(const FlowResult& r);
json to_json(const HypothesisReport& r);
json to_json(const RVec& v);

}  // namespace specflow::config

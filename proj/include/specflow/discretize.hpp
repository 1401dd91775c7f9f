#pragma once

#include <functional>
#include <string>
#include <vector>

#include "specflow/symbol.hpp"

namespace specflow {

// Operator in xi: xi -> Symbol whose kernel acts as K(xi - zeta; xi) and whose shift
// matrices are evaluated at xi.
struct SpatialOperator {
  int n = 1;
  std::function<Symbol(double)> at;
  bool constant = false;

  static SpatialOperator constant_symbol(const Symbol& S);
  static SpatialOperator from_family(const OperatorFamily& F);
};

// Nodes xi_i = -L + i h. The weight is W(xi) = exp(beta(xi) sqrt(xi^2 + 1)) with
// beta -> gamma_plus as xi -> +inf and beta -> -gamma_minus as xi -> -inf, blended over
// |xi| < 1; gamma_minus = -gamma_plus gives exp(gamma sqrt(xi^2 + 1)).
struct Grid {
  double L = 30;
  double h = 0.05;
  double gamma_minus = 0;
  double gamma_plus = 0;

  int size() const;
  double node(int i) const { return -L + h * i; }
  double weight_exponent(double xi) const;
};

struct GridOperator {
  Mat M;  // (n N) x (n N), node-major: row i*n + c
  Grid grid;
  int n = 1;
  double kernel_width = 0;
  std::string provenance;

  int nodes() const { return grid.size(); }
  // Rows with |xi| <= L - margin.
  std::vector<int> interior_nodes(double margin) const;
};

struct AssembleOptions {
  double tail_tol = 1e-8;
  bool adjoint = false;
};

GridOperator assemble(const SpatialOperator& T, const Grid& grid, const AssembleOptions& opt = {});
GridOperator assemble_adjoint(const SpatialOperator& T, const Grid& grid);

// Apply to a grid function stored node-major.
Vec apply(const GridOperator& G, const Vec& u);
Vec sample(const Grid& g, int n, const std::function<Vec(double)>& f);

struct NullityResult {
  int dim = 0;      // near-null vectors that decay into both far fields
  int raw_dim = 0;  // singular values below the gap
  double gap = 0;
  bool reliable = true;
  std::vector<double> singulars;  // ascending
  Mat null_vectors;               // orthonormal basis of the near-null space (raw_dim columns)
  Mat genuine_vectors;            // functions decaying both ways (dim columns)
};

struct NullityOptions {
  double tol_ratio = 1e3;
  double zero_floor = 1e-6;  // relative to sigma_max: no near-null values above this
  double intersection_tol = 1e-2;
  double prony_shift = 8.0;
  double core_fraction = 0.1;  // share of the norm on |xi| <= L/2 required of a kernel element
};

NullityResult nullity(const GridOperator& G, const NullityOptions& opt = {});

struct IndexEstimate {
  int index = 0;
  NullityResult forward, adjoint;
  bool reliable = true;
};

IndexEstimate index_estimate(const SpatialOperator& T, Grid grid, double gamma_minus, double gamma_plus,
                             const NullityOptions& opt = {});

struct SolveResult {
  Vec u;
  double residual = 0;  // of the end-pinned least-squares system, relative to ||H||
  int dropped = 0;
};

SolveResult solve_inhomogeneous(const GridOperator& G, const Vec& H, const NullityOptions& opt = {});

}  // namespace specflow

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "specflow/types.hpp"

namespace specflow {

// Scalar profile of one kernel term.
//   RightExp: zeta^p e^{-a zeta} on zeta > 0
//   LeftExp:  |zeta|^p e^{a zeta} on zeta < 0
//   Gaussian: (2 pi sigma^2)^{-1/2} exp(-(zeta - mean)^2 / (2 sigma^2))
//   Sampled:  matrix samples on a uniform grid (the term matrix multiplies from the left)
enum class Profile { RightExp, LeftExp, Gaussian, Sampled };

struct SampledData {
  double h = 0;
  double zeta0 = 0;  // abscissa of values[0]
  double decay = 0;  // user-declared exponential decay rate
  std::vector<Mat> values;

  double zeta(size_t i) const { return zeta0 + h * static_cast<double>(i); }
  double zeta_max() const { return zeta(values.size() - 1); }
};

struct KernelTerm {
  Profile profile = Profile::RightExp;
  double rate = 1.0;
  int degree = 0;
  double sigma = 1.0;
  double mean = 0.0;
  std::shared_ptr<const SampledData> sampled;
  // The transform of this term is M * mu^dorder * g(mu), mu = nu - offset, where g is the
  // transform of the profile. offset comes from exponential weights, dorder from kernel
  // derivatives.
  int dorder = 0;
  double offset = 0.0;
  Mat M;

  // Re nu interval on which the term's transform is analytic.
  double re_lo() const;
  double re_hi() const;
  // d^order/dnu^order of the transform, order in {0, 1, 2}.
  Mat transform(cplx nu, int order) const;
  // Pointwise value e^{offset zeta} M g(zeta); only for dorder == 0.
  Mat value(double zeta) const;
  // [lo, hi] outside which the pointwise value is below tol relative to its peak.
  std::pair<double, double> support(double tol) const;
  // Upper bounds for sup over the imaginary axis of the transform and its derivative.
  double axis_sup() const;
  double axis_sup_derivative() const;
  // int |K(zeta)| e^{eta |zeta|} d zeta (upper bound for derivative terms).
  double weighted_l1(double eta) const;
};

class Kernel {
 public:
  Kernel() = default;

  static Kernel exponential(double a, const Mat& M);
  static Kernel two_sided(double a_left, const Mat& M_left, double a_right, const Mat& M_right);
  static Kernel gaussian(double sigma, const Mat& M, double mean = 0.0);
  static Kernel exp_poly(double a, int degree, const Mat& M);
  static Kernel sampled(double h, double zeta0, std::vector<Mat> values, double decay,
                        double tail_tol = 1e-6);

  bool empty() const { return terms_.empty(); }
  const std::vector<KernelTerm>& terms() const { return terms_; }
  void add(const KernelTerm& t) { terms_.push_back(t); }

  double re_lo() const;
  double re_hi() const;
  bool has_derivative_terms() const;

  Mat transform(cplx nu, int order, int n) const;
  Mat value(double zeta, int n) const;

  Kernel scaled(cplx w) const;
  Kernel left_multiplied(const Mat& L) const;
  Kernel right_multiplied(const Mat& R) const;
  Kernel derivative() const;
  Kernel weighted(double gamma) const;
  Kernel adjoint() const;
  Kernel operator+(const Kernel& o) const;

  double axis_sup() const;
  double axis_sup_derivative() const;
  double weighted_l1(double eta) const;
  std::pair<double, double> support(double tol) const;

 private:
  std::vector<KernelTerm> terms_;
};

// Closed-form or quadrature transform of a kernel. Throws StripViolation outside the
// kernel's analyticity strip.
Mat fourier_eval(const Kernel& K, cplx nu, int derivative_order, int n);

struct ShiftTerm {
  double xi = 0.0;
  Mat A;
};

// Constant-coefficient operator U' - K*U - sum_j A_j U(. - xi_j), declared analytic on
// the strip |Re nu - center| < eta.
struct Symbol {
  int n = 1;
  Kernel kernel;
  std::vector<ShiftTerm> shifts;
  double eta = 0.5;
  double center = 0.0;

  static Symbol local(const Mat& A, double eta = 1.0);

  void validate() const;
  bool in_strip(cplx nu) const { return std::abs(nu.real() - center) < eta; }
  void check_strip(cplx nu) const;
  // sum_j ||A_j|| e^{eta |xi_j|}
  double loc_norm() const;
  double shift_norm_sum() const;
  double max_abs_shift() const;
  bool is_real() const;
  // Total nonlocal transform K^(nu) + sum_j A_j e^{-nu xi_j} and its nu-derivatives.
  Mat nonlocal_transform(cplx nu, int order) const;
};

Symbol combine(const Symbol& a, cplx wa, const Symbol& b, cplx wb);
// Conjugation by e^{gamma xi}: the characteristic matrix becomes Delta(nu - gamma).
Symbol weight_shift(const Symbol& S, double gamma);
void add_shift(std::vector<ShiftTerm>& shifts, double xi, const Mat& A);

class OperatorFamily {
 public:
  enum class Kind { Affine, Tabulated, Rule };

  static OperatorFamily affine(Symbol s0, Symbol s1, double half_range = 12.0);
  static OperatorFamily tabulated(std::vector<double> rho, std::vector<Symbol> symbols,
                                  std::optional<Symbol> minus = {},
                                  std::optional<Symbol> plus = {});
  static OperatorFamily rule(double rho_min, double rho_max, std::function<Symbol(double)> f,
                             std::optional<Symbol> minus = {}, std::optional<Symbol> plus = {});

  Symbol at(double rho) const;
  const Symbol& minus() const { return *minus_; }
  const Symbol& plus() const { return *plus_; }
  double rho_min() const { return rho_min_; }
  double rho_max() const { return rho_max_; }
  Kind kind() const { return kind_; }
  int dimension() const { return minus_->n; }
  // Family with rho -> -rho (endpoints swapped).
  OperatorFamily reversed() const;
  // Max entrywise |Delta_{F(rho_end)}(nu) - Delta_{S_end}(nu)| over nu = i*{-2,-1,0,1,2}.
  double endpoint_residual(bool plus_side) const;

 private:
  Kind kind_ = Kind::Rule;
  double rho_min_ = 0, rho_max_ = 1;
  std::function<Symbol(double)> eval_;
  std::shared_ptr<const Symbol> minus_, plus_;
};

double affine_sigma(double rho);

struct HypothesisTolerances {
  double endpoint = 1e-8;
  double hyperbolic = 1e-8;
  int strip_samples = 9;
};

struct HypothesisReport {
  bool pass = false;
  bool strip_ok = true;
  std::string strip_message;
  double loc_norm_minus = 0, loc_norm_plus = 0;
  double kernel_norm_minus = 0, kernel_norm_plus = 0;
  double shift_sum_minus = 0, shift_sum_plus = 0;
  double endpoint_residual_minus = 0, endpoint_residual_plus = 0;
  double margin_minus = 0, margin_plus = 0;
  double strip_bound_minus = 0, strip_bound_plus = 0;
  std::vector<std::string> failures;
};

HypothesisReport check_hypotheses(const OperatorFamily& F, const HypothesisTolerances& tol = {});

}  // namespace specflow

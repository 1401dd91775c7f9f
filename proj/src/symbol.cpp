#include "specflow/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "specflow/charmatrix.hpp"
#include "specflow/errors.hpp"

namespace specflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double factorial(int k) { return std::tgamma(k + 1.0); }

double binom(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

double opnorm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  if (M.rows() == 1 && M.cols() == 1) return std::abs(M(0, 0));
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()(0);
}

// Composite Simpson weights; the last interval falls back to the trapezoid rule when the
// number of intervals is odd.
std::vector<double> simpson_weights(size_t N, double h) {
  std::vector<double> w(N, 0.0);
  if (N == 1) {
    w[0] = h;
    return w;
  }
  size_t last = (N - 1) % 2 == 0 ? N - 1 : N - 2;
  for (size_t i = 0; i + 2 <= last; i += 2) {
    w[i] += h / 3;
    w[i + 1] += 4 * h / 3;
    w[i + 2] += h / 3;
  }
  if (last != N - 1) {
    w[N - 2] += h / 2;
    w[N - 1] += h / 2;
  }
  return w;
}

// Profile transform derivative g^{(k)}(mu), k <= 2, scalar profiles.
cplx profile_derivative(const KernelTerm& t, cplx mu, int k) {
  switch (t.profile) {
    case Profile::RightExp: {
      cplx b = t.rate + mu;
      double sign = (k % 2 == 0) ? 1.0 : -1.0;
      return sign * factorial(t.degree + k) / std::pow(b, t.degree + k + 1);
    }
    case Profile::LeftExp: {
      cplx b = t.rate - mu;
      return factorial(t.degree + k) / std::pow(b, t.degree + k + 1);
    }
    case Profile::Gaussian: {
      double s2 = t.sigma * t.sigma;
      cplx G = std::exp(-mu * t.mean + 0.5 * s2 * mu * mu);
      cplx phi = -t.mean + s2 * mu;
      if (k == 0) return G;
      if (k == 1) return phi * G;
      return (phi * phi + s2) * G;
    }
    case Profile::Sampled:
      break;
  }
  return 0.0;
}

Mat sampled_derivative(const KernelTerm& t, cplx mu, int k) {
  const SampledData& d = *t.sampled;
  auto w = simpson_weights(d.values.size(), d.h);
  Mat acc = Mat::Zero(d.values[0].rows(), d.values[0].cols());
  for (size_t i = 0; i < d.values.size(); ++i) {
    double z = d.zeta(i);
    cplx f = w[i] * std::exp(-mu * z);
    if (k == 1) f *= -z;
    if (k == 2) f *= z * z;
    acc += f * d.values[i];
  }
  return acc;
}

// Non-negative polynomial in |l|, used for axis bounds of Gaussian terms.
using Poly = std::vector<double>;

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

Poly poly_add(Poly a, const Poly& b) {
  if (b.size() > a.size()) a.resize(b.size(), 0.0);
  for (size_t i = 0; i < b.size(); ++i) a[i] += b[i];
  return a;
}

// sup_l sum_i c_i |l|^i exp(-s2 l^2 / 2), bounded termwise.
double gauss_poly_sup(const Poly& c, double s2) {
  double r = 0;
  for (size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0) continue;
    r += c[i] * (i == 0 ? 1.0 : std::pow(static_cast<double>(i) / (s2 * std::exp(1.0)), i / 2.0));
  }
  return r;
}

// sup over the axis of |mu^j g^{(k)}(mu)| for one-sided exponential profiles, where
// |mu| <= |b| + a and |b| >= beta > 0.
double onesided_sup(double a, double beta, int p, int k, int j) {
  if (beta <= 0) return kInf;
  double r = 0;
  for (int i = 0; i <= j; ++i) {
    int e = i - p - k - 1;
    if (e > 0) return kInf;
    r += binom(j, i) * std::pow(a, j - i) * factorial(p + k) * std::pow(beta, e);
  }
  return r;
}

// sup over the axis of |h^{(k)}| with h = mu^m g.
double term_axis_sup(const KernelTerm& t, int k) {
  const int m = t.dorder;
  const double o = t.offset;
  double total = 0;
  for (int j = 0; j <= std::min(k, m); ++j) {
    double coef = binom(k, j) * factorial(m) / factorial(m - j);
    int powmu = m - j;
    int gk = k - j;
    double s = 0;
    switch (t.profile) {
      case Profile::RightExp:
        s = onesided_sup(t.rate, t.rate - o, t.degree, gk, powmu);
        break;
      case Profile::LeftExp:
        s = onesided_sup(t.rate, t.rate + o, t.degree, gk, powmu);
        break;
      case Profile::Gaussian: {
        double s2 = t.sigma * t.sigma;
        double E = std::exp(o * t.mean + 0.5 * s2 * o * o);
        double q = std::abs(t.mean) + s2 * std::abs(o);
        Poly phi{q, s2};
        Poly g = gk == 0 ? Poly{1.0} : gk == 1 ? phi : poly_add(poly_mul(phi, phi), Poly{s2});
        for (int i = 0; i < powmu; ++i) g = poly_mul(g, Poly{std::abs(o), 1.0});
        s = E * gauss_poly_sup(g, s2);
        break;
      }
      case Profile::Sampled: {
        const SampledData& d = *t.sampled;
        if (powmu >= 2) return kInf;
        auto w = simpson_weights(d.values.size(), d.h);
        if (powmu == 0) {
          for (size_t i = 0; i < d.values.size(); ++i) {
            double z = d.zeta(i);
            s += std::abs(w[i]) * opnorm(d.values[i]) * std::exp(o * z) * std::pow(std::abs(z), gk);
          }
        } else {
          // |mu F^(mu)| is bounded by the total variation of the weighted samples.
          auto f = [&](size_t i) {
            double z = d.zeta(i);
            return Mat(d.values[i] * (std::exp(o * z) * std::pow(-z, gk)));
          };
          s = opnorm(f(0)) + opnorm(f(d.values.size() - 1));
          for (size_t i = 0; i + 1 < d.values.size(); ++i) s += opnorm(f(i + 1) - f(i));
        }
        break;
      }
    }
    total += coef * s;
  }
  return opnorm(t.M) * total;
}

}  // namespace

double KernelTerm::re_lo() const {
  switch (profile) {
    case Profile::RightExp:
      return offset - rate;
    case Profile::LeftExp:
    case Profile::Gaussian:
      return -kInf;
    case Profile::Sampled:
      return offset - sampled->decay;
  }
  return -kInf;
}

double KernelTerm::re_hi() const {
  switch (profile) {
    case Profile::LeftExp:
      return offset + rate;
    case Profile::RightExp:
    case Profile::Gaussian:
      return kInf;
    case Profile::Sampled:
      return offset + sampled->decay;
  }
  return kInf;
}

Mat KernelTerm::transform(cplx nu, int order) const {
  const cplx mu = nu - offset;
  const int m = dorder;
  auto g = [&](int k) -> Mat {
    if (profile == Profile::Sampled) return sampled_derivative(*this, mu, k);
    return Mat::Identity(M.cols(), M.cols()) * profile_derivative(*this, mu, k);
  };
  Mat acc = Mat::Zero(M.rows(), M.cols());
  // Leibniz rule for (mu^m g)^{(order)}.
  for (int j = 0; j <= std::min(order, m); ++j) {
    double coef = binom(order, j) * factorial(m) / factorial(m - j);
    acc += coef * std::pow(mu, m - j) * g(order - j);
  }
  return M * acc;
}

Mat KernelTerm::value(double zeta) const {
  if (dorder != 0) throw ValidationError("pointwise value of a differentiated kernel term");
  const double w = std::exp(offset * zeta);
  switch (profile) {
    case Profile::RightExp: {
      if (zeta < 0) return Mat::Zero(M.rows(), M.cols());
      double v = std::pow(zeta, degree) * std::exp(-rate * zeta);
      if (zeta == 0) v = degree == 0 ? 0.5 : 0.0;
      return M * (w * v);
    }
    case Profile::LeftExp: {
      if (zeta > 0) return Mat::Zero(M.rows(), M.cols());
      double v = std::pow(-zeta, degree) * std::exp(rate * zeta);
      if (zeta == 0) v = degree == 0 ? 0.5 : 0.0;
      return M * (w * v);
    }
    case Profile::Gaussian: {
      double s2 = sigma * sigma;
      double v = std::exp(-(zeta - mean) * (zeta - mean) / (2 * s2)) / std::sqrt(2 * kPi * s2);
      return M * (w * v);
    }
    case Profile::Sampled: {
      const SampledData& d = *sampled;
      double x = (zeta - d.zeta0) / d.h;
      if (x < 0 || x > static_cast<double>(d.values.size() - 1)) return Mat::Zero(M.rows(), d.values[0].cols());
      size_t i = std::min(static_cast<size_t>(x), d.values.size() - 2);
      double t = x - static_cast<double>(i);
      return M * (w * ((1 - t) * d.values[i] + t * d.values[i + 1]));
    }
  }
  return Mat::Zero(M.rows(), M.cols());
}

std::pair<double, double> KernelTerm::support(double tol) const {
  const double L = std::log(1.0 / tol);
  switch (profile) {
    case Profile::RightExp:
    case Profile::LeftExp: {
      double beta = profile == Profile::RightExp ? rate - offset : rate + offset;
      if (beta <= 0) throw StripViolation("kernel term does not decay under its weight");
      double R = (L + 1) / beta;
      for (int it = 0; it < 20; ++it) R = (L + degree * std::log(std::max(R, 1.0))) / beta + 1.0 / beta;
      return profile == Profile::RightExp ? std::make_pair(0.0, R) : std::make_pair(-R, 0.0);
    }
    case Profile::Gaussian: {
      double c = mean + sigma * sigma * offset;
      double r = sigma * std::sqrt(2 * L);
      return {c - r, c + r};
    }
    case Profile::Sampled:
      return {sampled->zeta0, sampled->zeta_max()};
  }
  return {0.0, 0.0};
}

double KernelTerm::axis_sup() const { return term_axis_sup(*this, 0); }
double KernelTerm::axis_sup_derivative() const { return term_axis_sup(*this, 1); }

double KernelTerm::weighted_l1(double eta) const {
  double base = 0;
  double dfac = 1;
  switch (profile) {
    case Profile::RightExp:
    case Profile::LeftExp: {
      double beta = (profile == Profile::RightExp ? rate - offset : rate + offset) - eta;
      if (beta <= 0) return kInf;
      base = factorial(degree) / std::pow(beta, degree + 1);
      dfac = rate + std::abs(offset) + 1;
      break;
    }
    case Profile::Gaussian: {
      double s2 = sigma * sigma;
      base = std::exp((offset + eta) * mean + 0.5 * s2 * (offset + eta) * (offset + eta)) +
             std::exp((offset - eta) * mean + 0.5 * s2 * (offset - eta) * (offset - eta));
      dfac = std::abs(offset) + eta + 1.0 / sigma + std::abs(mean) / s2;
      break;
    }
    case Profile::Sampled: {
      const SampledData& d = *sampled;
      auto w = simpson_weights(d.values.size(), d.h);
      for (size_t i = 0; i < d.values.size(); ++i) {
        double z = d.zeta(i);
        base += std::abs(w[i]) * opnorm(d.values[i]) * std::exp(offset * z + eta * std::abs(z));
      }
      dfac = std::abs(offset) + 1.0 / d.h;
      break;
    }
  }
  return opnorm(M) * base * std::pow(dfac, dorder);
}

Kernel Kernel::exponential(double a, const Mat& M) {
  if (!(a > 0)) throw ValidationError("exponential kernel rate must be positive");
  return two_sided(a, M * (a / 2), a, M * (a / 2));
}

Kernel Kernel::two_sided(double a_left, const Mat& M_left, double a_right, const Mat& M_right) {
  Kernel k;
  KernelTerm r;
  r.profile = Profile::RightExp;
  r.rate = a_right;
  r.M = M_right;
  KernelTerm l;
  l.profile = Profile::LeftExp;
  l.rate = a_left;
  l.M = M_left;
  k.terms_ = {r, l};
  return k;
}

Kernel Kernel::gaussian(double sigma, const Mat& M, double mean) {
  if (!(sigma > 0)) throw ValidationError("gaussian kernel width must be positive");
  KernelTerm t;
  t.profile = Profile::Gaussian;
  t.sigma = sigma;
  t.mean = mean;
  t.M = M;
  Kernel k;
  k.terms_ = {t};
  return k;
}

Kernel Kernel::exp_poly(double a, int degree, const Mat& M) {
  if (!(a > 0) || degree < 0) throw ValidationError("exponential-polynomial term needs a > 0, degree >= 0");
  Kernel k = two_sided(a, M, a, M);
  for (auto& t : k.terms_) t.degree = degree;
  return k;
}

Kernel Kernel::sampled(double h, double zeta0, std::vector<Mat> values, double decay, double tail_tol) {
  if (!(h > 0)) throw ValidationError("sampled kernel needs h > 0");
  if (values.size() < 3) throw ValidationError("sampled kernel needs at least 3 samples");
  if (!(decay > 0)) throw ValidationError("sampled kernel needs a positive declared decay");
  double peak = 0;
  for (const auto& v : values) peak = std::max(peak, opnorm(v));
  double tail = std::max(opnorm(values.front()), opnorm(values.back()));
  if (tail > tail_tol * peak) {
    std::ostringstream os;
    os << "sampled kernel tail " << tail << " exceeds " << tail_tol << " x peak " << peak;
    throw QuadratureTail(os.str());
  }
  auto d = std::make_shared<SampledData>();
  d->h = h;
  d->zeta0 = zeta0;
  d->decay = decay;
  d->values = std::move(values);
  KernelTerm t;
  t.profile = Profile::Sampled;
  t.sampled = d;
  t.M = Mat::Identity(d->values[0].rows(), d->values[0].rows());
  Kernel k;
  k.terms_ = {t};
  return k;
}

double Kernel::re_lo() const {
  double r = -kInf;
  for (const auto& t : terms_) r = std::max(r, t.re_lo());
  return r;
}

double Kernel::re_hi() const {
  double r = kInf;
  for (const auto& t : terms_) r = std::min(r, t.re_hi());
  return r;
}

bool Kernel::has_derivative_terms() const {
  return std::any_of(terms_.begin(), terms_.end(), [](const KernelTerm& t) { return t.dorder > 0; });
}

Mat Kernel::transform(cplx nu, int order, int n) const {
  Mat acc = Mat::Zero(n, n);
  for (const auto& t : terms_) acc += t.transform(nu, order);
  return acc;
}

Mat Kernel::value(double zeta, int n) const {
  Mat acc = Mat::Zero(n, n);
  for (const auto& t : terms_) acc += t.value(zeta);
  return acc;
}

Kernel Kernel::scaled(cplx w) const {
  Kernel k = *this;
  for (auto& t : k.terms_) t.M *= w;
  return k;
}

Kernel Kernel::left_multiplied(const Mat& L) const {
  Kernel k = *this;
  for (auto& t : k.terms_) t.M = L * t.M;
  return k;
}

Kernel Kernel::right_multiplied(const Mat& R) const {
  Kernel k = *this;
  for (auto& t : k.terms_) {
    if (t.profile == Profile::Sampled) {
      auto d = std::make_shared<SampledData>(*t.sampled);
      for (auto& v : d->values) v = v * R;
      t.sampled = d;
    } else {
      t.M = t.M * R;
    }
  }
  return k;
}

Kernel Kernel::derivative() const {
  Kernel k = *this;
  for (auto& t : k.terms_) t.dorder += 1;
  return k;
}

Kernel Kernel::weighted(double gamma) const {
  Kernel k = *this;
  for (auto& t : k.terms_) t.offset += gamma;
  return k;
}

// K~(zeta) = -K(-zeta)^H. A term e^{o zeta} M g^{(m)}(zeta) maps to
// e^{-o zeta} (-(-1)^m M^H) g~^{(m)}(zeta) with g~(zeta) = g(-zeta).
Kernel Kernel::adjoint() const {
  Kernel k = *this;
  for (auto& t : k.terms_) {
    double sign = (t.dorder % 2 == 0) ? -1.0 : 1.0;
    t.offset = -t.offset;
    switch (t.profile) {
      case Profile::RightExp:
        t.profile = Profile::LeftExp;
        t.M = (sign * t.M.adjoint()).eval();
        break;
      case Profile::LeftExp:
        t.profile = Profile::RightExp;
        t.M = (sign * t.M.adjoint()).eval();
        break;
      case Profile::Gaussian:
        t.mean = -t.mean;
        t.M = (sign * t.M.adjoint()).eval();
        break;
      case Profile::Sampled: {
        auto d = std::make_shared<SampledData>(*t.sampled);
        const size_t N = d->values.size();
        for (size_t i = 0; i < N; ++i) d->values[i] = (t.M * t.sampled->values[N - 1 - i]).adjoint();
        d->zeta0 = -t.sampled->zeta_max();
        t.sampled = d;
        t.M = sign * Mat::Identity(d->values[0].rows(), d->values[0].rows());
        break;
      }
    }
  }
  return k;
}

Kernel Kernel::operator+(const Kernel& o) const {
  Kernel k = *this;
  k.terms_.insert(k.terms_.end(), o.terms_.begin(), o.terms_.end());
  return k;
}

double Kernel::axis_sup() const {
  double r = 0;
  for (const auto& t : terms_) r += t.axis_sup();
  return r;
}

double Kernel::axis_sup_derivative() const {
  double r = 0;
  for (const auto& t : terms_) r += t.axis_sup_derivative();
  return r;
}

double Kernel::weighted_l1(double eta) const {
  double r = 0;
  for (const auto& t : terms_) r += t.weighted_l1(eta);
  return r;
}

std::pair<double, double> Kernel::support(double tol) const {
  if (terms_.empty()) return {0.0, 0.0};
  double lo = kInf, hi = -kInf;
  for (const auto& t : terms_) {
    auto [a, b] = t.support(tol);
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  return {lo, hi};
}

Mat fourier_eval(const Kernel& K, cplx nu, int derivative_order, int n) {
  if (derivative_order < 0 || derivative_order > 2) throw ValidationError("derivative order must be 0, 1 or 2");
  if (!(nu.real() > K.re_lo() && nu.real() < K.re_hi())) {
    std::ostringstream os;
    os << "Re nu = " << nu.real() << " outside kernel strip (" << K.re_lo() << ", " << K.re_hi() << ")";
    throw StripViolation(os.str());
  }
  return K.transform(nu, derivative_order, n);
}

Symbol Symbol::local(const Mat& A, double eta) {
  Symbol s;
  s.n = static_cast<int>(A.rows());
  s.shifts = {{0.0, A}};
  s.eta = eta;
  return s;
}

void Symbol::validate() const {
  if (n < 1) throw ValidationError("symbol dimension must be >= 1");
  if (!(eta > 0)) throw ValidationError("strip half-width must be positive");
  for (const auto& t : kernel.terms()) {
    if (t.M.rows() != n) throw ValidationError("kernel matrix dimension mismatch");
    if (t.profile == Profile::Sampled && t.sampled->values[0].cols() != n)
      throw ValidationError("sampled kernel dimension mismatch");
  }
  for (size_t i = 0; i < shifts.size(); ++i) {
    if (shifts[i].A.rows() != n || shifts[i].A.cols() != n) throw ValidationError("shift matrix dimension mismatch");
    for (size_t j = 0; j < i; ++j)
      if (shifts[i].xi == shifts[j].xi) throw ValidationError("shifts must be pairwise distinct");
  }
  if (!(center - eta > kernel.re_lo() && center + eta < kernel.re_hi())) {
    std::ostringstream os;
    os << "declared strip (" << center - eta << ", " << center + eta << ") exceeds kernel analyticity ("
       << kernel.re_lo() << ", " << kernel.re_hi() << ")";
    throw StripViolation(os.str());
  }
}

void Symbol::check_strip(cplx nu) const {
  if (!in_strip(nu)) {
    std::ostringstream os;
    os << "Re nu = " << nu.real() << " outside strip |Re nu - " << center << "| < " << eta;
    throw StripViolation(os.str());
  }
}

double Symbol::loc_norm() const {
  double r = 0;
  for (const auto& s : shifts) r += opnorm(s.A) * std::exp(eta * std::abs(s.xi));
  return r;
}

double Symbol::shift_norm_sum() const {
  double r = 0;
  for (const auto& s : shifts) r += opnorm(s.A);
  return r;
}

double Symbol::max_abs_shift() const {
  double r = 0;
  for (const auto& s : shifts) r = std::max(r, std::abs(s.xi));
  return r;
}

bool Symbol::is_real() const {
  auto real = [](const Mat& M) { return M.imag().cwiseAbs().maxCoeff() == 0.0; };
  for (const auto& s : shifts)
    if (!real(s.A)) return false;
  for (const auto& t : kernel.terms()) {
    if (!real(t.M)) return false;
    if (t.profile == Profile::Sampled)
      for (const auto& v : t.sampled->values)
        if (!real(v)) return false;
  }
  return true;
}

Mat Symbol::nonlocal_transform(cplx nu, int order) const {
  Mat acc = kernel.transform(nu, order, n);
  for (const auto& s : shifts) {
    cplx f = std::exp(-nu * s.xi);
    if (order == 1) f *= -s.xi;
    if (order == 2) f *= s.xi * s.xi;
    acc += f * s.A;
  }
  return acc;
}

void add_shift(std::vector<ShiftTerm>& shifts, double xi, const Mat& A) {
  for (auto& s : shifts) {
    if (s.xi == xi) {
      s.A += A;
      return;
    }
  }
  shifts.push_back({xi, A});
  std::stable_sort(shifts.begin(), shifts.end(), [](const ShiftTerm& a, const ShiftTerm& b) {
    if ((a.xi == 0) != (b.xi == 0)) return a.xi == 0;
    return a.xi < b.xi;
  });
}

Symbol combine(const Symbol& a, cplx wa, const Symbol& b, cplx wb) {
  if (a.n != b.n) throw ValidationError("cannot combine symbols of different dimension");
  Symbol s;
  s.n = a.n;
  double lo = std::max(a.center - a.eta, b.center - b.eta);
  double hi = std::min(a.center + a.eta, b.center + b.eta);
  if (!(hi > lo)) throw StripViolation("strips of combined symbols do not overlap");
  s.center = 0.5 * (lo + hi);
  s.eta = 0.5 * (hi - lo);
  if (wa != 0.0) s.kernel = s.kernel + a.kernel.scaled(wa);
  if (wb != 0.0) s.kernel = s.kernel + b.kernel.scaled(wb);
  if (wa != 0.0)
    for (const auto& t : a.shifts) add_shift(s.shifts, t.xi, wa * t.A);
  if (wb != 0.0)
    for (const auto& t : b.shifts) add_shift(s.shifts, t.xi, wb * t.A);
  return s;
}

Symbol weight_shift(const Symbol& S, double gamma) {
  if (std::abs(gamma) >= S.eta) {
    std::ostringstream os;
    os << "weight " << gamma << " not inside strip half-width " << S.eta;
    throw StripViolation(os.str());
  }
  if (gamma == 0.0) return S;
  Symbol r = S;
  r.kernel = S.kernel.weighted(gamma);
  r.center = S.center + gamma;
  r.shifts.clear();
  for (const auto& t : S.shifts) add_shift(r.shifts, t.xi, t.A * std::exp(gamma * t.xi));
  add_shift(r.shifts, 0.0, Mat::Identity(S.n, S.n) * gamma);
  return r;
}

double affine_sigma(double rho) { return 0.5 * (1.0 + std::tanh(rho)); }

OperatorFamily OperatorFamily::affine(Symbol s0, Symbol s1, double half_range) {
  s0.validate();
  s1.validate();
  if (s0.n != s1.n) throw ValidationError("homotopy endpoints differ in dimension");
  OperatorFamily F;
  F.kind_ = Kind::Affine;
  F.rho_min_ = -half_range;
  F.rho_max_ = half_range;
  F.minus_ = std::make_shared<const Symbol>(s0);
  F.plus_ = std::make_shared<const Symbol>(s1);
  auto a = F.minus_, b = F.plus_;
  F.eval_ = [a, b](double rho) {
    double s = affine_sigma(rho);
    return combine(*a, 1.0 - s, *b, s);
  };
  return F;
}

OperatorFamily OperatorFamily::tabulated(std::vector<double> rho, std::vector<Symbol> symbols,
                                         std::optional<Symbol> minus, std::optional<Symbol> plus) {
  if (rho.size() != symbols.size() || rho.size() < 2) throw ValidationError("tabulated path needs >= 2 matching entries");
  for (size_t i = 1; i < rho.size(); ++i)
    if (!(rho[i] > rho[i - 1])) throw ValidationError("tabulated path parameters must be strictly increasing");
  for (const auto& s : symbols) {
    s.validate();
    if (s.n != symbols[0].n) throw ValidationError("tabulated path symbols differ in dimension");
  }
  OperatorFamily F;
  F.kind_ = Kind::Tabulated;
  F.rho_min_ = rho.front();
  F.rho_max_ = rho.back();
  F.minus_ = std::make_shared<const Symbol>(minus ? *minus : symbols.front());
  F.plus_ = std::make_shared<const Symbol>(plus ? *plus : symbols.back());
  auto table = std::make_shared<const std::pair<std::vector<double>, std::vector<Symbol>>>(std::move(rho), std::move(symbols));
  F.eval_ = [table](double r) {
    const auto& [xs, ss] = *table;
    if (r <= xs.front()) return ss.front();
    if (r >= xs.back()) return ss.back();
    size_t k = static_cast<size_t>(std::upper_bound(xs.begin(), xs.end(), r) - xs.begin()) - 1;
    double t = (r - xs[k]) / (xs[k + 1] - xs[k]);
    if (t == 0.0) return ss[k];
    return combine(ss[k], 1.0 - t, ss[k + 1], t);
  };
  return F;
}

OperatorFamily OperatorFamily::rule(double rho_min, double rho_max, std::function<Symbol(double)> f,
                                    std::optional<Symbol> minus, std::optional<Symbol> plus) {
  if (!(rho_max > rho_min)) throw ValidationError("rule path needs rho_min < rho_max");
  OperatorFamily F;
  F.kind_ = Kind::Rule;
  F.rho_min_ = rho_min;
  F.rho_max_ = rho_max;
  F.eval_ = std::move(f);
  F.minus_ = std::make_shared<const Symbol>(minus ? *minus : F.eval_(rho_min));
  F.plus_ = std::make_shared<const Symbol>(plus ? *plus : F.eval_(rho_max));
  F.minus_->validate();
  F.plus_->validate();
  return F;
}

Symbol OperatorFamily::at(double rho) const { return eval_(rho); }

OperatorFamily OperatorFamily::reversed() const {
  OperatorFamily F = *this;
  F.rho_min_ = -rho_max_;
  F.rho_max_ = -rho_min_;
  auto f = eval_;
  F.eval_ = [f](double r) { return f(-r); };
  F.minus_ = plus_;
  F.plus_ = minus_;
  return F;
}

double OperatorFamily::endpoint_residual(bool plus_side) const {
  Symbol end = at(plus_side ? rho_max_ : rho_min_);
  const Symbol& lim = plus_side ? *plus_ : *minus_;
  double r = 0;
  for (int k = -2; k <= 2; ++k) {
    cplx nu(0.0, static_cast<double>(k));
    Mat D = char_matrix(end, nu) - char_matrix(lim, nu);
    r = std::max(r, D.cwiseAbs().maxCoeff());
  }
  return r;
}

HypothesisReport check_hypotheses(const OperatorFamily& F, const HypothesisTolerances& tol) {
  HypothesisReport R;
  auto fail = [&](const std::string& m) { R.failures.push_back(m); };

  try {
    F.minus().validate();
    F.plus().validate();
    const int N = std::max(tol.strip_samples, 2);
    for (int i = 0; i < N; ++i) {
      double rho = F.rho_min() + (F.rho_max() - F.rho_min()) * i / (N - 1);
      Symbol s = F.at(rho);
      s.validate();
      if (s.center - s.eta > 0 || s.center + s.eta < 0) throw StripViolation("imaginary axis outside declared strip");
    }
  } catch (const Error& e) {
    R.strip_ok = false;
    R.strip_message = e.kind() + ": " + e.what();
    fail(R.strip_message);
  }

  const Symbol& m = F.minus();
  const Symbol& p = F.plus();
  R.loc_norm_minus = m.loc_norm();
  R.loc_norm_plus = p.loc_norm();
  R.shift_sum_minus = m.shift_norm_sum();
  R.shift_sum_plus = p.shift_norm_sum();
  R.kernel_norm_minus = m.kernel.weighted_l1(m.eta);
  R.kernel_norm_plus = p.kernel.weighted_l1(p.eta);
  if (!std::isfinite(R.kernel_norm_minus) || !std::isfinite(R.kernel_norm_plus)) fail("kernel weighted norm is not finite");
  if (!std::isfinite(R.loc_norm_minus) || !std::isfinite(R.loc_norm_plus)) fail("shift norm is not finite");

  if (R.strip_ok) {
    try {
      R.endpoint_residual_minus = F.endpoint_residual(false);
      R.endpoint_residual_plus = F.endpoint_residual(true);
    } catch (const Error& e) {
      R.endpoint_residual_minus = R.endpoint_residual_plus = kInf;
      fail(std::string("endpoint evaluation failed: ") + e.what());
    }
    if (!(R.endpoint_residual_minus <= tol.endpoint)) fail("endpoint residual at rho_min exceeds tolerance");
    if (!(R.endpoint_residual_plus <= tol.endpoint)) fail("endpoint residual at rho_max exceeds tolerance");

    auto strip_bound = [](const Symbol& s) {
      double b = 0;
      for (double re : {s.center - 0.9 * s.eta, s.center, s.center + 0.9 * s.eta})
        for (int l = -5; l <= 5; ++l) b = std::max(b, opnorm(s.kernel.transform(cplx(re, l), 0, s.n)));
      return b;
    };
    R.strip_bound_minus = strip_bound(m);
    R.strip_bound_plus = strip_bound(p);

    auto hm = is_hyperbolic(m);
    auto hp = is_hyperbolic(p);
    R.margin_minus = hm.margin;
    R.margin_plus = hp.margin;
    if (!(hm.hyperbolic && hm.margin > tol.hyperbolic)) fail("S- is not hyperbolic");
    if (!(hp.hyperbolic && hp.margin > tol.hyperbolic)) fail("S+ is not hyperbolic");
  }
  R.pass = R.failures.empty();
  return R;
}

}  // namespace specflow

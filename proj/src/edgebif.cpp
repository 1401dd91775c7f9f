#include "specflow/edgebif.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>
#include <cmath>
#include <sstream>

#include "specflow/errors.hpp"
#include "specflow/parallel.hpp"
#include "specflow/quadrature.hpp"

namespace specflow {

namespace {

// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  double a = std::exp(-1 / t), b = std::exp(-1 / (1 - t));
  return a / (a + b);
}

double smooth_step_dt(double t) {
  if (t <= 0 || t >= 1) return 0;
  double a = std::exp(-1 / t), b = std::exp(-1 / (1 - t));
  double da = a / (t * t), db = -b / ((1 - t) * (1 - t));
  return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

double chi_plus(double x) { return 0.5 * (1 + ramp(x)); }
double chi_plus_dx(double x) { return 0.5 * ramp_dx(x); }

RVec sign_fixed(RVec v) {
  Eigen::Index k;
  v.cwiseAbs().maxCoeff(&k);
  return v(k) < 0 ? RVec(-v) : v;
}

// d(0, lambda) derivative at lambda = 0 from a Cauchy integral; d is a polynomial in lambda.
double d_lambda_at_zero(const EdgeModel& m) {
  Mat D0 = char_matrix(m.base, 0.0);
  const int K = 32;
  const double r = 1e-2;
  cplx acc = 0;
  for (int k = 0; k < K; ++k) {
    cplx z = std::polar(r, 2 * kPi * k / K);
    acc += (D0 - z * m.B.cast<cplx>()).determinant() / z;
  }
  return (acc / static_cast<double>(K)).real();
}

}  // namespace

double ramp(double xi) {
  double s = smooth_step(2 * std::abs(xi) - 1);
  double sgn = xi > 0 ? 1.0 : (xi < 0 ? -1.0 : 0.0);
  return (1 - s) * std::tanh(2 * xi) + s * sgn;
}

double ramp_dx(double xi) {
  double t = 2 * std::abs(xi) - 1;
  double s = smooth_step(t);
  double sgn = xi > 0 ? 1.0 : (xi < 0 ? -1.0 : 0.0);
  double th = std::tanh(2 * xi);
  double sech2 = 1 - th * th;
  return (1 - s) * 2 * sech2 + 2 * sgn * smooth_step_dt(t) * (sgn - th);
}

Mat Perturbation::kernel_mass(int n) const {
  Mat k = Mat::Zero(n, n);
  if (!K0.empty()) k += K0.transform(0.0, 0, n);
  if (P.size()) k += P;
  if (!V) return Mat::Zero(n, n);
  return k * integrate_line(V, C, delta, 1e-12);
}

RMat EdgeModel::khat(double nu, int order) const { return -base.nonlocal_transform(nu, order).real(); }

Symbol EdgeModel::symbol_at(double lambda) const {
  Symbol S = base;
  if (lambda != 0) add_shift(S.shifts, 0.0, lambda * B.cast<cplx>());
  return S;
}

SpatialOperator EdgeModel::spatial(double lambda, double eps) const {
  SpatialOperator T;
  T.n = n;
  Symbol S = symbol_at(lambda);
  Perturbation p = perturbation;
  T.at = [S, p, eps](double xi) {
    Symbol s = S;
    double v = eps == 0 ? 0.0 : eps * p.V(xi);
    if (v != 0) {
      if (!p.K0.empty()) s.kernel = s.kernel + p.K0.scaled(-v);
      if (p.P.size()) add_shift(s.shifts, 0.0, -v * p.P);
    }
    return s;
  };
  return T;
}

void EdgeModel::validate() const {
  if (n < 1 || base.n != n) throw ValidationError("edge model dimension mismatch");
  if (B.rows() != n || B.cols() != n) throw ValidationError("B must be n x n");
  if (base.kernel.has_derivative_terms()) throw ValidationError("edge models take plain kernels only");
  if (!perturbation.V) throw ValidationError("edge model has no perturbation profile");
  if (perturbation.P.size() && (perturbation.P.rows() != n || perturbation.P.cols() != n))
    throw ValidationError("perturbation matrix must be n x n");
  base.validate();
}

DiffusiveReport diffusive_check(const EdgeModel& m) {
  DiffusiveReport r;
  CharEval ce = char_eval(m.base, 0.0, 2);
  r.d00 = ce.d.real();
  r.d_nu = ce.d1->real();
  r.d_nunu = ce.d2->real();
  r.d_lambda = d_lambda_at_zero(m);
  r.condition1 = std::abs(r.d00) <= 1e-10 && std::abs(r.d_nu) <= 1e-10;
  r.condition2 = r.d_nunu * r.d_lambda < 0;
  double cap = axis_bounds(m.base).ell_cap;
  auto right = axis_margin(m.base, 1e-3, cap);
  auto left = axis_margin(m.base, -cap, -1e-3);
  r.axis_margin = std::min(right.margin, left.margin);
  r.condition3 = right.hyperbolic && left.hyperbolic;
  if (!r.condition1) r.failures.push_back("d(0,0) or d_nu(0,0) does not vanish");
  if (!r.condition2) r.failures.push_back("d_nunu(0,0) d_lambda(0,0) is not negative");
  if (!r.condition3) r.failures.push_back("d(i l, 0) vanishes for some l != 0");
  r.pass = r.condition1 && r.condition2 && r.condition3;
  return r;
}

double edge_denominator(const EdgeModel& m, const RVec& e0, const RVec& e0_adj, const RVec& e1) {
  RMat I = RMat::Identity(m.n, m.n);
  RVec v = 2 * (I + m.khat(0, 1)) * e1 + m.khat(0, 2) * e0;
  return v.dot(e0_adj);
}

EdgeData edge_vectors(const EdgeModel& m) {
  m.validate();
  DiffusiveReport dr = diffusive_check(m);
  if (!dr.pass) {
    std::ostringstream os;
    os << "model is not diffusive:";
    for (const auto& f : dr.failures) os << " " << f << ";";
    throw ValidationError(os.str());
  }
  const int n = m.n;
  RMat K0 = m.khat(0, 0), K1 = m.khat(0, 1), K2 = m.khat(0, 2);
  RMat I = RMat::Identity(n, n);
  Eigen::JacobiSVD<RMat> svd(K0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  RVec s = svd.singularValues();
  double smin = s(n - 1);
  double snext = n > 1 ? s(n - 2) : 1.0;
  double scale = std::max(1.0, s(0));
  bool one_dim = smin <= 1e-10 * scale && (n == 1 || (snext > 1e-10 * scale && snext >= 1e6 * smin));
  if (!one_dim) {
    std::ostringstream os;
    os << "K^(0) does not have a one-dimensional kernel (singular values " << smin << ", " << snext << ")";
    throw RankMismatch(os.str());
  }
  EdgeData d;
  d.e0 = sign_fixed(svd.matrixV().col(n - 1));
  d.e0_adj = sign_fixed(svd.matrixU().col(n - 1));
  // Minimum-norm solves on the complement of the kernel.
  auto pinv_solve = [&](const RMat& U, const RMat& V, const RVec& rhs) {
    RVec x = RVec::Zero(n);
    for (int k = 0; k + 1 < n; ++k) x += V.col(k) * (U.col(k).dot(rhs) / s(k));
    return x;
  };
  d.e1 = pinv_solve(svd.matrixU(), svd.matrixV(), -(I + K1) * d.e0);
  // K^(0)^T e1* = (I + K^'(0)^T) e0*
  d.e1_adj = pinv_solve(svd.matrixV(), svd.matrixU(), (I + K1.transpose()) * d.e0_adj);

  d.kernel_residual = (K0 * d.e0).norm();
  d.adjoint_kernel_residual = (K0.transpose() * d.e0_adj).norm();
  d.compat1 = std::abs(((I + K1) * d.e0).dot(d.e0_adj));
  d.compat3 = ((I + K1) * d.e0 + K0 * d.e1).norm();
  d.compat4 = std::abs(((I + K1) * d.e1).dot(d.e0_adj) + ((I + K1) * d.e0).dot(d.e1_adj));
  d.nondegeneracy = ((I + K1) * d.e1).dot(d.e0_adj) + 0.5 * (K2 * d.e0).dot(d.e0_adj);
  double tol = 1e-9 * (1 + K0.norm() + K1.norm());
  if (d.compat1 > tol || d.compat3 > tol || d.compat4 > tol) {
    std::ostringstream os;
    os << "compatibility identities fail (residuals " << d.compat1 << ", " << d.compat3 << ", " << d.compat4 << ")";
    throw CompatibilityViolated(os.str());
  }
  d.d_lambda = dr.d_lambda;
  d.d_nunu = dr.d_nunu;
  d.slope = std::sqrt(-2 * d.d_lambda / d.d_nunu);
  d.denominator = edge_denominator(m, d.e0, d.e0_adj, d.e1);
  return d;
}

double edge_constant(const EdgeModel& m, const EdgeData& d) {
  if (std::abs(d.denominator) < 1e-10) throw GenericityViolated("the denominator of M vanishes");
  RMat mass = m.perturbation.kernel_mass(m.n).real();
  double num = d.e0_adj.dot(mass * d.e0);
  return num / d.denominator * std::sqrt(-d.d_nunu / (2 * d.d_lambda));
}

double edge_constant(const EdgeModel& m) { return edge_constant(m, edge_vectors(m)); }

namespace {

struct FarMode {
  double nu = 0;
  RVec e;
};

// Root of d(., gamma^2) continuing nu = guess, with its kernel vector normalized by <e, e0> = 1.
FarMode far_mode(const Symbol& S, double guess, const RVec& e0) {
  FarMode f;
  f.nu = guess;
  if (guess != 0) {
    for (int it = 0; it < 60; ++it) {
      CharEval ce = char_eval(S, f.nu, 1);
      double step = (ce.d / *ce.d1).real();
      f.nu -= step;
      if (std::abs(step) <= 1e-15 * (1 + std::abs(f.nu))) break;
    }
  }
  RMat D = char_matrix(S, f.nu).real();
  Eigen::JacobiSVD<RMat> svd(D, Eigen::ComputeFullV);
  RVec v = svd.matrixV().col(D.cols() - 1);
  f.e = v / v.dot(e0);
  return f;
}

class EdgeSystem {
 public:
  EdgeSystem(const EdgeModel& m, const EdgeData& d, double eps, const EdgeOptions& opt)
      : m_(m), d_(d), eps_(eps), opt_(opt), n_(m.n) {
    N_ = static_cast<int>(std::floor(2 * opt.L / opt.h + 0.5)) + 1;
    h_ = 2 * opt.L / (N_ - 1);
    const Kernel& K = m.base.kernel;
    if (!K.empty()) {
      auto [lo, hi] = K.support(1e-15);
      kmin_ = static_cast<int>(std::floor(lo / h_));
      kmax_ = static_cast<int>(std::ceil(hi / h_));
      for (int j = kmin_; j <= kmax_; ++j) kv_.push_back(K.value(j * h_, n_).real());
      K0hat_ = K.transform(0.0, 0, n_).real();
      K1hat_ = K.transform(0.0, 1, n_).real();
    }
    const Kernel& P = m.perturbation.K0;
    if (!P.empty()) {
      auto [lo, hi] = P.support(1e-15);
      pmin_ = static_cast<int>(std::floor(lo / h_));
      pmax_ = static_cast<int>(std::ceil(hi / h_));
      for (int j = pmin_; j <= pmax_; ++j) pv_.push_back(P.value(j * h_, n_).real());
    }
    Vx_.resize(N_);
    for (int i = 0; i < N_; ++i) Vx_[i] = eps_ * m.perturbation.V(x(i));
    Pm_ = m.perturbation.P.size() ? RMat(m.perturbation.P.real()) : RMat::Zero(n_, n_);
  }

  int nodes() const { return N_; }
  double x(int i) const { return -opt_.L + h_ * i; }
  int unknowns() const { return 2 + n_ * N_; }
  int equations() const { return n_ * (N_ - 1) + 2 * n_; }

  struct Far {
    double lambda;
    FarMode plus, minus;
    double a_minus;
    Symbol S;
  };

  Far far(double gamma, double a_minus) const {
    Far f;
    f.lambda = gamma * gamma;
    f.S = m_.symbol_at(f.lambda);
    f.plus = far_mode(f.S, d_.slope * gamma, d_.e0);
    f.minus = far_mode(f.S, -d_.slope * gamma, d_.e0);
    f.a_minus = a_minus;
    return f;
  }

  RVec far_value(const Far& f, double t) const {
    double cp = chi_plus(t);
    return cp * f.plus.e * std::exp(f.plus.nu * t) + f.a_minus * (1 - cp) * f.minus.e * std::exp(f.minus.nu * t);
  }
  RVec far_dx(const Far& f, double t) const {
    double cp = chi_plus(t), dc = chi_plus_dx(t);
    return (dc + cp * f.plus.nu) * f.plus.e * std::exp(f.plus.nu * t) +
           f.a_minus * (-dc + (1 - cp) * f.minus.nu) * f.minus.e * std::exp(f.minus.nu * t);
  }

  // U at x(i) + s for any node offset, w zero-extended and interpolated.
  RVec w_at(const RVec& w, double t) const {
    double q = (t + opt_.L) / h_;
    int i = static_cast<int>(std::floor(q));
    double r = q - i;
    RVec out = RVec::Zero(n_);
    if (i >= 0 && i < N_) out += (1 - r) * w.segment(n_ * i, n_);
    if (i + 1 >= 0 && i + 1 < N_ && r > 0) out += r * w.segment(n_ * (i + 1), n_);
    return out;
  }
  RVec w_node(const RVec& w, int i) const { return i >= 0 && i < N_ ? RVec(w.segment(n_ * i, n_)) : RVec::Zero(n_); }

  // Everything in T U except U', at node i.
  RVec node_operator(const Far& f, const RVec& w, int i) const {
    const double t = x(i);
    RVec U = far_value(f, t) + w_node(w, i);
    RVec out = -f.lambda * m_.B * U;
    if (!kv_.empty()) {
      RVec Ux = far_dx(f, t) + (w_node(w, i + 1) - w_node(w, i - 1)) / (2 * h_);
      RVec conv = K0hat_ * U + K1hat_ * Ux;
      for (int j = kmin_; j <= kmax_; ++j) {
        if (j == 0) continue;
        RVec Uj = far_value(f, x(i - j)) + w_node(w, i - j);
        conv += h_ * kv_[j - kmin_] * (Uj - U + j * h_ * Ux);
      }
      out -= conv;
    }
    for (const auto& s : m_.base.shifts) {
      RVec Us = s.xi == 0 ? U : RVec(far_value(f, t - s.xi) + w_at(w, t - s.xi));
      out -= s.A.real() * Us;
    }
    if (Vx_[i] != 0) {
      RVec p = Pm_ * U;
      for (int j = pmin_; j <= pmax_ && !pv_.empty(); ++j)
        p += h_ * pv_[j - pmin_] * (far_value(f, x(i - j)) + w_node(w, i - j));
      out += Vx_[i] * p;
    }
    return out;
  }

  RVec residual(const RVec& z) const {
    Far f = far(z(1), z(0));
    RVec w = z.tail(n_ * N_);
    std::vector<RVec> U(N_), NU(N_);
    for (int i = 0; i < N_; ++i) {
      U[i] = far_value(f, x(i)) + w.segment(n_ * i, n_);
      NU[i] = node_operator(f, w, i);
    }
    RVec R(equations());
    for (int i = 0; i + 1 < N_; ++i) R.segment(n_ * i, n_) = (U[i + 1] - U[i]) / h_ + 0.5 * (NU[i] + NU[i + 1]);
    int r = n_ * (N_ - 1);
    R.segment(r, n_) = w.head(n_);
    R.segment(r + n_, n_) = w.tail(n_);
    return R;
  }

  // Node-operator matrix in w (the far field fixed), as triplets of (node row block, w column block).
  void add_node_operator(std::vector<Eigen::Triplet<double>>& trip, double lambda, int i, double weight,
                         int row0) const {
    auto add_block = [&](int col_node, const RMat& B) {
      if (col_node < 0 || col_node >= N_) return;
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
          if (B(a, b) != 0) trip.emplace_back(row0 + a, 2 + n_ * col_node + b, weight * B(a, b));
    };
    add_block(i, -lambda * m_.B);
    if (!kv_.empty()) {
      // d/dw of K0 U + K1 Ux + h sum K_j (U_{i-j} - U_i + j h Ux)
      RMat diag = K0hat_;
      RMat dx = K1hat_;
      for (int j = kmin_; j <= kmax_; ++j) {
        if (j == 0) continue;
        diag -= h_ * kv_[j - kmin_];
        dx += h_ * kv_[j - kmin_] * (j * h_);
        add_block(i - j, -h_ * kv_[j - kmin_]);
      }
      add_block(i, -diag);
      add_block(i + 1, -dx / (2 * h_));
      add_block(i - 1, dx / (2 * h_));
    }
    for (const auto& s : m_.base.shifts) {
      RMat A = s.A.real();
      if (s.xi == 0) {
        add_block(i, -A);
        continue;
      }
      double q = (x(i) - s.xi + opt_.L) / h_;
      int k = static_cast<int>(std::floor(q));
      double r = q - k;
      add_block(k, -(1 - r) * A);
      if (r > 0) add_block(k + 1, -r * A);
    }
    if (Vx_[i] != 0) {
      add_block(i, Vx_[i] * Pm_);
      for (int j = pmin_; j <= pmax_ && !pv_.empty(); ++j) add_block(i - j, Vx_[i] * h_ * pv_[j - pmin_]);
    }
  }

  Eigen::SparseMatrix<double> jacobian(const RVec& z) const {
    std::vector<Eigen::Triplet<double>> trip;
    const double lambda = z(1) * z(1);
    for (int i = 0; i + 1 < N_; ++i) {
      int row0 = n_ * i;
      for (int a = 0; a < n_; ++a) {
        trip.emplace_back(row0 + a, 2 + n_ * (i + 1) + a, 1 / h_);
        trip.emplace_back(row0 + a, 2 + n_ * i + a, -1 / h_);
      }
      add_node_operator(trip, lambda, i, 0.5, row0);
      add_node_operator(trip, lambda, i + 1, 0.5, row0);
    }
    int r = n_ * (N_ - 1);
    for (int a = 0; a < n_; ++a) {
      trip.emplace_back(r + a, 2 + a, 1.0);
      trip.emplace_back(r + n_ + a, 2 + n_ * (N_ - 1) + a, 1.0);
    }
    // a_- and gamma columns by central differences.
    for (int c = 0; c < 2; ++c) {
      double step = c == 0 ? 1e-6 : 1e-7 * std::max(std::abs(z(1)), 1e-3);
      RVec zp = z, zm = z;
      zp(c) += step;
      zm(c) -= step;
      RVec col = (residual(zp) - residual(zm)) / (2 * step);
      for (int k = 0; k < col.size(); ++k)
        if (col(k) != 0) trip.emplace_back(k, c, col(k));
    }
    Eigen::SparseMatrix<double> J(equations(), unknowns());
    J.setFromTriplets(trip.begin(), trip.end());
    J.makeCompressed();
    return J;
  }

 private:
  const EdgeModel& m_;
  const EdgeData& d_;
  double eps_;
  EdgeOptions opt_;
  int n_;
  int N_ = 0;
  double h_ = 0;
  int kmin_ = 0, kmax_ = -1, pmin_ = 0, pmax_ = -1;
  std::vector<RMat> kv_, pv_;
  RMat K0hat_, K1hat_;
  std::vector<double> Vx_;
  RMat Pm_;
};

RVec sparse_solve(const Eigen::SparseMatrix<double>& J, const RVec& R) {
  if (J.rows() == J.cols()) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw NewtonDiverged("edge Jacobian factorization failed");
    return lu.solve(R);
  }
  Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
  qr.compute(J);
  if (qr.info() != Eigen::Success) throw NewtonDiverged("edge Jacobian factorization failed");
  return qr.solve(R);
}

}  // namespace

EdgeEigen edge_eigenvalue(const EdgeModel& m, double eps, const EdgeOptions& opt) {
  EdgeData d = edge_vectors(m);
  double M = edge_constant(m, d);
  double eps0 = m.eps0 > 0 ? m.eps0 : (M != 0 ? 0.05 / std::abs(M) : 0.0);
  if (std::abs(M * eps) >= eps0 && eps != 0) {
    std::ostringstream os;
    os << "|M eps| = " << std::abs(M * eps) << " outside the validated range (eps0 = " << eps0 << ")";
    throw ValidationError(os.str());
  }
  EdgeSystem sys(m, d, eps, opt);
  RVec z = RVec::Zero(sys.unknowns());
  z(0) = 1;
  z(1) = -M * eps;
  RVec R = sys.residual(z);
  double rn = R.lpNorm<Eigen::Infinity>();
  int it = 0;
  for (; it < opt.max_iterations && rn > opt.tol; ++it) {
    RVec dz = sparse_solve(sys.jacobian(z), R);
    RVec zn = z - dz;
    RVec Rn = sys.residual(zn);
    double rnn = Rn.lpNorm<Eigen::Infinity>();
    double step = dz.lpNorm<Eigen::Infinity>();
    z = zn;
    R = Rn;
    if (!(rnn < 10 * rn + 1e-14)) {
      std::ostringstream os;
      os << "edge Newton diverged (residual " << rnn << " after " << it + 1 << " steps)";
      throw NewtonDiverged(os.str());
    }
    rn = rnn;
    if (step <= 1e-14 * (1 + z.lpNorm<Eigen::Infinity>())) break;
  }
  if (rn > std::max(opt.tol, 1e-10)) {
    std::ostringstream os;
    os << "edge Newton did not converge (residual " << rn << ")";
    throw NewtonDiverged(os.str());
  }

  EdgeEigen out;
  out.eps = eps;
  out.a_minus = z(0);
  out.gamma = z(1);
  out.lambda = out.gamma * out.gamma;
  out.iterations = it;
  out.residual = rn;
  out.resonance = out.gamma > 0;
  auto f = sys.far(out.gamma, out.a_minus);
  out.nu_plus = f.plus.nu;
  out.nu_minus = f.minus.nu;
  RVec w = z.tail(m.n * sys.nodes());
  for (int i = 0; i < sys.nodes(); ++i) {
    out.x.push_back(sys.x(i));
    out.U.push_back(sys.far_value(f, sys.x(i)) + w.segment(m.n * i, m.n));
  }
  // Least-squares log-slope of |U| on the right half.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int i = 0; i < sys.nodes(); ++i) {
    if (out.x[i] < 0.5 * opt.L) continue;
    double y = std::log(std::max(out.U[i].norm(), 1e-300));
    sx += out.x[i];
    sy += y;
    sxx += out.x[i] * out.x[i];
    sxy += out.x[i] * y;
    ++cnt;
  }
  if (cnt > 1) out.decay_fit = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return out;
}

ScalingTable edge_scaling(const EdgeModel& m, const std::vector<double>& eps, const EdgeOptions& opt, int jobs) {
  ScalingTable T;
  T.M = edge_constant(m);
  for (double e : eps)
    if (!(T.M * e > 0)) throw ValidationError("edge scaling needs M eps > 0 for every eps");
  T.points = parallel_map(static_cast<int>(eps.size()), jobs, [&](int i) { return edge_eigenvalue(m, eps[i], opt); });
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(eps.size());
  for (const auto& p : T.points) {
    double y = p.lambda / (p.eps * p.eps);
    sx += p.eps;
    sy += y;
    sxx += p.eps * p.eps;
    sxy += p.eps * y;
  }
  if (eps.size() >= 2) {
    T.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    T.intercept = (sy - T.slope * sx) / k;
  } else if (eps.size() == 1) {
    T.intercept = sy;
  }
  T.relative_error = std::abs(T.intercept - T.M * T.M) / (T.M * T.M);
  return T;
}

NullityResult edge_nullity(const EdgeModel& m, double lambda, double eps, const Grid& grid,
                           const NullityOptions& opt) {
  return nullity(assemble(m.spatial(lambda, eps), grid), opt);
}

}  // namespace specflow

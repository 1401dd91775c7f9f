#include "specflow/conslaw.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "specflow/errors.hpp"
#include "specflow/quadrature.hpp"

namespace specflow {

namespace {

double chi_plus(double x) { return 0.5 * (1 + std::tanh(x)); }
double chi_plus_dx(double x) {
  double s = 1 / std::cosh(x);
  return 0.5 * s * s;
}

RVec source_at_zero(const ShockModel& m, double x) {
  RVec z = RVec::Zero(m.n);
  return m.H.eval(x, z, z);
}

// Tolerance on |c| for a vanishing speed.
double zero_speed_tol(const Speeds& s) {
  double scale = 1;
  for (double c : s.c) scale = std::max(scale, std::abs(c));
  return 1e-10 * scale;
}

}  // namespace

PolyFlux PolyFlux::linear(const RMat& J) {
  PolyFlux f;
  f.J = J;
  f.quad = RVec::Zero(J.rows());
  f.cubic = RVec::Zero(J.rows());
  return f;
}

RVec PolyFlux::value(const RVec& u) const {
  RVec v = J * u;
  if (quad.size()) v += quad.cwiseProduct(u.cwiseProduct(u));
  if (cubic.size()) v += cubic.cwiseProduct(u.cwiseProduct(u).cwiseProduct(u));
  return v;
}

RMat PolyFlux::jacobian(const RVec& u) const {
  RMat D = J;
  for (int i = 0; i < u.size(); ++i) {
    if (quad.size()) D(i, i) += 2 * quad(i) * u(i);
    if (cubic.size()) D(i, i) += 3 * cubic(i) * u(i) * u(i);
  }
  return D;
}

Source Source::gaussian(const RVec& amplitude, double center, double width, int power, const RMat& Cu,
                        const RMat& Dux) {
  if (width <= 0) throw ValidationError("source width must be positive");
  const int n = static_cast<int>(amplitude.size());
  RMat C = Cu.size() ? Cu : RMat::Zero(n, n);
  RMat D = Dux.size() ? Dux : RMat::Zero(n, n);
  if (C.rows() != n || C.cols() != n || D.rows() != n || D.cols() != n)
    throw ValidationError("source coupling matrices must be n x n");
  auto g = [=](double x) {
    double y = (x - center) / width;
    return std::pow(x, power) * std::exp(-y * y);
  };
  Source s;
  s.eval = [=](double x, const RVec& u, const RVec& ux) -> RVec { return g(x) * (amplitude + C * u + D * ux); };
  s.jacobian = [=](double x, const RVec&, const RVec&, RMat& HU, RMat& HUx) {
    HU = g(x) * C;
    HUx = g(x) * D;
  };
  s.depends_on_state = C.norm() > 0 || D.norm() > 0;
  // x^p e^{-(x-c)^2/w^2} <= C e^{-|x|} with a generous constant.
  double peak = 0;
  for (int i = -4000; i <= 4000; ++i) {
    double x = center + i * 0.01 * (width + 1);
    peak = std::max(peak, std::abs(g(x)) * std::exp(std::abs(x)));
  }
  s.C = peak * (1 + amplitude.norm() + C.norm() + D.norm());
  s.delta = 1.0;
  std::ostringstream os;
  os << "gaussian(center=" << center << ", width=" << width << ", power=" << power << ")";
  s.description = os.str();
  return s;
}

Source Source::table(std::vector<double> x, std::vector<RVec> values) {
  if (x.size() < 2 || x.size() != values.size()) throw ValidationError("source table needs matching x and values");
  for (size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw ValidationError("source table abscissae must increase");
  const int n = static_cast<int>(values[0].size());
  Source s;
  s.eval = [x, values, n](double t, const RVec&, const RVec&) -> RVec {
    if (t <= x.front() || t >= x.back()) return RVec::Zero(n);
    size_t i = static_cast<size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
    double w = (t - x[i]) / (x[i + 1] - x[i]);
    return (1 - w) * values[i] + w * values[i + 1];
  };
  double vmax = 0;
  for (const auto& v : values) vmax = std::max(vmax, v.lpNorm<Eigen::Infinity>());
  s.delta = 1.0;
  s.C = vmax * std::exp(std::max(std::abs(x.front()), std::abs(x.back())));
  s.description = "table";
  return s;
}

Source Source::zero(int n) {
  Source s;
  s.eval = [n](double, const RVec&, const RVec&) -> RVec { return RVec::Zero(n); };
  s.C = 0;
  s.description = "zero";
  return s;
}

RMat ShockModel::khat0() const {
  if (kernel.empty()) return RMat::Zero(n, n);
  return kernel.transform(0.0, 0, n).real();
}

RMat ShockModel::khat0_derivative() const {
  if (kernel.empty()) return RMat::Zero(n, n);
  return kernel.transform(0.0, 1, n).real();
}

RMat ShockModel::Phi() const { return G.J + khat0() * F.J; }

void ShockModel::validate() const {
  if (n < 1) throw ValidationError("model dimension must be positive");
  if (F.J.rows() != n || F.J.cols() != n || G.J.rows() != n || G.J.cols() != n)
    throw ValidationError("flux Jacobians must be n x n");
  if (!H.eval) throw ValidationError("model has no source");
  Eigen::JacobiSVD<RMat> svd(G.J);
  const auto& s = svd.singularValues();
  if (s(n - 1) <= 1e-12 * std::max(1.0, s(0))) throw SingularMatrix("det dG vanishes");
  // Symmetry of dG and K^(nu) dF on a few axis points.
  if ((G.J - G.J.transpose()).norm() > 1e-10 * (1 + G.J.norm())) throw ValidationError("dG is not symmetric");
  for (double l : {0.0, 0.3, 1.1, 2.7}) {
    Mat P = kernel.empty() ? Mat::Zero(n, n) : Mat(kernel.transform(cplx(0, l), 0, n) * F.J.cast<cplx>());
    if ((P - P.transpose()).norm() > 1e-10 * (1 + P.norm()))
      throw ValidationError("K^(nu) dF is not symmetric");
  }
  // det(dG + K^(il) dF) != 0 for l != 0, sampled.
  for (int k = 1; k <= 4000; ++k) {
    double l = 0.0125 * k;
    Mat P = G.J.cast<cplx>();
    if (!kernel.empty()) P += kernel.transform(cplx(0, l), 0, n) * F.J.cast<cplx>();
    Eigen::JacobiSVD<Mat> sv(P);
    if (sv.singularValues()(n - 1) < 1e-10 * std::max(1.0, sv.singularValues()(0))) {
      std::ostringstream os;
      os << "dG + K^(i l) dF is singular at l = " << l;
      throw GenericityViolated(os.str());
    }
  }
}

Speeds characteristic_speeds(const ShockModel& m) {
  RMat P = m.Phi();
  const int n = m.n;
  Speeds out;
  std::vector<double> lam(n);
  RMat V(n, n);
  if ((P - P.transpose()).norm() <= 1e-12 * (1 + P.norm())) {
    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (P + P.transpose()));
    for (int j = 0; j < n; ++j) lam[j] = es.eigenvalues()(j);
    V = es.eigenvectors();
  } else {
    Eigen::EigenSolver<RMat> es(P);
    for (int j = 0; j < n; ++j) {
      cplx e = es.eigenvalues()(j);
      if (std::abs(e.imag()) > 1e-10 * (1 + std::abs(e))) {
        std::ostringstream os;
        os << "dG + K^(0) dF has eigenvalue " << e.real() << (e.imag() < 0 ? "" : "+") << e.imag() << "i";
        throw NonrealSpectrum(os.str());
      }
      lam[j] = e.real();
      V.col(j) = es.eigenvectors().col(j).real().normalized();
    }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return -lam[a] < -lam[b]; });
  out.e.resize(n, n);
  for (int j = 0; j < n; ++j) {
    out.c.push_back(-lam[order[j]]);
    RVec v = V.col(order[j]);
    Eigen::Index k;
    v.cwiseAbs().maxCoeff(&k);
    if (v(k) < 0) v = -v;
    out.e.col(j) = v;
  }
  for (int j = 1; j < n; ++j)
    if (out.c[j] - out.c[j - 1] <= 1e-10 * (1 + std::abs(out.c[j]))) {
      std::ostringstream os;
      os << "speeds " << out.c[j - 1] << " and " << out.c[j] << " coincide";
      throw RepeatedSpeeds(os.str());
    }
  return out;
}

Symbol linearization_symbol(const ShockModel& m) {
  Symbol S;
  S.n = m.n;
  if (!m.kernel.empty()) {
    RMat Ginv = m.G.J.inverse();
    S.kernel = m.kernel.derivative().left_multiplied((-Ginv).cast<cplx>()).right_multiplied(m.F.J.cast<cplx>());
  }
  double strip = m.eta0;
  if (!m.kernel.empty()) strip = std::min({strip, m.kernel.re_hi(), -m.kernel.re_lo()});
  S.eta = std::min(0.9 * strip, 2.0);
  S.validate();
  return S;
}

int linearization_index(const ShockModel& m, double eta, const FlowOptions& opt) {
  Symbol S = linearization_symbol(m);
  if (!(eta > 0 && eta < S.eta)) {
    std::ostringstream os;
    os << "weight " << eta << " outside (0, " << S.eta << ")";
    throw StripViolation(os.str());
  }
  return weighted_index(S, -eta, eta, opt);
}

RVec jump_leading_order(const ShockModel& m) {
  RMat P = m.Phi();
  Eigen::JacobiSVD<RMat> svd(P);
  const auto& s = svd.singularValues();
  if (s(m.n - 1) <= 1e-12 * std::max(1.0, s(0))) throw SingularMatrix("dG + K^(0) dF is singular");
  RVec I = integrate_line([&](double x) { return source_at_zero(m, x); }, m.H.C, m.H.delta, 1e-11);
  return -P.fullPivLu().solve(I);
}

double zero_speed_constant(const ShockModel& m, int* j0_out, double* pairing_out) {
  Speeds sp = characteristic_speeds(m);
  double tol = zero_speed_tol(sp);
  int j0 = -1, zeros = 0;
  for (int j = 0; j < m.n; ++j)
    if (std::abs(sp.c[j]) <= tol) {
      j0 = j;
      ++zeros;
    }
  if (zeros != 1) throw ValidationError("zero-speed selection needs exactly one vanishing speed");
  RVec e = sp.e.col(j0);
  double pairing = e.dot(m.khat0_derivative() * m.F.J * e);
  if (std::abs(pairing) < 1e-10) throw DegeneracyViolated("<K^'(0) dF e_j0, e_j0> vanishes");
  RVec moment = integrate_line(
      [&](double x) {
        RVec v(1);
        v(0) = x * e.dot(source_at_zero(m, x));
        return v;
      },
      m.H.C * 10, 0.9 * m.H.delta, 1e-11);
  if (j0_out) *j0_out = j0;
  if (pairing_out) *pairing_out = pairing;
  return moment(0) / pairing;
}

namespace {

// Integrated stationary equation
//   K * F(U)(x) + G(U)(x) - [K^(0) F(U_-) + G(U_-)] + eps int_{-inf}^x H = 0
// for U = E a chi_+ + E b chi_- + W on the nodes, plus W = 0 at both ends (and a gauge row
// a_j0 + b_j0 = 0 when b_j0 is free).
class ShockSystem {
 public:
  ShockSystem(const ShockModel& m, const Speeds& sp, const RVec& b, double eps, const ShockOptions& opt, int free_j)
      : m_(m), E_(sp.e), b_(b), eps_(eps), opt_(opt), free_j_(free_j), n_(m.n) {
    N_ = static_cast<int>(std::floor(2 * opt.L / opt.h + 0.5)) + 1;
    h_ = 2 * opt.L / (N_ - 1);
    K0_ = m.khat0();
    if (!m.kernel.empty()) {
      auto [lo, hi] = m.kernel.support(1e-14);
      dmin_ = static_cast<int>(std::floor(lo / h_));
      dmax_ = static_cast<int>(std::ceil(hi / h_));
      for (int d = dmin_; d <= dmax_; ++d) kv_.push_back(m.kernel.value(d * h_, n_).real());
    }
    ksum_ = RMat::Zero(n_, n_);
    for (int d = dmin_; d <= dmax_; ++d)
      if (d != 0 && !kv_.empty()) ksum_ += h_ * kv_[d - dmin_];
  }

  int nodes() const { return N_; }
  double x(int i) const { return -opt_.L + h_ * i; }
  int unknowns() const { return n_ + (free_j_ >= 0 ? 1 : 0) + n_ * N_; }
  int equations() const { return n_ * N_ + 2 * n_ + (free_j_ >= 0 ? 1 : 0); }
  int w_offset() const { return n_ + (free_j_ >= 0 ? 1 : 0); }

  RVec bvec(const RVec& z) const {
    RVec b = b_;
    if (free_j_ >= 0) b(free_j_) = z(n_);
    return b;
  }

  // Ansatz part E a chi_+ + E b chi_- and its x-derivative.
  RVec far(const RVec& Ea, const RVec& Eb, double t) const { return Ea * chi_plus(t) + Eb * (1 - chi_plus(t)); }
  RVec far_dx(const RVec& Ea, const RVec& Eb, double t) const { return (Ea - Eb) * chi_plus_dx(t); }

  struct State {
    std::vector<RVec> U, Ux, FU, H;
    RVec Ea, Eb;
  };

  State state(const RVec& z) const {
    State s;
    s.Ea = E_ * z.head(n_);
    s.Eb = E_ * bvec(z);
    const int off = w_offset();
    s.U.resize(N_);
    s.Ux.resize(N_);
    s.FU.resize(N_);
    s.H.resize(N_);
    for (int i = 0; i < N_; ++i) {
      RVec Wp = i + 1 < N_ ? RVec(z.segment(off + n_ * (i + 1), n_)) : RVec::Zero(n_);
      RVec Wm = i > 0 ? RVec(z.segment(off + n_ * (i - 1), n_)) : RVec::Zero(n_);
      s.U[i] = far(s.Ea, s.Eb, x(i)) + z.segment(off + n_ * i, n_);
      s.Ux[i] = far_dx(s.Ea, s.Eb, x(i)) + (Wp - Wm) / (2 * h_);
      s.FU[i] = m_.F.value(s.U[i]);
      s.H[i] = eps_ == 0 ? RVec::Zero(n_) : RVec(m_.H.eval(x(i), s.U[i], s.Ux[i]));
    }
    return s;
  }

  // F(U) at any node index, including those outside the grid where W = 0.
  RVec flux_at(const State& s, int k) const {
    if (k >= 0 && k < N_) return s.FU[k];
    return m_.F.value(far(s.Ea, s.Eb, x(k)));
  }

  RVec residual(const RVec& z) const { return residual(z, state(z)); }

  RVec residual(const RVec& z, const State& s) const {
    RVec R(equations());
    RVec Qm = K0_ * m_.F.value(s.Eb) + m_.G.value(s.Eb);
    RVec cum = RVec::Zero(n_);
    for (int i = 0; i < N_; ++i) {
      if (i > 0) cum += 0.5 * h_ * (s.H[i - 1] + s.H[i]);
      // Local value subtracted so that constants are convolved exactly.
      RVec conv = K0_ * s.FU[i];
      if (!kv_.empty())
        for (int d = dmin_; d <= dmax_; ++d) {
          if (d == 0) continue;
          conv += h_ * kv_[d - dmin_] * (flux_at(s, i - d) - s.FU[i]);
        }
      R.segment(n_ * i, n_) = conv + m_.G.value(s.U[i]) - Qm + eps_ * cum;
    }
    const int off = w_offset();
    int r = n_ * N_;
    R.segment(r, n_) = z.segment(off, n_);
    R.segment(r + n_, n_) = z.segment(off + n_ * (N_ - 1), n_);
    if (free_j_ >= 0) R(r + 2 * n_) = z(free_j_) + z(n_);
    return R;
  }

  RMat jacobian(const RVec& z) const {
    const int off = w_offset();
    State s = state(z);
    RMat J = RMat::Zero(equations(), unknowns());
    // Far-field coefficients by finite differences.
    for (int c = 0; c < off; ++c) {
      double step = 1e-7 * (1 + std::abs(z(c)));
      RVec zp = z, zm = z;
      zp(c) += step;
      zm(c) -= step;
      J.col(c) = (residual(zp) - residual(zm)) / (2 * step);
    }
    // Convolution and local flux in W.
    std::vector<RMat> JF(N_);
    for (int k = 0; k < N_; ++k) JF[k] = m_.F.jacobian(s.U[k]);
    for (int i = 0; i < N_; ++i) {
      RMat diag = (K0_ - ksum_) * JF[i] + m_.G.jacobian(s.U[i]);
      J.block(n_ * i, off + n_ * i, n_, n_) += diag;
      if (kv_.empty()) continue;
      for (int d = dmin_; d <= dmax_; ++d) {
        int k = i - d;
        if (d == 0 || k < 0 || k >= N_) continue;
        J.block(n_ * i, off + n_ * k, n_, n_) += h_ * kv_[d - dmin_] * JF[k];
      }
    }
    // Source dependence on W through the cumulative trapezoid sum.
    if (eps_ != 0 && m_.H.depends_on_state) {
      RMat dH = RMat::Zero(n_ * N_, n_ * N_);  // d H_m / d W_k
      for (int i = 0; i < N_; ++i) {
        RMat HU, HUx;
        source_jacobian(x(i), s.U[i], s.Ux[i], HU, HUx);
        dH.block(n_ * i, n_ * i, n_, n_) += HU;
        if (i + 1 < N_) dH.block(n_ * i, n_ * (i + 1), n_, n_) += HUx / (2 * h_);
        if (i > 0) dH.block(n_ * i, n_ * (i - 1), n_, n_) -= HUx / (2 * h_);
      }
      RMat acc = RMat::Zero(n_, n_ * N_);
      for (int i = 1; i < N_; ++i) {
        acc += 0.5 * h_ * (dH.middleRows(n_ * (i - 1), n_) + dH.middleRows(n_ * i, n_));
        J.block(n_ * i, off, n_, n_ * N_) += eps_ * acc;
      }
    }
    int r = n_ * N_;
    for (int c = 0; c < n_; ++c) {
      J(r + c, off + c) = 1;
      J(r + n_ + c, off + n_ * (N_ - 1) + c) = 1;
    }
    if (free_j_ >= 0) {
      J(r + 2 * n_, free_j_) = 1;
      J(r + 2 * n_, n_) = 1;
    }
    return J;
  }

  void source_jacobian(double t, const RVec& u, const RVec& ux, RMat& HU, RMat& HUx) const {
    if (m_.H.jacobian) {
      m_.H.jacobian(t, u, ux, HU, HUx);
      return;
    }
    HU.resize(n_, n_);
    HUx.resize(n_, n_);
    for (int c = 0; c < n_; ++c) {
      double e = 1e-7 * (1 + std::abs(u(c)));
      RVec up = u, um = u;
      up(c) += e;
      um(c) -= e;
      HU.col(c) = (m_.H.eval(t, up, ux) - m_.H.eval(t, um, ux)) / (2 * e);
      e = 1e-7 * (1 + std::abs(ux(c)));
      RVec vp = ux, vm = ux;
      vp(c) += e;
      vm(c) -= e;
      HUx.col(c) = (m_.H.eval(t, u, vp) - m_.H.eval(t, u, vm)) / (2 * e);
    }
  }

 private:
  const ShockModel& m_;
  RMat E_;
  RVec b_;
  double eps_;
  ShockOptions opt_;
  int free_j_;
  int n_;
  int N_ = 0;
  double h_ = 0;
  RMat K0_;
  int dmin_ = 0, dmax_ = 0;
  std::vector<RMat> kv_;   // K(d h), d = dmin..dmax
  RMat ksum_;               // h sum_{d != 0} K(d h)
};

ShockSolution solve_system(const ShockSystem& sys, RVec z, const ShockModel& m, const ShockOptions& opt) {
  const int n = m.n;
  RVec R = sys.residual(z);
  double rn = R.lpNorm<Eigen::Infinity>();
  auto scale_of = [&](const RVec& zz) { return 1 + zz.lpNorm<Eigen::Infinity>(); };

  Eigen::HouseholderQR<RMat> qr;
  bool have_factor = false;
  int it = 0;
  for (; it < opt.max_iterations && rn > opt.tol * scale_of(z); ++it) {
    if (!have_factor) {
      RMat J = sys.jacobian(z);
      qr.compute(J);
      const RMat& T = qr.matrixQR();
      double dmax = T.diagonal().cwiseAbs().maxCoeff();
      double dmin = T.diagonal().cwiseAbs().minCoeff();
      if (!(dmin > 1e-13 * dmax)) {
        std::ostringstream os;
        os << "linearization is not injective (pivot ratio " << dmin / dmax << ")";
        throw IndexMismatch(os.str());
      }
      have_factor = true;
    }
    RVec dz = -qr.solve(R);
    double t = 1;
    RVec zn, Rn;
    double rnn = 0;
    int halvings = 0;
    for (;; ++halvings) {
      zn = z + t * dz;
      Rn = sys.residual(zn);
      rnn = Rn.lpNorm<Eigen::Infinity>();
      if (rnn < rn || rnn <= opt.tol * scale_of(zn)) break;
      if (halvings >= opt.max_halvings) break;
      t *= 0.5;
    }
    if (!(rnn < rn) && !(rnn <= opt.tol * scale_of(zn))) {
      if (have_factor && it > 0) {
        // A stale factorization may be the cause; refresh once before giving up.
        have_factor = false;
        RMat J = sys.jacobian(z);
        qr.compute(J);
        have_factor = true;
        dz = -qr.solve(R);
        zn = z + dz;
        Rn = sys.residual(zn);
        rnn = Rn.lpNorm<Eigen::Infinity>();
      }
      if (!(rnn < rn)) {
        std::ostringstream os;
        os << "Newton stalled at residual " << rn << " after " << it << " iterations";
        throw NewtonDiverged(os.str());
      }
    }
    // Keep the chord factorization while it contracts well.
    if (rnn > 0.1 * rn || halvings > 0) have_factor = false;
    z = zn;
    R = Rn;
    rn = rnn;
  }
  if (rn > opt.tol * scale_of(z)) {
    std::ostringstream os;
    os << "Newton did not converge in " << opt.max_iterations << " iterations (residual " << rn << ")";
    throw NewtonDiverged(os.str());
  }

  ShockSolution out;
  out.iterations = it;
  out.residual = rn;
  out.a = z.head(n);
  out.b = sys.bvec(z);
  auto st = sys.state(z);
  const int off = sys.w_offset();
  const int N = sys.nodes();
  double wall = 0, wtail = 0;
  for (int i = 0; i < N; ++i) {
    out.x.push_back(sys.x(i));
    out.U.push_back(st.U[i]);
    RVec w = z.segment(off + n * i, n);
    out.W.push_back(w);
    wall += w.squaredNorm();
    if (std::abs(sys.x(i)) > 0.5 * opt.L) wtail += w.squaredNorm();
  }
  out.tail_ratio = wall > 0 ? std::sqrt(wtail / wall) : 0.0;
  double h = 2 * opt.L / (N - 1);
  for (int i = 1; i + 1 < N; ++i) {
    RVec d = (R.segment(n * (i + 1), n) - R.segment(n * (i - 1), n)) / (2 * h);
    out.profile_residual = std::max(out.profile_residual, d.lpNorm<Eigen::Infinity>());
  }
  return out;
}

void check_eps(const ShockModel& m, double eps) {
  if (!(std::abs(eps) <= m.eps_max)) {
    std::ostringstream os;
    os << "|eps| = " << std::abs(eps) << " exceeds eps_max = " << m.eps_max;
    throw ValidationError(os.str());
  }
}

}  // namespace

ShockSolution shock_profile(const ShockModel& m, const RVec& b, double eps, const ShockOptions& opt) {
  m.validate();
  check_eps(m, eps);
  if (b.size() != m.n) throw ValidationError("b has the wrong dimension");
  Speeds sp = characteristic_speeds(m);
  double tol = zero_speed_tol(sp);
  for (double c : sp.c)
    if (std::abs(c) <= tol) throw ValidationError("shock_profile needs nonzero speeds; use zero_speed_selection");
  ShockSystem sys(m, sp, b, eps, opt, -1);
  RVec z = RVec::Zero(sys.unknowns());
  RVec jump = eps == 0 ? RVec::Zero(m.n) : RVec(eps * jump_leading_order(m));
  z.head(m.n) = b + sp.e.transpose() * jump;
  return solve_system(sys, z, m, opt);
}

ZeroSpeedResult zero_speed_selection(const ShockModel& m, const RVec& b, double eps, const ShockOptions& opt) {
  m.validate();
  check_eps(m, eps);
  if (b.size() != m.n) throw ValidationError("b has the wrong dimension");
  ZeroSpeedResult out;
  out.M = zero_speed_constant(m, &out.j0, &out.pairing);
  Speeds sp = characteristic_speeds(m);
  ShockSystem sys(m, sp, b, eps, opt, out.j0);
  RVec z = RVec::Zero(sys.unknowns());
  // Leading-order jumps along the transported directions.
  RVec I = integrate_line([&](double x) { return source_at_zero(m, x); }, m.H.C, m.H.delta, 1e-11);
  z.head(m.n) = b;
  for (int j = 0; j < m.n; ++j)
    if (j != out.j0) z(j) += eps * sp.e.col(j).dot(I) / sp.c[j];
  z(out.j0) = 0.5 * out.M * eps;
  z(m.n) = -0.5 * out.M * eps;
  out.solution = solve_system(sys, z, m, opt);
  out.a_j0 = out.solution.a(out.j0);
  out.b_j0 = out.solution.b(out.j0);
  return out;
}

}  // namespace specflow

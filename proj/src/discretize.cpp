#include "specflow/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "specflow/errors.hpp"

namespace specflow {

namespace {

double smoothstep(double x) {
  if (x <= -1) return 0.0;
  if (x >= 1) return 1.0;
  double t = 0.5 * (x + 1);
  return t * t * t * (10 - 15 * t + 6 * t * t);
}

double kernel_radius(const Kernel& K, double tol) {
  if (K.empty()) return 0.0;
  auto [lo, hi] = K.support(tol);
  return std::max(std::abs(lo), std::abs(hi));
}

// Second-order first-derivative matrix for one component, one-sided at the ends.
void add_derivative(Mat& A, int N, int n, double h, double sign) {
  const double c = sign / (2 * h);
  for (int comp = 0; comp < n; ++comp) {
    auto idx = [&](int i) { return i * n + comp; };
    A(idx(0), idx(0)) += -3 * c;
    A(idx(0), idx(1)) += 4 * c;
    A(idx(0), idx(2)) += -c;
    for (int i = 1; i < N - 1; ++i) {
      A(idx(i), idx(i + 1)) += c;
      A(idx(i), idx(i - 1)) -= c;
    }
    A(idx(N - 1), idx(N - 1)) += 3 * c;
    A(idx(N - 1), idx(N - 2)) += -4 * c;
    A(idx(N - 1), idx(N - 3)) += c;
  }
}

void add_block(Mat& A, int n, int i, int k, const Mat& B) { A.block(i * n, k * n, n, n) += B; }

// Nonlocal part N (convolution plus shifts), unweighted, so that T = D - N.
Mat nonlocal_matrix(const SpatialOperator& T, const Grid& g, double tail_tol, double* width) {
  const int N = g.size();
  const int n = T.n;
  const double h = g.h;
  Mat C0 = Mat::Zero(n * N, n * N);
  Mat C1 = Mat::Zero(n * N, n * N);
  bool any_derivative = false;

  std::vector<Symbol> symbols;
  if (T.constant) {
    symbols.push_back(T.at(0.0));
  } else {
    symbols.reserve(N);
    for (int i = 0; i < N; ++i) symbols.push_back(T.at(g.node(i)));
  }
  auto sym = [&](int i) -> const Symbol& { return T.constant ? symbols[0] : symbols[i]; };

  *width = 0;
  for (const auto& s : symbols) {
    if (s.n != n) throw ValidationError("operator dimension changes along the grid");
    for (const auto& sh : s.shifts) {
      if (sh.xi != 0 && g.h > 0.5 * std::abs(sh.xi)) {
        std::ostringstream os;
        os << "grid step " << g.h << " does not resolve shift " << sh.xi;
        throw GridTooCoarse(os.str());
      }
    }
    for (const auto& t : s.kernel.terms()) {
      if (t.dorder > 1) throw ValidationError("kernels with more than one derivative cannot be assembled");
      if (t.dorder == 1) any_derivative = true;
    }
    double r = kernel_radius(s.kernel, tail_tol);
    *width = std::max(*width, r);
    if (T.constant) break;
  }
  if (*width > g.L) {
    std::ostringstream os;
    os << "kernel support " << *width << " exceeds grid half-width " << g.L;
    throw TailUnresolved(os.str());
  }

  auto quad = [&](int k) { return (k == 0 || k == N - 1) ? 0.5 * h : h; };
  const int lag_max = std::min(N - 1, static_cast<int>(std::ceil(*width / h)) + 1);

  // Per-term pointwise values e^{o z} M g(z); derivative terms enter as C_f D - o C_f.
  auto add_conv = [&](int i, const Symbol& s, const std::vector<Mat>* table) {
    for (int k = std::max(0, i - lag_max); k <= std::min(N - 1, i + lag_max); ++k) {
      double z = g.node(i) - g.node(k);
      if (table) {
        const Mat& v0 = table[0][i - k + lag_max];
        const Mat& v1 = table[1][i - k + lag_max];
        add_block(C0, n, i, k, quad(k) * v0);
        if (any_derivative) add_block(C1, n, i, k, quad(k) * v1);
        continue;
      }
      for (const auto& t : s.kernel.terms()) {
        KernelTerm base = t;
        base.dorder = 0;
        Mat v = base.value(z);
        if (t.dorder == 0) {
          add_block(C0, n, i, k, quad(k) * v);
        } else {
          add_block(C1, n, i, k, quad(k) * v);
          add_block(C0, n, i, k, (-t.offset * quad(k)) * v);
        }
      }
    }
  };

  if (T.constant) {
    const Symbol& s = symbols[0];
    std::vector<Mat> tab[2];
    for (int l = -lag_max; l <= lag_max; ++l) {
      Mat v0 = Mat::Zero(n, n), v1 = Mat::Zero(n, n);
      for (const auto& t : s.kernel.terms()) {
        KernelTerm base = t;
        base.dorder = 0;
        Mat v = base.value(l * h);
        if (t.dorder == 0) {
          v0 += v;
        } else {
          v1 += v;
          v0 -= t.offset * v;
        }
      }
      tab[0].push_back(v0);
      tab[1].push_back(v1);
    }
    if (!s.kernel.empty())
      for (int i = 0; i < N; ++i) add_conv(i, s, tab);
  } else {
    for (int i = 0; i < N; ++i)
      if (!sym(i).kernel.empty()) add_conv(i, sym(i), nullptr);
  }

  Mat Nm = C0;
  if (any_derivative) {
    Mat D = Mat::Zero(n * N, n * N);
    add_derivative(D, N, n, h, 1.0);
    Nm += C1 * D;
  }

  for (int i = 0; i < N; ++i) {
    for (const auto& sh : sym(i).shifts) {
      double x = (g.node(i) - sh.xi + g.L) / h;
      if (x < -1e-9 || x > N - 1 + 1e-9) continue;
      x = std::clamp(x, 0.0, static_cast<double>(N - 1));
      int k = std::min(static_cast<int>(std::floor(x)), N - 2);
      double t = x - k;
      if (t < 1e-12) {
        add_block(Nm, n, i, k, sh.A);
      } else if (t > 1 - 1e-12) {
        add_block(Nm, n, i, k + 1, sh.A);
      } else {
        add_block(Nm, n, i, k, (1 - t) * sh.A);
        add_block(Nm, n, i, k + 1, t * sh.A);
      }
    }
  }
  return Nm;
}

void conjugate_by_weight(Mat& A, const Grid& g, int n, double sign) {
  const int N = g.size();
  std::vector<double> e(N);
  for (int i = 0; i < N; ++i) {
    double xi = g.node(i);
    e[i] = sign * g.weight_exponent(xi) * std::sqrt(xi * xi + 1);
  }
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k) {
      double f = std::exp(e[i] - e[k]);
      if (f != 1.0) A.block(i * n, k * n, n, n) *= f;
    }
}

template <class MatT>
std::vector<double> singular_values(const MatT& A) {
  Eigen::BDCSVD<MatT> svd(A);
  auto s = svd.singularValues();
  std::vector<double> v(s.data(), s.data() + s.size());
  std::sort(v.begin(), v.end());
  return v;
}

// Orthonormal basis for the k-dimensional near-null space by inverse subspace iteration, with
// the shift kept well below the first retained singular value sigma_keep.
template <class MatT>
MatT near_null_basis(const MatT& A, int k, double sigma_max, double sigma_keep) {
  using Scalar = typename MatT::Scalar;
  const int m = static_cast<int>(A.rows());
  const double shift = std::max(1e-13 * sigma_max, 1e-6 * sigma_keep);
  MatT R = A + MatT::Identity(m, m) * Scalar(shift);
  Eigen::PartialPivLU<MatT> lu(R);
  std::mt19937 rng(12345);
  std::normal_distribution<double> nd;
  MatT X(m, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < m; ++i) X(i, j) = Scalar(nd(rng));
  for (int it = 0; it < 4; ++it) {
    MatT Y = lu.adjoint().solve(X);
    Y = lu.solve(Y);
    Eigen::HouseholderQR<MatT> qr(Y);
    X = qr.householderQ() * MatT::Identity(m, k);
  }
  if (!X.allFinite()) {
    Eigen::BDCSVD<MatT> svd(A, Eigen::ComputeThinV);
    X = svd.matrixV().rightCols(k);
  }
  return X;
}

// Orthonormal basis of the column space of B with relative rank tolerance.
Mat orth(const Mat& B, double rtol) {
  if (B.cols() == 0) return Mat(B.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeThinU);
  auto s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > rtol * std::max(s(0), 1e-300)) ++r;
  return svd.matrixU().leftCols(r);
}

// Coefficient subspace whose functions decay in the given direction over a window.
Mat decaying_subspace(const Mat& X, int n, int i0, int i1, int s, bool to_right) {
  const int k = static_cast<int>(X.cols());
  const int rows = (i1 - s - i0 + 1) * n;
  Mat X1(rows, k), X2(rows, k);
  for (int i = i0; i + s <= i1; ++i) {
    X1.middleRows((i - i0) * n, n) = X.middleRows(i * n, n);
    X2.middleRows((i - i0) * n, n) = X.middleRows((i + s) * n, n);
  }
  Eigen::JacobiSVD<Mat> svd(X1, Eigen::ComputeThinU | Eigen::ComputeThinV);
  auto sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > std::max(1e-8, 1e-10 * sv(0))) ++r;
  Mat V = svd.matrixV();
  Mat basis(k, 0);
  if (r > 0) {
    Mat Vr = V.leftCols(r);
    Mat G = sv.head(r).cwiseInverse().asDiagonal() * (svd.matrixU().leftCols(r).adjoint() * X2 * Vr);
    Eigen::ComplexEigenSolver<Mat> es(G, false);
    Mat P = Mat::Identity(r, r);
    double scale = 1.0;
    const double gnorm = G.norm();
    for (int j = 0; j < r; ++j) {
      double a = std::abs(es.eigenvalues()(j));
      bool decays = to_right ? a < 1.0 : a > 1.0;
      if (!decays) {
        P = (G - es.eigenvalues()(j) * Mat::Identity(r, r)) * P;
        scale *= gnorm + a;
      }
    }
    // Rank threshold against the size of the factors, not of P: with a repeated growing
    // eigenvalue P is pure rounding.
    Eigen::JacobiSVD<Mat> psvd(P, Eigen::ComputeThinU);
    int q = 0;
    for (int i = 0; i < psvd.singularValues().size(); ++i)
      if (psvd.singularValues()(i) > 1e-6 * scale) ++q;
    basis = Vr * psvd.matrixU().leftCols(q);
  }
  if (r < k) {
    Mat b2(k, basis.cols() + (k - r));
    b2 << basis, V.rightCols(k - r);
    basis = b2;
  }
  return orth(basis, 1e-10);
}

// Combinations of the columns of X (orthonormal, node-major) whose node-to-node differences
// are small: central differences admit odd-even modes (-1)^i g(xi) that are near-null but not
// approximations of any continuous kernel element.
Mat smooth_subspace(const Mat& X, int n) {
  const int k = static_cast<int>(X.cols());
  const int rows = static_cast<int>(X.rows()) - n;
  Mat D = X.bottomRows(rows) - X.topRows(rows);
  Eigen::SelfAdjointEigenSolver<Mat> es(D.adjoint() * D);
  int q = 0;
  for (int j = 0; j < k; ++j)
    if (es.eigenvalues()(j) < 1.0) ++q;  // ascending; odd-even modes sit near 4
  return X * es.eigenvectors().leftCols(q);
}

}  // namespace

SpatialOperator SpatialOperator::constant_symbol(const Symbol& S) {
  S.validate();
  SpatialOperator T;
  T.n = S.n;
  T.constant = true;
  T.at = [S](double) { return S; };
  return T;
}

SpatialOperator SpatialOperator::from_family(const OperatorFamily& F) {
  SpatialOperator T;
  T.n = F.dimension();
  T.at = [F](double xi) { return F.at(std::clamp(xi, F.rho_min(), F.rho_max())); };
  return T;
}

int Grid::size() const {
  if (!(L > 0) || !(h > 0)) throw ValidationError("grid needs L > 0 and h > 0");
  double m = 2 * L / h;
  int N = static_cast<int>(std::lround(m)) + 1;
  if (std::abs(m - std::round(m)) > 1e-8 * m) throw ValidationError("2L/h must be an integer");
  if (N < 5) throw ValidationError("grid needs at least 5 nodes");
  return N;
}

double Grid::weight_exponent(double xi) const {
  double t = smoothstep(xi);
  return (1 - t) * (-gamma_minus) + t * gamma_plus;
}

std::vector<int> GridOperator::interior_nodes(double margin) const {
  std::vector<int> out;
  for (int i = 0; i < nodes(); ++i)
    if (std::abs(grid.node(i)) <= grid.L - margin + 1e-12) out.push_back(i);
  return out;
}

GridOperator assemble(const SpatialOperator& T, const Grid& grid, const AssembleOptions& opt) {
  const int N = grid.size();
  const int n = T.n;
  GridOperator G;
  G.grid = grid;
  G.n = n;
  Mat Nm = nonlocal_matrix(T, grid, opt.tail_tol, &G.kernel_width);
  Mat A = Mat::Zero(n * N, n * N);
  if (!opt.adjoint) {
    add_derivative(A, N, n, grid.h, 1.0);
    A -= Nm;
    conjugate_by_weight(A, grid, n, 1.0);
    G.provenance = "forward";
  } else {
    add_derivative(A, N, n, grid.h, -1.0);
    A -= Nm.adjoint();
    conjugate_by_weight(A, grid, n, -1.0);
    G.provenance = "adjoint";
  }
  G.M = std::move(A);
  return G;
}

GridOperator assemble_adjoint(const SpatialOperator& T, const Grid& grid) {
  AssembleOptions o;
  o.adjoint = true;
  return assemble(T, grid, o);
}

Vec apply(const GridOperator& G, const Vec& u) { return G.M * u; }

Vec sample(const Grid& g, int n, const std::function<Vec(double)>& f) {
  const int N = g.size();
  Vec u(n * N);
  for (int i = 0; i < N; ++i) u.segment(i * n, n) = f(g.node(i));
  return u;
}

namespace {

struct GapSplit {
  int k = 0;
  double gap = 0;
  bool reliable = true;
};

// s ascending.
GapSplit gap_split(const std::vector<double>& s, const NullityOptions& opt) {
  const int m = static_cast<int>(s.size());
  const double smax = s.back();
  // Values at rounding level are all exact zeros; a ratio between two of them is no gap.
  const double floor = 1e-13 * smax;
  double best = 0;
  int k = 0;
  for (int j = 0; j < m / 2; ++j) {
    double ratio = std::max(s[j + 1], floor) / std::max(s[j], floor);
    if (ratio > best) {
      best = ratio;
      k = j + 1;
    }
  }
  GapSplit g;
  if (best >= opt.tol_ratio) {
    g.k = k;
    g.gap = best;
  } else if (s[0] >= opt.zero_floor * smax) {
    g.gap = std::numeric_limits<double>::infinity();
  } else {
    g.k = k;
    g.gap = best;
    g.reliable = false;
  }
  return g;
}

}  // namespace

NullityResult nullity(const GridOperator& G, const NullityOptions& opt) {
  NullityResult R;
  const bool real = G.M.imag().cwiseAbs().maxCoeff() == 0.0;
  RMat Mr;
  if (real) {
    Mr = G.M.real();
    R.singulars = singular_values(Mr);
  } else {
    R.singulars = singular_values(G.M);
  }
  const auto& s = R.singulars;
  const int m = static_cast<int>(s.size());
  const double smax = s.back();

  const GapSplit split = gap_split(s, opt);
  R.raw_dim = split.k;
  R.gap = split.gap;
  R.reliable = split.reliable;
  if (R.raw_dim == 0) {
    R.null_vectors = Mat(m, 0);
    R.genuine_vectors = Mat(m, 0);
    return R;
  }

  if (real) {
    R.null_vectors = near_null_basis(Mr, R.raw_dim, smax, s[R.raw_dim]).cast<cplx>();
  } else {
    R.null_vectors = near_null_basis(G.M, R.raw_dim, smax, s[R.raw_dim]);
  }

  // Classify near-null vectors by their decay into the two far fields.
  const Grid& g = G.grid;
  const int N = g.size();
  const double w = G.kernel_width;
  double lo = 1.0 + 0.5 * w + 1.0;
  double hi = g.L - 2.0 * w - 1.0;
  if (hi - lo < 3 * g.h * 4) {
    R.dim = R.raw_dim;
    R.reliable = false;
    R.genuine_vectors = R.null_vectors;
    return R;
  }
  Mat X = smooth_subspace(R.null_vectors, G.n);
  if (X.cols() == 0) {
    R.dim = 0;
    R.genuine_vectors = Mat(m, 0);
    return R;
  }
  double tau = std::min(opt.prony_shift, (hi - lo) / 3.0);
  int s_nodes = std::max(1, static_cast<int>(std::lround(tau / g.h)));
  auto node_of = [&](double xi) { return std::clamp(static_cast<int>(std::lround((xi + g.L) / g.h)), 0, N - 1); };
  Mat Rp = decaying_subspace(X, G.n, node_of(lo), node_of(hi), s_nodes, true);
  Mat Rm = decaying_subspace(X, G.n, node_of(-hi), node_of(-lo), s_nodes, false);
  if (Rp.cols() == 0 || Rm.cols() == 0) {
    R.dim = 0;
    R.genuine_vectors = Mat(m, 0);
    return R;
  }
  Eigen::JacobiSVD<Mat> svd(Rp.adjoint() * Rm, Eigen::ComputeThinU);
  auto c = svd.singularValues();
  int d = 0;
  for (int i = 0; i < c.size(); ++i)
    if (c(i) > 1.0 - opt.intersection_tol) ++d;
  if (d == 0) {
    R.dim = 0;
    R.genuine_vectors = Mat(m, 0);
    return R;
  }
  Mat Y = X * (Rp * svd.matrixU().leftCols(d));
  // Layers at the two ends vanish in both windows as well; a kernel element lives in the core.
  const int c0 = node_of(-0.5 * g.L), c1 = node_of(0.5 * g.L);
  Mat Yc = Y.middleRows(c0 * G.n, (c1 - c0 + 1) * G.n);
  Eigen::SelfAdjointEigenSolver<Mat> core(Yc.adjoint() * Yc);
  int q = 0;
  for (int j = 0; j < d; ++j)
    if (core.eigenvalues()(j) >= opt.core_fraction) ++q;
  R.dim = q;
  R.genuine_vectors = Y * core.eigenvectors().rightCols(q);
  return R;
}

IndexEstimate index_estimate(const SpatialOperator& T, Grid grid, double gamma_minus, double gamma_plus,
                             const NullityOptions& opt) {
  grid.gamma_minus = gamma_minus;
  grid.gamma_plus = gamma_plus;
  IndexEstimate E;
  E.forward = nullity(assemble(T, grid), opt);
  E.adjoint = nullity(assemble_adjoint(T, grid), opt);
  E.index = E.forward.dim - E.adjoint.dim;
  E.reliable = E.forward.reliable && E.adjoint.reliable;
  return E;
}

SolveResult solve_inhomogeneous(const GridOperator& G, const Vec& H, const NullityOptions& opt) {
  // The first and last nodes are pinned to zero in the least-squares sense: a solution in the
  // weighted space is negligible there, and without the pinning the truncated interval lets
  // growing modes absorb forcing that has a component along the cokernel.
  const int n = G.n, rows = static_cast<int>(G.M.rows()), cols = static_cast<int>(G.M.cols());
  const double pin = G.M.cwiseAbs().rowwise().sum().maxCoeff();
  Mat A = Mat::Zero(rows + 2 * n, cols);
  A.topRows(rows) = G.M;
  for (int c = 0; c < n; ++c) {
    A(rows + c, c) = pin;
    A(rows + n + c, cols - n + c) = pin;
  }
  Vec rhs = Vec::Zero(rows + 2 * n);
  rhs.head(rows) = H;

  Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const int m = static_cast<int>(sv.size());
  std::vector<double> asc(sv.data(), sv.data() + m);
  std::reverse(asc.begin(), asc.end());
  const int keep = m - gap_split(asc, opt).k;

  Vec coef = svd.matrixU().leftCols(keep).adjoint() * rhs;
  for (int i = 0; i < keep; ++i) coef(i) /= sv(i);
  SolveResult r;
  r.u = svd.matrixV().leftCols(keep) * coef;
  r.dropped = m - keep;
  double hn = H.norm();
  double res = (A * r.u - rhs).norm();
  r.residual = hn > 0 ? res / hn : res;
  return r;
}

}  // namespace specflow

#include "netsynth/numlin.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace netsynth {
namespace numlin {

SymMat::SymMat(const Mat& m) {
  require(m.rows() == m.cols(), "SymMat: matrix must be square");
  const double asym = (m - m.transpose()).norm();
  require(asym <= 1e-12 * (1.0 + m.norm()),
          "SymMat: input is not symmetric within tolerance");
  m_ = 0.5 * (m + m.transpose());
}

BlockPartition::BlockPartition(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  offsets_.reserve(sizes_.size());
  for (int s : sizes_) {
    require(s > 0, "BlockPartition: block sizes must be positive");
    offsets_.push_back(total_);
    total_ += s;
  }
}

std::vector<std::complex<double>> eigvals(const Mat& m) {
  require(m.rows() == m.cols(), "eigvals: matrix must be square");
  if (m.rows() == 0) return {};
  Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> out(m.rows());
  for (int i = 0; i < m.rows(); ++i) out[i] = es.eigenvalues()(i);
  return out;
}

double eig_max(const SymMat& m) {
  if (m.dim() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Mat> es(m.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double eig_max_sym(const Mat& m) {
  require(m.rows() == m.cols(), "eig_max_sym: matrix must be square");
  if (m.rows() == 0) return -std::numeric_limits<double>::infinity();
  Mat s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

bool is_negdef(const SymMat& m, double margin) {
  require(margin >= 0.0, "is_negdef: margin must be nonnegative");
  return eig_max(m) < -margin;
}

bool is_negdef(const Mat& m, double margin) {
  require(margin >= 0.0, "is_negdef: margin must be nonnegative");
  return eig_max_sym(m) < -margin;
}

bool is_hurwitz(const Mat& a, double margin) {
  for (const auto& ev : eigvals(a))
    if (ev.real() >= -margin) return false;
  return true;
}

Mat lyap_solve(const Mat& a, const Mat& q) {
  require(a.rows() == a.cols() && q.rows() == q.cols() && a.rows() == q.rows(),
          "lyap_solve: dimension mismatch");
  const int n = static_cast<int>(a.rows());
  if (n == 0) return Mat::Zero(0, 0);
  using CMat = Eigen::MatrixXcd;
  Eigen::ComplexSchur<Mat> schur(a);
  const CMat t = schur.matrixT();  // upper triangular
  const CMat u = schur.matrixU();
  // a = u t u*; solve t* y + y t = -u* q u column by column (t upper tri).
  CMat qt = u.adjoint() * q.cast<std::complex<double>>() * u;
  CMat y = CMat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    // (t* y)(:,k) + (y t)(:,k) = -qt(:,k)
    // t* y(:,k) + y(:,0:k) t(0:k,k) = -qt(:,k)
    Eigen::VectorXcd rhs = -qt.col(k);
    for (int j = 0; j < k; ++j) rhs -= y.col(j) * t(j, k);
    CMat lhs = t.adjoint() + t(k, k) * CMat::Identity(n, n);
    double pivot_scale = lhs.norm();
    require(pivot_scale > 0 && lhs.fullPivLu().isInvertible(),
            "lyap_solve: eigenvalue pairing makes the equation singular");
    y.col(k) = lhs.fullPivLu().solve(rhs);
  }
  CMat x = u * y * u.adjoint();
  return 0.5 * (x.real() + x.real().transpose());
}

SymMat care_solve(const Mat& a, const Mat& b, const Mat& qw, const Mat& rw) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.cols());
  require(a.rows() == a.cols(), "care_solve: A must be square");
  require(b.rows() == n, "care_solve: B row mismatch");
  require(qw.rows() == n && qw.cols() == n, "care_solve: Qw dimension mismatch");
  require(rw.rows() == m && rw.cols() == m, "care_solve: Rw dimension mismatch");

  Eigen::LLT<Mat> rw_llt(rw);
  require(rw_llt.info() == Eigen::Success, "care_solve: Rw must be positive definite");
  const Mat g = b * rw_llt.solve(b.transpose());  // B inv(Rw) B'

  // Hamiltonian [A, -G; -Qw, -A'], stable invariant subspace.
  Mat ham(2 * n, 2 * n);
  ham << a, -g, -qw, -a.transpose();
  Eigen::EigenSolver<Mat> es(ham);
  std::vector<int> stable;
  for (int i = 0; i < 2 * n; ++i) {
    const double re = es.eigenvalues()(i).real();
    if (std::abs(re) <= 1e-9 * (1.0 + std::abs(es.eigenvalues()(i))))
      throw std::invalid_argument(
          "care_solve: Hamiltonian has imaginary-axis eigenvalues; no "
          "stabilizing solution");
    if (re < 0) stable.push_back(i);
  }
  require(static_cast<int>(stable.size()) == n,
          "care_solve: stable subspace has wrong dimension");

  Eigen::MatrixXcd v(2 * n, n);
  for (int k = 0; k < n; ++k) v.col(k) = es.eigenvectors().col(stable[k]);
  Eigen::MatrixXcd v1 = v.topRows(n), v2 = v.bottomRows(n);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(v1);
  require(lu.isInvertible(), "care_solve: (A,B) appears unstabilizable");
  Mat x = (v2 * lu.inverse()).real();
  x = 0.5 * (x + x.transpose());

  // Newton-Kleinman refinement: quadratic cleanup of the eigenvector solution.
  for (int it = 0; it < 6; ++it) {
    Mat acl = a - g * x;
    Mat resid = a.transpose() * x + x * a - x * g * x + qw;
    if (resid.norm() <= 1e-12 * (1.0 + x.norm())) break;
    Mat xn = lyap_solve(acl, qw + x * g * x);
    xn = 0.5 * (xn + xn.transpose());
    if ((xn - x).norm() <= 1e-14 * (1.0 + x.norm())) { x = xn; break; }
    x = xn;
  }

  const Mat resid = a.transpose() * x + x * a - x * g * x + qw;
  require(resid.norm() <= 1e-8 * (1.0 + x.norm()),
          "care_solve: residual too large");
  require(is_hurwitz(a - g * x), "care_solve: closed loop not Hurwitz");
  return SymMat(x);
}

namespace {

double sigma_max(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

// True iff the bounded-real Hamiltonian for level gamma has an eigenvalue on
// the imaginary axis, meaning gamma <= ||G||_inf.
bool gamma_not_above_norm(const Mat& a, const Mat& b, const Mat& c, const Mat& d,
                          double gamma) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.cols());
  Mat r = gamma * gamma * Mat::Identity(m, m) - d.transpose() * d;
  Eigen::LLT<Mat> r_llt(r);
  if (r_llt.info() != Eigen::Success) return true;  // gamma <= sigma_max(D)
  Mat rinv_bt = r_llt.solve(b.transpose());
  Mat rinv_dt_c = r_llt.solve(d.transpose() * c);
  Mat ham(2 * n, 2 * n);
  ham << a + b * rinv_dt_c, b * rinv_bt,
      -c.transpose() * (Mat::Identity(c.rows(), c.rows()) + d * r_llt.solve(d.transpose())) * c,
      -(a + b * rinv_dt_c).transpose();
  const auto evs = eigvals(ham);
  double scale = 0.0;
  for (const auto& ev : evs) scale = std::max(scale, std::abs(ev));
  for (const auto& ev : evs)
    if (std::abs(ev.real()) <= 1e-9 * (1.0 + scale)) return true;
  return false;
}

}  // namespace

double hinf_norm(const Mat& a, const Mat& b, const Mat& c, const Mat& d,
                 double tol) {
  const int n = static_cast<int>(a.rows());
  require(a.rows() == a.cols(), "hinf_norm: A must be square");
  require(b.rows() == n && c.cols() == n, "hinf_norm: dimension mismatch");
  require(d.rows() == c.rows() && d.cols() == b.cols(), "hinf_norm: D dimension mismatch");
  require(tol > 0, "hinf_norm: tol must be positive");
  if (n == 0 || b.cols() == 0 || c.rows() == 0) return sigma_max(d);
  require(is_hurwitz(a), "hinf_norm: A is not Hurwitz, norm is infinite");

  // Lower bound: max of sigma_max(D), |G(0)|, and a few frequency samples.
  double lo = sigma_max(d);
  Eigen::JacobiSVD<Mat> svd0(c * a.fullPivLu().solve(Mat(-b)) + d);
  lo = std::max(lo, svd0.singularValues()(0));
  for (double w : {0.1, 1.0, 10.0, 100.0}) {
    Eigen::MatrixXcd jw = std::complex<double>(0, w) * Eigen::MatrixXcd::Identity(n, n) -
                          a.cast<std::complex<double>>();
    Eigen::MatrixXcd g = c.cast<std::complex<double>>() * jw.fullPivLu().solve(
                             b.cast<std::complex<double>>()) +
                         d.cast<std::complex<double>>();
    lo = std::max(lo, g.jacobiSvd().singularValues()(0));
  }
  lo = std::max(lo, 1e-12);

  double hi = 2.0 * lo + 1e-6;
  int guard = 0;
  while (gamma_not_above_norm(a, b, c, d, hi)) {
    hi *= 2.0;
    require(++guard < 80, "hinf_norm: upper bound search failed");
  }
  double lo_b = lo;
  // lo_b is <= norm by construction; bisect on (lo_b, hi].
  while (hi - lo_b > tol * lo_b) {
    const double mid = 0.5 * (hi + lo_b);
    if (gamma_not_above_norm(a, b, c, d, mid))
      lo_b = mid;
    else
      hi = mid;
  }
  return 0.5 * (hi + lo_b);
}

}  // namespace numlin
}  // namespace netsynth

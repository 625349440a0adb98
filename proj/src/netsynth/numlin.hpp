#pragma once

// Dense linear algebra and control-theoretic primitives used by every other
// module: eigenvalues, definiteness tests, Riccati/Lyapunov solves and the
// Hamiltonian-bisection H-infinity norm.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace netsynth {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

namespace numlin {

// Symmetric matrix with a checked constructor. Stored dense; the constructor
// symmetrizes inputs that are symmetric up to a small relative tolerance and
// rejects anything worse.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(const Mat& m);
  static SymMat zero(int dim) { return SymMat(Mat::Zero(dim, dim)); }
  static SymMat identity(int dim) { return SymMat(Mat::Identity(dim, dim)); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Mat m_;
};

// Contiguous partition of a dimension into positive-size blocks.
class BlockPartition {
 public:
  BlockPartition() = default;
  explicit BlockPartition(std::vector<int> sizes);

  int count() const { return static_cast<int>(sizes_.size()); }
  int size(int i) const { return sizes_.at(i); }
  int offset(int i) const { return offsets_.at(i); }
  int total() const { return total_; }
  const std::vector<int>& sizes() const { return sizes_; }

  bool operator==(const BlockPartition& o) const { return sizes_ == o.sizes_; }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int total_ = 0;
};

// Eigenvalues of a square real matrix, unordered.
std::vector<std::complex<double>> eigvals(const Mat& m);

// Largest eigenvalue of a symmetric matrix.
double eig_max(const SymMat& m);
double eig_max_sym(const Mat& m);  // symmetrizes first

// True iff lambda_max(m) < -margin.
bool is_negdef(const SymMat& m, double margin = 0.0);
bool is_negdef(const Mat& m, double margin = 0.0);

// True iff all eigenvalues of a (not necessarily symmetric) matrix have
// negative real part.
bool is_hurwitz(const Mat& a, double margin = 0.0);

// Default strictness margin for "< 0" matrix inequalities: scales with the
// constant term so strictness survives badly scaled data.
inline double strict_margin(double const_norm) { return 1e-7 * (1.0 + const_norm); }

// Solves A'X + XA + Q = 0 for symmetric Q. Throws if A has eigenvalues
// summing to zero in pairs (no unique solution).
Mat lyap_solve(const Mat& a, const Mat& q);

// Stabilizing solution of A'X + XA - XB inv(Rw) B'X + Qw = 0.
// Requires (A,B) stabilizable, Rw > 0, Qw >= 0. Throws when the associated
// Hamiltonian has imaginary-axis eigenvalues (no stabilizing solution).
SymMat care_solve(const Mat& a, const Mat& b, const Mat& qw, const Mat& rw);

// H-infinity norm of C(sI-A)^{-1}B + D by Hamiltonian bisection, relative
// accuracy tol. Throws if A is not Hurwitz. Systems with zero states return
// the largest singular value of D.
double hinf_norm(const Mat& a, const Mat& b, const Mat& c, const Mat& d,
                 double tol = 1e-6);

}  // namespace numlin
}  // namespace netsynth

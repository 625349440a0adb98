#pragma once

// QSR supply-rate certificates: agent-level KYP inequalities (vertex-wise for
// polytopic agents), the controller dissipativity inequality in bank-matrix
// form, the network stability inequality, and trajectory-based empirical
// verification.

#include <optional>
#include <vector>

#include "netsynth/conic.hpp"
#include "netsynth/plant.hpp"

namespace netsynth::diss {

using plant::StateSpace;

// Supply rate y'Qy + 2 y'Su + u'Ru for an operator with l outputs, m inputs.
struct QsrTriple {
  Mat q;  // l x l symmetric
  Mat s;  // l x m
  Mat r;  // m x m symmetric

  QsrTriple() = default;
  QsrTriple(Mat q_, Mat s_, Mat r_);
  static QsrTriple zero(int l, int m);
  QsrTriple scaled(double lambda) const { return QsrTriple(lambda * q, lambda * s, lambda * r); }
};

struct Certificate {
  QsrTriple triple;
  Mat storage;            // P > 0
  double margin = 0.0;    // achieved: -lambda_max of the KYP matrix
};

// Either a fixed matrix or a decision variable.
struct MatOrVar {
  Mat fixed;
  conic::VarRef var;
  bool is_var = false;

  MatOrVar(const Mat& m) : fixed(m) {}                       // NOLINT
  MatOrVar(const conic::VarRef& v) : var(v), is_var(true) {} // NOLINT
  template <typename Derived>
  MatOrVar(const Eigen::MatrixBase<Derived>& m) : fixed(m) {}  // NOLINT
  int rows() const { return is_var ? var.rows : static_cast<int>(fixed.rows()); }
  int cols() const { return is_var ? var.cols : static_cast<int>(fixed.cols()); }
};

// KYP matrix for fixed data: value of the inequality whose nonpositivity
// (with P > 0) certifies the supply rate.
Mat kyp_matrix(const StateSpace& ss, const QsrTriple& t, const Mat& p);

// KYP inequality as an affine expression in (P, Q, S, R); any subset may be
// fixed. Dimension n + m.
conic::LmiExpr kyp_lmi(const StateSpace& ss, const MatOrVar& p, const MatOrVar& q,
                       const MatOrVar& s, const MatOrVar& r);

// One KYP inequality per polytope vertex, sharing storage and triple.
std::vector<conic::LmiExpr> certify_polytopic(const plant::PolytopicAgent& agent,
                                              const MatOrVar& p, const MatOrVar& q,
                                              const MatOrVar& s, const MatOrVar& r);

// Network stability inequality Q + He(S*Hbar) + Hbar'*R*Hbar for a fixed
// interconnection and block-diagonal (Q, S, R) given per operator.
// out_dims/in_dims are the operators' output/input dimensions in Hbar order.
conic::LmiExpr ndt_expr(const std::vector<MatOrVar>& q_blocks,
                        const std::vector<MatOrVar>& s_blocks,
                        const std::vector<MatOrVar>& r_blocks, const Mat& hbar,
                        const std::vector<int>& out_dims, const std::vector<int>& in_dims);

Mat ndt_matrix(const std::vector<Mat>& q_blocks, const std::vector<Mat>& s_blocks,
               const std::vector<Mat>& r_blocks, const Mat& hbar,
               const std::vector<int>& out_dims, const std::vector<int>& in_dims);

// Controller dissipativity inequality built from the bank matrix
// [[A,B],[C,D]]: -[C D]'Q[C D] - diag(0,R) + He([[P,0],[0,-S']] K).
// Equivalent to the standard KYP rearrangement; the equivalence is a tested
// property rather than an assumption.
conic::LmiExpr controller_diss_expr(const Mat& bank, int nstates, const MatOrVar& p,
                                    const MatOrVar& q, const MatOrVar& s,
                                    const MatOrVar& r);

// Minimum accumulated supply over an input suite, zero initial state.
double empirical_dissipation(const StateSpace& ss, const QsrTriple& t,
                             const std::vector<plant::SampledSignal>& inputs,
                             double t_final, double dt = 1e-3);

// Searches a certificate for the vertex family (shared B, C, D) by solving a
// small feasibility program with norm-bounded triple. Returns nothing if
// infeasible.
std::optional<Certificate> find_certificate(const std::vector<StateSpace>& vertices,
                                            double norm_bound = 100.0);

}  // namespace netsynth::diss

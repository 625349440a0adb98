#pragma once

// Block-structured LMI modeling layer and the contract to the semidefinite
// backend. Expressions are affine in matrix-valued decision variables; each
// linear term is stored structurally as L*V*R + (L*V*R)' so the backend can
// assemble Schur complements without materializing per-entry coefficient
// matrices.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "netsynth/numlin.hpp"

namespace netsynth::conic {

using BoolMat = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct VarRef {
  int id = -1;
  int rows = 0, cols = 0;
  bool symmetric = false;
  std::string name;
  BoolMat mask;  // true = free entry; empty = all entries free

  bool valid() const { return id >= 0; }
};

// One linear term: L * op(V) * R + (L * op(V) * R)'.
// For 1x1 variables, inflate > 1 means op(V) = v * I_inflate, which lets a
// scalar variable scale an identity block (e.g. the -nu*I blocks).
struct Term {
  int var = -1;
  Mat left;
  Mat right;
  int inflate = 1;
};

class LmiExpr {
 public:
  LmiExpr() = default;
  explicit LmiExpr(Mat constant);

  int dim() const { return static_cast<int>(constant_.rows()); }
  const Mat& constant() const { return constant_; }
  const std::vector<Term>& terms() const { return terms_; }

  // expr += He(L * V * R); L: dim x r(V), R: c(V) x dim.
  void add_he_term(const VarRef& v, const Mat& left, const Mat& right);
  // expr += w * He(L * v * I_k * R) for scalar v; L: dim x k, R: k x dim.
  void add_scaled_identity_term(const VarRef& v, const Mat& left, const Mat& right);
  void add_constant(const Mat& sym);

  LmiExpr scaled(double s) const;
  LmiExpr congruence(const Mat& t) const;  // T * expr * T'
  static LmiExpr add(const LmiExpr& a, const LmiExpr& b);
  static LmiExpr stack(const std::vector<std::vector<const LmiExpr*>>& grid);

  Mat value(const std::map<int, Mat>& assignment) const;

 private:
  Mat constant_;  // symmetric
  std::vector<Term> terms_;
};

LmiExpr affine(const Mat& sym_constant);
// He(X * N * Y) with exactly one variable factor: the other side is fixed.
LmiExpr he_product(const Mat& left, const VarRef& v, const Mat& right, int dim_check = -1);

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

struct SolveOptions {
  double tol_gap = 1e-9;
  double tol_feas = 1e-8;
  int max_iters = 150;
  bool verbose = false;
  std::string dump_path;  // SDPA sparse dump of the linear part, if set
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::map<int, Mat> values;
  double objective = 0.0;
  int iterations = 0;
  std::string message;

  bool ok() const { return status == SolveStatus::Optimal; }
};

class ConicProblem {
 public:
  VarRef add_matrix_var(int rows, int cols, const std::string& name,
                        const BoolMat& mask = BoolMat());
  VarRef add_symmetric_var(int dim, const std::string& name,
                           const BoolMat& mask = BoolMat());
  VarRef add_scalar_var(const std::string& name);

  // expr <= -margin * I (negative semidefinite at the given margin).
  void add_negdef(LmiExpr expr, double margin, const std::string& name = "");
  // expr >= margin * I.
  void add_posdef(const LmiExpr& expr, double margin, const std::string& name = "");

  // sum_entries weight .* V = rhs
  void add_equality(const std::vector<std::pair<VarRef, Mat>>& lhs, double rhs);

  // objective += sum_ij weight_ij V_ij
  void add_objective(const VarRef& v, const Mat& weight);
  void add_objective(const VarRef& scalar, double weight);
  // objective += (rho/2) * || V + shift ||_F^2 over free entries
  void add_quadratic_objective(const VarRef& v, double rho, const Mat& shift);
  void add_objective_constant(double c) { obj_constant_ += c; }

  // Starting point hint; defaults to zero for unset variables.
  void set_initial(const VarRef& v, const Mat& value);

  const std::vector<VarRef>& variables() const { return vars_; }
  int n_constraints() const { return static_cast<int>(constraints_.size()); }

  SolveResult solve(const SolveOptions& opts = SolveOptions()) const;

  // Re-evaluates a constraint at an assignment (testing / verification).
  Mat constraint_value(int idx, const std::map<int, Mat>& assignment) const;
  double constraint_margin(int idx) const { return constraints_[idx].margin; }
  const std::string& constraint_name(int idx) const { return constraints_[idx].name; }
  double evaluate_objective(const std::map<int, Mat>& assignment) const;

 private:
  friend struct SolverImpl;

  struct Constraint {
    LmiExpr expr;
    double margin = 0.0;
    std::string name;
  };
  struct Equality {
    std::vector<std::pair<int, Mat>> lhs;
    double rhs = 0.0;
  };
  struct Quad {
    int var;
    double rho;
    Mat shift;
  };

  std::vector<VarRef> vars_;
  std::vector<Constraint> constraints_;
  std::vector<Equality> equalities_;
  std::map<int, Mat> obj_linear_;
  std::vector<Quad> obj_quad_;
  double obj_constant_ = 0.0;
  std::map<int, Mat> initial_;
};

}  // namespace netsynth::conic

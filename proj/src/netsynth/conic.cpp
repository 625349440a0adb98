#include "netsynth/conic.hpp"

namespace netsynth::conic {

LmiExpr::LmiExpr(Mat constant) {
  require(constant.rows() == constant.cols(), "LmiExpr: constant must be square");
  require((constant - constant.transpose()).norm() <= 1e-12 * (1.0 + constant.norm()),
          "LmiExpr: constant must be symmetric");
  constant_ = 0.5 * (constant + constant.transpose());
}

void LmiExpr::add_he_term(const VarRef& v, const Mat& left, const Mat& right) {
  require(v.valid(), "LmiExpr: invalid variable");
  require(left.rows() == dim() && right.cols() == dim(),
          "LmiExpr: term embedding dimension mismatch");
  require(left.cols() == v.rows && right.rows() == v.cols,
          "LmiExpr: term inner dimension mismatch with variable shape");
  if (left.norm() == 0.0 || right.norm() == 0.0) return;
  terms_.push_back({v.id, left, right, 1});
}

void LmiExpr::add_scaled_identity_term(const VarRef& v, const Mat& left, const Mat& right) {
  require(v.rows == 1 && v.cols == 1, "LmiExpr: identity inflation needs a scalar variable");
  require(left.rows() == dim() && right.cols() == dim(),
          "LmiExpr: term embedding dimension mismatch");
  require(left.cols() == right.rows(), "LmiExpr: inner dimension mismatch");
  terms_.push_back({v.id, left, right, static_cast<int>(left.cols())});
}

void LmiExpr::add_constant(const Mat& sym) {
  require(sym.rows() == dim() && sym.cols() == dim(), "LmiExpr: constant size mismatch");
  constant_ += 0.5 * (sym + sym.transpose());
}

LmiExpr LmiExpr::scaled(double s) const {
  LmiExpr out(Mat(s * constant_));
  out.terms_ = terms_;
  for (auto& t : out.terms_) t.left *= s;
  return out;
}

LmiExpr LmiExpr::congruence(const Mat& t) const {
  require(t.cols() == dim(), "LmiExpr: congruence dimension mismatch");
  LmiExpr out(Mat(t * constant_ * t.transpose()));
  out.terms_.reserve(terms_.size());
  for (const auto& tm : terms_) {
    Term nt = tm;
    nt.left = t * tm.left;
    nt.right = tm.right * t.transpose();
    out.terms_.push_back(std::move(nt));
  }
  return out;
}

LmiExpr LmiExpr::add(const LmiExpr& a, const LmiExpr& b) {
  require(a.dim() == b.dim(), "LmiExpr: add dimension mismatch");
  LmiExpr out(Mat(a.constant_ + b.constant_));
  out.terms_ = a.terms_;
  out.terms_.insert(out.terms_.end(), b.terms_.begin(), b.terms_.end());
  return out;
}

LmiExpr LmiExpr::stack(const std::vector<std::vector<const LmiExpr*>>& grid) {
  require(!grid.empty(), "LmiExpr: empty stack");
  const std::size_t k = grid.size();
  std::vector<int> dims(k, -1);
  for (std::size_t i = 0; i < k; ++i) {
    require(grid[i].size() == k, "LmiExpr: stack grid must be square");
    require(grid[i][i] != nullptr, "LmiExpr: stack diagonal entries required");
    dims[i] = grid[i][i]->dim();
  }
  int total = 0;
  std::vector<int> off(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    off[i] = total;
    total += dims[i];
  }
  LmiExpr out{Mat(Mat::Zero(total, total))};
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const LmiExpr* e = grid[i][j];
      if (!e) continue;
      require(e->dim() == dims[i] && (i != j || e->dim() == dims[j]),
              "LmiExpr: off-diagonal stack blocks must be square and sized");
      Mat emb = Mat::Zero(total, e->dim());
      emb.block(off[i], 0, dims[i], e->dim()) = Mat::Identity(dims[i], e->dim());
      if (i == j) {
        LmiExpr moved = e->congruence(emb);
        out = add(out, moved);
      } else {
        require(false, "LmiExpr: off-diagonal stacking not supported; use congruence");
      }
    }
  return out;
}

Mat LmiExpr::value(const std::map<int, Mat>& assignment) const {
  Mat out = constant_;
  for (const auto& t : terms_) {
    auto it = assignment.find(t.var);
    if (it == assignment.end()) continue;
    const Mat& v = it->second;
    Mat contrib;
    if (t.inflate > 1) {
      contrib = t.left * (v(0, 0) * Mat::Identity(t.inflate, t.inflate)) * t.right;
    } else {
      contrib = t.left * v * t.right;
    }
    out += contrib + contrib.transpose();
  }
  return out;
}

LmiExpr affine(const Mat& sym_constant) { return LmiExpr(sym_constant); }

LmiExpr he_product(const Mat& left, const VarRef& v, const Mat& right, int dim_check) {
  require(left.cols() == v.rows && right.rows() == v.cols,
          "he_product: inner dimension mismatch");
  require(left.rows() == right.cols(), "he_product: output not square");
  if (dim_check >= 0)
    require(left.rows() == dim_check, "he_product: dimension check failed");
  LmiExpr out{Mat(Mat::Zero(left.rows(), left.rows()))};
  out.add_he_term(v, left, right);
  return out;
}

VarRef ConicProblem::add_matrix_var(int rows, int cols, const std::string& name,
                                    const BoolMat& mask) {
  require(rows > 0 && cols > 0, "add_matrix_var: dimensions must be positive");
  if (mask.size())
    require(mask.rows() == rows && mask.cols() == cols, "add_matrix_var: mask shape");
  VarRef v;
  v.id = static_cast<int>(vars_.size());
  v.rows = rows;
  v.cols = cols;
  v.symmetric = false;
  v.name = name;
  v.mask = mask;
  vars_.push_back(v);
  return v;
}

VarRef ConicProblem::add_symmetric_var(int dim, const std::string& name,
                                       const BoolMat& mask) {
  require(dim > 0, "add_symmetric_var: dimension must be positive");
  if (mask.size()) {
    require(mask.rows() == dim && mask.cols() == dim, "add_symmetric_var: mask shape");
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        require(mask(i, j) == mask(j, i), "add_symmetric_var: mask must be symmetric");
  }
  VarRef v;
  v.id = static_cast<int>(vars_.size());
  v.rows = v.cols = dim;
  v.symmetric = true;
  v.name = name;
  v.mask = mask;
  vars_.push_back(v);
  return v;
}

VarRef ConicProblem::add_scalar_var(const std::string& name) {
  return add_matrix_var(1, 1, name);
}

void ConicProblem::add_negdef(LmiExpr expr, double margin, const std::string& name) {
  require(margin >= 0.0, "add_negdef: margin must be nonnegative");
  constraints_.push_back({std::move(expr), margin, name});
}

void ConicProblem::add_posdef(const LmiExpr& expr, double margin, const std::string& name) {
  add_negdef(expr.scaled(-1.0), margin, name);
}

void ConicProblem::add_equality(const std::vector<std::pair<VarRef, Mat>>& lhs, double rhs) {
  Equality eq;
  for (const auto& [v, w] : lhs) {
    require(v.valid() && v.id < static_cast<int>(vars_.size()), "add_equality: bad var");
    require(w.rows() == v.rows && w.cols() == v.cols, "add_equality: weight shape");
    eq.lhs.emplace_back(v.id, w);
  }
  eq.rhs = rhs;
  equalities_.push_back(std::move(eq));
}

void ConicProblem::add_objective(const VarRef& v, const Mat& weight) {
  require(weight.rows() == v.rows && weight.cols() == v.cols, "add_objective: weight shape");
  auto it = obj_linear_.find(v.id);
  if (it == obj_linear_.end())
    obj_linear_[v.id] = weight;
  else
    it->second += weight;
}

void ConicProblem::add_objective(const VarRef& scalar, double weight) {
  require(scalar.rows == 1 && scalar.cols == 1, "add_objective: scalar expected");
  add_objective(scalar, Mat(Mat::Constant(1, 1, weight)));
}

void ConicProblem::add_quadratic_objective(const VarRef& v, double rho, const Mat& shift) {
  require(rho >= 0.0, "add_quadratic_objective: rho must be nonnegative");
  require(shift.rows() == v.rows && shift.cols() == v.cols,
          "add_quadratic_objective: shift shape");
  obj_quad_.push_back({v.id, rho, shift});
}

void ConicProblem::set_initial(const VarRef& v, const Mat& value) {
  require(value.rows() == v.rows && value.cols() == v.cols, "set_initial: shape");
  initial_[v.id] = value;
}

Mat ConicProblem::constraint_value(int idx, const std::map<int, Mat>& assignment) const {
  return constraints_.at(idx).expr.value(assignment);
}

double ConicProblem::evaluate_objective(const std::map<int, Mat>& assignment) const {
  double obj = obj_constant_;
  for (const auto& [id, w] : obj_linear_) {
    auto it = assignment.find(id);
    if (it != assignment.end()) obj += (w.array() * it->second.array()).sum();
  }
  for (const auto& q : obj_quad_) {
    auto it = assignment.find(q.var);
    Mat v = it != assignment.end() ? it->second : Mat::Zero(q.shift.rows(), q.shift.cols());
    obj += 0.5 * q.rho * (v + q.shift).squaredNorm();
  }
  return obj;
}

}  // namespace netsynth::conic

#include "netsynth/hinf.hpp"

namespace netsynth::hinf {

using conic::LmiExpr;
using conic::VarRef;
using plant::StateSpace;

LmiExpr bounded_real_expr(const StateSpace& ss, const VarRef& y, const VarRef& nu) {
  const int n = ss.n(), m = ss.m(), l = ss.l();
  require(y.rows == n && y.cols == n && y.symmetric, "bounded_real_expr: Y must be n x n symmetric");
  require(nu.rows == 1 && nu.cols == 1, "bounded_real_expr: nu must be scalar");
  const int dim = n + m + l;
  Mat cst = Mat::Zero(dim, dim);
  cst.block(0, n + m, n, l) = ss.C.transpose();
  cst.block(n + m, 0, l, n) = ss.C;
  cst.block(n, n + m, m, l) = ss.D.transpose();
  cst.block(n + m, n, l, m) = ss.D;

  LmiExpr e = conic::affine(cst);
  Mat emb_top = Mat::Zero(dim, n);
  emb_top.topRows(n) = Mat::Identity(n, n);
  Mat ab = Mat::Zero(n, dim);
  ab.leftCols(n) = ss.A;
  ab.middleCols(n, m) = ss.B;
  e.add_he_term(y, emb_top, ab);  // He(Y [A B 0]) on the top rows

  Mat li = Mat::Zero(dim, m + l);
  li.block(n, 0, m, m) = -0.5 * Mat::Identity(m, m);
  li.block(n + m, m, l, l) = -0.5 * Mat::Identity(l, l);
  Mat ri = Mat::Zero(m + l, dim);
  ri.block(0, n, m, m) = Mat::Identity(m, m);
  ri.block(m, n + m, l, l) = Mat::Identity(l, l);
  e.add_scaled_identity_term(nu, li, ri);
  return e;
}

Mat bounded_real_matrix(const StateSpace& ss, const Mat& y, double nu) {
  const int n = ss.n(), m = ss.m(), l = ss.l();
  require(y.rows() == n && y.cols() == n, "bounded_real_matrix: Y dims");
  Mat out(n + m + l, n + m + l);
  out.setZero();
  out.topLeftCorner(n, n) = y * ss.A + ss.A.transpose() * y;
  out.block(0, n, n, m) = y * ss.B;
  out.block(n, 0, m, n) = out.block(0, n, n, m).transpose();
  out.block(0, n + m, n, l) = ss.C.transpose();
  out.block(n + m, 0, l, n) = ss.C;
  out.block(n, n, m, m) = -nu * Mat::Identity(m, m);
  out.block(n, n + m, m, l) = ss.D.transpose();
  out.block(n + m, n, l, m) = ss.D;
  out.block(n + m, n + m, l, l) = -nu * Mat::Identity(l, l);
  return out;
}

MinHinfResult min_hinf(const StateSpace& ss, const conic::SolveOptions& opts) {
  MinHinfResult out;
  const int n = ss.n();
  conic::ConicProblem p;
  VarRef y = p.add_symmetric_var(std::max(n, 1), "Y");
  VarRef nu = p.add_scalar_var("nu");
  if (n > 0) {
    p.add_negdef(bounded_real_expr(ss, y, nu), 1e-9, "bounded_real");
    LmiExpr ypos = conic::affine(Mat::Zero(n, n));
    ypos.add_he_term(y, Mat(0.5 * Mat::Identity(n, n)), Mat::Identity(n, n));
    p.add_posdef(ypos, 1e-9, "y_pos");
  } else {
    // static system: nu >= sigma_max(D) via [[ -nu I, D'],[D, -nu I]] < 0
    const int m = ss.m(), l = ss.l();
    Mat cst = Mat::Zero(m + l, m + l);
    cst.topRightCorner(m, l) = ss.D.transpose();
    cst.bottomLeftCorner(l, m) = ss.D;
    LmiExpr e = conic::affine(cst);
    e.add_scaled_identity_term(nu, Mat(-0.5 * Mat::Identity(m + l, m + l)),
                               Mat::Identity(m + l, m + l));
    p.add_negdef(e, 1e-12, "static_gain");
  }
  p.add_objective(nu, 1.0);

  auto res = p.solve(opts);
  out.message = res.message;
  out.status = res.status;
  if (res.ok()) {
    out.cert.y = n > 0 ? res.values.at(y.id) : Mat::Zero(0, 0);
    out.cert.nu = res.values.at(nu.id)(0, 0);
  }
  return out;
}

}  // namespace netsynth::hinf

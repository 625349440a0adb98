#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>

#include "netsynth/conic.hpp"
#include "netsynth/numlin.hpp"

using namespace netsynth;
using namespace netsynth::conic;

namespace {

// min nu s.t. diag(1 - nu) < 0, i.e. nu > 1.
SolveResult scalar_lp(double margin) {
  ConicProblem p;
  VarRef nu = p.add_scalar_var("nu");
  LmiExpr e = affine(Mat::Ones(1, 1));
  e.add_he_term(nu, Mat::Constant(1, 1, -0.5), Mat::Ones(1, 1));
  p.add_negdef(e, margin, "one_minus_nu");
  p.add_objective(nu, 1.0);
  return p.solve();
}

// Bounded-real LMI for a fixed (a,b,c,d) scalar system; minimizes nu over
// (y, nu) with y > 0.
SolveResult scalar_bounded_real(double a, double b, double c, double d) {
  ConicProblem p;
  VarRef y = p.add_scalar_var("y");
  VarRef nu = p.add_scalar_var("nu");
  Mat cst = Mat::Zero(3, 3);
  cst(0, 2) = c;
  cst(2, 0) = c;
  cst(1, 2) = d;
  cst(2, 1) = d;
  LmiExpr e = affine(cst);
  // He(y * [a b 0] embedded in row 1)
  Mat l1 = Mat::Zero(3, 1);
  l1(0, 0) = 1.0;
  Mat r1(1, 3);
  r1 << a, b, 0.0;
  e.add_he_term(y, l1, r1);
  // -nu I on the (2,2) and (3,3) diagonal
  Mat li = Mat::Zero(3, 2);
  li(1, 0) = -0.5;
  li(2, 1) = -0.5;
  Mat ri = Mat::Zero(2, 3);
  ri(0, 1) = 1.0;
  ri(1, 2) = 1.0;
  e.add_scaled_identity_term(nu, li, ri);
  p.add_negdef(e, 1e-9, "brl");

  LmiExpr ypos = affine(Mat::Zero(1, 1));
  ypos.add_he_term(y, Mat::Constant(1, 1, 0.5), Mat::Ones(1, 1));
  p.add_posdef(ypos, 1e-9, "y_pos");

  p.add_objective(nu, 1.0);
  return p.solve();
}

}  // namespace

TEST_CASE("scalar LP in disguise") {
  auto r = scalar_lp(1e-9);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.values.at(0)(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("bounded-real solve matches the analytic norm") {
  auto r = scalar_bounded_real(-1, 1, 1, 0);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.values.at(1)(0, 0) == doctest::Approx(1.0).epsilon(1e-3));

  auto r2 = scalar_bounded_real(-1, 1, 1, 1);
  REQUIRE(r2.status == SolveStatus::Optimal);
  CHECK(r2.values.at(1)(0, 0) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("infeasible constraint detected") {
  ConicProblem p;
  VarRef x = p.add_scalar_var("x");
  // I + 0*x < 0 is infeasible
  LmiExpr e = affine(Mat::Identity(2, 2));
  e.add_he_term(x, Mat::Zero(2, 1), Mat::Zero(1, 2));
  // zero terms are dropped; add a real but useless term so x appears
  Mat l = Mat::Zero(2, 1);
  l(0, 0) = 1e-30;
  e.add_he_term(x, l, Mat::Ones(1, 2));
  p.add_negdef(e, 0.0, "impossible");
  p.add_objective(x, 1.0);
  auto r = p.solve();
  CHECK(r.status == SolveStatus::Infeasible);
}

TEST_CASE("solution satisfies constraints at margin on re-evaluation") {
  // random small SDP: minimize tr(W'X) s.t. X - I >= 0 band, X - c*I <= 0
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    ConicProblem p;
    VarRef x = p.add_symmetric_var(n, "x");
    LmiExpr lower = affine(Mat(-Mat::Identity(n, n)));  // I - X <= 0 -> X >= I
    lower.add_he_term(x, Mat(0.5 * Mat::Identity(n, n)), Mat::Identity(n, n));
    p.add_posdef(lower, 1e-8, "x_minus_i");
    LmiExpr upper = affine(Mat(-3.0 * Mat::Identity(n, n)));
    upper.add_he_term(x, Mat(0.5 * Mat::Identity(n, n)), Mat::Identity(n, n));
    p.add_negdef(upper, 1e-8, "x_minus_3i");
    Mat w(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) w(i, j) = g(rng);
    w = 0.5 * (w + w.transpose());
    p.add_objective(x, w);
    auto r = p.solve();
    REQUIRE(r.status == SolveStatus::Optimal);
    const Mat xv = r.values.at(0);
    CHECK(numlin::is_negdef(p.constraint_value(0, r.values), 0.0));
    CHECK(numlin::is_negdef(p.constraint_value(1, r.values), 0.0));
    CHECK(std::abs(p.evaluate_objective(r.values) - r.objective) <=
          1e-6 * (1.0 + std::abs(r.objective)));
  }
}

TEST_CASE("masked entries stay exactly zero") {
  ConicProblem p;
  BoolMat mask = BoolMat::Constant(2, 2, true);
  mask(0, 1) = mask(1, 0) = false;
  VarRef x = p.add_symmetric_var(2, "x", mask);
  LmiExpr e = affine(Mat(-Mat::Identity(2, 2)));
  e.add_he_term(x, Mat(0.5 * Mat::Identity(2, 2)), Mat::Identity(2, 2));
  p.add_posdef(e, 1e-9, "x_ge_i");
  p.add_objective(x, Mat::Identity(2, 2));
  auto r = p.solve();
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.values.at(0)(0, 1) == 0.0);
  CHECK(r.values.at(0)(1, 0) == 0.0);
  CHECK(r.values.at(0)(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("redundant constraint does not move the optimum") {
  auto base = scalar_bounded_real(-2, 1, 1, 0);
  REQUIRE(base.status == SolveStatus::Optimal);

  ConicProblem p;
  VarRef y = p.add_scalar_var("y");
  VarRef nu = p.add_scalar_var("nu");
  Mat cst = Mat::Zero(3, 3);
  cst(0, 2) = 1.0;
  cst(2, 0) = 1.0;
  LmiExpr e = affine(cst);
  Mat l1 = Mat::Zero(3, 1);
  l1(0, 0) = 1.0;
  Mat r1(1, 3);
  r1 << -2.0, 1.0, 0.0;
  e.add_he_term(y, l1, r1);
  Mat li = Mat::Zero(3, 2);
  li(1, 0) = -0.5;
  li(2, 1) = -0.5;
  Mat ri = Mat::Zero(2, 3);
  ri(0, 1) = 1.0;
  ri(1, 2) = 1.0;
  e.add_scaled_identity_term(nu, li, ri);
  p.add_negdef(e, 1e-9, "brl");
  p.add_negdef(e, 1e-9, "brl_copy");
  LmiExpr ypos = affine(Mat::Zero(1, 1));
  ypos.add_he_term(y, Mat::Constant(1, 1, 0.5), Mat::Ones(1, 1));
  p.add_posdef(ypos, 1e-9, "y_pos");
  p.add_objective(nu, 1.0);
  auto r = p.solve();
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(std::abs(r.values.at(1)(0, 0) - base.values.at(1)(0, 0)) <=
        1e-5 * (1.0 + std::abs(base.values.at(1)(0, 0))));
}

TEST_CASE("equalities and quadratic objective") {
  // min (1/2)||x - t||^2 s.t. sum x = 3, x as 2x1 free matrix, with a loose
  // bound block keeping the problem conic.
  ConicProblem p;
  VarRef x = p.add_matrix_var(2, 1, "x");
  LmiExpr bound = affine(Mat(-100.0 * Mat::Identity(2, 2)));
  Mat l = Mat::Zero(2, 2);
  l(0, 0) = 0.5;
  l(1, 1) = 0.5;
  Mat r = Mat::Zero(1, 2);
  // He(L x R): embeds x entries on the diagonal
  Mat ll = Mat::Zero(2, 2);
  ll(0, 0) = 0.5;
  ll(1, 1) = 0.5;
  Mat rr = Mat::Zero(1, 2);
  rr(0, 0) = 1.0;
  rr(0, 1) = 1.0;
  bound.add_he_term(x, ll.leftCols(2), rr);
  p.add_negdef(bound, 0.0, "loose");
  p.add_equality({{x, Mat::Ones(2, 1)}}, 3.0);
  Mat target(2, 1);
  target << 5.0, 0.0;
  p.add_quadratic_objective(x, 1.0, Mat(-target));
  auto res = p.solve();
  REQUIRE(res.status == SolveStatus::Optimal);
  // analytic: minimize (x0-5)^2 + x1^2 with x0+x1=3 -> x = (4, -1)
  CHECK(res.values.at(0)(0, 0) == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(res.values.at(0)(1, 0) == doctest::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("expression algebra") {
  ConicProblem p;
  VarRef q = p.add_symmetric_var(2, "q");
  // He(affine(A)) behavior: value of affine(A) is A itself (A symmetric)
  Mat a(2, 2);
  a << 2, 1, 1, 0;
  CHECK((affine(a).value({}) - a).norm() == 0.0);

  // congruence T expr T'
  LmiExpr e = affine(Mat::Identity(2, 2));
  e.add_he_term(q, Mat(0.5 * Mat::Identity(2, 2)), Mat::Identity(2, 2));
  Mat t(1, 2);
  t << 1.0, 2.0;
  LmiExpr ce = e.congruence(t);
  std::map<int, Mat> assign{{q.id, (Mat(2, 2) << 1, 0, 0, 2).finished()}};
  const Mat direct = t * e.value(assign) * t.transpose();
  CHECK((ce.value(assign) - direct).norm() <= 1e-12);

  // network stability expression at Q=-I, S=0, R=0, H=0 equals -I
  CHECK((affine(Mat(-Mat::Identity(3, 3))).value({}) +
         Mat::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("sdpa dump writes a file") {
  ConicProblem p;
  VarRef nu = p.add_scalar_var("nu");
  LmiExpr e = affine(Mat::Ones(1, 1));
  e.add_he_term(nu, Mat::Constant(1, 1, -0.5), Mat::Ones(1, 1));
  p.add_negdef(e, 0.0, "c");
  p.add_objective(nu, 1.0);
  SolveOptions opts;
  opts.dump_path = "/tmp/netsynth_dump_test.dat-s";
  auto r = p.solve(opts);
  REQUIRE(r.status == SolveStatus::Optimal);
  std::ifstream f(opts.dump_path);
  CHECK(f.good());
  std::string line;
  std::getline(f, line);
  CHECK(line.find("netsynth") != std::string::npos);
}

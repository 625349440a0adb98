#include "doctest.h"

#include <cmath>
#include <random>

#include "netsynth/hinf.hpp"
#include "netsynth/ico.hpp"
#include "netsynth/numlin.hpp"
#include "netsynth/pipeline.hpp"

using namespace netsynth;
using namespace netsynth::ico;
using plant::StateSpace;

namespace {

// Toy two-agent network with scalar agents and first-order controllers.
plant::NetworkProblem toy_problem() {
  plant::NetworkProblem problem;
  Mat b = Mat::Ones(1, 1), c = Mat::Ones(1, 1), d = Mat::Zero(1, 1);
  problem.agents.emplace_back(StateSpace::scalar(-1, 1, 1, 0),
                              std::vector<Mat>{Mat::Constant(1, 1, -1.0)});
  problem.agents.emplace_back(StateSpace::scalar(-2, 1, 1, 0),
                              std::vector<Mat>{Mat::Constant(1, 1, -2.0)});
  Mat h = Mat::Zero(2, 2);
  h(0, 1) = 0.3;
  h(1, 0) = 0.2;
  problem.topology = plant::NetworkTopology(
      plant::BlockMat(h, numlin::BlockPartition({1, 1}), numlin::BlockPartition({1, 1})));
  return problem;
}

pipeline::SynthesisConfig toy_config() {
  pipeline::SynthesisConfig cfg;
  cfg.feedforward = -2.0;
  cfg.ctrl_scale = 1e-3;
  cfg.ico_max_iters = 6;
  return cfg;
}

}  // namespace

TEST_CASE("single overbounding step") {
  conic::ConicProblem prob;
  SUBCASE("zero perturbation recovers base feasibility") {
    std::mt19937_64 rng(71);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 3);
      const int p = 1 + static_cast<int>(rng() % 2);
      const int q = 1 + static_cast<int>(rng() % 2);
      Mat x0(n, p), y0(q, n), nmat(p, q), qmat(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) x0(i, j) = 0.4 * g(rng);
      for (int i = 0; i < q; ++i)
        for (int j = 0; j < n; ++j) y0(i, j) = 0.4 * g(rng);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < q; ++j) nmat(i, j) = g(rng);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) qmat(i, j) = g(rng);
      qmat = Mat(0.5 * (qmat + qmat.transpose()));

      BmiTerm term;
      term.q = qmat;
      term.n = nmat;
      term.x_base = x0;
      term.y_base = y0;
      conic::ConicProblem local;
      term.x_delta = local.add_matrix_var(n, p, "dx");
      term.y_delta = local.add_matrix_var(q, n, "dy");
      auto e = ico::overbound(term);

      const Mat base_bmi = qmat + x0 * nmat * y0 + (x0 * nmat * y0).transpose();
      const Mat aug0 = e.value({});
      // zero-perturbation: augmented = diag(base bmi, -2I)
      CHECK((aug0.topLeftCorner(n, n) - base_bmi).norm() <= 1e-12);
      CHECK((aug0.bottomRightCorner(q, q) + 2.0 * Mat::Identity(q, q)).norm() <= 1e-12);
      CHECK(aug0.topRightCorner(n, q).norm() <= 1e-12);
    }
  }
  SUBCASE("feasible region contains small perturbations of a scalar case") {
    BmiTerm term;
    term.q = Mat(-Mat::Identity(1, 1));
    term.n = Mat::Ones(1, 1);
    term.x_base = Mat::Zero(1, 1);
    term.y_base = Mat::Zero(1, 1);
    conic::ConicProblem local;
    term.x_delta = local.add_matrix_var(1, 1, "dx");
    term.y_delta = local.add_matrix_var(1, 1, "dy");
    auto e = ico::overbound(term);
    std::map<int, Mat> small{{term.x_delta.id, Mat::Constant(1, 1, 0.3)},
                             {term.y_delta.id, Mat::Constant(1, 1, 0.3)}};
    CHECK(numlin::eig_max_sym(e.value(small)) < 0.0);
    std::map<int, Mat> large{{term.x_delta.id, Mat::Constant(1, 1, 2.0)},
                             {term.y_delta.id, Mat::Constant(1, 1, 2.0)}};
    CHECK(numlin::eig_max_sym(e.value(large)) > 0.0);
  }
  SUBCASE("implication: augmented feasibility forces the original inequality") {
    std::mt19937_64 rng(73);
    std::normal_distribution<double> g;
    int implications = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 2, p = 1, q = 1;
      Mat x0(n, p), y0(q, n), nmat(p, q), qmat(n, n);
      for (int i = 0; i < n; ++i) x0(i, 0) = 0.5 * g(rng);
      for (int j = 0; j < n; ++j) y0(0, j) = 0.5 * g(rng);
      nmat(0, 0) = g(rng);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) qmat(i, j) = g(rng);
      qmat = Mat(0.5 * (qmat + qmat.transpose())) - 2.0 * Mat::Identity(n, n);

      BmiTerm term;
      term.q = qmat;
      term.n = nmat;
      term.x_base = x0;
      term.y_base = y0;
      conic::ConicProblem local;
      term.x_delta = local.add_matrix_var(n, p, "dx");
      term.y_delta = local.add_matrix_var(q, n, "dy");
      auto e = ico::overbound(term);

      Mat dx(n, p), dy(q, n);
      for (int i = 0; i < n; ++i) dx(i, 0) = 0.8 * g(rng);
      for (int j = 0; j < n; ++j) dy(0, j) = 0.8 * g(rng);
      std::map<int, Mat> assign{{term.x_delta.id, dx}, {term.y_delta.id, dy}};
      if (numlin::eig_max_sym(e.value(assign)) < 0.0) {
        ++implications;
        const Mat xn = x0 + dx, yn = y0 + dy;
        const Mat bmi = qmat + xn * nmat * yn + (xn * nmat * yn).transpose();
        CHECK(numlin::eig_max_sym(bmi) < 0.0);
      }
    }
    CHECK(implications > 30);
  }
}

TEST_CASE("sequential overbound rejects an insufficient order") {
  conic::ConicProblem local;
  auto dx = local.add_matrix_var(1, 1, "dx");
  auto dy = local.add_matrix_var(1, 1, "dy");
  OverboundBuilder ob(1);
  int sx = ob.add_symbol(Mat::Zero(1, 1), dx);
  int sy = ob.add_symbol(Mat::Zero(1, 1), dy);
  ob.add_body_constant(Mat(-Mat::Identity(1, 1)));
  ob.add_product(1.0, {ProductFactor::symbol(sx), ProductFactor::symbol(sy)});
  CHECK_THROWS(ob.run({}));
  (void)sx;
  (void)sy;
}

TEST_CASE("toy network: initialization and structured descent") {
  auto problem = toy_problem();
  auto cfg = toy_config();

  auto init = pipeline::init_local(problem, cfg);
  REQUIRE(init.ok);
  const double nu0 = init.point.nu;
  CHECK(nu0 > 0.0);

  // init value equals the Hamiltonian oracle norm of the closed loop
  std::vector<StateSpace> nominal;
  for (const auto& a : problem.agents) nominal.push_back(a.nominal);
  auto cl = plant::closed_loop(nominal, problem.topology.h.m, init.point.controllers,
                               init.point.hy, init.point.hyhat);
  const double oracle = numlin::hinf_norm(cl.A, cl.B, cl.C, cl.D, 1e-7);
  CHECK(std::abs(nu0 - oracle) <= 2e-3 * oracle);

  SUBCASE("dense descent is monotone and verified") {
    IcoOptions opts;
    opts.max_iters = 5;
    auto res = ico_iterate(problem, init.point, SparsityPattern::dense(2), opts);
    CHECK(res.converged);
    CHECK(res.point.nu <= nu0 + 1e-9);
    double prev = nu0;
    for (const auto& row : res.trace) {
      CHECK(row.nu <= prev + 1e-9);
      prev = row.nu;
    }
    auto rep = verify_point(problem, res.point, 1e-9);
    CHECK(rep.ok);
  }
  SUBCASE("decentralized pattern keeps off-diagonal routing at exact zero") {
    IcoOptions opts;
    opts.max_iters = 3;
    auto res = ico_iterate(problem, init.point, SparsityPattern::decentralized(2), opts);
    CHECK(res.point.hy(0, 1) == 0.0);
    CHECK(res.point.hy(1, 0) == 0.0);
    CHECK(res.point.hyhat(0, 1) == 0.0);
    CHECK(res.point.hyhat(1, 0) == 0.0);
    CHECK(res.point.nu <= nu0 + 1e-9);
  }
  SUBCASE("already-optimal base terminates quickly") {
    IcoOptions opts;
    opts.max_iters = 8;
    auto res = ico_iterate(problem, init.point, SparsityPattern::dense(2), opts);
    auto again = ico_iterate(problem, res.point, SparsityPattern::dense(2), opts);
    CHECK(again.trace.size() <= 2);
    CHECK(again.point.nu <= res.point.nu + 1e-9);
    CHECK(std::abs(again.point.nu - res.point.nu) <= 0.05 * (1.0 + res.point.nu));
  }
}

TEST_CASE("composed constraints imply the originals at solved perturbations") {
  auto problem = toy_problem();
  auto cfg = toy_config();
  auto init = pipeline::init_local(problem, cfg);
  REQUIRE(init.ok);

  conic::ConicProblem prob;
  auto vars = compose_constraints(prob, problem, init.point, SparsityPattern::dense(2));
  prob.add_objective(vars.nu, 1.0);
  auto sol = prob.solve();
  REQUIRE(sol.status == conic::SolveStatus::Optimal);
  auto next = apply_solution(init.point, vars, sol.values);
  auto rep = verify_point(problem, next, 1e-9);
  CHECK(rep.ok);
  CHECK(next.nu <= init.point.nu + 1e-9);
}

#include "doctest.h"

#include <cmath>
#include <random>

#include "netsynth/bench.hpp"
#include "netsynth/pipeline.hpp"
#include "netsynth/sparsity.hpp"

using namespace netsynth;
using namespace netsynth::sparsity;

namespace {

plant::NetworkProblem toy_problem() {
  plant::NetworkProblem problem;
  problem.agents.emplace_back(plant::StateSpace::scalar(-1, 1, 1, 0),
                              std::vector<Mat>{Mat::Constant(1, 1, -1.0)});
  problem.agents.emplace_back(plant::StateSpace::scalar(-2, 1, 1, 0),
                              std::vector<Mat>{Mat::Constant(1, 1, -2.0)});
  Mat h = Mat::Zero(2, 2);
  h(0, 1) = 0.3;
  h(1, 0) = 0.2;
  problem.topology = plant::NetworkTopology(
      plant::BlockMat(h, numlin::BlockPartition({1, 1}), numlin::BlockPartition({1, 1})));
  return problem;
}

}  // namespace

TEST_CASE("weighted l1 value") {
  auto spec = bench::ExperimentSpec();
  spec.n_agents = 2;
  spec.uncertainty = 0.0;
  auto problem = bench::build_paper_example(spec);
  auto grid = BlockGrid::of(problem);

  Mat hy = Mat::Zero(2, 2), hyhat = Mat::Zero(2, 2);
  CHECK(weighted_l1(grid, hy, hyhat, 1e-3) == doctest::Approx(0.0));

  hy(0, 0) = 2.0;  // block norm 2 -> weight 1/2 -> contribution 1
  CHECK(weighted_l1(grid, hy, hyhat, 1e-3) == doctest::Approx(1.0));

  hy(0, 0) = 0.0;
  hy(1, 0) = 1e-6;  // floor branch: 1e-6 * 1e3
  CHECK(weighted_l1(grid, hy, hyhat, 1e-3) == doctest::Approx(1e-3));
}

TEST_CASE("cardinality counts over the benchmark grid") {
  auto spec = bench::ExperimentSpec();
  auto problem = bench::build_paper_example(spec);
  auto grid = BlockGrid::of(problem);
  const int n = problem.n_agents();
  Mat dense_hy = Mat::Ones(n, n), dense_hyhat = Mat::Ones(n, n);
  CHECK(cardinality(grid, dense_hy, dense_hyhat) == 200);
  CHECK(cardinality(grid, Mat::Identity(n, n), Mat::Identity(n, n)) == 20);
  CHECK(cardinality(grid, Mat::Zero(n, n), Mat::Zero(n, n)) == 0);
}

TEST_CASE("shrinkage equals the brute-force proximal map") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  auto spec = bench::ExperimentSpec();
  spec.n_agents = 4;
  spec.uncertainty = 0.0;
  auto problem = bench::build_paper_example(spec);
  auto grid = BlockGrid::of(problem);

  for (int trial = 0; trial < 200; ++trial) {
    const double gamma = std::abs(g(rng)) * 0.5;
    const double rho = 100.0 + 900.0 * plant::uniform01(rng());
    Mat hy(4, 4), hyhat(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        hy(i, j) = 0.08 * g(rng);
        hyhat(i, j) = 0.08 * g(rng);
      }
    Mat shy = hy, shyhat = hyhat;
    shrink_blocks(grid, shy, shyhat, gamma, rho);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        for (int which = 0; which < 2; ++which) {
          const double v = which ? hyhat(i, j) : hy(i, j);
          const double s = which ? shyhat(i, j) : shy(i, j);
          // brute force prox of gamma*card over {0, v}
          const double keep_cost = gamma;
          const double zero_cost = 0.5 * rho * v * v;
          const double expect = keep_cost < zero_cost ? v : 0.0;
          CHECK(s == expect);
        }
      }
  }
}

TEST_CASE("gamma zero leaves blocks untouched") {
  auto spec = bench::ExperimentSpec();
  spec.n_agents = 3;
  spec.uncertainty = 0.0;
  auto problem = bench::build_paper_example(spec);
  auto grid = BlockGrid::of(problem);
  Mat hy = Mat::Random(3, 3), hyhat = Mat::Random(3, 3);
  Mat hy0 = hy, hyhat0 = hyhat;
  shrink_blocks(grid, hy, hyhat, 0.0, 1000.0);
  CHECK((hy - hy0).norm() == 0.0);
  CHECK((hyhat - hyhat0).norm() == 0.0);
}

TEST_CASE("block-matrix shrinkage copies fixed blocks unchanged") {
  Mat m(2, 2);
  m << 0.01, 0.02, 5.0, 0.03;
  plant::BlockMat v(m, numlin::BlockPartition({1, 1}), numlin::BlockPartition({1, 1}));
  auto out = shrink_blocks(
      v, [](int i, int j) { return !(i == 1 && j == 0); }, 1.0, 1000.0);
  CHECK(out.m(1, 0) == 5.0);          // fixed block untouched
  CHECK(out.m(0, 0) == 0.0);          // 0.01 < sqrt(0.002)
  CHECK(out.m(0, 1) == 0.0);
  CHECK(out.m(1, 1) == 0.0);
}

TEST_CASE("threshold arithmetic") {
  // gamma=1, rho=1000 -> threshold sqrt(0.002) ~ 0.0447
  auto spec = bench::ExperimentSpec();
  spec.n_agents = 1;
  spec.n_unstable = 0;
  spec.uncertainty = 0.0;
  auto problem = bench::build_paper_example(spec);
  auto grid = BlockGrid::of(problem);
  Mat hy(1, 1), hyhat = Mat::Zero(1, 1);
  hy << 0.05;
  Mat a = hy, b = hyhat;
  shrink_blocks(grid, a, b, 1.0, 1000.0);
  CHECK(a(0, 0) == 0.05);
  hy << 0.04;
  a = hy;
  shrink_blocks(grid, a, b, 1.0, 1000.0);
  CHECK(a(0, 0) == 0.0);
}

TEST_CASE("sparsity runs on the toy network") {
  auto problem = toy_problem();
  pipeline::SynthesisConfig cfg;
  cfg.feedforward = -2.0;
  cfg.ico_max_iters = 4;
  auto init = pipeline::init_local(problem, cfg);
  REQUIRE(init.ok);
  auto central = pipeline::centralize(problem, init.point, cfg);

  SparsityOptions opts;
  opts.margins = cfg.margins;
  SUBCASE("zero gamma keeps the dense pattern (l1)") {
    opts.gamma = 0.0;
    auto res = l1_run(problem, central, opts);
    REQUIRE(res.clean);
    CHECK(res.pattern.nonzero_blocks() == 8);
    CHECK(ico::verify_point(problem, res.point, 1e-9).ok);
  }
  SUBCASE("zero gamma keeps the dense pattern (admm)") {
    opts.gamma = 0.0;
    opts.max_iters = 5;
    auto res = admm_run(problem, central, opts);
    REQUIRE(res.clean);
    CHECK(res.pattern.nonzero_blocks() == 8);
  }
  SUBCASE("large gamma collapses toward the necessary support") {
    opts.gamma = 50.0;
    opts.max_iters = 12;
    auto res = admm_run(problem, central, opts);
    REQUIRE(res.clean);
    CHECK(res.pattern.nonzero_blocks() <= 6);
  }
  SUBCASE("large gamma sparsifies the reweighted l1 route") {
    opts.gamma = 50.0;
    opts.l1_reweight_iters = 5;
    auto res = l1_run(problem, central, opts);
    REQUIRE(res.clean);
    CHECK(res.pattern.nonzero_blocks() <= 6);
    CHECK(weighted_l1(BlockGrid::of(problem), res.point.hy, res.point.hyhat, opts.eps_l) <
          weighted_l1(BlockGrid::of(problem), central.hy, central.hyhat, opts.eps_l));
  }
}

TEST_CASE("residual formulas are nonnegative") {
  auto problem = toy_problem();
  pipeline::SynthesisConfig cfg;
  cfg.feedforward = -2.0;
  cfg.ico_max_iters = 2;
  auto init = pipeline::init_local(problem, cfg);
  REQUIRE(init.ok);
  SparsityOptions opts;
  opts.gamma = 0.3;
  opts.max_iters = 3;
  auto res = admm_run(problem, init.point, opts);
  CHECK(res.r_primal >= 0.0);
  CHECK(res.r_dual >= 0.0);
}

#include "doctest.h"

#include <cmath>
#include <fstream>

#include "netsynth/bench.hpp"
#include "netsynth/numlin.hpp"
#include "netsynth/pipeline.hpp"

using namespace netsynth;
using namespace netsynth::pipeline;

namespace {

plant::NetworkProblem toy_problem(bool all_stable = true) {
  plant::NetworkProblem problem;
  problem.agents.emplace_back(plant::StateSpace::scalar(all_stable ? -1 : 0.5, 1, 1, 0),
                              std::vector<Mat>{Mat::Constant(1, 1, all_stable ? -1.0 : 0.5)});
  problem.agents.emplace_back(plant::StateSpace::scalar(-2, 1, 1, 0),
                              std::vector<Mat>{Mat::Constant(1, 1, -2.0)});
  Mat h = Mat::Zero(2, 2);
  h(0, 1) = 0.3;
  h(1, 0) = 0.2;
  problem.topology = plant::NetworkTopology(
      plant::BlockMat(h, numlin::BlockPartition({1, 1}), numlin::BlockPartition({1, 1})));
  return problem;
}

SynthesisConfig toy_config() {
  SynthesisConfig cfg;
  cfg.feedforward = -2.0;
  cfg.ico_max_iters = 5;
  cfg.admm_max_iters = 10;
  return cfg;
}

}  // namespace

TEST_CASE("local controller construction") {
  auto agent = plant::StateSpace((Mat(2, 2) << 1, 1, 1, 2).finished(),
                                 (Mat(2, 1) << 0, 1).finished(),
                                 (Mat(1, 2) << 1, 1).finished(), Mat::Zero(1, 1));
  auto ctrl = local_controller(agent, 100.0, 1.0, 1e-3, -10.0);
  CHECK(ctrl.n() == 2);
  CHECK(ctrl.D(0, 0) == -10.0);
  CHECK(ctrl.C.norm() <= 1e-3 * 1e3);      // scaled state feedback
  CHECK(numlin::is_hurwitz(ctrl.A));       // observer/regulator poles
}

TEST_CASE("stable network certifies with inert controllers") {
  auto problem = toy_problem(true);
  SynthesisConfig cfg = toy_config();
  auto init = init_local(problem, cfg);
  REQUIRE(init.ok);
  CHECK(init.message.find("inert") != std::string::npos);
  CHECK(init.point.nu > 0.0);
}

TEST_CASE("unstable agent forces the escalation route") {
  auto problem = toy_problem(false);
  SynthesisConfig cfg = toy_config();
  auto init = init_local(problem, cfg);
  REQUIRE(init.ok);
  CHECK(init.message.find("feedforward") != std::string::npos);
  auto rep = ico::verify_point(problem, init.point, 1e-9);
  CHECK(rep.ok);
}

TEST_CASE("uncontrollable unstable agent fails initialization") {
  plant::NetworkProblem problem;
  // B = 0: unstable and uncontrollable
  problem.agents.emplace_back(
      plant::StateSpace(Mat::Constant(1, 1, 1.0), Mat::Zero(1, 1), Mat::Ones(1, 1),
                        Mat::Zero(1, 1)),
      std::vector<Mat>{Mat::Constant(1, 1, 1.0)});
  problem.topology = plant::NetworkTopology(
      plant::BlockMat(Mat::Zero(1, 1), numlin::BlockPartition({1}),
                      numlin::BlockPartition({1})));
  SynthesisConfig cfg = toy_config();
  cfg.escalation_steps = 2;
  auto init = init_local(problem, cfg);
  CHECK_FALSE(init.ok);
}

TEST_CASE("centralized solve never degrades the bound") {
  auto problem = toy_problem(false);
  SynthesisConfig cfg = toy_config();
  auto init = init_local(problem, cfg);
  REQUIRE(init.ok);
  auto central = centralize(problem, init.point, cfg);
  CHECK(central.nu <= init.point.nu + 1e-9);
}

TEST_CASE("full pipeline runs") {
  auto problem = toy_problem(false);
  SynthesisConfig cfg = toy_config();

  SUBCASE("gamma zero reproduces the dense structure") {
    cfg.gamma = 0.0;
    cfg.penalty = Penalty::Cardinality;
    auto res = run(problem, cfg);
    REQUIRE(res.ok);
    CHECK(res.nonzero_blocks == 8);
    CHECK(res.nu_final <= res.nu_centralized + 1e-6);
    auto rep = ico::verify_point(problem, res.point, 1e-9);
    CHECK(rep.ok);
  }
  SUBCASE("large gamma sparsifies") {
    cfg.gamma = 50.0;
    cfg.penalty = Penalty::Cardinality;
    auto res = run(problem, cfg);
    REQUIRE(res.ok);
    CHECK(res.nonzero_blocks <= 6);
    auto rep = ico::verify_point(problem, res.point, 1e-9);
    CHECK(rep.ok);
  }
  SUBCASE("weighted l1 route") {
    cfg.gamma = 0.5;
    cfg.penalty = Penalty::WeightedL1;
    auto res = run(problem, cfg);
    REQUIRE(res.ok);
    CHECK(res.nonzero_blocks >= 2);
    CHECK(res.nonzero_blocks <= 8);
    auto rep = ico::verify_point(problem, res.point, 1e-9);
    CHECK(rep.ok);
  }
}

TEST_CASE("pipeline runs are deterministic") {
  auto problem = toy_problem(false);
  SynthesisConfig cfg = toy_config();
  cfg.gamma = 0.2;
  auto a = run(problem, cfg);
  auto b = run(problem, cfg);
  REQUIRE(a.ok);
  REQUIRE(b.ok);
  CHECK(a.nu_final == b.nu_final);
  CHECK(a.nonzero_blocks == b.nonzero_blocks);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) CHECK(a.trace[k].nu == b.trace[k].nu);
}

TEST_CASE("nominal baseline synthesizes without certificates") {
  auto problem = toy_problem(false);
  SynthesisConfig cfg = toy_config();
  auto res = nominal_hinf_baseline(problem, cfg);
  REQUIRE(res.ok);
  std::vector<plant::StateSpace> nominal;
  for (const auto& a : problem.agents) nominal.push_back(a.nominal);
  auto cl = plant::closed_loop(nominal, problem.topology.h.m, res.controllers, res.hy,
                               res.hyhat);
  CHECK(numlin::is_hurwitz(cl.A));
  const double oracle = numlin::hinf_norm(cl.A, cl.B, cl.C, cl.D, 1e-6);
  CHECK(res.nu >= oracle - 1e-3 * oracle);
}

TEST_CASE("monte-carlo robustness rows") {
  auto spec = bench::ExperimentSpec();
  spec.n_agents = 2;
  spec.uncertainty = 0.0;
  auto problem = bench::build_paper_example(spec);
  SynthesisConfig cfg = toy_config();
  cfg.feedforward = -10.0;
  auto init = init_local(problem, cfg);
  REQUIRE(init.ok);
  plant::ControllerNetwork net{init.point.controllers, init.point.hy, init.point.hyhat};
  SUBCASE("zero-width uncertainty gives identical trials") {
    auto mc = bench::robustness_mc(problem, net, 5, 3);
    REQUIRE(mc.rows.size() == 5);
    for (const auto& r : mc.rows) CHECK(r.hinf == mc.rows[0].hinf);
    CHECK(mc.best == mc.worst);
  }
  SUBCASE("single trial fixed seed is deterministic") {
    auto a = bench::robustness_mc(problem, net, 1, 9);
    auto b = bench::robustness_mc(problem, net, 1, 9);
    CHECK(a.rows[0].hinf == b.rows[0].hinf);
  }
}

TEST_CASE("benchmark example structure") {
  bench::ExperimentSpec spec;
  auto problem = bench::build_paper_example(spec);
  REQUIRE(problem.n_agents() == 10);
  // first five agents nominally unstable
  for (int i = 0; i < 10; ++i) {
    const bool unstable = !numlin::is_hurwitz(problem.agents[i].nominal.A);
    CHECK(unstable == (i < 5));
    CHECK(problem.agents[i].vertex_a.size() == 16);
  }
  // alpha=0 collapses all off-diagonal weights to one
  bench::ExperimentSpec flat;
  flat.alpha = 1e-300;
  auto p2 = bench::build_paper_example(flat);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      if (i != j) CHECK(p2.topology.h.m(i, j) == doctest::Approx(1.0));
  // zero fraction collapses every vertex onto the nominal
  bench::ExperimentSpec nominal_only;
  nominal_only.uncertainty = 0.0;
  auto p3 = bench::build_paper_example(nominal_only);
  CHECK(p3.agents[0].vertex_a.size() == 1);

  // sweep CSV with an empty gamma list still carries the header
  pipeline::SynthesisConfig cfg;
  bench::SweepResult empty;
  bench::write_sweep_csv(empty, "/tmp/netsynth_empty_sweep.csv");
  std::ifstream f("/tmp/netsynth_empty_sweep.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line.find("gamma,nonzero_blocks") != std::string::npos);
}

TEST_CASE("log spacing") {
  auto g = bench::log_spaced(1e-6, 5.0, 20);
  REQUIRE(g.size() == 20);
  CHECK(g.front() == doctest::Approx(1e-6));
  CHECK(g.back() == doctest::Approx(5.0));
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] > g[k - 1]);
}

#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>

#include "netsynth/plant.hpp"

using namespace netsynth;
using namespace netsynth::plant;

namespace {

StateSpace zero_controller(int n, int in, int out) {
  return StateSpace(Mat::Zero(n, n), Mat::Zero(n, in), Mat::Zero(out, n),
                    Mat::Zero(out, in));
}

// Frequency-domain loop closure: independent oracle for closed_loop. Solves
// the interconnection equations directly at s = j*omega.
Eigen::MatrixXcd loop_freq_oracle(const std::vector<StateSpace>& plants, const Mat& h,
                                  const std::vector<StateSpace>& ctrls, const Mat& hy,
                                  const Mat& hyhat, double w) {
  using CMat = Eigen::MatrixXcd;
  std::vector<Mat> dummy;
  int l = 0, m = 0;
  for (const auto& p : plants) { l += p.l(); m += p.m(); }
  CMat g = CMat::Zero(l, m), k = CMat::Zero(m, l);
  {
    int ro = 0, co = 0;
    for (const auto& p : plants) {
      g.block(ro, co, p.l(), p.m()) = p.freq_response(w);
      ro += p.l();
      co += p.m();
    }
    ro = co = 0;
    for (const auto& c : ctrls) {
      k.block(ro, co, c.l(), c.m()) = c.freq_response(w);
      ro += c.l();
      co += c.m();
    }
  }
  const CMat hc = h.cast<std::complex<double>>();
  const CMat hyc = hy.cast<std::complex<double>>();
  const CMat hyhatc = hyhat.cast<std::complex<double>>();
  // y = G(n + H y + Hyhat K Hy (nhat + y))
  const CMat lhs = CMat::Identity(l, l) - g * hc - g * hyhatc * k * hyc;
  const CMat sol = lhs.fullPivLu().inverse();
  CMat t(l + m, m + l);
  // y from n and nhat
  t.topLeftCorner(l, m) = sol * g;
  t.topRightCorner(l, l) = sol * g * hyhatc * k * hyc;
  // zhat = Hyhat K Hy (nhat + y)
  t.bottomLeftCorner(m, m) = hyhatc * k * hyc * t.topLeftCorner(l, m);
  t.bottomRightCorner(m, l) = hyhatc * k * hyc * (CMat::Identity(l, l) + t.topRightCorner(l, l));
  return t;
}

}  // namespace

TEST_CASE("well_posed") {
  std::vector<StateSpace> ctrls{StateSpace::scalar(-1, 1, 1, 0),
                                StateSpace::scalar(-2, 1, 1, 0)};
  CHECK(well_posed(ctrls, Mat::Zero(2, 2)));

  std::vector<StateSpace> unit_d{StateSpace::scalar(-1, 1, 1, 1),
                                 StateSpace::scalar(-1, 1, 1, 1)};
  CHECK_FALSE(well_posed(unit_d, Mat::Identity(2, 2)));

  std::vector<StateSpace> half_d{StateSpace::scalar(-1, 1, 1, 0.5),
                                 StateSpace::scalar(-1, 1, 1, 0.5)};
  CHECK(well_posed(half_d, Mat::Identity(2, 2)));
}

TEST_CASE("interconnect") {
  SUBCASE("Hu = 0 with identity gains stacks the controllers") {
    std::vector<StateSpace> ctrls{StateSpace::scalar(-1, 2, 3, 0.5),
                                  StateSpace::scalar(-4, 1, 1, 0)};
    auto c = interconnect(ctrls, Mat::Zero(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2));
    Mat a_expect(2, 2);
    a_expect << -1, 0, 0, -4;
    CHECK((c.A - a_expect).norm() == doctest::Approx(0.0));
    Mat b_expect(2, 2);
    b_expect << 2, 0, 0, 1;
    CHECK((c.B - b_expect).norm() == doctest::Approx(0.0));
  }
  SUBCASE("scalar loop closure") {
    std::vector<StateSpace> one{StateSpace::scalar(-1, 1, 1, 0)};
    Mat half = 0.5 * Mat::Identity(1, 1);
    auto c = interconnect(one, half, Mat::Identity(1, 1), Mat::Identity(1, 1));
    CHECK(c.A(0, 0) == doctest::Approx(-0.5));
    CHECK(c.B(0, 0) == doctest::Approx(1.0));
    CHECK(c.C(0, 0) == doctest::Approx(1.0));
    CHECK(c.D(0, 0) == doctest::Approx(0.0));
  }
  SUBCASE("singular loop rejected") {
    std::vector<StateSpace> one{StateSpace::scalar(-1, 1, 1, 1)};
    CHECK_THROWS(interconnect(one, Mat::Identity(1, 1), Mat::Identity(1, 1),
                              Mat::Identity(1, 1)));
  }
}

TEST_CASE("closed_loop hand cases") {
  SUBCASE("zero controller bank") {
    std::vector<StateSpace> plants{
        StateSpace(Mat::Ones(1, 1) * -2, Mat::Ones(1, 1), Mat::Ones(1, 1), Mat::Zero(1, 1)),
        StateSpace(Mat::Ones(1, 1) * -3, Mat::Ones(1, 1), Mat::Ones(1, 1), Mat::Zero(1, 1))};
    Mat h = Mat::Zero(2, 2);
    h(0, 1) = 0.5;
    h(1, 0) = -0.5;
    std::vector<StateSpace> ctrls{zero_controller(1, 1, 1), zero_controller(1, 1, 1)};
    auto cl = closed_loop(plants, h, ctrls, Mat::Identity(2, 2), Mat::Identity(2, 2));
    Mat a_expect = Mat::Zero(4, 4);
    a_expect.topLeftCorner(2, 2) << -2, 0.5, -0.5, -3;
    CHECK((cl.A - a_expect).norm() == doctest::Approx(0.0));
  }
  SUBCASE("scalar plant and controller") {
    std::vector<StateSpace> plants{StateSpace::scalar(-1, 1, 1, 0)};
    std::vector<StateSpace> ctrls{StateSpace::scalar(-1, 1, 1, 0)};
    auto cl = closed_loop(plants, Mat::Zero(1, 1), ctrls, Mat::Identity(1, 1),
                          Mat::Identity(1, 1));
    Mat a_expect(2, 2);
    a_expect << -1, 1, 1, -1;
    CHECK((cl.A - a_expect).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("closed_loop matches frequency-domain oracle") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 4; ++trial) {
    const int nagents = 2 + static_cast<int>(rng() % 2);
    std::vector<StateSpace> plants, ctrls;
    int l = 0, m = 0;
    for (int i = 0; i < nagents; ++i) {
      const int n = 1 + static_cast<int>(rng() % 3);
      Mat a(n, n), b(n, 1), c(1, n);
      for (int r = 0; r < n; ++r)
        for (int cc = 0; cc < n; ++cc) a(r, cc) = g(rng);
      a -= (3.0 + n) * Mat::Identity(n, n);
      for (int r = 0; r < n; ++r) { b(r, 0) = g(rng); c(0, r) = g(rng); }
      plants.emplace_back(a, b, c, Mat::Zero(1, 1));
      const int nc = 1 + static_cast<int>(rng() % 2);
      Mat ac(nc, nc), bc(nc, 1), cc2(1, nc), dc(1, 1);
      for (int r = 0; r < nc; ++r)
        for (int ccc = 0; ccc < nc; ++ccc) ac(r, ccc) = g(rng);
      for (int r = 0; r < nc; ++r) { bc(r, 0) = g(rng); cc2(0, r) = g(rng); }
      dc(0, 0) = g(rng);
      ctrls.emplace_back(ac, bc, cc2, dc);
      ++l;
      ++m;
    }
    Mat h(m, l), hy(l, l), hyhat(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < l; ++j) h(i, j) = (i == j) ? 0.0 : 0.3 * g(rng);
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < l; ++j) hy(i, j) = g(rng);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) hyhat(i, j) = g(rng);

    auto cl = closed_loop(plants, h, ctrls, hy, hyhat);
    for (int k = 0; k < 20; ++k) {
      const double w = std::pow(10.0, -2.0 + 4.0 * k / 19.0);
      const auto oracle = loop_freq_oracle(plants, h, ctrls, hy, hyhat, w);
      const auto direct = cl.freq_response(w);
      CHECK((oracle - direct).norm() <= 1e-8 * (1.0 + oracle.norm()));
    }
  }
}

TEST_CASE("closed_loop with identity routing matches per-agent closure") {
  std::vector<StateSpace> plants{StateSpace::scalar(-1, 1, 1, 0),
                                 StateSpace::scalar(-2, 2, 1, 0)};
  std::vector<StateSpace> ctrls{StateSpace::scalar(-3, 1, 0.5, -1),
                                StateSpace::scalar(-4, 1, 2, -2)};
  auto cl = closed_loop(plants, Mat::Zero(2, 2), ctrls, Mat::Identity(2, 2),
                        Mat::Identity(2, 2));
  for (int i = 0; i < 2; ++i) {
    auto single = closed_loop({plants[i]}, Mat::Zero(1, 1), {ctrls[i]},
                              Mat::Identity(1, 1), Mat::Identity(1, 1));
    for (double w : {0.0, 0.7, 3.0}) {
      const auto tg = cl.freq_response(w);
      const auto ts = single.freq_response(w);
      // channel n_i -> y_i and nhat_i -> y_i
      CHECK(std::abs(tg(i, i) - ts(0, 0)) <= 1e-10);
      CHECK(std::abs(tg(i, 2 + i) - ts(0, 1)) <= 1e-10);
      CHECK(std::abs(tg(2 + i, i) - ts(1, 0)) <= 1e-10);
    }
  }
}

TEST_CASE("simulate") {
  SUBCASE("zero input zero state") {
    auto ss = StateSpace::scalar(-1, 1, 1, 0);
    auto traj = simulate(ss, SampledSignal::zero(1, 1e-3, 1.0), 1e-3, 1.0);
    CHECK(traj.outputs.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("first-order step response") {
    auto ss = StateSpace::scalar(-1, 1, 1, 0);
    auto traj = simulate(ss, SampledSignal::step(1, 1e-3, 10.0), 1e-3, 10.0);
    const double y_final = traj.outputs(0, traj.outputs.cols() - 1);
    CHECK(std::abs(y_final - (1.0 - std::exp(-10.0))) <= 1e-6);
  }
  SUBCASE("unstable free response") {
    auto ss = StateSpace::scalar(1, 1, 1, 0);
    Vec x0(1);
    x0 << 1.0;
    auto traj = simulate(ss, SampledSignal::zero(1, 1e-3, 5.0), 1e-3, 5.0, x0);
    const double y5 = traj.outputs(0, traj.outputs.cols() - 1);
    CHECK(std::abs(y5 - std::exp(5.0)) <= 1e-3 * std::exp(5.0));
  }
}

TEST_CASE("sample_uncertain") {
  Mat a(2, 2);
  a << 1, 1, 1, 2;
  StateSpace nom(a, (Mat(2, 1) << 0, 1).finished(), (Mat(1, 2) << 1, 1).finished(),
                 Mat::Zero(1, 1));
  SUBCASE("zero width box returns nominal") {
    PolytopicAgent agent(nom, {a});
    auto s = sample_uncertain(agent, 42);
    CHECK((s.A - a).norm() == 0.0);
  }
  SUBCASE("four percent box stays in bounds and is deterministic") {
    PolytopicAgent agent(nom, box_vertices(a, 0.04));
    CHECK(agent.vertex_a.size() == 16);
    auto s1 = sample_uncertain(agent, 7);
    auto s2 = sample_uncertain(agent, 7);
    CHECK((s1.A - s2.A).norm() == 0.0);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        CHECK(s1.A(i, j) >= 0.96 * a(i, j) - 1e-12);
        CHECK(s1.A(i, j) <= 1.04 * a(i, j) + 1e-12);
      }
    auto s3 = sample_uncertain(agent, 8);
    CHECK((s1.A - s3.A).norm() > 0.0);
  }
}

TEST_CASE("model serialization round trip is exact") {
  Mat a(2, 2);
  a << 1.0 / 3.0, std::sqrt(2.0), -0.1, 2;
  StateSpace nom(a, (Mat(2, 1) << 0, 1).finished(), (Mat(1, 2) << 1, 1).finished(),
                 Mat::Zero(1, 1));
  NetworkProblem problem;
  problem.agents.emplace_back(nom, box_vertices(a, 0.04));
  problem.agents.emplace_back(nom, std::vector<Mat>{a});
  Mat h = Mat::Zero(2, 2);
  h(0, 1) = std::atan(1.0);
  h(1, 0) = -1e-17;
  problem.topology = NetworkTopology(
      BlockMat(h, numlin::BlockPartition({1, 1}), numlin::BlockPartition({1, 1})));

  ControllerNetwork ctrl;
  ctrl.local = {StateSpace::scalar(-1, 1, 1e-3, -10), StateSpace::scalar(-2, 1, 1, 0)};
  ctrl.hy = Mat::Identity(2, 2);
  ctrl.hyhat = Mat::Identity(2, 2);

  const std::string text = to_text(problem, &ctrl);
  std::optional<ControllerNetwork> ctrl2;
  NetworkProblem back = problem_from_text(text, &ctrl2);

  REQUIRE(back.n_agents() == 2);
  CHECK((back.agents[0].nominal.A - a).norm() == 0.0);
  CHECK(back.agents[0].vertex_a.size() == 16);
  for (std::size_t v = 0; v < 16; ++v)
    CHECK((back.agents[0].vertex_a[v] - problem.agents[0].vertex_a[v]).norm() == 0.0);
  CHECK((back.topology.h.m - h).norm() == 0.0);
  REQUIRE(ctrl2.has_value());
  CHECK((ctrl2->local[0].D - ctrl.local[0].D).norm() == 0.0);
  CHECK((ctrl2->local[0].C - ctrl.local[0].C).norm() == 0.0);
}

TEST_CASE("global interconnection structure") {
  Mat h = Mat::Zero(2, 2);
  h(0, 1) = 2.0;
  h(1, 0) = 3.0;
  NetworkTopology topo(
      BlockMat(h, numlin::BlockPartition({1, 1}), numlin::BlockPartition({1, 1})));
  GlobalInterconnection gi(topo, 0.5 * Mat::Identity(2, 2), 2.0 * Mat::Identity(2, 2));
  CHECK((gi.plant_h() - h).norm() == 0.0);
  CHECK((gi.hy() - 0.5 * Mat::Identity(2, 2)).norm() == 0.0);
  CHECK((gi.hyhat() - 2.0 * Mat::Identity(2, 2)).norm() == 0.0);
  CHECK(gi.hbar.m.bottomRightCorner(2, 2).norm() == 0.0);
  CHECK(gi.designable(0, 2));
  CHECK(gi.designable(2, 0));
  CHECK_FALSE(gi.designable(0, 1));
  CHECK_FALSE(gi.designable(2, 3));
  CHECK_THROWS(NetworkTopology(BlockMat(Mat::Identity(2, 2), numlin::BlockPartition({1, 1}),
                                        numlin::BlockPartition({1, 1}))));
}

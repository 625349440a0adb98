#pragma once

// System models: agents, plant network, controller network, well-posedness,
// closed-loop assembly and simulation.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netsynth/numlin.hpp"

namespace netsynth::plant {

using numlin::BlockPartition;

// Dense matrix carrying row/column block structure.
struct BlockMat {
  Mat m;
  BlockPartition rows;
  BlockPartition cols;

  BlockMat() = default;
  BlockMat(Mat mat, BlockPartition r, BlockPartition c);
  static BlockMat zero(const BlockPartition& r, const BlockPartition& c);

  Mat block(int i, int j) const;
  void set_block(int i, int j, const Mat& b);
  double block_norm(int i, int j) const { return block(i, j).norm(); }
};

struct StateSpace {
  Mat A, B, C, D;

  StateSpace() = default;
  StateSpace(Mat a, Mat b, Mat c, Mat d);
  static StateSpace scalar(double a, double b, double c, double d);

  int n() const { return static_cast<int>(A.rows()); }   // states
  int m() const { return static_cast<int>(B.cols()); }   // inputs
  int l() const { return static_cast<int>(C.rows()); }   // outputs

  Eigen::MatrixXcd freq_response(double omega) const;
};

// Uncertain agent: nominal plus polytope vertices. B and C are shared; only
// A varies over the polytope.
struct PolytopicAgent {
  StateSpace nominal;
  std::vector<Mat> vertex_a;

  PolytopicAgent() = default;
  PolytopicAgent(StateSpace nom, std::vector<Mat> vertices);

  // Entrywise box from vertex min/max (sampling precondition).
  bool is_entrywise_box() const;
  Mat box_lo() const;
  Mat box_hi() const;
};

// Builds the 2^k vertex set for independent +-frac perturbations of the
// entries of a nominal A (one vertex per sign pattern).
std::vector<Mat> box_vertices(const Mat& nominal_a, double frac);

// Fixed plant interconnection: N x N blocks, block (i,j) of size m_i x l_j,
// diagonal blocks identically zero.
struct NetworkTopology {
  BlockMat h;

  NetworkTopology() = default;
  explicit NetworkTopology(BlockMat hm);
  int agents() const { return h.rows.count(); }
};

// Global interconnection [[H, Hy_hat],[Hy, 0]] over 2N x 2N blocks. The
// (1,1) super-block is the fixed plant H, the (2,2) super-block is
// identically zero; only the off-diagonal super-blocks are designable.
struct GlobalInterconnection {
  BlockMat hbar;
  int n_agents = 0;

  GlobalInterconnection() = default;
  GlobalInterconnection(const NetworkTopology& topo, const Mat& hy, const Mat& hyhat);

  Mat hy() const;      // controller input routing (l x l overall)
  Mat hyhat() const;   // controller output routing (m x m overall)
  Mat plant_h() const;

  bool designable(int bi, int bj) const;
  // Designable blocks in H tilde_y / tilde_yhat coordinates.
  BlockPartition out_part() const;  // (l_1..l_N, m_1..m_N), column blocks
  BlockPartition in_part() const;   // (m_1..m_N, l_1..l_N), row blocks
};

struct NetworkProblem {
  std::vector<PolytopicAgent> agents;
  NetworkTopology topology;

  int n_agents() const { return static_cast<int>(agents.size()); }
  std::vector<int> state_dims() const;
  std::vector<int> input_dims() const;
  std::vector<int> output_dims() const;
};

struct ControllerNetwork {
  std::vector<StateSpace> local;  // controller i: input dim l_i, output dim m_i
  Mat hy;                         // l x l routing of plant outputs into controllers
  Mat hyhat;                      // m x m routing of controller outputs into plants
};

// Block-diagonal aggregates.
Mat blkdiag(const std::vector<Mat>& blocks);

// Lemma-style well-posedness: I - Dd*Hu invertible, where Dd is the
// block-diagonal of the controllers' D matrices and Hu the inter-controller
// feedback gain.
bool well_posed(const std::vector<StateSpace>& controllers, const Mat& hu);

// Closed-loop realization of the controller network with inter-controller
// feedback hu, input gain hy and output gain hyhat.
StateSpace interconnect(const std::vector<StateSpace>& controllers, const Mat& hu,
                        const Mat& hy, const Mat& hyhat);

// Structure matrices of the plant/controller closed loop. The controller
// bank enters only through the aggregate bank matrix, so the closed loop is
// affine in it given fixed routing.
struct ClosedLoopParts {
  Mat a_base, b_base, c_base;     // controller-independent parts
  Mat b_route, c_route;           // state-side routing of the bank
  Mat out_route, in_route;        // output/input-side routing
  int nx = 0, nu = 0, ny = 0, nk_rows = 0, nk_cols = 0;
};

Mat bank_matrix(const std::vector<StateSpace>& controllers);

ClosedLoopParts closed_loop_parts(const std::vector<StateSpace>& plants, const Mat& h,
                                  const std::vector<StateSpace>& controllers,
                                  const Mat& hy, const Mat& hyhat,
                                  bool exo_premixed = false);

StateSpace assemble_closed_loop(const ClosedLoopParts& parts, const Mat& bank);

StateSpace closed_loop(const std::vector<StateSpace>& plants, const Mat& h,
                       const std::vector<StateSpace>& controllers, const Mat& hy,
                       const Mat& hyhat, bool exo_premixed = false);

// Uniformly sampled vector signal; column k is the sample at time k*dt.
struct SampledSignal {
  double dt = 0.0;
  Mat samples;

  static SampledSignal zero(int dim, double dt, double t_final);
  static SampledSignal step(int dim, double dt, double t_final, double level = 1.0);
  int count() const { return static_cast<int>(samples.cols()); }
  Vec at(double t) const;  // linear interpolation, clamped at the ends
};

struct Trajectory {
  double dt = 0.0;
  Mat states;   // column k = x(k*dt)
  Mat outputs;  // column k = y(k*dt)
};

// Fixed-step RK4 integration from zero or given initial state.
Trajectory simulate(const StateSpace& ss, const SampledSignal& input, double dt,
                    double t_final, const Vec& x0 = Vec());

// Uniform sample of A inside the agent's entrywise box; B, C copied from the
// nominal. Deterministic per seed.
StateSpace sample_uncertain(const PolytopicAgent& agent, std::uint64_t seed);

// Deterministic uniform double in [0,1) from a 64-bit generator, independent
// of the standard library's distribution implementation.
double uniform01(std::uint64_t raw);

// Model serialization (agents, topology, optional controller network).
std::string to_text(const NetworkProblem& problem, const ControllerNetwork* ctrl = nullptr);
NetworkProblem problem_from_text(const std::string& text,
                                 std::optional<ControllerNetwork>* ctrl_out = nullptr);
void save_problem(const NetworkProblem& problem, const std::string& path,
                  const ControllerNetwork* ctrl = nullptr);
NetworkProblem load_problem(const std::string& path,
                            std::optional<ControllerNetwork>* ctrl_out = nullptr);

}  // namespace netsynth::plant

#pragma once

// Sparsity promotion over the designable interconnection blocks: weighted
// l1 and block-cardinality penalties, the exact proximal shrinkage of the
// cardinality penalty, the ADMM splitting loop and the single-solve weighted
// l1 route.

#include <vector>

#include "netsynth/ico.hpp"

namespace netsynth::sparsity {

using ico::FeasiblePoint;
using ico::SparsityPattern;

// Designable-block views of the routing pair (hy: l_i x l_j blocks,
// hyhat: m_i x m_j blocks).
struct BlockGrid {
  std::vector<int> l_i, m_i;

  static BlockGrid of(const plant::NetworkProblem& problem);
  int agents() const { return static_cast<int>(l_i.size()); }
  Mat hy_block(const Mat& hy, int i, int j) const;
  Mat hyhat_block(const Mat& hyhat, int i, int j) const;
  void set_hy_block(Mat& hy, int i, int j, const Mat& b) const;
  void set_hyhat_block(Mat& hyhat, int i, int j, const Mat& b) const;
};

// Weighted l1 value: sum over designable blocks of
// min{ ||block||_F^{-1}, eps_l^{-1} } * ||block||_F.
double weighted_l1(const BlockGrid& g, const Mat& hy, const Mat& hyhat, double eps_l);

// Number of designable blocks with Frobenius norm above tol.
int cardinality(const BlockGrid& g, const Mat& hy, const Mat& hyhat, double tol = 1e-8);

// Hard threshold: keep a block iff its norm exceeds sqrt(2*gamma/rho).
void shrink_blocks(const BlockGrid& g, Mat& hy, Mat& hyhat, double gamma, double rho);

// General block-matrix variant; blocks where designable(i,j) is false are
// copied unchanged.
plant::BlockMat shrink_blocks(const plant::BlockMat& v,
                              const std::function<bool(int, int)>& designable,
                              double gamma, double rho);

SparsityPattern pattern_from(const BlockGrid& g, const Mat& hy, const Mat& hyhat,
                             double tol = 1e-12);

struct SparsityOptions {
  double gamma = 0.1;
  double rho = 1000.0;
  double eps_p = 1e-3;
  double eps_d = 1e-3;
  double eps_l = 1e-3;
  int max_iters = 500;
  int l1_reweight_iters = 1;  // >1: re-linearize and re-weight between solves
  ico::SynthMargins margins;
  conic::SolveOptions solver;
  bool verbose = false;
};

struct SparsityResult {
  FeasiblePoint point;      // unprojected iterate (base + delta of last solve)
  SparsityPattern pattern;  // support of the consensus/thresholded routing
  int iterations = 0;
  double r_primal = 0.0;
  double r_dual = 0.0;
  bool clean = true;        // false when a solver failure degraded the run
  std::string message;
};

// Cardinality penalty via ADMM splitting on the routing blocks.
SparsityResult admm_run(const plant::NetworkProblem& problem, const FeasiblePoint& base,
                        const SparsityOptions& opts);

// Weighted l1 penalty: convex solves with weights frozen at the current
// base; a single solve by default, optionally reweighted.
SparsityResult l1_run(const plant::NetworkProblem& problem, const FeasiblePoint& base,
                      const SparsityOptions& opts);
SparsityResult l1_solve_once(const plant::NetworkProblem& problem,
                             const FeasiblePoint& base, const SparsityOptions& opts);

}  // namespace netsynth::sparsity

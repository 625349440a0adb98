#include "netsynth/sparsity.hpp"

#include <cmath>
#include <cstdio>

namespace netsynth::sparsity {

using conic::LmiExpr;
using conic::VarRef;

BlockGrid BlockGrid::of(const plant::NetworkProblem& problem) {
  BlockGrid g;
  g.l_i = problem.output_dims();
  g.m_i = problem.input_dims();
  return g;
}

namespace {
int offset_of(const std::vector<int>& dims, int i) {
  int o = 0;
  for (int k = 0; k < i; ++k) o += dims[k];
  return o;
}
}  // namespace

Mat BlockGrid::hy_block(const Mat& hy, int i, int j) const {
  return hy.block(offset_of(l_i, i), offset_of(l_i, j), l_i[i], l_i[j]);
}
Mat BlockGrid::hyhat_block(const Mat& hyhat, int i, int j) const {
  return hyhat.block(offset_of(m_i, i), offset_of(m_i, j), m_i[i], m_i[j]);
}
void BlockGrid::set_hy_block(Mat& hy, int i, int j, const Mat& b) const {
  hy.block(offset_of(l_i, i), offset_of(l_i, j), l_i[i], l_i[j]) = b;
}
void BlockGrid::set_hyhat_block(Mat& hyhat, int i, int j, const Mat& b) const {
  hyhat.block(offset_of(m_i, i), offset_of(m_i, j), m_i[i], m_i[j]) = b;
}

double weighted_l1(const BlockGrid& g, const Mat& hy, const Mat& hyhat, double eps_l) {
  require(eps_l > 0, "weighted_l1: eps_l must be positive");
  double total = 0.0;
  for (int i = 0; i < g.agents(); ++i)
    for (int j = 0; j < g.agents(); ++j) {
      for (const double nrm : {g.hy_block(hy, i, j).norm(), g.hyhat_block(hyhat, i, j).norm()}) {
        if (nrm == 0.0) continue;
        total += std::min(1.0 / nrm, 1.0 / eps_l) * nrm;
      }
    }
  return total;
}

int cardinality(const BlockGrid& g, const Mat& hy, const Mat& hyhat, double tol) {
  require(tol >= 0, "cardinality: tol must be nonnegative");
  int count = 0;
  for (int i = 0; i < g.agents(); ++i)
    for (int j = 0; j < g.agents(); ++j) {
      if (g.hy_block(hy, i, j).norm() > tol) ++count;
      if (g.hyhat_block(hyhat, i, j).norm() > tol) ++count;
    }
  return count;
}

void shrink_blocks(const BlockGrid& g, Mat& hy, Mat& hyhat, double gamma, double rho) {
  require(gamma >= 0 && rho > 0, "shrink_blocks: gamma >= 0, rho > 0 required");
  const double threshold = std::sqrt(2.0 * gamma / rho);
  for (int i = 0; i < g.agents(); ++i)
    for (int j = 0; j < g.agents(); ++j) {
      if (g.hy_block(hy, i, j).norm() <= threshold)
        g.set_hy_block(hy, i, j, Mat::Zero(g.l_i[i], g.l_i[j]));
      if (g.hyhat_block(hyhat, i, j).norm() <= threshold)
        g.set_hyhat_block(hyhat, i, j, Mat::Zero(g.m_i[i], g.m_i[j]));
    }
}

plant::BlockMat shrink_blocks(const plant::BlockMat& v,
                              const std::function<bool(int, int)>& designable,
                              double gamma, double rho) {
  require(gamma >= 0 && rho > 0, "shrink_blocks: gamma >= 0, rho > 0 required");
  plant::BlockMat out = v;
  const double threshold = std::sqrt(2.0 * gamma / rho);
  for (int i = 0; i < v.rows.count(); ++i)
    for (int j = 0; j < v.cols.count(); ++j) {
      if (!designable(i, j)) continue;
      if (out.block(i, j).norm() <= threshold)
        out.set_block(i, j, Mat::Zero(v.rows.size(i), v.cols.size(j)));
    }
  return out;
}

SparsityPattern pattern_from(const BlockGrid& g, const Mat& hy, const Mat& hyhat,
                             double tol) {
  SparsityPattern p;
  const int n = g.agents();
  p.hy = conic::BoolMat::Constant(n, n, false);
  p.hyhat = conic::BoolMat::Constant(n, n, false);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      p.hy(i, j) = g.hy_block(hy, i, j).norm() > tol;
      p.hyhat(i, j) = g.hyhat_block(hyhat, i, j).norm() > tol;
    }
  return p;
}

SparsityResult admm_run(const plant::NetworkProblem& problem, const FeasiblePoint& base,
                        const SparsityOptions& opts) {
  require(opts.rho > 0 && opts.gamma >= 0, "admm_run: rho > 0, gamma >= 0 required");
  const BlockGrid grid = BlockGrid::of(problem);
  const auto dense = SparsityPattern::dense(problem.n_agents());

  SparsityResult res;
  res.point = base;

  Mat z_hy = base.hy, z_hyhat = base.hyhat;
  Mat lam_hy = Mat::Zero(z_hy.rows(), z_hy.cols());
  Mat lam_hyhat = Mat::Zero(z_hyhat.rows(), z_hyhat.cols());
  Mat cur_hy = base.hy, cur_hyhat = base.hyhat;

  for (int it = 0; it < opts.max_iters; ++it) {
    res.iterations = it + 1;
    conic::ConicProblem prob;
    auto vars = ico::compose_constraints(prob, problem, base, dense, opts.margins);
    prob.add_objective(vars.nu, 1.0);
    for (const auto& dk : vars.d_bank)
      prob.add_quadratic_objective(dk, 2e-6, Mat::Zero(dk.rows, dk.cols));
    prob.add_quadratic_objective(vars.d_hy, opts.rho, Mat(base.hy - z_hy + lam_hy));
    prob.add_quadratic_objective(vars.d_hyhat, opts.rho, Mat(base.hyhat - z_hyhat + lam_hyhat));

    auto sol = prob.solve(opts.solver);
    if (sol.status != conic::SolveStatus::Optimal) {
      res.clean = false;
      res.message = "solver failure at admm iteration " + std::to_string(it) + ": " +
                    sol.message;
      break;
    }
    res.point = ico::apply_solution(base, vars, sol.values);
    cur_hy = res.point.hy;
    cur_hyhat = res.point.hyhat;

    Mat v_hy = cur_hy + lam_hy;
    Mat v_hyhat = cur_hyhat + lam_hyhat;
    const Mat z_hy_prev = z_hy, z_hyhat_prev = z_hyhat;
    z_hy = v_hy;
    z_hyhat = v_hyhat;
    shrink_blocks(grid, z_hy, z_hyhat, opts.gamma, opts.rho);

    lam_hy += cur_hy - z_hy;
    lam_hyhat += cur_hyhat - z_hyhat;

    const double znorm =
        std::max(1e-12, std::hypot(z_hy.norm(), z_hyhat.norm()));
    res.r_primal = std::hypot((cur_hy - z_hy).norm(), (cur_hyhat - z_hyhat).norm()) / znorm;
    res.r_dual =
        std::hypot((z_hy - z_hy_prev).norm(), (z_hyhat - z_hyhat_prev).norm()) / znorm;
    if (opts.verbose)
      std::fprintf(stderr, "  admm it=%3d nu=%.4f rp=%.3e rd=%.3e nnz=%d\n", it,
                   res.point.nu, res.r_primal, res.r_dual,
                   cardinality(grid, z_hy, z_hyhat, 1e-12));
    if (res.r_primal <= opts.eps_p && res.r_dual <= opts.eps_d) break;
  }
  res.pattern = pattern_from(grid, z_hy, z_hyhat);
  return res;
}

SparsityResult l1_run(const plant::NetworkProblem& problem, const FeasiblePoint& base,
                      const SparsityOptions& opts) {
  SparsityResult res;
  res.point = base;
  FeasiblePoint current = base;
  const int rounds = std::max(1, opts.l1_reweight_iters);
  for (int round = 0; round < rounds; ++round) {
    SparsityResult step = l1_solve_once(problem, current, opts);
    res.iterations = round + 1;
    if (!step.clean) {
      if (round == 0) return step;
      res.message = step.message;
      break;
    }
    current = step.point;
    res.point = step.point;
    res.pattern = step.pattern;
    res.clean = true;
  }
  res.pattern = pattern_from(BlockGrid::of(problem), res.point.hy, res.point.hyhat, 1e-8);
  return res;
}

SparsityResult l1_solve_once(const plant::NetworkProblem& problem,
                             const FeasiblePoint& base, const SparsityOptions& opts) {
  const BlockGrid grid = BlockGrid::of(problem);
  const auto dense = SparsityPattern::dense(problem.n_agents());
  const int n = problem.n_agents();

  SparsityResult res;
  res.point = base;

  conic::ConicProblem prob;
  auto vars = ico::compose_constraints(prob, problem, base, dense, opts.margins);
  prob.add_objective(vars.nu, 1.0);
  for (const auto& dk : vars.d_bank)
    prob.add_quadratic_objective(dk, 2e-6, Mat::Zero(dk.rows, dk.cols));

  // epigraph variables per designable block, weights frozen at the base
  struct Epi {
    VarRef t;
    double weight;
  };
  std::vector<Epi> epis;
  auto add_block_epi = [&](const Mat& base_block, const VarRef& dvar, int row_off,
                           int col_off, int rows, int cols, const std::string& name) {
    const double bn = base_block.norm();
    const double w = std::min(bn > 0 ? 1.0 / bn : 1.0 / opts.eps_l, 1.0 / opts.eps_l);
    VarRef t = prob.add_scalar_var(name);
    const int len = rows * cols;
    // [[t, vec(block)'],[vec(block), t I]] >= 0 with block = base + delta
    Mat cst = Mat::Zero(1 + len, 1 + len);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) {
        cst(0, 1 + c * rows + r) = base_block(r, c);
        cst(1 + c * rows + r, 0) = base_block(r, c);
      }
    LmiExpr e = conic::affine(cst);
    e.add_scaled_identity_term(t, Mat(0.5 * Mat::Identity(1 + len, 1 + len)),
                               Mat::Identity(1 + len, 1 + len));
    prob.set_initial(t, Mat::Constant(1, 1, bn + 1.0));
    // delta entries: e(0, 1+k) += delta(row_off + r, col_off + c)
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) {
        Mat left = Mat::Zero(1 + len, dvar.rows);
        left(0, row_off + r) = 1.0;
        Mat right = Mat::Zero(dvar.cols, 1 + len);
        right(col_off + c, 1 + c * rows + r) = 1.0;
        e.add_he_term(dvar, left, right);
      }
    prob.add_posdef(e, 0.0, name);
    epis.push_back({t, w});
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      add_block_epi(grid.hy_block(base.hy, i, j), vars.d_hy, offset_of(grid.l_i, i),
                    offset_of(grid.l_i, j), grid.l_i[i], grid.l_i[j],
                    "t_hy" + std::to_string(i) + "_" + std::to_string(j));
      add_block_epi(grid.hyhat_block(base.hyhat, i, j), vars.d_hyhat,
                    offset_of(grid.m_i, i), offset_of(grid.m_i, j), grid.m_i[i],
                    grid.m_i[j], "t_hyhat" + std::to_string(i) + "_" + std::to_string(j));
    }
  for (const auto& epi : epis) prob.add_objective(epi.t, opts.gamma * epi.weight);

  auto sol = prob.solve(opts.solver);
  if (sol.status != conic::SolveStatus::Optimal) {
    res.clean = false;
    res.message = "solver failure in l1 solve: " + sol.message;
    res.pattern = pattern_from(grid, base.hy, base.hyhat);
    return res;
  }
  res.point = ico::apply_solution(base, vars, sol.values);
  res.iterations = 1;
  res.pattern = pattern_from(grid, res.point.hy, res.point.hyhat, 1e-8);
  return res;
}

}  // namespace netsynth::sparsity

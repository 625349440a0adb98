#pragma once

// Iterative convex overbounding: a symbolic engine that turns multilinear
// matrix-inequality expressions into one-shot LMIs around a feasible base
// point, plus the composed synthesis constraint set and the descent loop.
//
// The engine works on symmetric expressions written as sums of embedded
// products He(E_r * coeff * F1 F2 ... Fk * E_c'), where each factor is a
// constant or a synthesis variable. Variables are Taylor-split at the base
// point; residual products with two or more perturbation factors are removed
// pairwise in a caller-given order, each step appending a bordered block so
// that feasibility of the final LMI implies the original inequality at the
// perturbed point, with equality of feasibility at zero perturbation.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netsynth/conic.hpp"
#include "netsynth/dissipativity.hpp"
#include "netsynth/plant.hpp"

namespace netsynth::ico {

using conic::LmiExpr;
using conic::VarRef;

// Synthesis variable: base value plus conic perturbation variable.
struct Symbol {
  int id = -1;
  Mat base;
  VarRef delta;
  bool has_delta = true;  // false: held fixed at base (no perturbation)
};

struct ProductFactor {
  bool is_const = true;
  Mat c;
  int sym = -1;
  bool transposed = false;

  static ProductFactor constant(const Mat& m) { return {true, m, -1, false}; }
  static ProductFactor symbol(int id, bool t = false) { return {false, Mat(), id, t}; }
};

class OverboundBuilder {
 public:
  explicit OverboundBuilder(int base_dim);

  int add_symbol(const Mat& base, const VarRef& delta);
  int add_fixed_symbol(const Mat& base);  // participates in products, never perturbed

  // Adds He(E_r * coeff * f1 ... fk * E_c') on the base block grid (single
  // block 0 for now; rblk = cblk = 0).
  void add_product(double coeff, const std::vector<ProductFactor>& factors);
  // Adds a symmetric constant block to the body.
  void add_body_constant(const Mat& sym);

  // Value of the original (un-overbounded) expression at given symbol values
  // (missing ids evaluate at base).
  Mat eval_original(const std::map<int, Mat>& symbol_values) const;

  // Sequentially removes residual products in the given symbol order
  // (repeated passes allowed); returns the augmented LMI over the conic
  // perturbation variables. Throws if bilinearity survives.
  LmiExpr run(const std::vector<int>& order);

  int augmented_dim() const { return aug_dim_; }

 private:
  struct Factor {
    bool is_const;
    Mat c;
    int sym;
    bool transposed;
  };
  struct Mono {
    int rblk, cblk;
    double coeff;
    std::vector<Factor> chain;  // canonical: constants merged, no empty chain
    int degree;
  };

  int factor_rows(const Factor& f) const;
  int factor_cols(const Factor& f) const;
  static std::vector<Factor> flip_chain(const std::vector<Factor>& c);
  void push_mono(Mono m);
  void merge_monos();

  std::vector<Symbol> symbols_;
  std::vector<int> block_dims_;
  int aug_dim_ = 0;

  std::vector<Mono> monos_;                      // Taylor-expanded (delta chains)
  std::vector<std::pair<double, std::vector<ProductFactor>>> original_;
  Mat body_const_;
};

// Single overbounding step data: Q + He(X N Y) with X, Y synthesis variables.
struct BmiTerm {
  Mat q;       // symmetric constant
  Mat x_base;
  VarRef x_delta;
  Mat n;       // fixed middle factor
  Mat y_base;
  VarRef y_delta;
};

// One-shot bordered LMI implying q + He(X N Y) < 0 at (x_base + dx,
// y_base + dy); feasibility at zero perturbation equals base feasibility.
LmiExpr overbound(const BmiTerm& term);

// ---------------------------------------------------------------------------

// Complete iterate of the synthesis: controllers, routing, certificates.
struct FeasiblePoint {
  std::vector<plant::StateSpace> controllers;
  Mat hy;     // l x l
  Mat hyhat;  // m x m
  Mat y;      // closed-loop Lyapunov variable
  double nu = 0.0;
  std::vector<Mat> p_agent;
  std::vector<diss::QsrTriple> agent_triples;
  std::vector<Mat> p_ctrl;
  std::vector<diss::QsrTriple> ctrl_triples;
};

struct VerifyReport {
  bool ok = false;
  double hinf_margin = 0.0;   // -lambda_max of the bounded-real matrix
  double kyp_margin = 0.0;    // worst over agents and vertices
  double ctrl_margin = 0.0;   // worst over controllers
  double ndt_margin = 0.0;
  double y_min_eig = 0.0;
  double p_min_eig = 0.0;
  std::string detail;
};

// Margins used when enforcing the synthesis constraint families.
struct SynthMargins {
  double strict = 1e-7;   // scaled inside by constant norms
  double semidef = 1e-9;
};

// Checks the original (non-overbounded) constraint families at fp.
VerifyReport verify_point(const plant::NetworkProblem& problem, const FeasiblePoint& fp,
                          double tol = 1e-9);

// Decision-variable handles created by compose_constraints.
struct SynthVars {
  std::vector<VarRef> d_bank;   // per-controller bank perturbation
  VarRef d_hy, d_hyhat;
  VarRef d_y;
  VarRef nu;
  std::vector<VarRef> d_p_agent, d_q_agent, d_s_agent, d_r_agent;
  std::vector<VarRef> d_p_ctrl, d_q_ctrl, d_s_ctrl, d_r_ctrl;
};

// Boolean block mask over the designable routing blocks (hy: l-blocks x
// l-blocks, hyhat: m-blocks x m-blocks).
struct SparsityPattern {
  conic::BoolMat hy;     // n_agents x n_agents, block granularity
  conic::BoolMat hyhat;

  static SparsityPattern dense(int n_agents);
  static SparsityPattern decentralized(int n_agents);
  int nonzero_blocks() const;
  bool contains(const SparsityPattern& other) const;  // other subset of this
};

// Builds the full overbounded constraint set around fp into prob:
// bounded-real (sequentially overbounded), vertex KYP inequalities, the
// controller dissipativity inequalities (overbounded), the network stability
// inequality (overbounded), and positivity of Y and the storages. The
// perturbations of hy/hyhat are masked to the pattern; pattern blocks where
// the base is zero stay zero.
SynthVars compose_constraints(conic::ConicProblem& prob,
                              const plant::NetworkProblem& problem,
                              const FeasiblePoint& fp, const SparsityPattern& pattern,
                              const SynthMargins& margins = SynthMargins(),
                              bool with_dissipativity = true);

// Applies a solved assignment to fp.
FeasiblePoint apply_solution(const FeasiblePoint& fp, const SynthVars& vars,
                             const std::map<int, Mat>& values);

struct IcoOptions {
  double epsilon = 1e-3;     // relative cost decrease threshold
  int max_iters = 30;
  SynthMargins margins;
  conic::SolveOptions solver;
  bool verbose = false;
  bool with_dissipativity = true;   // false: bounded-real machinery only
  bool allow_infeasible_start = false;  // let the first solve restore feasibility
};

struct IcoTraceRow {
  int iteration = 0;
  double nu = 0.0;
  double worst_constraint_eig = 0.0;
  double delta_bank = 0.0, delta_h = 0.0, delta_y = 0.0;
};

struct IcoResult {
  FeasiblePoint point;
  std::vector<IcoTraceRow> trace;
  bool converged = false;
  std::string message;
};

// Structured descent: repeatedly solve the overbounded problem at the
// current point, minimizing nu, until the relative decrease drops below
// epsilon. Solver failures return the last verified point.
IcoResult ico_iterate(const plant::NetworkProblem& problem, const FeasiblePoint& base,
                      const SparsityPattern& pattern, const IcoOptions& opts = IcoOptions());

}  // namespace netsynth::ico

#pragma once

// End-to-end synthesis: local LQG-based initialization with gain escalation,
// certification of fixed points, the centralized solve, sparsity promotion
// and the structured descent stage.

#include <optional>
#include <string>

#include "netsynth/ico.hpp"
#include "netsynth/sparsity.hpp"

namespace netsynth::pipeline {

using ico::FeasiblePoint;
using ico::SparsityPattern;

enum class Penalty { WeightedL1, Cardinality };

struct SynthesisConfig {
  Penalty penalty = Penalty::Cardinality;
  double gamma = 0.1;
  double rho = 1000.0;
  double eps = 1e-3;    // structured-descent relative decrease threshold
  double eps_p = 1e-3;
  double eps_d = 1e-3;
  double eps_l = 1e-3;
  int admm_max_iters = 500;
  int ico_max_iters = 30;
  int l1_reweight_iters = 1;

  // initialization
  double lqg_state_weight = 100.0;
  double lqg_input_weight = 1.0;
  double ctrl_scale = 1e-3;
  double feedforward = -10.0;
  int escalation_steps = 10;

  ico::SynthMargins margins;
  conic::SolveOptions solver;
  std::uint64_t seed = 0;
  bool verbose = false;
  std::string dump_dir;  // per-solve conic dumps when set
};

// Per-agent LQG controller with output scaling and added feedforward.
plant::StateSpace local_controller(const plant::StateSpace& agent, double state_weight,
                                   double input_weight, double scale, double feedforward);

// Certifies a fixed (controllers, hy, hyhat): finds (Y, nu) plus all storage
// matrices and supply-rate triples by one linear solve; nu is minimized.
std::optional<FeasiblePoint> certify_fixed(const plant::NetworkProblem& problem,
                                           const std::vector<plant::StateSpace>& controllers,
                                           const Mat& hy, const Mat& hyhat,
                                           const SynthesisConfig& cfg,
                                           std::string* fail_reason = nullptr);

struct InitResult {
  bool ok = false;
  FeasiblePoint point;
  int escalations = 0;
  double feedforward_used = 0.0;
  std::string message;
};

// Decentralized initialization: identity routing, scaled LQG with
// feedforward, doubling the feedforward gain until a certificate exists.
InitResult init_local(const plant::NetworkProblem& problem, const SynthesisConfig& cfg);

// One dense overbounded solve from the given point; returns the input point
// on solver failure.
FeasiblePoint centralize(const plant::NetworkProblem& problem, const FeasiblePoint& point,
                         const SynthesisConfig& cfg, std::string* message = nullptr);

struct SynthesisResult {
  bool ok = false;
  FeasiblePoint point;
  SparsityPattern pattern;
  double nu_init = 0.0;
  double nu_centralized = 0.0;
  double nu_after_sparsity = 0.0;
  double nu_final = 0.0;
  int nonzero_blocks = 0;
  int admm_iterations = 0;
  double r_primal = 0.0, r_dual = 0.0;
  std::vector<ico::IcoTraceRow> trace;  // structured-descent trace
  std::vector<ico::IcoTraceRow> dense_trace;
  std::string message;
};

// Full pipeline: init -> centralized descent -> sparsity promotion ->
// projection and re-certification -> structured descent.
SynthesisResult run(const plant::NetworkProblem& problem, const SynthesisConfig& cfg);

// Sparsity promotion and structured descent from an existing centralized
// point (shared across sweep gammas).
SynthesisResult run_from_central(const plant::NetworkProblem& problem,
                                 const SynthesisConfig& cfg, const FeasiblePoint& central,
                                 double nu_init);

// Nominal-model baseline: dense output-feedback design minimizing nu with the
// bounded-real machinery only (no dissipativity certificates).
struct BaselineResult {
  bool ok = false;
  std::vector<plant::StateSpace> controllers;
  Mat hy, hyhat;
  double nu = 0.0;
  std::string message;
};
BaselineResult nominal_hinf_baseline(const plant::NetworkProblem& problem,
                                     const SynthesisConfig& cfg);

}  // namespace netsynth::pipeline

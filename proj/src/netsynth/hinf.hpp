#pragma once

// Bounded-real machinery on a fixed closed loop: the 3x3 block inequality in
// (Y, nu) and its minimization, cross-validated against the Hamiltonian
// bisection oracle in numlin.

#include "netsynth/conic.hpp"
#include "netsynth/plant.hpp"

namespace netsynth::hinf {

struct HinfCertificate {
  Mat y;        // Lyapunov variable, positive definite
  double nu = 0.0;
};

// [[He(Y A), Y B, C'],[*, -nu I, D'],[*, *, -nu I]] as an expression in the
// decision variables (Y, nu) for a fixed system.
conic::LmiExpr bounded_real_expr(const plant::StateSpace& ss, const conic::VarRef& y,
                                 const conic::VarRef& nu);

// Same matrix for fixed numeric (Y, nu).
Mat bounded_real_matrix(const plant::StateSpace& ss, const Mat& y, double nu);

struct MinHinfResult {
  conic::SolveStatus status = conic::SolveStatus::NumericalFailure;
  HinfCertificate cert;
  std::string message;
};

// Minimizes nu subject to the bounded-real inequality and Y > 0.
MinHinfResult min_hinf(const plant::StateSpace& ss,
                       const conic::SolveOptions& opts = conic::SolveOptions());

}  // namespace netsynth::hinf

#pragma once

#include "uqmpc/matrix.hpp"

namespace uqmpc {

/// minimise 0.5 z'H z + g'z  subject to  Ain z <= bin,  Aeq z = beq.
/// H must be symmetric (within 1e-10) and positive definite.
struct QuadraticProgram {
  Matrix H;
  Vector g;
  Matrix Ain;   // may be empty
  Vector bin;
  Matrix Aeq;   // may be empty
  Vector beq;
};

enum class QpStatus { Optimal, Infeasible };

struct QpResult {
  QpStatus status = QpStatus::Infeasible;
  Vector point;
  double value = 0.0;
  std::vector<int> active;  // indices of active inequality rows, ascending
};

/// Primal active-set method. A phase-1 LP decides feasibility and provides
/// the starting point, so infeasibility comes with a simplex certificate
/// rather than an iteration-divergence heuristic. Each subproblem is a dense
/// KKT solve; working-set changes use lowest-index tie-breaking, making the
/// iteration sequence deterministic.
///
/// Throws NotPositiveDefinite if H fails a Cholesky factorisation and
/// IterationLimit after 10*(rows+cols)^2 working-set changes.
QpResult solve_qp(const QuadraticProgram& qp);

}  // namespace uqmpc

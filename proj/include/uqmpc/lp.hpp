#pragma once

#include <optional>

#include "uqmpc/matrix.hpp"

namespace uqmpc {

/// maximise c'z  subject to  A z <= b  and optional per-variable bounds.
/// Variables without bounds are free.
struct LinearProgram {
  Vector c;
  Matrix A;
  Vector b;
  std::vector<std::optional<double>> lower;  // empty means all unbounded below
  std::vector<std::optional<double>> upper;  // empty means all unbounded above
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vector point;        // valid when Optimal
  double value = 0.0;  // c'point when Optimal
};

/// Two-phase dense tableau simplex. Constraint rows are equilibrated to
/// unit scale; pricing is Dantzig with lowest-index tie-breaking, falling
/// back to Bland's rule for the duration of a degenerate streak so cycling
/// cannot occur. The pivot sequence is a pure function of the input.
/// Infeasibility is certified by a positive phase-1 optimum, unboundedness
/// by a costed column with no positive pivot entry in phase 2.
///
/// Feasibility tolerance 1e-8, reduced-cost tolerance 1e-9. Throws
/// IterationLimit after 10*(rows+cols)^2 pivots per phase.
LpResult solve_lp(const LinearProgram& lp);

}  // namespace uqmpc

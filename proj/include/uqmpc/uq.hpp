#pragma once

#include <iosfwd>

#include "uqmpc/polytope.hpp"

namespace uqmpc {

/// Ordered disturbance realisations, offline batch plus online additions.
/// Every sample is validated against the conservative set W on entry; a
/// sample outside W contradicts the standing disturbance-model assumption
/// and must surface as an error rather than be projected away.
struct DisturbanceLog {
  std::vector<Vector> samples;
};

/// w = x_next - A x - B u; appends, throwing SampleOutsideW when the
/// residual leaves W.
void record_disturbance(DisturbanceLog& log, const Vector& x_next, const Vector& x,
                        const Vector& u, const Matrix& A, const Matrix& B, const Polytope& W);

void append_sample(DisturbanceLog& log, const Vector& w, const Polytope& W);

/// Result of a scenario quantification: the LP variables (y, beta) and the
/// recovered homothet parameters (v, alpha) with alpha = 1 - beta and
/// v = y / beta (v = 0 in the degenerate beta = 0 case, where the homothet
/// is all of W regardless of the center).
struct ScenarioSolution {
  Vector y;
  double beta = 0.0;
  Vector v;
  double alpha = 1.0;
};

QuantifiedSet to_quantified_set(const ScenarioSolution& s, const Polytope& W);

/// Smallest homothet of W containing every logged sample: solves
///   max beta  s.t.  -V y <= (1-beta) 1 - V w^s  for all samples,
///                    V y <= beta 1,  beta in [0,1].
/// The sample constraints differ only in their right-hand side, so they are
/// aggregated per facet (max of V_i w^s over samples) before the LP; the
/// feasible set is unchanged and the solve cost is independent of the
/// sample count.
ScenarioSolution quantify_batch(const DisturbanceLog& log, const Polytope& W);

/// Nested single-sample update. Returns prev unchanged when w_new already
/// lies in the previous homothet; otherwise solves
///   max beta  s.t.  -V y <= (1-beta-alpha') 1 - (1-alpha') V v',
///                   -V y <= (1-beta) 1 - V w_new,
///                    V y <= beta 1,  beta in [0,1]
/// with (v', alpha') the previous solution, which enforces both nesting and
/// coverage of the new sample.
ScenarioSolution quantify_recursive(const ScenarioSolution& prev, const Vector& w_new,
                                    const Polytope& W);

/// Sample-count bound ceil((1/eps) e/(e-1) (ln(1/gamma) + n_x)) that makes
/// the quantified set miss fresh draws with probability at most eps, at
/// confidence 1-gamma.
int sample_complexity(double eps, double gamma, int n_x);

void write_samples_csv(std::ostream& os, const DisturbanceLog& log);
DisturbanceLog read_samples_csv(std::istream& is, const Polytope& W);

}  // namespace uqmpc

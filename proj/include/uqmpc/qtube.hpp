#pragma once

#include "uqmpc/tube.hpp"
#include "uqmpc/uq.hpp"

namespace uqmpc {

/// Tube cross-section for a quantified disturbance set, derived in closed
/// form from the offline tube: the set alpha*S translated by
/// t = (1-alpha)(I-Phi)^{-1} v. No set recomputation happens online.
struct QuantifiedTube {
  Vector v;
  double alpha = 1.0;
  Vector translate;  // t above
  Vector h_star;     // per-row tightening over the translated homothet
  double zeta = 1.0;
  int nu_k = 0;
};

/// Geometry only: translate and scale.
QuantifiedTube update_tube(const TubeArtifacts& ta, const ScenarioSolution& qs);

/// Closed-form per-row support of the scaled-and-translated tube:
/// h*[j] = alpha h_s[j] + (F+GK)_j t, exactly the LP value over the homothet.
Vector tightening_hstar(const TubeArtifacts& ta, const QuantifiedTube& qt);

/// Constraint-checking horizon for the quantified problem. Starting from
/// nu_s, increments nu while the ellipsoid sufficient condition
///   zeta^2 (Fbar Psi^{nu+1})_j P_s^{-1} (Fbar Psi^{nu+1})_j' <= (1-h*_j)^2
/// fails for some row, where zeta = max_i (1-h*_i)/(1-h_s_i). The squared
/// right side is what the support function of {z'P_s z <= zeta^2} requires;
/// every returned horizon is conservative (never below the exact one) and
/// certified sufficient. Throws IterationLimit at nu = 1000.
int horizon_nuk(const TubeArtifacts& ta, const Vector& h_star, double* zeta_out = nullptr);

/// update_tube + tightening_hstar + horizon_nuk in one call.
QuantifiedTube quantified_tube(const TubeArtifacts& ta, const ScenarioSolution& qs);

}  // namespace uqmpc

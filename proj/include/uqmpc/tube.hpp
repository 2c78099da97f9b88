#pragma once

#include <json.hpp>

#include "uqmpc/polytope.hpp"
#include "uqmpc/riccati.hpp"

namespace uqmpc {

/// Robust positively invariant cross-section for the conservative
/// disturbance set W, held implicitly as
///     S = scale * (W + Phi W + ... + Phi^{r-1} W),   scale = 1/(1-rho),
/// where Phi^r W is certified to fit inside rho W. The sum is never
/// materialised; every consumer works through support functions or lifted
/// variables.
struct RpiTube {
  int r = 0;
  double rho = 0.0;
  double scale = 1.0;
  std::vector<Matrix> phi_powers;  // Phi^0 .. Phi^{r-1}
  Polytope W;
};

/// Smallest r (up to 200) with Phi^r W inside rho_target W, certified facet
/// by facet with support LPs. Returns the tube built at rho = rho_target.
RpiTube find_contraction(const Matrix& Phi, const Polytope& W, double rho_target);

/// max (F + G K) e over e in S, per row, using support additivity over the
/// Minkowski terms of S.
Vector tightening_hs(const RpiTube& tube, const Matrix& F, const Matrix& G, const Matrix& K);

/// Maximal-admissible-set determination: the smallest nu >= 0 such that
/// Fbar Psi^{nu+1} z <= 1-h holds for every z with Fbar Psi^i z <= 1-h,
/// i = 0..nu. Unbounded row maxima mean the constraint set does not yet pin
/// the lifted state down and the loop continues. Throws IterationLimit at
/// nu = 500.
int admissibility_horizon(const Matrix& Fbar, const Matrix& Psi, const Vector& h);

/// Diagonal P_s with {z : z'P_s z <= 1} covering Omega(1-h, nu_s), from the
/// per-coordinate extents of Omega (2*dim LPs). Throws UnboundedOmega.
Matrix covering_ellipsoid(const Matrix& Fbar, const Matrix& Psi, const Vector& h, int nu_s);

/// Everything the online controller consumes, produced offline once.
struct TubeArtifacts {
  GainSynthesis gs;
  RpiTube tube;
  Matrix F, G;
  Vector h_s;
  int nu_s = 0;
  Matrix P_s;
  Matrix P_s_inv;
  Matrix I_minus_Phi_inv;
};

/// Full offline pipeline. Throws StructurallyInfeasible if any h_s row
/// reaches one.
TubeArtifacts build_artifacts(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                              const Matrix& F, const Matrix& G, int N, const Polytope& W,
                              double rho_target);

/// Stacked rows [Fbar; Fbar Psi; ...; Fbar Psi^nu].
Matrix constraint_rows(const Matrix& Fbar, const Matrix& Psi, int nu);

nlohmann::json to_json(const TubeArtifacts& ta);
TubeArtifacts artifacts_from_json(const nlohmann::json& j);

}  // namespace uqmpc

#pragma once

#include <json.hpp>

#include "uqmpc/matrix.hpp"

namespace uqmpc {

/// Offline gain synthesis: the infinite-horizon LQR pieces (P_x, K, Phi)
/// plus the lifted prediction machinery used by the tightened constraints.
/// With z = [s; c] stacking the nominal state and the free input sequence,
/// one prediction step is z+ = Psi z, and the mixed constraint row values
/// are Fbar z.
struct GainSynthesis {
  Matrix A, B, Q, R;
  Matrix P_x;   // DARE solution
  Matrix K;     // u = K x + c
  Matrix Phi;   // A + B K, strictly stable

  int N = 0;    // prediction horizon; 0 until build_lifted runs
  Matrix E;     // selects c_0 from the stacked sequence
  Matrix M;     // block-upshift of the stacked sequence
  Matrix Psi;   // [[Phi, B E], [0, M]]
  Matrix Fbar;  // [F + G K, G E]
  Matrix P_c;   // blockdiag(B'P_x B + R), one block per horizon step
};

/// Fixed-point iteration P <- A'PA + Q - A'PB (B'PB+R)^{-1} B'PA from
/// P0 = Q, to 1e-12 in the sup norm (at most 1e5 sweeps). Also computes
/// K and Phi and gates on an estimated spectral radius below one.
///
/// Throws NoConvergence or UnstableClosedLoop.
GainSynthesis solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R);

/// Completes the lifted matrices for horizon N and constraint maps F, G.
void build_lifted(GainSynthesis& gs, int N, const Matrix& F, const Matrix& G);

nlohmann::json to_json(const GainSynthesis& gs);
GainSynthesis gains_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace uqmpc

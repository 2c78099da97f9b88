#include "uqmpc/riccati.hpp"

#include <cmath>

#include "uqmpc/errors.hpp"

namespace uqmpc {

GainSynthesis solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
  const int n_x = A.rows();
  if (A.cols() != n_x) throw DimensionMismatch("solve_dare: A not square");
  if (B.rows() != n_x) throw DimensionMismatch("solve_dare: B rows");
  if (Q.rows() != n_x || Q.cols() != n_x) throw DimensionMismatch("solve_dare: Q");
  const int n_u = B.cols();
  if (R.rows() != n_u || R.cols() != n_u) throw DimensionMismatch("solve_dare: R");

  const Matrix At = A.transpose();
  const Matrix Bt = B.transpose();

  Matrix P = Q;
  bool converged = false;
  for (int it = 0; it < 100000; ++it) {
    const Matrix BtPB_R = Bt * P * B + R;
    const Matrix gain = inverse(BtPB_R) * (Bt * P * A);
    const Matrix P_next = At * P * A + Q - (At * P * B) * gain;
    double delta = 0.0;
    for (int i = 0; i < n_x; ++i)
      for (int j = 0; j < n_x; ++j) delta = std::max(delta, std::abs(P_next(i, j) - P(i, j)));
    P = P_next;
    if (delta <= 1e-12) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NoConvergence("solve_dare: fixed-point iteration did not converge");

  GainSynthesis gs;
  gs.A = A;
  gs.B = B;
  gs.Q = Q;
  gs.R = R;
  gs.P_x = P;
  gs.K = -1.0 * (inverse(Bt * P * B + R) * (Bt * P * A));
  gs.Phi = A + B * gs.K;
  if (spectral_radius_estimate(gs.Phi) >= 1.0)
    throw UnstableClosedLoop("solve_dare: closed loop not strictly stable");
  return gs;
}

void build_lifted(GainSynthesis& gs, int N, const Matrix& F, const Matrix& G) {
  if (N < 1) throw DomainError("build_lifted: N must be at least 1");
  const int n_x = gs.A.rows();
  const int n_u = gs.B.cols();
  if (F.cols() != n_x) throw DimensionMismatch("build_lifted: F");
  if (G.rows() != F.rows() || G.cols() != n_u) throw DimensionMismatch("build_lifted: G");

  gs.N = N;
  const int nc = N * n_u;

  gs.E = Matrix(n_u, nc);
  for (int i = 0; i < n_u; ++i) gs.E(i, i) = 1.0;

  gs.M = Matrix(nc, nc);
  for (int i = 0; i + n_u < nc; ++i) gs.M(i, i + n_u) = 1.0;

  gs.Psi = Matrix(n_x + nc, n_x + nc);
  gs.Psi.set_block(0, 0, gs.Phi);
  gs.Psi.set_block(0, n_x, gs.B * gs.E);
  gs.Psi.set_block(n_x, n_x, gs.M);

  gs.Fbar = Matrix(F.rows(), n_x + nc);
  gs.Fbar.set_block(0, 0, F + G * gs.K);
  gs.Fbar.set_block(0, n_x, G * gs.E);

  const Matrix block = gs.B.transpose() * gs.P_x * gs.B + gs.R;
  gs.P_c = Matrix(nc, nc);
  for (int i = 0; i < N; ++i) gs.P_c.set_block(i * n_u, i * n_u, block);
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) rows.push_back(m.row(i));
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j.at(0).size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) m.set_row(i, j.at(i).get<Vector>());
  return m;
}

nlohmann::json to_json(const GainSynthesis& gs) {
  return {{"A", matrix_to_json(gs.A)},     {"B", matrix_to_json(gs.B)},
          {"Q", matrix_to_json(gs.Q)},     {"R", matrix_to_json(gs.R)},
          {"P_x", matrix_to_json(gs.P_x)}, {"K", matrix_to_json(gs.K)},
          {"Phi", matrix_to_json(gs.Phi)}, {"N", gs.N},
          {"E", matrix_to_json(gs.E)},     {"M", matrix_to_json(gs.M)},
          {"Psi", matrix_to_json(gs.Psi)}, {"Fbar", matrix_to_json(gs.Fbar)},
          {"P_c", matrix_to_json(gs.P_c)}};
}

GainSynthesis gains_from_json(const nlohmann::json& j) {
  GainSynthesis gs;
  gs.A = matrix_from_json(j.at("A"));
  gs.B = matrix_from_json(j.at("B"));
  gs.Q = matrix_from_json(j.at("Q"));
  gs.R = matrix_from_json(j.at("R"));
  gs.P_x = matrix_from_json(j.at("P_x"));
  gs.K = matrix_from_json(j.at("K"));
  gs.Phi = matrix_from_json(j.at("Phi"));
  gs.N = j.at("N").get<int>();
  gs.E = matrix_from_json(j.at("E"));
  gs.M = matrix_from_json(j.at("M"));
  gs.Psi = matrix_from_json(j.at("Psi"));
  gs.Fbar = matrix_from_json(j.at("Fbar"));
  gs.P_c = matrix_from_json(j.at("P_c"));
  return gs;
}

}  // namespace uqmpc

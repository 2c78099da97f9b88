#include "uqmpc/tube.hpp"

#include <cmath>
#include <string>

#include "uqmpc/errors.hpp"
#include "uqmpc/lp.hpp"

namespace uqmpc {

namespace {

// max over facets i of  support(W, (Phi^r)' V_i'), i.e. the smallest rho
// with Phi^r W inside rho W (W has unit rhs).
double contraction_at(const Matrix& phi_pow, const Polytope& W) {
  const Matrix pt = phi_pow.transpose();
  double worst = 0.0;
  for (int i = 0; i < W.facets(); ++i) {
    worst = std::max(worst, support(W, pt * W.V().row(i)));
  }
  return worst;
}

}  // namespace

RpiTube find_contraction(const Matrix& Phi, const Polytope& W, double rho_target) {
  if (!(rho_target > 0.0 && rho_target < 1.0))
    throw DomainError("find_contraction: rho_target outside (0,1)");
  if (!W.unit_rhs()) throw DomainError("find_contraction: W must have unit rhs");
  if (spectral_radius_estimate(Phi) >= 1.0)
    throw UnstableClosedLoop("find_contraction: Phi not strictly stable");

  Matrix power = Phi;  // Phi^r under test
  for (int r = 1; r <= 200; ++r) {
    if (contraction_at(power, W) <= rho_target) {
      RpiTube tube{r, rho_target, 1.0 / (1.0 - rho_target), {}, W};
      tube.phi_powers.reserve(static_cast<size_t>(r));
      Matrix p = Matrix::identity(Phi.rows());
      for (int i = 0; i < r; ++i) {
        tube.phi_powers.push_back(p);
        p = p * Phi;
      }
      return tube;
    }
    power = power * Phi;
  }
  throw IterationLimit("find_contraction: no r <= 200 reaches the target contraction");
}

Vector tightening_hs(const RpiTube& tube, const Matrix& F, const Matrix& G, const Matrix& K) {
  const Matrix rows = F + G * K;
  Vector h(static_cast<size_t>(rows.rows()), 0.0);
  for (int j = 0; j < rows.rows(); ++j) {
    const Vector f = rows.row(j);
    double sum = 0.0;
    for (const Matrix& p : tube.phi_powers) sum += support(tube.W, p.transpose() * f);
    h[j] = tube.scale * sum;
  }
  return h;
}

Matrix constraint_rows(const Matrix& Fbar, const Matrix& Psi, int nu) {
  Matrix stacked((nu + 1) * Fbar.rows(), Fbar.cols());
  Matrix block = Fbar;
  for (int i = 0; i <= nu; ++i) {
    stacked.set_block(i * Fbar.rows(), 0, block);
    block = block * Psi;
  }
  return stacked;
}

int admissibility_horizon(const Matrix& Fbar, const Matrix& Psi, const Vector& h) {
  const int nc = Fbar.rows();
  if (static_cast<int>(h.size()) != nc) throw DimensionMismatch("admissibility_horizon: h");
  for (double hi : h)
    if (hi >= 1.0) throw DomainError("admissibility_horizon: tightening reaches one");

  Vector rhs(static_cast<size_t>(nc));
  for (int i = 0; i < nc; ++i) rhs[i] = 1.0 - h[i];

  Matrix stacked = Fbar;          // rows for i = 0..nu
  Matrix next = Fbar * Psi;       // rows for i = nu+1
  Vector stacked_rhs = rhs;

  for (int nu = 0; nu <= 500; ++nu) {
    bool admissible = true;
    for (int j = 0; j < nc && admissible; ++j) {
      LinearProgram lp;
      lp.c = next.row(j);
      lp.A = stacked;
      lp.b = stacked_rhs;
      const LpResult res = solve_lp(lp);
      if (res.status == LpStatus::Unbounded) {
        admissible = false;  // constraint set does not bound this direction yet
      } else if (res.status == LpStatus::Optimal) {
        if (res.value > rhs[j] + 1e-9) admissible = false;
      } else {
        throw InternalError("admissibility_horizon: infeasible row LP on a set containing 0");
      }
    }
    if (admissible) return nu;

    const int old_rows = stacked.rows();
    Matrix grown(old_rows + nc, stacked.cols());
    grown.set_block(0, 0, stacked);
    grown.set_block(old_rows, 0, next);
    stacked = std::move(grown);
    stacked_rhs.insert(stacked_rhs.end(), rhs.begin(), rhs.end());
    next = next * Psi;
  }
  throw IterationLimit("admissibility_horizon: nu cap reached (Omega unbounded or h too tight)");
}

Matrix covering_ellipsoid(const Matrix& Fbar, const Matrix& Psi, const Vector& h, int nu_s) {
  const int d = Fbar.cols();
  const Matrix stacked = constraint_rows(Fbar, Psi, nu_s);
  Vector stacked_rhs(static_cast<size_t>(stacked.rows()));
  for (int i = 0; i < stacked.rows(); ++i) stacked_rhs[i] = 1.0 - h[i % Fbar.rows()];

  Vector extent(static_cast<size_t>(d), 0.0);
  for (int j = 0; j < d; ++j) {
    for (double sign : {1.0, -1.0}) {
      LinearProgram lp;
      lp.c.assign(static_cast<size_t>(d), 0.0);
      lp.c[j] = sign;
      lp.A = stacked;
      lp.b = stacked_rhs;
      const LpResult res = solve_lp(lp);
      if (res.status == LpStatus::Unbounded)
        throw UnboundedOmega("covering_ellipsoid: Omega unbounded in coordinate " + std::to_string(j));
      if (res.status != LpStatus::Optimal)
        throw InternalError("covering_ellipsoid: coordinate LP failed");
      extent[j] = std::max(extent[j], std::abs(res.value));
    }
  }

  Matrix P_s(d, d);
  for (int j = 0; j < d; ++j) {
    if (extent[j] <= 0.0) throw DomainError("covering_ellipsoid: degenerate Omega extent");
    P_s(j, j) = 1.0 / (d * extent[j] * extent[j]);
  }
  return P_s;
}

TubeArtifacts build_artifacts(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                              const Matrix& F, const Matrix& G, int N, const Polytope& W,
                              double rho_target) {
  GainSynthesis gs = solve_dare(A, B, Q, R);
  build_lifted(gs, N, F, G);
  RpiTube tube = find_contraction(gs.Phi, W, rho_target);
  const Vector h_s = tightening_hs(tube, F, G, gs.K);
  for (size_t j = 0; j < h_s.size(); ++j) {
    if (h_s[j] >= 1.0)
      throw StructurallyInfeasible("build_artifacts: h_s row " + std::to_string(j) +
                                   " reaches 1 (W too large for the constraints)");
  }
  const int nu_s = admissibility_horizon(gs.Fbar, gs.Psi, h_s);
  const Matrix P_s = covering_ellipsoid(gs.Fbar, gs.Psi, h_s, nu_s);
  const Matrix I_minus_Phi_inv = inverse(Matrix::identity(gs.Phi.rows()) - gs.Phi);
  return TubeArtifacts{std::move(gs), std::move(tube), F,   G,
                       h_s,           nu_s,            P_s, inverse(P_s),
                       I_minus_Phi_inv};
}

nlohmann::json to_json(const TubeArtifacts& ta) {
  nlohmann::json powers = nlohmann::json::array();
  for (const Matrix& p : ta.tube.phi_powers) powers.push_back(matrix_to_json(p));
  return {{"gains", to_json(ta.gs)},
          {"tube",
           {{"r", ta.tube.r},
            {"rho", ta.tube.rho},
            {"scale", ta.tube.scale},
            {"phi_powers", powers},
            {"W", to_json(ta.tube.W)}}},
          {"F", matrix_to_json(ta.F)},
          {"G", matrix_to_json(ta.G)},
          {"h_s", ta.h_s},
          {"nu_s", ta.nu_s},
          {"P_s", matrix_to_json(ta.P_s)},
          {"P_s_inv", matrix_to_json(ta.P_s_inv)},
          {"I_minus_Phi_inv", matrix_to_json(ta.I_minus_Phi_inv)}};
}

TubeArtifacts artifacts_from_json(const nlohmann::json& j) {
  const auto& jt = j.at("tube");
  RpiTube tube{jt.at("r").get<int>(), jt.at("rho").get<double>(), jt.at("scale").get<double>(),
               {}, polytope_from_json(jt.at("W"))};
  for (const auto& p : jt.at("phi_powers")) tube.phi_powers.push_back(matrix_from_json(p));

  TubeArtifacts ta{gains_from_json(j.at("gains")),
                   std::move(tube),
                   matrix_from_json(j.at("F")),
                   matrix_from_json(j.at("G")),
                   j.at("h_s").get<Vector>(),
                   j.at("nu_s").get<int>(),
                   matrix_from_json(j.at("P_s")),
                   matrix_from_json(j.at("P_s_inv")),
                   matrix_from_json(j.at("I_minus_Phi_inv"))};
  return ta;
}

}  // namespace uqmpc

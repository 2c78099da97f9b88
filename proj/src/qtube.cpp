#include "uqmpc/qtube.hpp"

#include <algorithm>
#include <cmath>

#include "uqmpc/errors.hpp"

namespace uqmpc {

QuantifiedTube update_tube(const TubeArtifacts& ta, const ScenarioSolution& qs) {
  QuantifiedTube qt;
  qt.v = qs.v;
  qt.alpha = qs.alpha;
  qt.translate = vscale(1.0 - qs.alpha, ta.I_minus_Phi_inv * qs.v);
  return qt;
}

Vector tightening_hstar(const TubeArtifacts& ta, const QuantifiedTube& qt) {
  const Matrix rows = ta.F + ta.G * ta.gs.K;
  Vector h(static_cast<size_t>(rows.rows()));
  for (int j = 0; j < rows.rows(); ++j)
    h[j] = qt.alpha * ta.h_s[j] + dot(rows.row(j), qt.translate);
  return h;
}

int horizon_nuk(const TubeArtifacts& ta, const Vector& h_star, double* zeta_out) {
  const int nc = ta.gs.Fbar.rows();
  double zeta = 0.0;
  for (int i = 0; i < nc; ++i) {
    if (ta.h_s[i] >= 1.0) throw DomainError("horizon_nuk: h_s reaches 1");
    zeta = std::max(zeta, (1.0 - h_star[i]) / (1.0 - ta.h_s[i]));
  }
  if (zeta_out) *zeta_out = zeta;
  const double zeta_sq = zeta * zeta;

  Matrix rows = ta.gs.Fbar * matrix_power(ta.gs.Psi, ta.nu_s + 1);
  for (int nu = ta.nu_s; nu <= 1000; ++nu) {
    bool ok = true;
    for (int j = 0; j < nc && ok; ++j) {
      const Vector f = rows.row(j);
      const double quad = dot(f, ta.P_s_inv * f);
      const double margin = 1.0 - h_star[j];
      if (zeta_sq * quad > margin * margin) ok = false;
    }
    if (ok) return nu;
    rows = rows * ta.gs.Psi;
  }
  throw IterationLimit("horizon_nuk: nu cap reached");
}

QuantifiedTube quantified_tube(const TubeArtifacts& ta, const ScenarioSolution& qs) {
  QuantifiedTube qt = update_tube(ta, qs);
  qt.h_star = tightening_hstar(ta, qt);
  qt.nu_k = horizon_nuk(ta, qt.h_star, &qt.zeta);
  return qt;
}

}  // namespace uqmpc

#include "uqmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "uqmpc/errors.hpp"
#include "uqmpc/lp.hpp"

namespace uqmpc {

namespace {

constexpr double kStepTol = 1e-11;
constexpr double kMultiplierTol = 1e-9;

void validate(const QuadraticProgram& qp) {
  const int n = qp.H.rows();
  if (qp.H.cols() != n) throw DimensionMismatch("solve_qp: H not square");
  if (static_cast<int>(qp.g.size()) != n) throw DimensionMismatch("solve_qp: g");
  double scale = 1e-30;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(qp.H(i, j)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(qp.H(i, j) - qp.H(j, i)) > 1e-10 * scale)
        throw DomainError("solve_qp: H not symmetric");
  if (!qp.Ain.empty()) {
    if (qp.Ain.cols() != n) throw DimensionMismatch("solve_qp: Ain");
    if (static_cast<int>(qp.bin.size()) != qp.Ain.rows()) throw DimensionMismatch("solve_qp: bin");
  }
  if (!qp.Aeq.empty()) {
    if (qp.Aeq.cols() != n) throw DimensionMismatch("solve_qp: Aeq");
    if (static_cast<int>(qp.beq.size()) != qp.Aeq.rows()) throw DimensionMismatch("solve_qp: beq");
  }
}

void require_spd(const Matrix& H) {
  const int n = H.rows();
  Matrix L(n, n);
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(H(i, i)));
  for (int j = 0; j < n; ++j) {
    double d = H(j, j);
    for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (d <= 1e-12 * (max_diag > 0.0 ? max_diag : 1.0))
      throw NotPositiveDefinite("solve_qp: hessian failed Cholesky factorisation");
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = H(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
}

// Feasible point via one LP: minimise a shared slack t over the relaxed
// constraint system. t* above tolerance certifies infeasibility.
bool phase1_point(const QuadraticProgram& qp, Vector* z0) {
  const int n = qp.H.rows();
  const int mi = qp.Ain.empty() ? 0 : qp.Ain.rows();
  const int me = qp.Aeq.empty() ? 0 : qp.Aeq.rows();

  LinearProgram lp;
  lp.c.assign(static_cast<size_t>(n) + 1, 0.0);
  lp.c[n] = -1.0;  // maximise -t
  const int rows = mi + 2 * me;
  if (rows == 0) {
    z0->assign(static_cast<size_t>(n), 0.0);
    return true;
  }
  lp.A = Matrix(rows, n + 1);
  lp.b.assign(static_cast<size_t>(rows), 0.0);
  int r = 0;
  for (int i = 0; i < mi; ++i, ++r) {
    for (int j = 0; j < n; ++j) lp.A(r, j) = qp.Ain(i, j);
    lp.A(r, n) = -1.0;
    lp.b[r] = qp.bin[i];
  }
  for (int i = 0; i < me; ++i, ++r) {
    for (int j = 0; j < n; ++j) lp.A(r, j) = qp.Aeq(i, j);
    lp.A(r, n) = -1.0;
    lp.b[r] = qp.beq[i];
  }
  for (int i = 0; i < me; ++i, ++r) {
    for (int j = 0; j < n; ++j) lp.A(r, j) = -qp.Aeq(i, j);
    lp.A(r, n) = -1.0;
    lp.b[r] = -qp.beq[i];
  }
  lp.lower.assign(static_cast<size_t>(n) + 1, std::nullopt);
  lp.lower[n] = 0.0;

  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) throw InternalError("solve_qp: phase-1 LP not optimal");
  const double scale = 1.0 + inf_norm(qp.bin) + inf_norm(qp.beq);
  if (res.point[n] > 1e-8 * scale) return false;
  z0->assign(res.point.begin(), res.point.begin() + n);
  return true;
}

// Restore the equality residual the phase-1 slack left behind with a
// minimum-norm correction.
void project_onto_equalities(const QuadraticProgram& qp, Vector* z) {
  if (qp.Aeq.empty()) return;
  const Vector resid = vsub(qp.beq, qp.Aeq * (*z));
  if (inf_norm(resid) < 1e-14) return;
  const Matrix AAt = qp.Aeq * qp.Aeq.transpose();
  try {
    const Vector lambda = solve_linear(AAt, resid);
    *z = vadd(*z, qp.Aeq.transpose() * lambda);
  } catch (const SingularMatrix&) {
    // Dependent equality rows; the LP point is as good as it gets.
  }
}

}  // namespace

QpResult solve_qp(const QuadraticProgram& qp) {
  validate(qp);
  require_spd(qp.H);

  const int n = qp.H.rows();
  const int mi = qp.Ain.empty() ? 0 : qp.Ain.rows();
  const int me = qp.Aeq.empty() ? 0 : qp.Aeq.rows();

  Vector z;
  if (!phase1_point(qp, &z)) return {QpStatus::Infeasible, {}, 0.0, {}};
  project_onto_equalities(qp, &z);

  std::vector<int> active;  // inequality working set, insertion-ordered
  const int iter_cap = 10 * (mi + me + n + 2) * (mi + me + n + 2);

  for (int iter = 0; iter < iter_cap; ++iter) {
    const int mw = me + static_cast<int>(active.size());

    // KKT system for the equality-constrained subproblem on the working set:
    //   [H  Aw'] [p     ]   [-(Hz + g)]
    //   [Aw  0 ] [lambda] = [ 0       ]
    Matrix kkt(n + mw, n + mw);
    kkt.set_block(0, 0, qp.H);
    for (int i = 0; i < me; ++i)
      for (int j = 0; j < n; ++j) {
        kkt(n + i, j) = qp.Aeq(i, j);
        kkt(j, n + i) = qp.Aeq(i, j);
      }
    for (size_t a = 0; a < active.size(); ++a)
      for (int j = 0; j < n; ++j) {
        kkt(n + me + static_cast<int>(a), j) = qp.Ain(active[a], j);
        kkt(j, n + me + static_cast<int>(a)) = qp.Ain(active[a], j);
      }
    Vector rhs(static_cast<size_t>(n + mw), 0.0);
    const Vector grad = vadd(qp.H * z, qp.g);
    for (int j = 0; j < n; ++j) rhs[j] = -grad[j];

    const Vector sol = solve_linear(kkt, rhs);
    Vector p(sol.begin(), sol.begin() + n);

    if (inf_norm(p) <= kStepTol * (1.0 + inf_norm(z))) {
      // Stationary on the working set; check inequality multipliers.
      int drop = -1;
      for (size_t a = 0; a < active.size(); ++a) {
        const double lam = sol[static_cast<size_t>(n + me) + a];
        if (lam < -kMultiplierTol && (drop < 0 || active[a] < active[drop])) {
          drop = static_cast<int>(a);
        }
      }
      if (drop < 0) {
        std::sort(active.begin(), active.end());
        const double value = 0.5 * dot(z, qp.H * z) + dot(qp.g, z);
        return {QpStatus::Optimal, z, value, active};
      }
      active.erase(active.begin() + drop);
      continue;
    }

    // Ratio test against inactive inequality rows.
    double alpha = 1.0;
    int block = -1;
    for (int i = 0; i < mi; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      const Vector ai = qp.Ain.row(i);
      const double ap = dot(ai, p);
      if (ap <= kStepTol) continue;
      const double gap = qp.bin[i] - dot(ai, z);
      const double a = std::max(gap, 0.0) / ap;
      if (a < alpha - 1e-15 || (a <= alpha + 1e-15 && block >= 0 && i < block)) {
        alpha = a;
        block = i;
      }
    }

    z = vadd(z, vscale(alpha, p));
    if (block >= 0) active.push_back(block);
  }
  throw IterationLimit("solve_qp: working-set iteration cap reached");
}

}  // namespace uqmpc

#include "uqmpc/uq.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "uqmpc/errors.hpp"
#include "uqmpc/lp.hpp"

namespace uqmpc {

namespace {

// Shared LP skeleton over variables (y, beta): rows [-V | 1] <= rhs_cover,
// then [V | -1] <= 0, beta bounded to [0,1], maximise beta.
ScenarioSolution solve_quantification_lp(const Polytope& W, const std::vector<Vector>& cover_rhs) {
  const int n_x = W.dim();
  const int n_v = W.facets();
  const int blocks = static_cast<int>(cover_rhs.size());

  LinearProgram lp;
  lp.c.assign(static_cast<size_t>(n_x) + 1, 0.0);
  lp.c[n_x] = 1.0;
  lp.A = Matrix(blocks * n_v + n_v, n_x + 1);
  lp.b.assign(static_cast<size_t>(blocks * n_v + n_v), 0.0);
  int r = 0;
  for (int k = 0; k < blocks; ++k) {
    for (int i = 0; i < n_v; ++i, ++r) {
      for (int j = 0; j < n_x; ++j) lp.A(r, j) = -W.V()(i, j);
      lp.A(r, n_x) = 1.0;
      lp.b[r] = cover_rhs[k][i];
    }
  }
  for (int i = 0; i < n_v; ++i, ++r) {
    for (int j = 0; j < n_x; ++j) lp.A(r, j) = W.V()(i, j);
    lp.A(r, n_x) = -1.0;
    lp.b[r] = 0.0;
  }
  lp.lower.assign(static_cast<size_t>(n_x) + 1, std::nullopt);
  lp.upper.assign(static_cast<size_t>(n_x) + 1, std::nullopt);
  lp.lower[n_x] = 0.0;
  lp.upper[n_x] = 1.0;

  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal)
    throw InternalError("quantification LP not optimal (it is always feasible at beta = 0)");

  ScenarioSolution s;
  s.y.assign(res.point.begin(), res.point.begin() + n_x);
  s.beta = res.point[n_x];
  s.alpha = 1.0 - s.beta;
  if (s.beta > 1e-12) {
    s.v = vscale(1.0 / s.beta, s.y);
  } else {
    s.beta = 0.0;
    s.alpha = 1.0;
    s.v = zeros(n_x);  // any center describes all of W; pin it for determinism
  }
  return s;
}

void check_coverage(const ScenarioSolution& s, const std::vector<Vector>& samples,
                    const Polytope& W) {
  const QuantifiedSet q = to_quantified_set(s, W);
  for (const Vector& w : samples)
    if (!quantified_contains(q, w))
      throw InternalError("quantification result does not cover a logged sample");
}

}  // namespace

void append_sample(DisturbanceLog& log, const Vector& w, const Polytope& W) {
  if (!contains(W, w)) throw SampleOutsideW("disturbance sample outside the conservative set W");
  log.samples.push_back(w);
}

void record_disturbance(DisturbanceLog& log, const Vector& x_next, const Vector& x,
                        const Vector& u, const Matrix& A, const Matrix& B, const Polytope& W) {
  append_sample(log, vsub(x_next, vadd(A * x, B * u)), W);
}

QuantifiedSet to_quantified_set(const ScenarioSolution& s, const Polytope& W) {
  return QuantifiedSet(W, s.v, s.alpha);
}

ScenarioSolution quantify_batch(const DisturbanceLog& log, const Polytope& W) {
  if (log.samples.empty()) throw DomainError("quantify_batch: empty disturbance log");
  if (!W.unit_rhs()) throw DomainError("quantify_batch: W must have unit rhs");
  const int n_v = W.facets();

  // rhs of the aggregated coverage block: 1 - max_s V_i w^s per facet.
  Vector agg(static_cast<size_t>(n_v), -std::numeric_limits<double>::infinity());
  for (const Vector& w : log.samples) {
    const Vector vw = W.V() * w;
    for (int i = 0; i < n_v; ++i) agg[i] = std::max(agg[i], vw[i]);
  }
  for (int i = 0; i < n_v; ++i) agg[i] = 1.0 - agg[i];

  ScenarioSolution s = solve_quantification_lp(W, {agg});
  check_coverage(s, log.samples, W);
  return s;
}

ScenarioSolution quantify_recursive(const ScenarioSolution& prev, const Vector& w_new,
                                    const Polytope& W) {
  if (!W.unit_rhs()) throw DomainError("quantify_recursive: W must have unit rhs");
  if (quantified_contains(to_quantified_set(prev, W), w_new)) return prev;

  const int n_v = W.facets();
  const Vector vv = W.V() * prev.v;
  Vector nest_rhs(static_cast<size_t>(n_v));
  for (int i = 0; i < n_v; ++i) nest_rhs[i] = (1.0 - prev.alpha) * (1.0 - vv[i]);
  const Vector vw = W.V() * w_new;
  Vector cover_rhs(static_cast<size_t>(n_v));
  for (int i = 0; i < n_v; ++i) cover_rhs[i] = 1.0 - vw[i];

  ScenarioSolution s = solve_quantification_lp(W, {nest_rhs, cover_rhs});
  check_coverage(s, {w_new}, W);
  return s;
}

int sample_complexity(double eps, double gamma, int n_x) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("sample_complexity: eps outside (0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("sample_complexity: gamma outside (0,1)");
  if (n_x < 1) throw DomainError("sample_complexity: n_x must be positive");
  const double e = std::numbers::e;
  const double bound = (1.0 / eps) * (e / (e - 1.0)) * (std::log(1.0 / gamma) + n_x);
  return static_cast<int>(std::ceil(bound));
}

void write_samples_csv(std::ostream& os, const DisturbanceLog& log) {
  os.precision(17);
  for (const Vector& w : log.samples) {
    for (size_t j = 0; j < w.size(); ++j) {
      if (j) os << ',';
      os << w[j];
    }
    os << '\n';
  }
}

DisturbanceLog read_samples_csv(std::istream& is, const Polytope& W) {
  DisturbanceLog log;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    Vector w;
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        w.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DomainError("read_samples_csv: non-numeric cell '" + cell + "'");
      }
    }
    if (w.empty()) continue;
    append_sample(log, w, W);
  }
  return log;
}

}  // namespace uqmpc

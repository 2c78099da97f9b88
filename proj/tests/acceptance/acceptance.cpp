// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any requested criterion fails. Run with a
// criterion number to execute just that one, or with no arguments for all.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "uqmpc/errors.hpp"
#include "uqmpc/lp.hpp"
#include "uqmpc/polygon2d.hpp"
#include "uqmpc/sim.hpp"

using namespace uqmpc;

namespace {

struct Criterion {
  int id;
  const char* summary;
  std::function<bool(std::string&)> run;
};

const CaseStudyConfig& cfg() {
  static const CaseStudyConfig c = default_config();
  return c;
}

const TubeArtifacts& arts() {
  static const TubeArtifacts ta = offline_artifacts(cfg());
  return ta;
}

double support_S(const Vector& d) {
  double s = 0.0;
  for (const Matrix& p : arts().tube.phi_powers) s += support(arts().tube.W, p.transpose() * d);
  return arts().tube.scale * s;
}

std::vector<Point2> polygon_of(const Polytope& P) {
  std::vector<Point2> out;
  for (const Vector& v : vertices_2d(P)) out.push_back({v[0], v[1]});
  return out;
}

std::vector<Point2> map_polygon(const Matrix& m, const std::vector<Point2>& pts) {
  std::vector<Point2> out;
  for (const Point2& p : pts) {
    const Vector q = m * Vector{p[0], p[1]};
    out.push_back({q[0], q[1]});
  }
  return out;
}

const std::vector<Point2>& explicit_S() {
  static const std::vector<Point2> poly = [] {
    std::vector<Point2> acc = {{0.0, 0.0}};
    const std::vector<Point2> w = polygon_of(cfg().W);
    for (const Matrix& p : arts().tube.phi_powers) acc = minkowski_sum(acc, map_polygon(p, w));
    return scale_translate(acc, arts().tube.scale, {0.0, 0.0});
  }();
  return poly;
}

ScenarioSolution random_quantified(std::mt19937& rng) {
  std::uniform_real_distribution<double> ux(-0.5, 0.5), uy(-0.2, 0.2), ua(0.0, 1.0);
  for (;;) {
    const Vector v = {ux(rng), uy(rng)};
    if (!contains(cfg().W, v)) continue;
    const double alpha = ua(rng);
    return ScenarioSolution{vscale(1.0 - alpha, v), 1.0 - alpha, v, alpha};
  }
}

// Membership of x in alpha*S + t through the lifted disturbance variables.
bool tube_member(const QuantifiedTube& qt, const Vector& x) {
  const TubeArtifacts& ta = arts();
  const int r = ta.tube.r;
  const int n_v = ta.tube.W.facets();
  const double a_scale = qt.alpha * ta.tube.scale;

  LinearProgram lp;
  lp.c.assign(static_cast<size_t>(2 * r), 0.0);
  lp.A = Matrix(r * n_v + 4, 2 * r);
  lp.b.assign(static_cast<size_t>(r * n_v + 4), 0.0);
  for (int i = 0; i < r; ++i) {
    lp.A.set_block(i * n_v, 2 * i, ta.tube.W.V());
    for (int q = 0; q < n_v; ++q) lp.b[static_cast<size_t>(i * n_v + q)] = 1.0;
  }
  // Equality a_scale * sum Phi^i w_i = x - t as two inequality rows per
  // coordinate, with a small feasibility slack.
  const Vector target = vsub(x, qt.translate);
  for (int coord = 0; coord < 2; ++coord) {
    for (int sgn = 0; sgn < 2; ++sgn) {
      const int row = r * n_v + 2 * coord + sgn;
      const double s = sgn == 0 ? 1.0 : -1.0;
      for (int i = 0; i < r; ++i) {
        lp.A(row, 2 * i) = s * a_scale * ta.tube.phi_powers[static_cast<size_t>(i)](coord, 0);
        lp.A(row, 2 * i + 1) = s * a_scale * ta.tube.phi_powers[static_cast<size_t>(i)](coord, 1);
      }
      lp.b[static_cast<size_t>(row)] = s * target[static_cast<size_t>(coord)] + 1e-9;
    }
  }
  // Column layout: per power i the two components of w_i.
  return solve_lp(lp).status == LpStatus::Optimal;
}

double ray_boundary(const TubeSpec& spec, const Vector& d) {
  double lo = 0.0, hi = 1.0;
  while (region_member(arts(), spec, vscale(hi, d))) hi *= 2.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (region_member(arts(), spec, vscale(mid, d)) ? lo : hi) = mid;
  }
  return lo;
}

bool criterion1(std::string& detail) {
  const Matrix Phi_t = arts().gs.Phi.transpose();
  double worst = -1e300;
  for (int k = 0; k < 64; ++k) {
    const double ang = 2.0 * M_PI * k / 64;
    const Vector d = {std::cos(ang), std::sin(ang)};
    const double slack = support_S(d) - (support_S(Phi_t * d) + support(arts().tube.W, d));
    worst = std::max(worst, -slack);
  }
  detail = "max violation " + std::to_string(worst) + " over 64 directions";
  return worst <= 1e-8;
}

bool criterion2(std::string& detail) {
  std::mt19937 rng(811);
  double worst = -1e300;
  for (int trial = 0; trial < 100; ++trial) {
    const ScenarioSolution qs = random_quantified(rng);
    const QuantifiedTube qt = update_tube(arts(), qs);
    const std::vector<Point2> S_hat =
        scale_translate(explicit_S(), qt.alpha, {qt.translate[0], qt.translate[1]});
    const std::vector<Point2> W_hat = scale_translate(
        polygon_of(cfg().W), qs.alpha, {(1 - qs.alpha) * qs.v[0], (1 - qs.alpha) * qs.v[1]});
    const std::vector<Point2> image = minkowski_sum(map_polygon(arts().gs.Phi, S_hat), W_hat);
    for (size_t k = 0; k < 64; ++k) {
      const double ang = 2.0 * M_PI * static_cast<double>(k) / 64.0;
      const Vector d = {std::cos(ang), std::sin(ang)};
      double lhs = -1e300, rhs = -1e300;
      for (const Point2& p : image) lhs = std::max(lhs, d[0] * p[0] + d[1] * p[1]);
      for (const Point2& p : S_hat) rhs = std::max(rhs, d[0] * p[0] + d[1] * p[1]);
      worst = std::max(worst, lhs - rhs);
    }
  }
  detail = "max support excess " + std::to_string(worst) + " over 100 random sets";
  return worst <= 1e-8;
}

bool criterion3(std::string& detail) {
  std::mt19937 rng(823);
  const TubeArtifacts& ta = arts();
  const Matrix rows = ta.F + ta.G * ta.gs.K;
  const int r = ta.tube.r;
  const int n_v = ta.tube.W.facets();
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ScenarioSolution qs = random_quantified(rng);
    QuantifiedTube qt = update_tube(ta, qs);
    qt.h_star = tightening_hstar(ta, qt);
    for (int j = 0; j < rows.rows(); ++j) {
      LinearProgram lp;
      lp.c.assign(static_cast<size_t>(2 * r), 0.0);
      const Vector f = rows.row(j);
      for (int i = 0; i < r; ++i) {
        const Vector fi = ta.tube.phi_powers[static_cast<size_t>(i)].transpose() * f;
        lp.c[2 * i] = qt.alpha * ta.tube.scale * fi[0];
        lp.c[2 * i + 1] = qt.alpha * ta.tube.scale * fi[1];
      }
      lp.A = Matrix(r * n_v, 2 * r);
      lp.b.assign(static_cast<size_t>(r * n_v), 1.0);
      for (int i = 0; i < r; ++i) lp.A.set_block(i * n_v, 2 * i, ta.tube.W.V());
      const LpResult res = solve_lp(lp);
      if (res.status != LpStatus::Optimal) return false;
      worst = std::max(worst,
                       std::abs(res.value + dot(f, qt.translate) - qt.h_star[static_cast<size_t>(j)]));
    }
  }
  detail = "max |closed form - LP| = " + std::to_string(worst);
  return worst <= 1e-8;
}

bool criterion4(std::string& detail) {
  std::mt19937 rng(827);
  const TubeArtifacts& ta = arts();
  for (int trial = 0; trial < 20; ++trial) {
    const ScenarioSolution qs = random_quantified(rng);
    const QuantifiedTube qt = quantified_tube(ta, qs);
    if (qt.nu_k < ta.nu_s) {
      detail = "nu_k below nu_s";
      return false;
    }
    const Matrix stacked = constraint_rows(ta.gs.Fbar, ta.gs.Psi, qt.nu_k);
    Vector rhs(static_cast<size_t>(stacked.rows()));
    for (int i = 0; i < stacked.rows(); ++i)
      rhs[i] = 1.0 - qt.h_star[static_cast<size_t>(i % ta.gs.Fbar.rows())];
    const Matrix next = ta.gs.Fbar * matrix_power(ta.gs.Psi, qt.nu_k + 1);
    for (int j = 0; j < next.rows(); ++j) {
      LinearProgram lp{next.row(j), stacked, rhs, {}, {}};
      const LpResult res = solve_lp(lp);
      if (res.status != LpStatus::Optimal ||
          res.value > 1.0 - qt.h_star[static_cast<size_t>(j)] + 1e-9) {
        detail = "LP admissibility check failed at trial " + std::to_string(trial);
        return false;
      }
    }
  }
  detail = "20 random sets LP-certified, nu_k >= nu_s always";
  return true;
}

bool criterion5(std::string& detail) {
  const int n_train = sample_complexity(0.1, 0.05, 2);
  std::mt19937_64 rng(829);
  int good = 0;
  const int trials = 100, n_test = 100000;
  for (int t = 0; t < trials; ++t) {
    const DisturbanceLog train = sample_log(cfg(), n_train, rng);
    const QuantifiedSet q = to_quantified_set(quantify_batch(train, cfg().W), cfg().W);
    int bad = 0;
    for (int i = 0; i < n_test; ++i)
      if (!quantified_contains(q, sample_disturbance(cfg(), rng))) ++bad;
    if (bad <= n_test / 10) ++good;
  }
  detail = std::to_string(good) + "/100 trials with violation frequency <= 0.1 (N=" +
           std::to_string(n_train) + ")";
  return good >= 95;
}

bool criterion6(std::string& detail) {
  const ScenarioSolution opt = optimal_quantified_set(cfg());
  const double vol_opt = opt.alpha * opt.alpha * area_2d(cfg().W);
  const auto rows = initial_volume_study(cfg(), {5, 50, 500, 2000}, 30, 20240810);
  char buf[256];
  std::snprintf(buf, sizeof buf, "means %.4g / %.4g / %.4g / %.4g vs vol_opt %.4g", rows[0].mean_vol,
                rows[1].mean_vol, rows[2].mean_vol, rows[3].mean_vol, vol_opt);
  detail = buf;
  for (size_t i = 1; i < rows.size(); ++i)
    if (rows[i].mean_vol < rows[i - 1].mean_vol) return false;
  for (const auto& r : rows)
    if (r.mean_vol > vol_opt + 1e-9) return false;
  return rows.back().mean_vol >= 0.9 * vol_opt;
}

bool criterion7(std::string& detail) {
  const struct {
    int samples;
    Vector x0;
    double min_rate;
  } table[] = {{10, {-14.9, 6.815}, 0.80},
               {100, {-14.9, 6.582}, 0.95},
               {500, {-14.9, 6.401}, 1.0},
               {2000, {-14.9, 6.249}, 1.0}};
  detail.clear();
  bool ok = true;
  for (const auto& row : table) {
    CampaignOptions co;
    co.realisations = 50;
    co.master_seed = 7000 + static_cast<std::uint64_t>(row.samples);
    co.run.steps = 20;
    co.run.initial_samples = row.samples;
    co.run.x0 = row.x0;
    const CampaignResult cr = run_campaign(cfg(), arts(), co);
    char buf[64];
    std::snprintf(buf, sizeof buf, "|I0|=%d: %.0f%% ", row.samples, 100.0 * cr.success_rate);
    detail += buf;
    if (cr.success_rate < row.min_rate - 1e-12) ok = false;
  }
  return ok;
}

bool criterion8(std::string& detail) {
  std::mt19937_64 rng(839);
  const DisturbanceLog log500 = sample_log(cfg(), 500, rng);
  const DisturbanceLog log20k = sample_log(cfg(), 20000, rng);
  const TubeSpec f_500 = quantified_spec(quantified_tube(arts(), quantify_batch(log500, cfg().W)));
  const TubeSpec f_20k = quantified_spec(quantified_tube(arts(), quantify_batch(log20k, cfg().W)));
  const TubeSpec f_opt = quantified_spec(quantified_tube(arts(), optimal_quantified_set(cfg())));
  const TubeSpec f_mpc = conservative_spec(arts());

  const Box2 box = region_bounding_box(arts(), f_500, 0.05);
  const int grid = 60;
  const double v_500 = region_volume_estimate(arts(), f_500, box, grid);
  const double v_20k = region_volume_estimate(arts(), f_20k, box, grid);
  const double v_opt = region_volume_estimate(arts(), f_opt, box, grid);
  const double v_mpc = region_volume_estimate(arts(), f_mpc, box, grid);

  char buf[256];
  std::snprintf(buf, sizeof buf, "F_MPC %.4g, F_hat_0(500) %.4g (x%.2f), F_hat_0(20k) %.4g vs F_hat_opt %.4g",
                v_mpc, v_500, v_500 / v_mpc, v_20k, v_opt);
  detail = buf;
  if (!(v_500 >= 1.5 * v_mpc)) return false;
  return std::abs(v_20k - v_opt) <= 0.05 * v_opt;
}

bool criterion9(std::string& detail) {
  RunOptions ro;
  ro.mode = ControllerMode::UqRmpc;
  ro.steps = 50;
  ro.initial_samples = 100;
  ro.seed = 424242;
  const RunResult rr = run_single(cfg(), arts(), ro);
  if (!rr.success) {
    detail = "run failed";
    return false;
  }
  const QuantifiedTube terminal_tube = update_tube(arts(), rr.final_quant);
  int inside = 0;
  const size_t n = rr.record.steps.size();
  for (size_t k = n - 10; k < n; ++k)
    if (tube_member(terminal_tube, rr.record.steps[k].x)) ++inside;
  bool inputs_ok = true;
  for (const StepRecord& s : rr.record.steps)
    if (std::abs(s.u[0]) > 2.0) inputs_ok = false;
  detail = std::to_string(inside) + "/10 final states in the terminal tube, inputs within +-2: " +
           (inputs_ok ? "yes" : "no");
  return inside == 10 && inputs_ok;
}

bool criterion10(std::string& detail) {
  const double t = ray_boundary(conservative_spec(arts()), {1.0, 0.0});
  RunOptions ro;
  ro.steps = 50;
  ro.initial_samples = 5;
  ro.seed = 11;
  ro.x0 = {0.8 * t, 0.0};
  ro.mode = ControllerMode::Rmpc;
  const RunResult a = run_single(cfg(), arts(), ro);
  ro.mode = ControllerMode::UqRmpc;
  ro.controller.force_quantified = true;
  ro.controller.force_alpha_one = true;
  const RunResult b = run_single(cfg(), arts(), ro);
  if (!a.success || !b.success || a.record.steps.size() != b.record.steps.size()) {
    detail = "runs diverged structurally";
    return false;
  }
  double du = 0.0;
  for (size_t k = 0; k < a.record.steps.size(); ++k)
    du = std::max(du, std::abs(a.record.steps[k].u[0] - b.record.steps[k].u[0]));
  detail = "max input difference " + std::to_string(du) + " over 50 steps";
  return du <= 1e-10;
}

bool criterion11(std::string& detail) {
  std::mt19937 rng(853);
  std::uniform_real_distribution<double> u(-1.0, 1.0), upos(0.05, 1.0);

  // LP: weak duality + optimality on 100 random feasible programs.
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 6, n = 4;
    Matrix a(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = u(rng);
    Vector y0(static_cast<size_t>(m));
    for (double& v : y0) v = upos(rng);
    const Vector c = a.transpose() * y0;
    Vector z0(static_cast<size_t>(n));
    for (double& v : z0) v = u(rng);
    Vector b = a * z0;
    for (double& v : b) v += upos(rng);
    const LpResult res = solve_lp(LinearProgram{c, a, b, {}, {}});
    if (res.status != LpStatus::Optimal || res.value > dot(b, y0) + 1e-6 ||
        res.value < dot(c, z0) - 1e-6) {
      detail = "LP property failed at trial " + std::to_string(trial);
      return false;
    }
  }

  // QP: KKT residual below 1e-7 on 100 random strictly convex programs.
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5, m = 8;
    Matrix mat(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) mat(i, j) = u(rng);
    QuadraticProgram qp;
    qp.H = mat.transpose() * mat + 0.5 * Matrix::identity(n);
    qp.g.assign(static_cast<size_t>(n), 0.0);
    for (double& v : qp.g) v = u(rng);
    qp.Ain = Matrix(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) qp.Ain(i, j) = u(rng);
    Vector z0(static_cast<size_t>(n));
    for (double& v : z0) v = 0.3 * u(rng);
    qp.bin = qp.Ain * z0;
    for (double& v : qp.bin) v += upos(rng);

    const QpResult res = solve_qp(qp);
    if (res.status != QpStatus::Optimal) {
      detail = "QP unexpectedly infeasible at trial " + std::to_string(trial);
      return false;
    }
    Vector grad = vadd(qp.H * res.point, qp.g);
    if (!res.active.empty()) {
      Matrix act(static_cast<int>(res.active.size()), n);
      for (size_t i = 0; i < res.active.size(); ++i) act.set_row(static_cast<int>(i), qp.Ain.row(res.active[i]));
      const Vector lambda = solve_linear(act * act.transpose(), vscale(-1.0, act * grad));
      grad = vadd(grad, act.transpose() * lambda);
    }
    const Vector ax = qp.Ain * res.point;
    double feas = 0.0;
    for (int i = 0; i < m; ++i) feas = std::max(feas, ax[i] - qp.bin[i]);
    if (inf_norm(grad) > 1e-7 || feas > 1e-7) {
      detail = "QP KKT residual too large at trial " + std::to_string(trial);
      return false;
    }
  }
  detail = "100 random LPs and 100 random QPs within tolerance";
  return true;
}

bool criterion_timing(std::string& detail) {
  RunOptions ro;
  ro.steps = 50;
  ro.initial_samples = 100;
  ro.seed = 5;
  const RunResult rr = run_single(cfg(), arts(), ro);
  char buf[128];
  std::snprintf(buf, sizeof buf, "mean online step %.3f ms (soft bound 50 ms)", rr.mean_step_ms);
  detail = buf;
  return rr.mean_step_ms < 50.0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "rigid tube is robustly positively invariant", criterion1},
      {2, "quantified tube invariance on random homothets", criterion2},
      {3, "closed-form tightening matches the lifted LP", criterion3},
      {4, "horizon update is LP-certified sufficient", criterion4},
      {5, "scenario risk bound holds across trials", criterion5},
      {6, "quantified volume converges to the optimal cover", criterion6},
      {7, "closed-loop success rates at the published starts", criterion7},
      {8, "quantified regions dominate the conservative one", criterion8},
      {9, "trajectory ends inside the terminal tube, inputs in bounds", criterion9},
      {10, "full-set quantified control equals plain tube control", criterion10},
      {11, "solver KKT and duality spot checks", criterion11},
  };

  int only = 0;
  bool timing_only = false;
  if (argc > 1) {
    if (std::strcmp(argv[1], "timing") == 0)
      timing_only = true;
    else
      only = std::atoi(argv[1]);
  }

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (timing_only || (only != 0 && c.id != only)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %2d: %s (%s) [%.2fs]\n", ok ? "PASS" : "FAIL", c.id, c.summary,
                detail.c_str(), secs);
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }

  if (timing_only || only == 0) {
    std::string detail;
    const bool ok = criterion_timing(detail);
    std::printf("%s soft check: online step time (%s)\n", ok ? "PASS" : "WARN", detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "uqmpc/errors.hpp"
#include "uqmpc/sim.hpp"

using namespace uqmpc;

namespace {

const CaseStudyConfig& cfg() {
  static const CaseStudyConfig c = default_config();
  return c;
}

const TubeArtifacts& artifacts() {
  static const TubeArtifacts ta = offline_artifacts(cfg());
  return ta;
}

// Largest t with t*d still in the region, by bisection on membership.
double ray_boundary(const TubeSpec& spec, const Vector& d) {
  double lo = 0.0, hi = 1.0;
  while (region_member(artifacts(), spec, vscale(hi, d))) hi *= 2.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (region_member(artifacts(), spec, vscale(mid, d)) ? lo : hi) = mid;
  }
  return lo;
}

ScenarioSolution point_set() { return ScenarioSolution{zeros(2), 1.0, zeros(2), 0.0}; }

}  // namespace

TEST_CASE("origin solves trivially with zero cost") {
  const MpcProblem p = build_opt(artifacts(), conservative_spec(artifacts()), zeros(2));
  const QpResult res = solve_qp(p.qp);
  REQUIRE(res.status == QpStatus::Optimal);
  CHECK(res.value <= 1e-10);
  for (int i = 0; i < p.n_x + p.n_c; ++i) CHECK(std::abs(res.point[static_cast<size_t>(i)]) <= 1e-7);
}

TEST_CASE("study initial state is feasible for a quantified tube") {
  std::mt19937_64 rng(301);
  const DisturbanceLog log = sample_log(cfg(), 100, rng);
  const QuantifiedTube qt = quantified_tube(artifacts(), quantify_batch(log, cfg().W));
  const Vector x0 = initial_relative_state(cfg());
  CHECK(region_member(artifacts(), quantified_spec(qt), x0));
  CHECK(solve_qp(build_opt(artifacts(), quantified_spec(qt), x0).qp).status == QpStatus::Optimal);
  // ... but not for the conservative tube; that gap is the whole point.
  CHECK_FALSE(region_member(artifacts(), conservative_spec(artifacts()), x0));
}

TEST_CASE("far states produce an infeasibility certificate") {
  const TubeSpec spec = conservative_spec(artifacts());
  const double reach = region_support(artifacts(), spec, {1.0, 0.0});
  const Vector x_far = {10.0 * reach, 0.0};
  CHECK_FALSE(region_member(artifacts(), spec, x_far));
  CHECK(solve_qp(build_opt(artifacts(), spec, x_far).qp).status == QpStatus::Infeasible);
}

TEST_CASE("region membership matches the QP feasibility certificate") {
  std::mt19937 rng(307);
  std::uniform_real_distribution<double> ux(-8.0, 8.0), uy(-4.0, 4.0);
  const TubeSpec spec = conservative_spec(artifacts());
  for (int i = 0; i < 40; ++i) {
    const Vector x = {ux(rng), uy(rng)};
    const bool member = region_member(artifacts(), spec, x);
    const bool solvable = solve_qp(build_opt(artifacts(), spec, x).qp).status == QpStatus::Optimal;
    CHECK(member == solvable);
  }
}

TEST_CASE("regions shrink as the quantified set grows") {
  const QuantifiedTube small = quantified_tube(artifacts(), point_set());
  const ScenarioSolution mid_s{vscale(0.5, Vector{0.0, 0.0}), 0.5, zeros(2), 0.5};
  const QuantifiedTube mid = quantified_tube(artifacts(), mid_s);
  const ScenarioSolution full_s{zeros(2), 0.0, zeros(2), 1.0};
  const QuantifiedTube full = quantified_tube(artifacts(), full_s);

  std::mt19937 rng(311);
  std::uniform_real_distribution<double> ux(-15.0, 15.0), uy(-7.0, 7.0);
  for (int i = 0; i < 60; ++i) {
    const Vector x = {ux(rng), uy(rng)};
    const bool in_full = region_member(artifacts(), quantified_spec(full), x);
    const bool in_mid = region_member(artifacts(), quantified_spec(mid), x);
    const bool in_small = region_member(artifacts(), quantified_spec(small), x);
    if (in_full) CHECK(in_mid);
    if (in_mid) CHECK(in_small);
  }
}

TEST_CASE("published boundary states sit inside their quantified regions") {
  std::mt19937_64 rng(313);
  const DisturbanceLog log = sample_log(cfg(), 500, rng);
  const QuantifiedTube qt = quantified_tube(artifacts(), quantify_batch(log, cfg().W));
  CHECK(region_member(artifacts(), quantified_spec(qt), {-14.9, 6.401}));
}

TEST_CASE("conservative branch reproduces plain rigid-tube control") {
  const double t = ray_boundary(conservative_spec(artifacts()), {1.0, 0.0});
  const Vector x0 = {0.8 * t, 0.0};
  REQUIRE(region_member(artifacts(), conservative_spec(artifacts()), x0));

  DisturbanceLog log;
  append_sample(log, {0.1, 0.05}, cfg().W);

  Controller::Options rmpc_opts;
  rmpc_opts.mode = ControllerMode::Rmpc;
  Controller rmpc(artifacts(), rmpc_opts, log);

  Controller::Options uq_opts;
  uq_opts.mode = ControllerMode::UqRmpc;
  Controller uq(artifacts(), uq_opts, log);

  const auto a = rmpc.step(x0);
  const auto b = uq.step(x0);
  REQUIRE(a.ok);
  REQUIRE(b.ok);
  CHECK(b.status == StepStatus::ConservativeSolved);
  CHECK(std::abs(a.u[0] - b.u[0]) <= 1e-12);
}

TEST_CASE("closed loop from the study initial state converges") {
  RunOptions ro;
  ro.mode = ControllerMode::UqRmpc;
  ro.steps = 40;
  ro.initial_samples = 100;
  ro.seed = 42;
  const RunResult rr = run_single(cfg(), artifacts(), ro);
  REQUIRE(rr.success);
  CHECK(rr.violations == 0);
  CHECK_FALSE(rr.hard_failure);
  CHECK(two_norm(rr.final_state) <= 1.0);

  // Every applied input within the +-2 bound, every state in the corridor.
  for (const StepRecord& s : rr.record.steps) {
    REQUIRE(s.u.size() == 1);
    CHECK(std::abs(s.u[0]) <= 2.0 + 1e-9);
    CHECK(std::abs(s.x[0]) <= 15.0 + 1e-9);
  }
}

TEST_CASE("infeasible quantified step falls back to the stored problem") {
  // Start just inside the feasible region of the tiny initial set {0}; the
  // first online sample then blows the set up and strands the state outside
  // the new region, which must route through the backup branch.
  const QuantifiedTube qt0 = quantified_tube(artifacts(), point_set());
  const Vector d = {-1.0, 0.45};
  const double t = ray_boundary(quantified_spec(qt0), d);
  Vector x = vscale(0.999 * t, d);

  DisturbanceLog tiny;
  append_sample(tiny, {0.0, 0.0}, cfg().W);
  Controller::Options opts;
  opts.mode = ControllerMode::UqRmpc;
  Controller ctrl(artifacts(), opts, tiny);

  std::vector<StepStatus> statuses;
  for (int k = 0; k < 4; ++k) {
    const auto out = ctrl.step(x);
    REQUIRE(out.ok);
    statuses.push_back(out.status);
    const Vector kick = k == 1 ? Vector{-0.5, 0.2} : Vector{0.0, 0.0};
    x = vadd(vadd(cfg().A * x, cfg().B * out.u), kick);
  }
  CHECK(statuses[0] == StepStatus::QuantifiedSolved);
  CHECK(statuses[1] == StepStatus::QuantifiedSolved);
  CHECK(statuses[2] == StepStatus::BackupSolved);
  CHECK(statuses[3] == StepStatus::QuantifiedSolved);
}

TEST_CASE("backup before any history is a hard failure") {
  DisturbanceLog tiny;
  append_sample(tiny, {0.0, 0.0}, cfg().W);
  Controller::Options opts;
  opts.mode = ControllerMode::UqRmpc;
  Controller ctrl(artifacts(), opts, tiny);
  const auto out = ctrl.step({100.0, 50.0});  // far outside everything
  CHECK_FALSE(out.ok);
  CHECK(out.status == StepStatus::BackupUnavailable);
}

TEST_CASE("rmpc mode fails hard outside its region") {
  RunOptions ro;
  ro.mode = ControllerMode::Rmpc;
  ro.steps = 5;
  ro.initial_samples = 5;
  ro.seed = 3;
  const RunResult rr = run_single(cfg(), artifacts(), ro);  // x0 = (-12, 5)
  CHECK_FALSE(rr.success);
  CHECK(rr.hard_failure);
  CHECK(rr.record.steps.front().status == StepStatus::RmpcInfeasible);
}

TEST_CASE("with the full set forced, both controllers emit identical inputs") {
  const double t = ray_boundary(conservative_spec(artifacts()), {1.0, 0.0});
  RunOptions ro;
  ro.steps = 50;
  ro.initial_samples = 5;
  ro.seed = 11;
  ro.x0 = {0.8 * t, 0.0};

  ro.mode = ControllerMode::Rmpc;
  const RunResult a = run_single(cfg(), artifacts(), ro);
  ro.mode = ControllerMode::UqRmpc;
  ro.controller.force_quantified = true;
  ro.controller.force_alpha_one = true;
  const RunResult b = run_single(cfg(), artifacts(), ro);

  REQUIRE(a.success);
  REQUIRE(b.success);
  REQUIRE(a.record.steps.size() == b.record.steps.size());
  for (size_t k = 0; k < a.record.steps.size(); ++k)
    CHECK(std::abs(a.record.steps[k].u[0] - b.record.steps[k].u[0]) <= 1e-10);
}

TEST_CASE("a quantified set covering the truth never needs the backup") {
  DisturbanceLog vertex_log;
  for (const Point2& p : true_disturbance_vertices(cfg()))
    append_sample(vertex_log, {p[0], p[1]}, cfg().W);

  std::mt19937_64 rng(317);
  Controller::Options opts;
  opts.mode = ControllerMode::UqRmpc;
  Controller ctrl(artifacts(), opts, vertex_log);

  Vector x = {-14.9, 6.401};
  for (int k = 0; k < 20; ++k) {
    const auto out = ctrl.step(x);
    REQUIRE(out.ok);
    CHECK(out.status != StepStatus::BackupSolved);
    x = vadd(vadd(cfg().A * x, cfg().B * out.u), sample_disturbance(cfg(), rng));
  }
}

TEST_CASE("backup frequency stays within the scenario risk bound") {
  const int n0 = sample_complexity(0.1, 0.05, 2);
  CampaignOptions co;
  co.realisations = 30;
  co.master_seed = 404;
  co.run.steps = 20;
  co.run.initial_samples = n0;
  co.run.x0 = {-14.9, 6.5};
  const CampaignResult cr = run_campaign(cfg(), artifacts(), co);

  int quantified_steps = 0, backup_steps = 0;
  for (const RunResult& r : cr.runs)
    for (const StepRecord& s : r.record.steps) {
      if (s.status == StepStatus::QuantifiedSolved || s.status == StepStatus::BackupSolved) {
        ++quantified_steps;
        backup_steps += s.status == StepStatus::BackupSolved ? 1 : 0;
      }
    }
  REQUIRE(quantified_steps > 0);
  const double freq = static_cast<double>(backup_steps) / quantified_steps;
  const double slack = 3.0 * std::sqrt(0.1 * 0.9 / quantified_steps);
  CHECK(freq <= 0.1 + slack);
}

TEST_CASE("run records stream as csv") {
  RunOptions ro;
  ro.steps = 5;
  ro.initial_samples = 10;
  ro.seed = 9;
  const RunResult rr = run_single(cfg(), artifacts(), ro);
  std::stringstream ss;
  write_run_csv(ss, rr.record);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "k,x0,x1,u0,w0,w1,alpha,nu,status,backup,violation");
  int rows = 0;
  for (std::string line; std::getline(ss, line);) ++rows;
  CHECK(rows == 5);

  const nlohmann::json j = run_summary_json(rr.record, rr.success);
  CHECK(j.at("steps").get<int>() == 5);
  CHECK(j.at("success").get<bool>() == rr.success);
}

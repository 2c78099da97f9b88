#include "uqmpc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <thread>

#include "uqmpc/errors.hpp"

namespace uqmpc {

CaseStudyConfig default_config() {
  CaseStudyConfig cfg;
  cfg.T = 0.5;
  cfg.L = 35.0;
  cfg.A = Matrix(2, 2, {1.0, cfg.T, 0.0, 1.0});
  cfg.B = Matrix(2, 1, {0.0, cfg.T});
  cfg.F = Matrix(4, 2, {1.0 / 15.0, 0.0, -1.0 / 15.0, 0.0, 0.0, 0.0, 0.0, 0.0});
  cfg.G = Matrix(4, 1, {0.0, 0.0, -0.5, 0.5});
  cfg.Q = Matrix::identity(2);
  cfg.R = Matrix(1, 1, {0.1});
  cfg.rho_target = 0.01;
  cfg.N = 10;

  // Box with vertices (+-0.5, +-0.2) in unit-rhs form.
  cfg.W = Polytope(Matrix(4, 2, {2.0, 0.0, -2.0, 0.0, 0.0, 5.0, 0.0, -5.0}));

  cfg.xi_ego = {{-0.0586, -0.0197}, {0.061, -0.0102}, {0.008, 0.0257}, {-0.0119, 0.0241}};
  cfg.xi_lead = cfg.xi_ego;
  cfg.u_lead_min = -1.0 / 20.0;
  cfg.u_lead_max = 1.0 / 16.0;

  cfg.x0_lead = {100.0, 10.0};
  cfg.x0_ego = {53.0, 15.0};
  cfg.seed = 1;
  return cfg;
}

Vector initial_relative_state(const CaseStudyConfig& cfg) {
  return {cfg.x0_ego[0] - cfg.x0_lead[0] + cfg.L, cfg.x0_ego[1] - cfg.x0_lead[1]};
}

std::vector<Point2> true_disturbance_vertices(const CaseStudyConfig& cfg) {
  const std::vector<Point2> lead_input_seg = {
      {-cfg.B(0, 0) * cfg.u_lead_min, -cfg.B(1, 0) * cfg.u_lead_min},
      {-cfg.B(0, 0) * cfg.u_lead_max, -cfg.B(1, 0) * cfg.u_lead_max}};
  return minkowski_sum(minkowski_sum(convex_hull(cfg.xi_ego), negate(convex_hull(cfg.xi_lead))),
                       lead_input_seg);
}

Polytope true_disturbance_polytope(const CaseStudyConfig& cfg) {
  return polygon_to_polytope(true_disturbance_vertices(cfg));
}

void validate_config(const CaseStudyConfig& cfg) {
  const std::vector<Point2> wt = true_disturbance_vertices(cfg);
  for (int i = 0; i < cfg.W.facets(); ++i) {
    const Vector n = cfg.W.V().row(i);
    double sup = -1e300;
    for (const Point2& p : wt) sup = std::max(sup, n[0] * p[0] + n[1] * p[1]);
    if (sup > cfg.W.b()[i] + 1e-9)
      throw DomainError("validate_config: true disturbance set is not covered by W");
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 over master + golden-ratio stride.
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

// Uniform over a convex hull: bounding-box rejection, with the degenerate
// point/segment cases handled directly.
struct PolygonSampler {
  explicit PolygonSampler(const std::vector<Point2>& pts) : hull(convex_hull(pts)) {
    if (hull.size() >= 3) poly = polygon_to_polytope(hull);
    for (const Point2& p : hull) {
      xmin = std::min(xmin, p[0]);
      xmax = std::max(xmax, p[0]);
      ymin = std::min(ymin, p[1]);
      ymax = std::max(ymax, p[1]);
    }
  }

  Point2 operator()(std::mt19937_64& rng) const {
    if (hull.size() == 1) return hull.front();
    if (hull.size() == 2) {
      std::uniform_real_distribution<double> ut(0.0, 1.0);
      const double t = ut(rng);
      return {hull[0][0] + t * (hull[1][0] - hull[0][0]),
              hull[0][1] + t * (hull[1][1] - hull[0][1])};
    }
    std::uniform_real_distribution<double> ux(xmin, xmax), uy(ymin, ymax);
    for (;;) {
      const Vector cand = {ux(rng), uy(rng)};
      if (contains(poly, cand)) return {cand[0], cand[1]};
    }
  }

  std::vector<Point2> hull;
  Polytope poly;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
};

struct TrueSampler {
  explicit TrueSampler(const CaseStudyConfig& cfg)
      : cfg_(cfg), ego_(cfg.xi_ego), lead_(cfg.xi_lead) {}

  Vector operator()(std::mt19937_64& rng) const {
    const Point2 e = ego_(rng);
    const Point2 l = lead_(rng);
    double u = cfg_.u_lead_min;
    if (cfg_.u_lead_max > cfg_.u_lead_min) {
      std::uniform_real_distribution<double> uu(cfg_.u_lead_min, cfg_.u_lead_max);
      u = uu(rng);
    }
    return {e[0] - l[0] - cfg_.B(0, 0) * u, e[1] - l[1] - cfg_.B(1, 0) * u};
  }

  const CaseStudyConfig& cfg_;
  PolygonSampler ego_, lead_;
};

}  // namespace

Vector sample_disturbance(const CaseStudyConfig& cfg, std::mt19937_64& rng) {
  return TrueSampler(cfg)(rng);
}

DisturbanceLog sample_log(const CaseStudyConfig& cfg, int count, std::mt19937_64& rng) {
  const TrueSampler sampler(cfg);
  DisturbanceLog log;
  log.samples.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) append_sample(log, sampler(rng), cfg.W);
  return log;
}

ScenarioSolution optimal_quantified_set(const CaseStudyConfig& cfg) {
  DisturbanceLog vertices;
  for (const Point2& p : true_disturbance_vertices(cfg))
    append_sample(vertices, {p[0], p[1]}, cfg.W);
  return quantify_batch(vertices, cfg.W);
}

TubeArtifacts offline_artifacts(const CaseStudyConfig& cfg) {
  return build_artifacts(cfg.A, cfg.B, cfg.Q, cfg.R, cfg.F, cfg.G, cfg.N, cfg.W, cfg.rho_target);
}

RunResult run_single(const CaseStudyConfig& cfg, const TubeArtifacts& ta, const RunOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  const TrueSampler sampler(cfg);

  DisturbanceLog initial;
  for (int i = 0; i < opts.initial_samples; ++i) append_sample(initial, sampler(rng), cfg.W);

  Controller::Options copts = opts.controller;
  copts.mode = opts.mode;

  RunResult result;
  const double w_area = area_2d(cfg.W);

  try {
    Controller ctrl(ta, copts, std::move(initial));
    Vector x = opts.x0.empty() ? initial_relative_state(cfg) : opts.x0;

    for (int k = 0; k < opts.steps; ++k) {
      StepRecord rec;
      rec.k = k;
      rec.x = x;

      const Controller::StepOutcome out = ctrl.step(x);
      rec.alpha = out.quant_alpha;
      rec.nu = out.nu;
      rec.status = out.status;
      rec.backup_used = out.status == StepStatus::BackupSolved;
      rec.solve_ms = out.solve_ms;
      result.volume_series.push_back(out.quant_alpha * out.quant_alpha * w_area);

      if (!out.ok) {
        result.hard_failure = true;
        result.failure_reason = to_string(out.status);
        result.record.steps.push_back(rec);
        break;
      }
      rec.u = out.u;

      // Constraint check on the realised pair (x_k, u_k).
      const Vector fx = vadd(cfg.F * x, cfg.G * out.u);
      for (double row : fx)
        if (row > 1.0 + 1e-9) {
          rec.violation = true;
          break;
        }
      if (rec.violation) ++result.violations;
      if (rec.backup_used) ++result.backups;

      const Vector w = sampler(rng);
      rec.w = w;
      x = vadd(vadd(ta.gs.A * x, ta.gs.B * out.u), w);
      result.record.steps.push_back(rec);
    }
    result.final_state = x;
    if (ctrl.quantified()) result.final_quant = *ctrl.quantified();
  } catch (const Error& e) {
    result.hard_failure = true;
    result.failure_reason = e.what();
  }

  result.success = !result.hard_failure && result.violations == 0;
  double total = 0.0;
  for (const StepRecord& s : result.record.steps) total += s.solve_ms;
  result.mean_step_ms =
      result.record.steps.empty() ? 0.0 : total / static_cast<double>(result.record.steps.size());
  return result;
}

CampaignResult run_campaign(const CaseStudyConfig& cfg, const TubeArtifacts& ta,
                            const CampaignOptions& opts) {
  CampaignResult cr;
  cr.realisations = opts.realisations;
  cr.runs.resize(static_cast<size_t>(opts.realisations));

  int workers = opts.workers > 0 ? opts.workers
                                 : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, opts.realisations));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      if (opts.cancel && opts.cancel->load()) return;
      const int i = next.fetch_add(1);
      if (i >= opts.realisations) return;
      RunOptions ro = opts.run;
      ro.seed = derive_seed(opts.master_seed, static_cast<std::uint64_t>(i));
      cr.runs[static_cast<size_t>(i)] = run_single(cfg, ta, ro);
    }
  };
  std::vector<std::future<void>> futs;
  for (int t = 0; t < workers; ++t) futs.push_back(std::async(std::launch::async, worker));
  for (auto& f : futs) f.get();

  // Cancelled workers leave untouched slots; drop them.
  if (opts.cancel && opts.cancel->load()) {
    while (!cr.runs.empty() && cr.runs.back().record.steps.empty()) cr.runs.pop_back();
    cr.realisations = static_cast<int>(cr.runs.size());
  }

  double ms = 0.0;
  size_t max_steps = 0;
  for (const RunResult& r : cr.runs) {
    cr.successes += r.success ? 1 : 0;
    cr.total_backups += r.backups;
    cr.total_violations += r.violations;
    ms += r.mean_step_ms;
    max_steps = std::max(max_steps, r.volume_series.size());
  }
  cr.success_rate = static_cast<double>(cr.successes) / std::max(1, cr.realisations);
  cr.mean_step_ms = ms / std::max<size_t>(1, cr.runs.size());

  cr.vol_mean.assign(max_steps, 0.0);
  cr.vol_std.assign(max_steps, 0.0);
  for (size_t k = 0; k < max_steps; ++k) {
    double sum = 0.0, sum2 = 0.0;
    int n = 0;
    for (const RunResult& r : cr.runs)
      if (k < r.volume_series.size()) {
        sum += r.volume_series[k];
        sum2 += r.volume_series[k] * r.volume_series[k];
        ++n;
      }
    const double mean = sum / std::max(1, n);
    cr.vol_mean[k] = mean;
    cr.vol_std[k] = n > 1 ? std::sqrt(std::max(0.0, sum2 / n - mean * mean)) : 0.0;
  }
  return cr;
}

double region_volume_estimate(const TubeArtifacts& ta, const TubeSpec& spec, const Box2& box,
                              int n_grid) {
  if (ta.gs.A.rows() != 2) throw DimensionUnsupported("region_volume_estimate: 2-D states only");
  if (n_grid < 1) throw DomainError("region_volume_estimate: n_grid must be positive");
  const double dx = (box.xmax - box.xmin) / n_grid;
  const double dy = (box.ymax - box.ymin) / n_grid;
  int hits = 0;
  for (int i = 0; i < n_grid; ++i) {
    const double x = box.xmin + (i + 0.5) * dx;
    for (int j = 0; j < n_grid; ++j) {
      const double y = box.ymin + (j + 0.5) * dy;
      if (region_member(ta, spec, {x, y})) ++hits;
    }
  }
  const double box_area = (box.xmax - box.xmin) * (box.ymax - box.ymin);
  return box_area * static_cast<double>(hits) / (static_cast<double>(n_grid) * n_grid);
}

Box2 region_bounding_box(const TubeArtifacts& ta, const TubeSpec& spec, double pad) {
  Box2 b;
  b.xmax = region_support(ta, spec, {1.0, 0.0});
  b.xmin = -region_support(ta, spec, {-1.0, 0.0});
  b.ymax = region_support(ta, spec, {0.0, 1.0});
  b.ymin = -region_support(ta, spec, {0.0, -1.0});
  const double wx = (b.xmax - b.xmin) * pad;
  const double wy = (b.ymax - b.ymin) * pad;
  b.xmin -= wx;
  b.xmax += wx;
  b.ymin -= wy;
  b.ymax += wy;
  return b;
}

std::vector<VolumeStudyRow> initial_volume_study(const CaseStudyConfig& cfg,
                                                 const std::vector<int>& counts, int n_seeds,
                                                 std::uint64_t master_seed) {
  std::vector<VolumeStudyRow> rows;
  const double w_area = area_2d(cfg.W);
  std::uint64_t stream = 0;
  for (int count : counts) {
    double sum = 0.0, sum2 = 0.0;
    for (int s = 0; s < n_seeds; ++s) {
      std::mt19937_64 rng(derive_seed(master_seed, stream++));
      const DisturbanceLog log = sample_log(cfg, count, rng);
      const ScenarioSolution sol = quantify_batch(log, cfg.W);
      const double vol = sol.alpha * sol.alpha * w_area;
      sum += vol;
      sum2 += vol * vol;
    }
    const double mean = sum / n_seeds;
    rows.push_back({count, mean,
                    n_seeds > 1 ? std::sqrt(std::max(0.0, sum2 / n_seeds - mean * mean)) : 0.0});
  }
  return rows;
}

}  // namespace uqmpc

// Command-line front end: offline tube synthesis, single closed-loop runs,
// Monte-Carlo campaigns, feasible-region reports and standalone sample
// quantification.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "uqmpc/errors.hpp"
#include "uqmpc/sim.hpp"

namespace fs = std::filesystem;
using namespace uqmpc;

namespace {

std::atomic<bool> g_interrupted{false};
void handle_sigint(int) { g_interrupted.store(true); }

// Exit codes: 0 success, 2 config error, 3 solver error, 4 run failure.
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitRunFailure = 4;

struct ModelFlags {
  double rho = 0.01;
  int horizon = 10;
  double t_sample = 0.5;
  double distance = 35.0;
  double w_scale = 1.0;
};

void add_model_flags(CLI::App* cmd, ModelFlags* mf) {
  cmd->add_option("--rho", mf->rho, "Tube contraction target in (0,1)")
      ->check(CLI::Range(1e-9, 0.999999));
  cmd->add_option("--horizon-n", mf->horizon, "Prediction horizon N for the free input sequence")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--t-sample", mf->t_sample, "Sampling interval [s]")->check(CLI::PositiveNumber);
  cmd->add_option("--distance", mf->distance, "Desired inter-vehicle distance L [m]")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--w-scale", mf->w_scale,
                  "Scale factor on the conservative disturbance box (diagnostics)")
      ->check(CLI::PositiveNumber);
}

CaseStudyConfig config_from_flags(const ModelFlags& mf) {
  CaseStudyConfig cfg = default_config();
  cfg.rho_target = mf.rho;
  cfg.N = mf.horizon;
  cfg.L = mf.distance;
  if (mf.t_sample != cfg.T) {
    cfg.T = mf.t_sample;
    cfg.A = Matrix(2, 2, {1.0, cfg.T, 0.0, 1.0});
    cfg.B = Matrix(2, 1, {0.0, cfg.T});
  }
  if (mf.w_scale != 1.0) cfg.W = Polytope((1.0 / mf.w_scale) * cfg.W.V());
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw DomainError("cannot open for writing: " + path.string());
  os << text;
}

TubeArtifacts load_artifacts(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DomainError("artifact file not found: " + path);
  nlohmann::json j;
  is >> j;
  return artifacts_from_json(j);
}

nlohmann::json vertices_json(const std::vector<Point2>& pts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Point2& p : pts) arr.push_back({p[0], p[1]});
  return arr;
}

std::vector<Point2> region_boundary(const TubeArtifacts& ta, const TubeSpec& spec, int n_dirs) {
  // Ray marching from the region's own translate (always a member).
  const Vector center = spec.translate;
  std::vector<Point2> pts;
  for (int k = 0; k < n_dirs; ++k) {
    const double ang = 2.0 * M_PI * k / n_dirs;
    const Vector d = {std::cos(ang), std::sin(ang)};
    double lo = 0.0, hi = 1.0;
    while (region_member(ta, spec, vadd(center, vscale(hi, d))) && hi < 1e5) hi *= 2.0;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (region_member(ta, spec, vadd(center, vscale(mid, d))) ? lo : hi) = mid;
    }
    pts.push_back({center[0] + lo * d[0], center[1] + lo * d[1]});
  }
  return pts;
}

int cmd_offline(const ModelFlags& mf, const std::string& out_path) {
  const CaseStudyConfig cfg = config_from_flags(mf);
  validate_config(cfg);
  const TubeArtifacts ta = offline_artifacts(cfg);
  write_text(out_path, to_json(ta).dump(2) + "\n");

  std::printf("artifact written to %s\n", out_path.c_str());
  std::printf("r    = %d\nrho  = %.6g\nnu_s = %d\nh_s  =", ta.tube.r, ta.tube.rho, ta.nu_s);
  for (double h : ta.h_s) std::printf(" %.6g", h);
  std::printf("\n");
  return 0;
}

RunOptions run_options_from_flags(ControllerMode mode, int steps, int samples,
                                  std::uint64_t seed, const std::vector<double>& x0,
                                  int backup_age, bool seed_origin) {
  RunOptions ro;
  ro.mode = mode;
  ro.steps = steps;
  ro.initial_samples = samples;
  ro.seed = seed;
  if (!x0.empty()) ro.x0 = x0;
  ro.controller.backup_disturbance_age = backup_age;
  ro.controller.seed_origin = seed_origin;
  return ro;
}

int cmd_run(const ModelFlags& mf, const std::string& artifact, const RunOptions& ro,
            const std::string& out_dir) {
  const CaseStudyConfig cfg = config_from_flags(mf);
  const TubeArtifacts ta = load_artifacts(artifact);
  const RunResult rr = run_single(cfg, ta, ro);

  std::ostringstream csv;
  write_run_csv(csv, rr.record);
  write_text(fs::path(out_dir) / "run.csv", csv.str());

  nlohmann::json summary = run_summary_json(rr.record, rr.success);
  summary["seed"] = ro.seed;
  summary["initial_samples"] = ro.initial_samples;
  summary["mode"] = ro.mode == ControllerMode::Rmpc ? "RMPC" : "UQ-RMPC";
  summary["volume_series"] = rr.volume_series;
  if (!rr.failure_reason.empty()) summary["failure_reason"] = rr.failure_reason;
  write_text(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");

  std::printf("%s after %zu steps (violations %d, backups %d, mean step %.3f ms); outputs in %s\n",
              rr.success ? "success" : "failure", rr.record.steps.size(), rr.violations,
              rr.backups, rr.mean_step_ms, out_dir.c_str());
  return rr.success ? 0 : kExitRunFailure;
}

int cmd_campaign(const ModelFlags& mf, const std::string& artifact, const RunOptions& base,
                 int realisations, int workers, std::uint64_t master_seed,
                 const std::string& out_dir) {
  const CaseStudyConfig cfg = config_from_flags(mf);
  const TubeArtifacts ta = load_artifacts(artifact);

  CampaignOptions co;
  co.run = base;
  co.realisations = realisations;
  co.workers = workers;
  co.master_seed = master_seed;
  co.cancel = &g_interrupted;
  std::signal(SIGINT, handle_sigint);
  const CampaignResult cr = run_campaign(cfg, ta, co);

  std::ostringstream rows;
  rows << "index,seed,success,steps,violations,backups,final_alpha_volume\n";
  rows.precision(17);
  for (size_t i = 0; i < cr.runs.size(); ++i) {
    const RunResult& r = cr.runs[i];
    rows << i << ',' << derive_seed(master_seed, i) << ',' << (r.success ? 1 : 0) << ','
         << r.record.steps.size() << ',' << r.violations << ',' << r.backups << ','
         << (r.volume_series.empty() ? 0.0 : r.volume_series.back()) << '\n';
  }
  write_text(fs::path(out_dir) / "realisations.csv", rows.str());

  std::ostringstream vol;
  vol << "k,vol_mean,vol_std\n";
  vol.precision(17);
  for (size_t k = 0; k < cr.vol_mean.size(); ++k)
    vol << k << ',' << cr.vol_mean[k] << ',' << cr.vol_std[k] << '\n';
  write_text(fs::path(out_dir) / "volume.csv", vol.str());

  nlohmann::json summary;
  summary["realisations"] = cr.realisations;
  summary["successes"] = cr.successes;
  summary["success_rate"] = cr.success_rate;
  summary["total_backups"] = cr.total_backups;
  summary["total_violations"] = cr.total_violations;
  summary["master_seed"] = master_seed;
  summary["interrupted"] = g_interrupted.load();
  write_text(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");

  std::printf("campaign: %d/%d successful (%.1f%%, mean step %.3f ms); outputs in %s\n",
              cr.successes, cr.realisations, 100.0 * cr.success_rate, cr.mean_step_ms,
              out_dir.c_str());
  return g_interrupted.load() ? kExitRunFailure : 0;
}

int cmd_regions(const ModelFlags& mf, const std::string& artifact, int samples,
                std::uint64_t seed, int grid, const std::string& out_dir) {
  const CaseStudyConfig cfg = config_from_flags(mf);
  const TubeArtifacts ta = load_artifacts(artifact);

  // Disturbance sets.
  const std::vector<Point2> w_true = true_disturbance_vertices(cfg);
  const ScenarioSolution opt = optimal_quantified_set(cfg);
  std::mt19937_64 rng(seed);
  const DisturbanceLog log = sample_log(cfg, samples, rng);
  const ScenarioSolution hat0 = quantify_batch(log, cfg.W);

  auto homothet_vertices = [&](const ScenarioSolution& s) {
    std::vector<Point2> out;
    for (const Vector& v : vertices_2d(as_polytope(to_quantified_set(s, cfg.W))))
      out.push_back({v[0], v[1]});
    return out;
  };
  std::vector<Point2> w_box;
  for (const Vector& v : vertices_2d(cfg.W)) w_box.push_back({v[0], v[1]});

  // Feasible regions: the conservative one, the true-set one (full offline
  // pipeline on the explicit true polytope), and the two quantified ones.
  const TubeSpec f_mpc = conservative_spec(ta);
  const Polytope wt_poly = true_disturbance_polytope(cfg);

  // The true set is not a unit-rhs homothet of W, so it gets its own tube.
  Matrix Vt = wt_poly.V();
  for (int i = 0; i < Vt.rows(); ++i)
    for (int j = 0; j < Vt.cols(); ++j) Vt(i, j) /= wt_poly.b()[i];
  const Polytope wt_unit(Vt);
  const TubeArtifacts ta_true = build_artifacts(cfg.A, cfg.B, cfg.Q, cfg.R, cfg.F, cfg.G, cfg.N,
                                                wt_unit, cfg.rho_target);
  const TubeSpec f_true = conservative_spec(ta_true);

  const TubeSpec f_opt = quantified_spec(quantified_tube(ta, opt));
  const TubeSpec f_hat0 = quantified_spec(quantified_tube(ta, hat0));

  const Box2 box = region_bounding_box(ta, f_hat0, 0.05);

  nlohmann::json j;
  j["samples"] = samples;
  j["seed"] = seed;
  j["grid"] = grid;
  j["box"] = {box.xmin, box.xmax, box.ymin, box.ymax};
  j["sets"]["W"] = vertices_json(w_box);
  j["sets"]["W_true"] = vertices_json(w_true);
  j["sets"]["W_hat_opt"] = vertices_json(homothet_vertices(opt));
  j["sets"]["W_hat_0"] = vertices_json(homothet_vertices(hat0));
  j["alpha"]["opt"] = opt.alpha;
  j["alpha"]["hat_0"] = hat0.alpha;

  const struct {
    const char* name;
    const TubeArtifacts* arts;
    const TubeSpec* spec;
  } regions[] = {{"F_MPC", &ta, &f_mpc},
                 {"F_true", &ta_true, &f_true},
                 {"F_hat_opt", &ta, &f_opt},
                 {"F_hat_0", &ta, &f_hat0}};
  for (const auto& r : regions) {
    j["regions"][r.name]["volume"] = region_volume_estimate(*r.arts, *r.spec, box, grid);
    j["regions"][r.name]["boundary"] = vertices_json(region_boundary(*r.arts, *r.spec, 90));
  }

  write_text(fs::path(out_dir) / "regions.json", j.dump(2) + "\n");
  std::printf("volumes: F_MPC %.4g, F_true %.4g, F_hat_opt %.4g, F_hat_0 %.4g; written to %s\n",
              j["regions"]["F_MPC"]["volume"].get<double>(),
              j["regions"]["F_true"]["volume"].get<double>(),
              j["regions"]["F_hat_opt"]["volume"].get<double>(),
              j["regions"]["F_hat_0"]["volume"].get<double>(), out_dir.c_str());
  return 0;
}

int cmd_quantify(const ModelFlags& mf, const std::string& csv_path, const std::string& out_path) {
  const CaseStudyConfig cfg = config_from_flags(mf);
  std::ifstream is(csv_path);
  if (!is) throw DomainError("samples file not found: " + csv_path);
  const DisturbanceLog log = read_samples_csv(is, cfg.W);
  const ScenarioSolution s = quantify_batch(log, cfg.W);

  nlohmann::json j;
  j["n_samples"] = log.samples.size();
  j["alpha"] = s.alpha;
  j["beta"] = s.beta;
  j["v"] = s.v;
  j["y"] = s.y;
  j["volume"] = s.alpha * s.alpha * area_2d(cfg.W);
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    write_text(out_path, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tube MPC with online disturbance-set quantification"};
  app.require_subcommand(1);
  app.set_config("--config")->configurable(false);
  app.allow_config_extras(CLI::config_extras_mode::error);

  ModelFlags mf;
  std::string artifact = "artifacts.json";
  std::string out_dir = "out";
  std::string out_path = "artifacts.json";
  std::string samples_csv, quantify_out;
  int steps = 20, samples = 100, realisations = 50, workers = 0, grid = 60, backup_age = 2;
  std::uint64_t seed = 1;
  std::string mode = "uq";
  std::vector<double> x0;
  bool seed_origin = false;

  CLI::App* offline = app.add_subcommand("offline", "Synthesise gains and tube artifacts");
  add_model_flags(offline, &mf);
  offline->add_option("--out", out_path, "Artifact output path");

  auto add_run_flags = [&](CLI::App* cmd) {
    add_model_flags(cmd, &mf);
    cmd->add_option("--artifact", artifact, "Artifact file from `offline`");
    cmd->add_option("--steps", steps, "Closed-loop steps")->check(CLI::PositiveNumber);
    cmd->add_option("--samples", samples, "Initial disturbance sample count")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", seed, "Random seed");
    cmd->add_option("--mode", mode, "Controller mode: uq | rmpc")
        ->check(CLI::IsMember({"uq", "rmpc"}));
    cmd->add_option("--x0", x0, "Initial relative state (two values)")->expected(0, 2);
    cmd->add_option("--backup-w-age", backup_age,
                    "Disturbance age used in the backup predicted state (2 or 1)")
        ->check(CLI::IsMember({1, 2}));
    cmd->add_flag("--seed-origin", seed_origin, "Add the origin as an artificial prior sample");
    cmd->add_option("--out-dir", out_dir, "Output directory");
  };

  CLI::App* run = app.add_subcommand("run", "One closed-loop realisation");
  add_run_flags(run);

  CLI::App* campaign = app.add_subcommand("campaign", "Monte-Carlo campaign");
  add_run_flags(campaign);
  campaign->add_option("--realisations", realisations, "Number of realisations")
      ->check(CLI::PositiveNumber);
  campaign->add_option("--workers", workers, "Worker threads (0 = hardware)")
      ->check(CLI::NonNegativeNumber);

  CLI::App* regions = app.add_subcommand("regions", "Disturbance sets and feasible regions");
  add_model_flags(regions, &mf);
  regions->add_option("--artifact", artifact, "Artifact file from `offline`");
  regions->add_option("--samples", samples, "Initial sample count for the estimated set")
      ->check(CLI::PositiveNumber);
  regions->add_option("--seed", seed, "Random seed");
  regions->add_option("--grid", grid, "Grid resolution per axis for volume estimates")
      ->check(CLI::PositiveNumber);
  regions->add_option("--out-dir", out_dir, "Output directory");

  CLI::App* quantify = app.add_subcommand("quantify", "Batch-quantify a CSV of samples");
  add_model_flags(quantify, &mf);
  quantify->add_option("--samples-csv", samples_csv, "CSV with one sample per row")->required();
  quantify->add_option("--out", quantify_out, "Output JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const ControllerMode cmode = mode == "rmpc" ? ControllerMode::Rmpc : ControllerMode::UqRmpc;
  try {
    if (offline->parsed()) return cmd_offline(mf, out_path);
    const RunOptions ro =
        run_options_from_flags(cmode, steps, samples, seed, x0, backup_age, seed_origin);
    if (run->parsed()) return cmd_run(mf, artifact, ro, out_dir);
    if (campaign->parsed())
      return cmd_campaign(mf, artifact, ro, realisations, workers, seed, out_dir);
    if (regions->parsed()) return cmd_regions(mf, artifact, samples, seed, grid, out_dir);
    if (quantify->parsed()) return cmd_quantify(mf, samples_csv, quantify_out);
  } catch (const StructurallyInfeasible& e) {
    std::fprintf(stderr, "StructurallyInfeasible: %s\n", e.what());
    return kExitSolver;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "DomainError: %s\n", e.what());
    return kExitConfig;
  } catch (const SampleOutsideW& e) {
    std::fprintf(stderr, "SampleOutsideW: %s\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitConfig;
}

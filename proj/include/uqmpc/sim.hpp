#pragma once

#include <atomic>
#include <cstdint>
#include <random>

#include "uqmpc/mpc.hpp"
#include "uqmpc/polygon2d.hpp"

namespace uqmpc {

/// Car-following study: an ego vehicle regulates the relative state
/// x = x_ego - x_lead - (-L, 0) of two double integrators sampled at T.
/// The disturbance of the relative model is w = xi_ego - B u_lead - xi_lead
/// with both model-error sets and the lead-input interval unknown to the
/// controller; W is the conservative box handed to the offline pipeline.
struct CaseStudyConfig {
  double T = 0.5;   // sampling interval [s]
  double L = 35.0;  // desired inter-vehicle distance [m]
  Matrix A, B;      // relative dynamics
  Matrix F, G;      // mixed constraint F x + G u <= 1
  Matrix Q, R;      // stage cost weights
  double rho_target = 0.01;
  int N = 10;       // prediction horizon for the free input sequence

  Polytope W;                      // conservative disturbance box
  std::vector<Point2> xi_ego;      // true model-error polygon, ego
  std::vector<Point2> xi_lead;     // true model-error polygon, lead
  double u_lead_min = -0.05, u_lead_max = 0.0625;

  Vector x0_lead, x0_ego;  // absolute initial states (position, velocity)
  std::uint64_t seed = 1;
};

/// The study's published parameter set. The position corridor is +-15 m and
/// the acceleration bound +-2 m/s^2, so the constraint rows carry 1/15 and
/// 1/2. L = 35 makes the relative initial state come out at (-12, 5).
CaseStudyConfig default_config();

Vector initial_relative_state(const CaseStudyConfig& cfg);

/// Explicit true disturbance set xi_ego + (-xi_lead) + (-B [u_min, u_max]),
/// as hull vertices and in half-space form.
std::vector<Point2> true_disturbance_vertices(const CaseStudyConfig& cfg);
Polytope true_disturbance_polytope(const CaseStudyConfig& cfg);

/// Checks W covers the true set (support comparison on every facet of W).
void validate_config(const CaseStudyConfig& cfg);

/// Deterministic stream splitting for parallel realisations.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// One i.i.d. draw of w: uniform over each polygon (bounding-box rejection)
/// and uniform over the lead-input interval.
Vector sample_disturbance(const CaseStudyConfig& cfg, std::mt19937_64& rng);

DisturbanceLog sample_log(const CaseStudyConfig& cfg, int count, std::mt19937_64& rng);

/// Minimal homothet of W covering the whole true set: batch quantification
/// over the vertices of the explicit true polytope (polytope containment is
/// vertex containment).
ScenarioSolution optimal_quantified_set(const CaseStudyConfig& cfg);

TubeArtifacts offline_artifacts(const CaseStudyConfig& cfg);

struct RunOptions {
  ControllerMode mode = ControllerMode::UqRmpc;
  int steps = 20;
  int initial_samples = 100;
  std::uint64_t seed = 1;
  Vector x0;  // empty means the config's relative initial state
  Controller::Options controller;  // mode field is overwritten from `mode`
};

struct RunResult {
  RunRecord record;
  bool success = false;
  bool hard_failure = false;
  int violations = 0;
  int backups = 0;
  double mean_step_ms = 0.0;
  Vector volume_series;  // vol of the quantified set per step
  Vector final_state;
  ScenarioSolution final_quant;  // quantifier state when the run ended
  std::string failure_reason;
};

RunResult run_single(const CaseStudyConfig& cfg, const TubeArtifacts& ta, const RunOptions& opts);

struct CampaignOptions {
  RunOptions run;
  int realisations = 50;
  std::uint64_t master_seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  std::atomic<bool>* cancel = nullptr;  // checked between realisations
};

struct CampaignResult {
  int realisations = 0;
  int successes = 0;
  double success_rate = 0.0;
  int total_backups = 0;
  int total_violations = 0;
  double mean_step_ms = 0.0;
  Vector vol_mean, vol_std;            // per step, across realisations
  std::vector<RunResult> runs;         // per-realisation summaries
};

CampaignResult run_campaign(const CaseStudyConfig& cfg, const TubeArtifacts& ta,
                            const CampaignOptions& opts);

/// Deterministic grid estimate: fraction of an n_grid x n_grid grid of cell
/// centers over the box passing region_member, times the box area.
struct Box2 {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
};
double region_volume_estimate(const TubeArtifacts& ta, const TubeSpec& spec, const Box2& box,
                              int n_grid);

/// Support-box of a feasible region, padded by `pad` on each side.
Box2 region_bounding_box(const TubeArtifacts& ta, const TubeSpec& spec, double pad);

struct VolumeStudyRow {
  int n_samples = 0;
  double mean_vol = 0.0;
  double std_vol = 0.0;
};

/// Mean/std of vol(W-hat) over `n_seeds` fresh sample batches per count.
std::vector<VolumeStudyRow> initial_volume_study(const CaseStudyConfig& cfg,
                                                 const std::vector<int>& counts, int n_seeds,
                                                 std::uint64_t master_seed);

}  // namespace uqmpc

#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "uqmpc/qp.hpp"
#include "uqmpc/qtube.hpp"

namespace uqmpc {

/// One tube configuration for the online optimisation: either the offline
/// conservative tube (alpha = 1, zero translate, h_s, nu_s) or a quantified
/// one taken from a QuantifiedTube.
struct TubeSpec {
  double alpha = 1.0;
  Vector translate;
  Vector h;
  int nu = 0;
};

TubeSpec conservative_spec(const TubeArtifacts& ta);
TubeSpec quantified_spec(const QuantifiedTube& qt);

/// The online QP over z = [s0; c; w_0..w_{r-1}]:
///   minimise  s0'P_x s0 + c'P_c c   (plus a 1e-8 Tikhonov term on the
///                                    lifted w block so the hessian is
///                                    strictly positive definite)
///   s.t.      s0 + alpha*scale*sum_i Phi^i w_i = x - t   (tube membership)
///             V w_i <= 1                                  per lifted block
///             Fbar Psi^i [s0; c] <= 1 - h, i = 0..nu.
/// Tube membership is encoded with the lifted disturbance variables rather
/// than a materialised half-space form of the Minkowski sum.
struct MpcProblem {
  QuadraticProgram qp;
  int n_x = 0, n_c = 0, r = 0;  // decision layout: s0 | c | lifted w
};

MpcProblem build_opt(const TubeArtifacts& ta, const TubeSpec& spec, const Vector& x);

/// Feasible-region membership of x: an LP feasibility check on the
/// constraint system of build_opt, objective ignored.
bool region_member(const TubeArtifacts& ta, const TubeSpec& spec, const Vector& x);

/// Support of the feasible region in direction d (for bounding boxes and
/// boundary tracing).
double region_support(const TubeArtifacts& ta, const TubeSpec& spec, const Vector& d);

enum class ControllerMode { Rmpc, UqRmpc };

enum class StepStatus {
  ConservativeSolved,   // x inside the conservative region, plain tube MPC step
  QuantifiedSolved,     // quantified problem solved at x
  BackupSolved,         // quantified problem infeasible; previous problem re-solved
  RmpcInfeasible,       // hard failure in Rmpc mode
  BackupUnavailable,    // hard failure: infeasible before any backup exists (k < 2)
  BackupInfeasible,     // hard failure: the backup problem is itself infeasible
};

bool is_hard_failure(StepStatus s);
const char* to_string(StepStatus s);

struct StepRecord {
  int k = 0;
  Vector x, u, w;  // w filled by the harness once the next state is seen
  double alpha = 1.0;
  int nu = 0;
  StepStatus status = StepStatus::ConservativeSolved;
  bool backup_used = false;
  bool violation = false;  // F x + G u  > 1 on some row (filled by harness)
  double solve_ms = 0.0;
};

struct RunRecord {
  std::vector<StepRecord> steps;
};

void write_run_csv(std::ostream& os, const RunRecord& rec);
nlohmann::json run_summary_json(const RunRecord& rec, bool success);

/// Online controller. One instance drives one closed-loop realisation and
/// is strictly sequential. Per step:
///   1. recover w_{k-1} from the measured state and extend the sample log,
///   2. maintain the quantified set (batch once, then nested updates),
///   3. if x is in the conservative feasible region, solve the plain tube
///      problem; otherwise refresh the quantified tube and solve the
///      quantified problem,
///   4. on infeasibility, re-solve the previous step's problem at the
///      predicted state Phi x_{k-1} + B c*_{0|k-1} + w_{k-2},
///   5. apply u = K x + c*_0.
class Controller {
 public:
  struct Options {
    ControllerMode mode = ControllerMode::UqRmpc;
    // The disturbance sample used in the backup predicted state: k-2 is the
    // newest sample already covered by the previous quantified set (so the
    // backup problem stays feasible); k-1 is the plain one-step predictor.
    int backup_disturbance_age = 2;  // 2 -> w_{k-2}, 1 -> w_{k-1}
    bool seed_origin = false;        // add 0 as an artificial prior sample
    // Testing/comparison switches.
    bool force_quantified = false;   // skip the conservative-region branch
    bool force_alpha_one = false;    // pin the quantified set to all of W
  };

  struct StepOutcome {
    Vector u;
    StepStatus status = StepStatus::ConservativeSolved;
    double alpha = 1.0;        // alpha of the tube actually used this step
    double quant_alpha = 1.0;  // alpha of the maintained quantified set
    int nu = 0;
    bool ok = false;  // false on hard failure; u is then empty
    double solve_ms = 0.0;
  };

  Controller(const TubeArtifacts& ta, Options opts, DisturbanceLog initial_log);

  StepOutcome step(const Vector& x);

  const DisturbanceLog& log() const { return log_; }
  const std::optional<ScenarioSolution>& quantified() const { return quant_; }
  const std::optional<QuantifiedTube>& tube() const { return qt_; }
  int steps_taken() const { return k_; }

 private:
  StepOutcome fail(StepStatus status);
  void update_quantifier();

  const TubeArtifacts& ta_;
  Options opts_;
  DisturbanceLog log_;
  std::vector<Vector> online_w_;  // w_0, w_1, ... as they are recovered

  std::optional<ScenarioSolution> quant_, prev_quant_;
  std::optional<QuantifiedTube> qt_, prev_qt_;
  Vector prev_x_, prev_u_, prev_c_;
  int k_ = 0;
};

}  // namespace uqmpc

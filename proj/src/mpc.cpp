#include "uqmpc/mpc.hpp"

#include <chrono>
#include <ostream>

#include "uqmpc/errors.hpp"
#include "uqmpc/lp.hpp"

namespace uqmpc {

namespace {
constexpr double kLiftedRegularisation = 1e-8;

struct ConstraintSystem {
  Matrix Aeq;
  Vector beq;
  Matrix Ain;
  Vector bin;
};

// Shared by the QP builder and the region LP: equality rows tie s0 and the
// lifted w_i to x - t, inequality rows are the per-block V w_i <= 1 boxes
// and the tightened prediction constraints on [s0; c].
ConstraintSystem constraint_system(const TubeArtifacts& ta, const TubeSpec& spec, const Vector& x) {
  const int n_x = ta.gs.A.rows();
  const int n_c = ta.gs.N * ta.gs.B.cols();
  const int r = ta.tube.r;
  const int n_v = ta.tube.W.facets();
  const int nc_rows = ta.gs.Fbar.rows();
  const int n_z = n_x + n_c + r * n_x;
  const double a_scale = spec.alpha * ta.tube.scale;

  ConstraintSystem cs;
  cs.Aeq = Matrix(n_x, n_z);
  cs.Aeq.set_block(0, 0, Matrix::identity(n_x));
  for (int i = 0; i < r; ++i)
    cs.Aeq.set_block(0, n_x + n_c + i * n_x, a_scale * ta.tube.phi_powers[i]);
  cs.beq = vsub(x, spec.translate);

  const int m_in = r * n_v + (spec.nu + 1) * nc_rows;
  cs.Ain = Matrix(m_in, n_z);
  cs.bin.assign(static_cast<size_t>(m_in), 0.0);
  int row = 0;
  for (int i = 0; i < r; ++i) {
    cs.Ain.set_block(row, n_x + n_c + i * n_x, ta.tube.W.V());
    for (int q = 0; q < n_v; ++q) cs.bin[row + q] = ta.tube.W.b()[q];
    row += n_v;
  }
  Matrix pred = ta.gs.Fbar;  // Fbar Psi^i
  for (int i = 0; i <= spec.nu; ++i) {
    cs.Ain.set_block(row, 0, pred);
    for (int q = 0; q < nc_rows; ++q) cs.bin[row + q] = 1.0 - spec.h[q];
    row += nc_rows;
    if (i < spec.nu) pred = pred * ta.gs.Psi;
  }
  return cs;
}

}  // namespace

TubeSpec conservative_spec(const TubeArtifacts& ta) {
  return TubeSpec{1.0, zeros(ta.gs.A.rows()), ta.h_s, ta.nu_s};
}

TubeSpec quantified_spec(const QuantifiedTube& qt) {
  return TubeSpec{qt.alpha, qt.translate, qt.h_star, qt.nu_k};
}

MpcProblem build_opt(const TubeArtifacts& ta, const TubeSpec& spec, const Vector& x) {
  const int n_x = ta.gs.A.rows();
  const int n_c = ta.gs.N * ta.gs.B.cols();
  const int r = ta.tube.r;
  const int n_z = n_x + n_c + r * n_x;

  MpcProblem p;
  p.n_x = n_x;
  p.n_c = n_c;
  p.r = r;
  p.qp.H = Matrix(n_z, n_z);
  p.qp.H.set_block(0, 0, 2.0 * ta.gs.P_x);
  p.qp.H.set_block(n_x, n_x, 2.0 * ta.gs.P_c);
  for (int i = n_x + n_c; i < n_z; ++i) p.qp.H(i, i) = 2.0 * kLiftedRegularisation;
  p.qp.g = zeros(n_z);

  ConstraintSystem cs = constraint_system(ta, spec, x);
  p.qp.Aeq = std::move(cs.Aeq);
  p.qp.beq = std::move(cs.beq);
  p.qp.Ain = std::move(cs.Ain);
  p.qp.bin = std::move(cs.bin);
  return p;
}

bool region_member(const TubeArtifacts& ta, const TubeSpec& spec, const Vector& x) {
  const ConstraintSystem cs = constraint_system(ta, spec, x);
  const int n_z = cs.Ain.cols();
  LinearProgram lp;
  lp.c.assign(static_cast<size_t>(n_z), 0.0);
  lp.A = Matrix(2 * cs.Aeq.rows() + cs.Ain.rows(), n_z);
  lp.A.set_block(0, 0, cs.Aeq);
  lp.A.set_block(cs.Aeq.rows(), 0, -1.0 * cs.Aeq);
  lp.A.set_block(2 * cs.Aeq.rows(), 0, cs.Ain);
  lp.b = concat(concat(cs.beq, vscale(-1.0, cs.beq)), cs.bin);
  return solve_lp(lp).status == LpStatus::Optimal;
}

double region_support(const TubeArtifacts& ta, const TubeSpec& spec, const Vector& d) {
  const int n_x = ta.gs.A.rows();
  const ConstraintSystem cs = constraint_system(ta, spec, zeros(n_x));
  const int n_z = cs.Ain.cols();

  // Extra leading variables for x itself: x - (s0 + a_scale sum Phi^i w_i) = t.
  LinearProgram lp;
  lp.c = concat(d, zeros(n_z));
  lp.A = Matrix(2 * n_x + cs.Ain.rows(), n_x + n_z);
  lp.b.assign(static_cast<size_t>(2 * n_x + cs.Ain.rows()), 0.0);
  for (int i = 0; i < n_x; ++i) {
    lp.A(i, i) = 1.0;
    lp.A(n_x + i, i) = -1.0;
    for (int j = 0; j < n_z; ++j) {
      lp.A(i, n_x + j) = -cs.Aeq(i, j);
      lp.A(n_x + i, n_x + j) = cs.Aeq(i, j);
    }
    lp.b[i] = spec.translate[i];
    lp.b[n_x + i] = -spec.translate[i];
  }
  lp.A.set_block(2 * n_x, n_x, cs.Ain);
  for (int q = 0; q < cs.Ain.rows(); ++q) lp.b[2 * n_x + q] = cs.bin[q];

  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal)
    throw DomainError("region_support: region empty or unbounded");
  return res.value;
}

bool is_hard_failure(StepStatus s) {
  return s == StepStatus::RmpcInfeasible || s == StepStatus::BackupUnavailable ||
         s == StepStatus::BackupInfeasible;
}

const char* to_string(StepStatus s) {
  switch (s) {
    case StepStatus::ConservativeSolved: return "conservative";
    case StepStatus::QuantifiedSolved: return "quantified";
    case StepStatus::BackupSolved: return "backup";
    case StepStatus::RmpcInfeasible: return "rmpc_infeasible";
    case StepStatus::BackupUnavailable: return "backup_unavailable";
    case StepStatus::BackupInfeasible: return "backup_infeasible";
  }
  return "unknown";
}

void write_run_csv(std::ostream& os, const RunRecord& rec) {
  os.precision(17);
  if (rec.steps.empty()) return;
  const size_t n_x = rec.steps.front().x.size();
  const size_t n_u = rec.steps.front().u.size();
  os << "k";
  for (size_t i = 0; i < n_x; ++i) os << ",x" << i;
  for (size_t i = 0; i < n_u; ++i) os << ",u" << i;
  for (size_t i = 0; i < n_x; ++i) os << ",w" << i;
  os << ",alpha,nu,status,backup,violation\n";
  for (const StepRecord& s : rec.steps) {
    os << s.k;
    for (double v : s.x) os << ',' << v;
    if (s.u.empty())
      for (size_t i = 0; i < n_u; ++i) os << ",nan";
    else
      for (double v : s.u) os << ',' << v;
    if (s.w.empty())
      for (size_t i = 0; i < n_x; ++i) os << ",nan";
    else
      for (double v : s.w) os << ',' << v;
    os << ',' << s.alpha << ',' << s.nu << ',' << to_string(s.status) << ','
       << (s.backup_used ? 1 : 0) << ',' << (s.violation ? 1 : 0) << '\n';
  }
}

nlohmann::json run_summary_json(const RunRecord& rec, bool success) {
  int violations = 0, backups = 0, hard = 0;
  double final_alpha = 1.0;
  for (const StepRecord& s : rec.steps) {
    violations += s.violation ? 1 : 0;
    backups += s.backup_used ? 1 : 0;
    hard += is_hard_failure(s.status) ? 1 : 0;
    final_alpha = s.alpha;
  }
  nlohmann::json j;
  j["steps"] = rec.steps.size();
  j["success"] = success;
  j["violations"] = violations;
  j["backups"] = backups;
  j["hard_failures"] = hard;
  j["final_alpha"] = final_alpha;
  if (!rec.steps.empty()) j["final_state"] = rec.steps.back().x;
  return j;
}

Controller::Controller(const TubeArtifacts& ta, Options opts, DisturbanceLog initial_log)
    : ta_(ta), opts_(opts), log_(std::move(initial_log)) {
  if (opts_.seed_origin) append_sample(log_, zeros(ta_.gs.A.rows()), ta_.tube.W);
}

Controller::StepOutcome Controller::fail(StepStatus status) {
  StepOutcome out;
  out.status = status;
  out.ok = false;
  if (quant_) {
    out.alpha = quant_->alpha;
    out.quant_alpha = quant_->alpha;
  }
  ++k_;
  return out;
}

// The quantified set is maintained every step, conservative branch or not:
// batch over the initial log once, then one nested update per new sample.
// Processing order equals arrival order, so the chain state matches what a
// lazy evaluation at first use would produce, and the previous-step state
// needed by the backup problem is always defined.
void Controller::update_quantifier() {
  prev_quant_ = quant_;
  prev_qt_ = qt_;
  if (!quant_) {
    quant_ = quantify_batch(log_, ta_.tube.W);
    if (!prev_quant_) prev_quant_ = quant_;
  } else if (!online_w_.empty()) {
    quant_ = quantify_recursive(*quant_, online_w_.back(), ta_.tube.W);
  }
  qt_.reset();  // geometry refreshed lazily when the quantified branch runs
}

Controller::StepOutcome Controller::step(const Vector& x) {
  const auto t0 = std::chrono::steady_clock::now();

  if (k_ >= 1) {
    const Vector w = vsub(x, vadd(ta_.gs.A * prev_x_, ta_.gs.B * prev_u_));
    append_sample(log_, w, ta_.tube.W);
    online_w_.push_back(w);
  }

  StepOutcome out;
  const Matrix& K = ta_.gs.K;
  const int n_u = ta_.gs.B.cols();

  auto finish = [&](const Vector& c_star, StepStatus status, double alpha, int nu) {
    out.u = vadd(K * x, Vector(c_star.begin(), c_star.begin() + n_u));
    out.status = status;
    out.alpha = alpha;
    out.quant_alpha = quant_ ? quant_->alpha : 1.0;
    out.nu = nu;
    out.ok = true;
    prev_x_ = x;
    prev_u_ = out.u;
    prev_c_ = c_star;
    ++k_;
    const auto t1 = std::chrono::steady_clock::now();
    out.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    return out;
  };

  auto c_block = [&](const MpcProblem& p, const Vector& z) {
    return Vector(z.begin() + p.n_x, z.begin() + p.n_x + p.n_c);
  };

  if (opts_.mode == ControllerMode::Rmpc) {
    const MpcProblem p = build_opt(ta_, conservative_spec(ta_), x);
    const QpResult res = solve_qp(p.qp);
    if (res.status != QpStatus::Optimal) return fail(StepStatus::RmpcInfeasible);
    return finish(c_block(p, res.point), StepStatus::ConservativeSolved, 1.0, ta_.nu_s);
  }

  update_quantifier();

  if (!opts_.force_quantified && region_member(ta_, conservative_spec(ta_), x)) {
    const MpcProblem p = build_opt(ta_, conservative_spec(ta_), x);
    const QpResult res = solve_qp(p.qp);
    if (res.status != QpStatus::Optimal)
      throw InternalError("controller: conservative problem infeasible inside its region");
    return finish(c_block(p, res.point), StepStatus::ConservativeSolved, 1.0, ta_.nu_s);
  }

  const ScenarioSolution used =
      opts_.force_alpha_one ? ScenarioSolution{zeros(ta_.gs.A.rows()), 0.0,
                                               zeros(ta_.gs.A.rows()), 1.0}
                            : *quant_;
  qt_ = quantified_tube(ta_, used);

  const MpcProblem p = build_opt(ta_, quantified_spec(*qt_), x);
  const QpResult res = solve_qp(p.qp);
  if (res.status == QpStatus::Optimal)
    return finish(c_block(p, res.point), StepStatus::QuantifiedSolved, qt_->alpha, qt_->nu_k);

  // Backup: previous problem at the predicted state.
  if (k_ < 2) return fail(StepStatus::BackupUnavailable);
  const int age = opts_.backup_disturbance_age;
  const int w_index = k_ - age;
  if (w_index < 0 || w_index >= static_cast<int>(online_w_.size()))
    return fail(StepStatus::BackupUnavailable);

  if (!prev_qt_ && prev_quant_) prev_qt_ = quantified_tube(ta_, *prev_quant_);
  if (!prev_qt_) return fail(StepStatus::BackupUnavailable);

  const Vector x_pred = vadd(vadd(ta_.gs.Phi * prev_x_,
                                  ta_.gs.B * Vector(prev_c_.begin(), prev_c_.begin() + n_u)),
                             online_w_[static_cast<size_t>(w_index)]);
  const MpcProblem pb = build_opt(ta_, quantified_spec(*prev_qt_), x_pred);
  const QpResult resb = solve_qp(pb.qp);
  if (resb.status != QpStatus::Optimal) return fail(StepStatus::BackupInfeasible);

  return finish(c_block(pb, resb.point), StepStatus::BackupSolved, qt_->alpha, qt_->nu_k);
}

}  // namespace uqmpc

#include "uqmpc/polytope.hpp"

#include <algorithm>
#include <cmath>

#include "uqmpc/errors.hpp"
#include "uqmpc/lp.hpp"

namespace uqmpc {

namespace {
constexpr double kMembershipTol = 1e-8;

LinearProgram feasibility_lp(const Matrix& V, const Vector& b) {
  LinearProgram lp;
  lp.c.assign(static_cast<size_t>(V.cols()), 0.0);
  lp.A = V;
  lp.b = b;
  return lp;
}
}  // namespace

Polytope::Polytope(Matrix V, Vector b, bool require_compact) : V_(std::move(V)), b_(std::move(b)) {
  if (V_.rows() != static_cast<int>(b_.size())) throw DimensionMismatch("Polytope: V/b rows");
  check_finite(b_, "Polytope rhs");

  if (solve_lp(feasibility_lp(V_, b_)).status != LpStatus::Optimal)
    throw EmptyPolytope("Polytope: half-space system is infeasible");

  if (require_compact) {
    for (int j = 0; j < V_.cols(); ++j) {
      for (double sign : {1.0, -1.0}) {
        LinearProgram lp = feasibility_lp(V_, b_);
        lp.c[j] = sign;
        if (solve_lp(lp).status != LpStatus::Optimal)
          throw DomainError("Polytope: not compact (coordinate support unbounded)");
      }
    }
    compact_ = true;
  }
}

Polytope::Polytope(Matrix V, bool require_compact)
    : Polytope(V, ones(V.rows()), require_compact) {}

bool Polytope::unit_rhs() const {
  for (double v : b_)
    if (std::abs(v - 1.0) > 1e-12) return false;
  return true;
}

bool contains(const Polytope& P, const Vector& x) {
  if (static_cast<int>(x.size()) != P.dim()) throw DimensionMismatch("contains");
  const Vector vx = P.V() * x;
  for (int i = 0; i < P.facets(); ++i)
    if (vx[i] > P.b()[i] + kMembershipTol) return false;
  return true;
}

double support(const Polytope& P, const Vector& f) {
  if (static_cast<int>(f.size()) != P.dim()) throw DimensionMismatch("support");
  LinearProgram lp = feasibility_lp(P.V(), P.b());
  lp.c = f;
  const LpResult res = solve_lp(lp);
  if (res.status == LpStatus::Unbounded)
    throw DomainError("support: unbounded direction (polytope not compact)");
  if (res.status != LpStatus::Optimal) throw InternalError("support: LP failed on nonempty set");
  return res.value;
}

QuantifiedSet::QuantifiedSet(const Polytope& base_in, Vector v_in, double alpha_in)
    : base(base_in), v(std::move(v_in)), alpha(alpha_in) {
  if (!base.unit_rhs()) throw DomainError("QuantifiedSet: base set must have unit rhs");
  if (static_cast<int>(v.size()) != base.dim()) throw DimensionMismatch("QuantifiedSet: v");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("QuantifiedSet: alpha outside [0,1]");
  if (!contains(base, v)) throw DomainError("QuantifiedSet: center v outside the base set");
}

bool quantified_contains(const QuantifiedSet& q, const Vector& w) {
  const Vector vw = q.base.V() * w;
  const Vector vv = q.base.V() * q.v;
  for (int i = 0; i < q.base.facets(); ++i)
    if (vw[i] > q.alpha + (1.0 - q.alpha) * vv[i] + kMembershipTol) return false;
  return true;
}

Polytope as_polytope(const QuantifiedSet& q) {
  const Vector vv = q.base.V() * q.v;
  Vector b(static_cast<size_t>(q.base.facets()));
  for (int i = 0; i < q.base.facets(); ++i) b[i] = q.alpha + (1.0 - q.alpha) * vv[i];
  return Polytope(q.base.V(), b, q.base.compact());
}

std::vector<Vector> vertices_2d(const Polytope& P) {
  if (P.dim() != 2) throw DimensionUnsupported("vertices_2d: only 2-D polytopes");
  const Matrix& V = P.V();
  const Vector& b = P.b();

  std::vector<Vector> verts;
  for (int i = 0; i < P.facets(); ++i) {
    for (int j = i + 1; j < P.facets(); ++j) {
      const double det = V(i, 0) * V(j, 1) - V(i, 1) * V(j, 0);
      const double scale = std::hypot(V(i, 0), V(i, 1)) * std::hypot(V(j, 0), V(j, 1));
      if (std::abs(det) <= 1e-12 * (scale > 0.0 ? scale : 1.0)) continue;  // parallel facets
      const Vector x = {(b[i] * V(j, 1) - b[j] * V(i, 1)) / det,
                        (V(i, 0) * b[j] - V(j, 0) * b[i]) / det};
      if (!contains(P, x)) continue;
      bool duplicate = false;
      for (const Vector& u : verts)
        if (std::abs(u[0] - x[0]) <= 1e-7 && std::abs(u[1] - x[1]) <= 1e-7) {
          duplicate = true;
          break;
        }
      if (!duplicate) verts.push_back(x);
    }
  }

  if (verts.size() < 2) return verts;
  double cx = 0.0, cy = 0.0;
  for (const Vector& u : verts) {
    cx += u[0];
    cy += u[1];
  }
  cx /= static_cast<double>(verts.size());
  cy /= static_cast<double>(verts.size());
  std::sort(verts.begin(), verts.end(), [cx, cy](const Vector& a, const Vector& b2) {
    return std::atan2(a[1] - cy, a[0] - cx) < std::atan2(b2[1] - cy, b2[0] - cx);
  });
  return verts;
}

double area_2d(const Polytope& P) {
  const std::vector<Vector> verts = vertices_2d(P);
  if (verts.size() < 3) return 0.0;
  double twice = 0.0;
  for (size_t i = 0; i < verts.size(); ++i) {
    const Vector& p = verts[i];
    const Vector& q = verts[(i + 1) % verts.size()];
    twice += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * std::abs(twice);
}

nlohmann::json to_json(const Polytope& P) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < P.facets(); ++i) rows.push_back(P.V().row(i));
  return {{"V", rows}, {"b", P.b()}};
}

Polytope polytope_from_json(const nlohmann::json& j, bool require_compact) {
  const auto& rows = j.at("V");
  const Vector b = j.at("b").get<Vector>();
  if (rows.empty()) throw DomainError("polytope_from_json: empty V");
  const int cols = static_cast<int>(rows.front().size());
  Matrix V(static_cast<int>(rows.size()), cols);
  for (size_t i = 0; i < rows.size(); ++i) V.set_row(static_cast<int>(i), rows[i].get<Vector>());
  return Polytope(std::move(V), b, require_compact);
}

}  // namespace uqmpc

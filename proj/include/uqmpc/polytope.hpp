#pragma once

#include <json.hpp>

#include "uqmpc/matrix.hpp"

namespace uqmpc {

/// Convex polytope in half-space form {x : V x <= b}. Base disturbance sets
/// use b = 1 (every facet normalised against the origin in the interior);
/// derived sets carry a general right-hand side.
///
/// Construction certifies nonemptiness with an LP, and boundedness (all
/// coordinate supports finite) when `require_compact` is set.
class Polytope {
 public:
  /// Empty placeholder; every certified instance comes from the data
  /// constructors below.
  Polytope() = default;

  Polytope(Matrix V, Vector b, bool require_compact = true);

  /// b = 1 on every facet.
  explicit Polytope(Matrix V, bool require_compact = true);

  const Matrix& V() const { return V_; }
  const Vector& b() const { return b_; }
  int dim() const { return V_.cols(); }
  int facets() const { return V_.rows(); }
  bool compact() const { return compact_; }

  /// True when b = 1 within 1e-12 on every facet.
  bool unit_rhs() const;

 private:
  Matrix V_;
  Vector b_;
  bool compact_ = false;
};

/// V x <= b + 1e-8 componentwise.
bool contains(const Polytope& P, const Vector& x);

/// max f'x over P, solved as an LP; exact at a vertex.
double support(const Polytope& P, const Vector& f);

/// Quantified disturbance set (1-alpha)v + alpha*W: a homothet of the base
/// set W shrunk toward the interior point v. Its half-space form is
/// {w : V w <= alpha*1 + (1-alpha)*V v}.
struct QuantifiedSet {
  QuantifiedSet(const Polytope& base, Vector v, double alpha);

  Polytope base;  // must have unit rhs
  Vector v;
  double alpha;
};

bool quantified_contains(const QuantifiedSet& q, const Vector& w);

/// The homothet as a plain polytope (same normals, adjusted rhs).
Polytope as_polytope(const QuantifiedSet& q);

/// Counter-clockwise vertex list of a compact 2-D polytope, from pairwise
/// facet intersections filtered by membership; duplicates merged at 1e-7.
/// Throws DimensionUnsupported unless dim == 2.
std::vector<Vector> vertices_2d(const Polytope& P);

/// Shoelace area over vertices_2d. Degenerate sets (points, segments) have
/// area zero.
double area_2d(const Polytope& P);

nlohmann::json to_json(const Polytope& P);
Polytope polytope_from_json(const nlohmann::json& j, bool require_compact = true);

}  // namespace uqmpc

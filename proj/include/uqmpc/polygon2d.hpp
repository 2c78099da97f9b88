#pragma once

#include <array>
#include <vector>

#include "uqmpc/polytope.hpp"

namespace uqmpc {

using Point2 = std::array<double, 2>;

/// Counter-clockwise convex hull (monotone chain); collinear points dropped.
std::vector<Point2> convex_hull(std::vector<Point2> points);

/// Minkowski sum of two convex vertex sets: hull of all pairwise sums.
std::vector<Point2> minkowski_sum(const std::vector<Point2>& a, const std::vector<Point2>& b);

std::vector<Point2> negate(const std::vector<Point2>& pts);
std::vector<Point2> scale_translate(const std::vector<Point2>& pts, double s, const Point2& t);

double polygon_area(const std::vector<Point2>& hull_ccw);

/// Half-space form of a full-dimensional convex polygon (unit normals).
Polytope polygon_to_polytope(const std::vector<Point2>& pts);

}  // namespace uqmpc

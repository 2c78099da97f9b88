#include "uqmpc/polygon2d.hpp"

#include <algorithm>
#include <cmath>

#include "uqmpc/errors.hpp"

namespace uqmpc {

namespace {
double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}
}  // namespace

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point2& a, const Point2& b) {
                          return std::abs(a[0] - b[0]) < 1e-12 && std::abs(a[1] - b[1]) < 1e-12;
                        }),
            pts.end());
  const size_t n = pts.size();
  if (n <= 2) return pts;

  std::vector<Point2> hull(2 * n);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-14) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = n - 1, lower = k + 1; i-- > 0;) {  // upper chain
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-14) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<Point2> minkowski_sum(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  std::vector<Point2> sums;
  sums.reserve(a.size() * b.size());
  for (const Point2& p : a)
    for (const Point2& q : b) sums.push_back({p[0] + q[0], p[1] + q[1]});
  return convex_hull(std::move(sums));
}

std::vector<Point2> negate(const std::vector<Point2>& pts) {
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (const Point2& p : pts) out.push_back({-p[0], -p[1]});
  return out;
}

std::vector<Point2> scale_translate(const std::vector<Point2>& pts, double s, const Point2& t) {
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (const Point2& p : pts) out.push_back({s * p[0] + t[0], s * p[1] + t[1]});
  return out;
}

double polygon_area(const std::vector<Point2>& hull) {
  if (hull.size() < 3) return 0.0;
  double twice = 0.0;
  for (size_t i = 0; i < hull.size(); ++i) {
    const Point2& p = hull[i];
    const Point2& q = hull[(i + 1) % hull.size()];
    twice += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * std::abs(twice);
}

Polytope polygon_to_polytope(const std::vector<Point2>& pts) {
  const std::vector<Point2> hull = convex_hull(pts);
  if (hull.size() < 3) throw DomainError("polygon_to_polytope: polygon is degenerate");

  Matrix V(static_cast<int>(hull.size()), 2);
  Vector b(hull.size());
  for (size_t i = 0; i < hull.size(); ++i) {
    const Point2& p = hull[i];
    const Point2& q = hull[(i + 1) % hull.size()];
    // CCW edge p->q, interior on the left; outward normal (dy, -dx).
    double nx = q[1] - p[1];
    double ny = -(q[0] - p[0]);
    const double len = std::hypot(nx, ny);
    nx /= len;
    ny /= len;
    V(static_cast<int>(i), 0) = nx;
    V(static_cast<int>(i), 1) = ny;
    b[i] = nx * p[0] + ny * p[1];
  }
  return Polytope(std::move(V), b, /*require_compact=*/true);
}

}  // namespace uqmpc

#include "roomir/geometry.hpp"

#include <array>

namespace roomir::geom {

namespace {

bool overlaps_on_axis(Vec3 axis, const std::array<Vec3, 3>& v, Vec3 half) {
  const double p0 = dot(axis, v[0]);
  const double p1 = dot(axis, v[1]);
  const double p2 = dot(axis, v[2]);
  const double r = half.x * std::abs(axis.x) + half.y * std::abs(axis.y) + half.z * std::abs(axis.z);
  const double lo = std::min({p0, p1, p2});
  const double hi = std::max({p0, p1, p2});
  return !(lo > r || hi < -r);
}

}  // namespace

bool triangle_box_overlap(const Triangle& tri, Vec3 box_center, Vec3 box_half) {
  const std::array<Vec3, 3> v = {tri.a - box_center, tri.b - box_center, tri.c - box_center};
  const std::array<Vec3, 3> e = {v[1] - v[0], v[2] - v[1], v[0] - v[2]};

  // Box face normals.
  for (int axis = 0; axis < 3; ++axis) {
    const double lo = std::min({v[0][axis], v[1][axis], v[2][axis]});
    const double hi = std::max({v[0][axis], v[1][axis], v[2][axis]});
    if (lo > box_half[axis] || hi < -box_half[axis]) return false;
  }

  // Triangle normal.
  const Vec3 n = cross(e[0], e[1]);
  if (!overlaps_on_axis(n, v, box_half)) return false;

  // Nine edge cross products.
  constexpr std::array<Vec3, 3> unit = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  for (const Vec3& edge : e) {
    for (const Vec3& u : unit) {
      const Vec3 axis = cross(u, edge);
      if (dot(axis, axis) == 0.0) continue;
      if (!overlaps_on_axis(axis, v, box_half)) return false;
    }
  }
  return true;
}

Vec3 closest_point_on_triangle(Vec3 p, const Triangle& tri) {
  const Vec3 ab = tri.b - tri.a;
  const Vec3 ac = tri.c - tri.a;
  const Vec3 ap = p - tri.a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return tri.a;

  const Vec3 bp = p - tri.b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return tri.b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return tri.a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - tri.c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return tri.c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return tri.a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return tri.b + (tri.c - tri.b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }

  const double denom = 1.0 / (va + vb + vc);
  return tri.a + ab * (vb * denom) + ac * (vc * denom);
}

std::optional<double> ray_triangle(Vec3 origin, Vec3 dir, const Triangle& tri, double t_min) {
  const Vec3 e1 = tri.b - tri.a;
  const Vec3 e2 = tri.c - tri.a;
  const Vec3 pvec = cross(dir, e2);
  const double det = dot(e1, pvec);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 tvec = origin - tri.a;
  const double u = dot(tvec, pvec) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = cross(tvec, e1);
  const double v = dot(dir, qvec) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = dot(e2, qvec) * inv;
  if (t <= t_min) return std::nullopt;
  return t;
}

std::optional<double> ray_box(Vec3 origin, Vec3 inv_dir, const Aabb& box, double t_max) {
  double t0 = 0.0;
  double t1 = t_max;
  for (int axis = 0; axis < 3; ++axis) {
    double ta = (box.lo[axis] - origin[axis]) * inv_dir[axis];
    double tb = (box.hi[axis] - origin[axis]) * inv_dir[axis];
    if (ta > tb) std::swap(ta, tb);
    // NaN from 0 * inf is ignored by the comparisons below.
    if (ta > t0) t0 = ta;
    if (tb < t1) t1 = tb;
    if (t0 > t1) return std::nullopt;
  }
  return t0;
}

}  // namespace roomir::geom

#pragma once

#include <algorithm>
#include <limits>
#include <optional>

#include "roomir/common.hpp"

namespace roomir::geom {

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  void expand(Vec3 p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  void expand(const Aabb& b) {
    expand(b.lo);
    expand(b.hi);
  }
  Vec3 extent() const { return hi - lo; }
  Vec3 center() const { return (lo + hi) * 0.5; }
  bool contains_strictly(Vec3 p) const {
    return p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y && p.z > lo.z && p.z < hi.z;
  }
};

struct Triangle {
  Vec3 a, b, c;
};

inline double triangle_area(const Triangle& t) { return 0.5 * norm(cross(t.b - t.a, t.c - t.a)); }

/// Separating-axis overlap test between a triangle and an axis-aligned box.
/// Touching counts as overlap, which keeps surface voxelization conservative.
bool triangle_box_overlap(const Triangle& tri, Vec3 box_center, Vec3 box_half);

/// Closest point on a triangle to p (Ericson, Real-Time Collision Detection 5.1.5).
Vec3 closest_point_on_triangle(Vec3 p, const Triangle& tri);

inline double point_triangle_distance(Vec3 p, const Triangle& tri) {
  return distance(p, closest_point_on_triangle(p, tri));
}

/// Moller-Trumbore. Returns the ray parameter t > t_min of the hit, if any.
std::optional<double> ray_triangle(Vec3 origin, Vec3 dir, const Triangle& tri, double t_min = 1e-9);

/// Slab test; returns the entry parameter when the ray overlaps the box within [0, t_max].
std::optional<double> ray_box(Vec3 origin, Vec3 inv_dir, const Aabb& box, double t_max);

}  // namespace roomir::geom

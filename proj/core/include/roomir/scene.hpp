#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "roomir/common.hpp"
#include "roomir/geometry.hpp"

namespace roomir::scene {

/// Scene geometry as a triangle soup with per-triangle material and label.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  /// Index into material_names, one per triangle.
  std::vector<std::uint32_t> triangle_material;
  std::vector<std::string> material_names;
  /// Free-text object label, one per triangle (OBJ group name, falling back to usemtl).
  std::vector<std::string> object_labels;

  std::size_t size() const { return triangles.size(); }
  geom::Triangle triangle(std::size_t i) const {
    const auto& t = triangles[i];
    return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
  }
  geom::Aabb bounds() const;

  /// Throws Error when an invariant does not hold.
  void validate() const;
};

struct LoadedMesh {
  TriangleMesh mesh;
  int degenerate_dropped = 0;
};

/// Parses the Wavefront OBJ subset (v, f, g, o, usemtl). Faces with more than
/// three corners are fan-triangulated; zero-area triangles are dropped and counted.
LoadedMesh parse_obj(std::istream& in);
LoadedMesh load_mesh(const std::filesystem::path& path);

void write_obj(const TriangleMesh& mesh, std::ostream& out);

/// Axis-aligned box [lo, hi] with inward-agnostic winding, 12 triangles.
TriangleMesh make_box(Vec3 lo, Vec3 hi, const std::string& label = "wall");
/// Appends `other` to `mesh`, merging material names by string.
void append_mesh(TriangleMesh& mesh, const TriangleMesh& other);

/// True when every edge is shared by exactly two triangles.
bool is_closed(const TriangleMesh& mesh);
/// Enclosed volume by the divergence theorem (absolute value).
double enclosed_volume(const TriangleMesh& mesh);
double surface_area(const TriangleMesh& mesh);

/// Bounding volume hierarchy over a mesh for ray and distance queries.
class TriangleBvh {
 public:
  struct Hit {
    double t = 0.0;
    std::uint32_t triangle = 0;
  };

  explicit TriangleBvh(const TriangleMesh& mesh);

  std::optional<Hit> closest_hit(Vec3 origin, Vec3 dir, double t_max) const;
  /// True when any triangle lies strictly between the two points.
  bool occluded(Vec3 from, Vec3 to) const;
  /// Number of triangle crossings along the ray (t > 0).
  int count_hits(Vec3 origin, Vec3 dir) const;
  double min_distance(Vec3 p) const;

  const geom::Triangle& triangle(std::uint32_t i) const { return tris_[i]; }
  std::size_t size() const { return tris_.size(); }

 private:
  struct Node {
    geom::Aabb box;
    std::uint32_t first = 0;  // child index or first primitive
    std::uint32_t count = 0;  // 0 for interior nodes
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<geom::Triangle> tris_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

enum class CellState : std::uint8_t { air = 0, solid = 1 };

inline constexpr std::uint32_t kShellMaterial = 0xffffffffu;

/// Volumetric scene for the wave solver.
struct VoxelGrid {
  Vec3 origin;  // corner of cell (0,0,0)
  double dx = 0.0;
  std::array<int, 3> dims{0, 0, 0};
  std::vector<CellState> cell_state;
  /// Material index of solid cells, kShellMaterial for the domain padding.
  std::vector<std::uint32_t> cell_material;
  /// Normalized boundary admittance of air cells next to solid cells, 0 elsewhere.
  std::vector<float> admittance;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(dims[1]) + static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(dims[0]) +
           static_cast<std::size_t>(i);
  }
  std::array<int, 3> coords(std::size_t idx) const;
  Vec3 cell_center(int i, int j, int k) const {
    return origin + Vec3{(i + 0.5) * dx, (j + 0.5) * dx, (k + 0.5) * dx};
  }
  /// Cell containing p, or nullopt when p is outside the grid.
  std::optional<std::array<int, 3>> cell_of(Vec3 p) const;
  bool is_air(std::size_t idx) const { return cell_state[idx] == CellState::air; }

  /// Empty domain: air inside, a one-cell solid shell whose neighbouring air cells
  /// carry `shell_admittance` (1 approximates an absorbing free-field boundary).
  static VoxelGrid open_domain(Vec3 origin, double dx, std::array<int, 3> dims, double shell_admittance);

  /// Recomputes boundary admittance of air cells from their solid neighbours.
  void assign_admittance(const std::vector<double>& material_admittance, double shell_admittance);

  /// Debug dump: dims (3 x int32 LE), dx and origin (4 x float64 LE), one byte per cell.
  std::vector<std::uint8_t> dump_bytes() const;
  void dump(const std::filesystem::path& path) const;
};

/// Locally reacting admittance from octave absorption: mean over the 63-1000 Hz bands,
/// clamped to [0.001, 0.999], R = sqrt(1 - a), admittance = (1 - R) / (1 + R).
double admittance_from_absorption(const BandSpectrum& absorption);

struct VoxelizeOptions {
  /// Admittance per mesh material index; empty means rigid everywhere.
  std::vector<double> material_admittance;
  double shell_admittance = 0.0;
  std::size_t memory_cap_bytes = std::size_t{4} << 30;
};

/// Conservative surface voxelization: a cell is solid iff a triangle overlaps its cube.
VoxelGrid voxelize(const TriangleMesh& mesh, double dx, const VoxelizeOptions& options = {});

struct PlacementSet {
  std::vector<Vec3> sources;
  std::vector<Vec3> receivers;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  double clearance = 0.0;
};

/// Ray-parity inside test with three axis rays and a majority vote.
bool inside_closed_mesh(const TriangleBvh& bvh, Vec3 p);

/// Lattice points at bbox.lo + k * grid_spacing strictly inside the bounds, kept when
/// inside the enclosed air and at least `clearance` from every triangle.
PlacementSet sample_placements(const TriangleMesh& mesh, double grid_spacing, double clearance);

}  // namespace roomir::scene

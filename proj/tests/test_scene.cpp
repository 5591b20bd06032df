#include <doctest.h>

#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "roomir/scene.hpp"
#include "support.hpp"

using namespace roomir;
using namespace roomir::scene;

namespace {

const char* kUnitCubeObj = R"(v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
g cube
f 1 4 3
f 1 3 2
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
)";

LoadedMesh parse(const std::string& text) {
  std::istringstream in(text);
  return parse_obj(in);
}

// Exhaustive solid/air oracle: every cell against every triangle.
std::vector<bool> brute_force_solid(const TriangleMesh& mesh, const VoxelGrid& g) {
  std::vector<bool> solid(g.cell_count(), false);
  const Vec3 half{0.5 * g.dx, 0.5 * g.dx, 0.5 * g.dx};
  for (int k = 0; k < g.dims[2]; ++k) {
    for (int j = 0; j < g.dims[1]; ++j) {
      for (int i = 0; i < g.dims[0]; ++i) {
        const bool shell = i == 0 || j == 0 || k == 0 || i == g.dims[0] - 1 || j == g.dims[1] - 1 || k == g.dims[2] - 1;
        bool hit = shell;
        for (std::size_t t = 0; t < mesh.size() && !hit; ++t) {
          hit = geom::triangle_box_overlap(mesh.triangle(t), g.cell_center(i, j, k), half);
        }
        solid[g.index(i, j, k)] = hit;
      }
    }
  }
  return solid;
}

TriangleMesh room_with_obstacle() {
  TriangleMesh m = make_box({0, 0, 0}, {5, 5, 5}, "room");
  append_mesh(m, make_box({2, 2, 2}, {3, 3, 3}, "obstacle"));
  return m;
}

}  // namespace

TEST_CASE("load_mesh: unit cube") {
  const auto loaded = parse(kUnitCubeObj);
  CHECK(loaded.mesh.size() == 12);
  CHECK(loaded.degenerate_dropped == 0);
  const Vec3 ext = loaded.mesh.bounds().extent();
  CHECK(ext == Vec3{1, 1, 1});
  CHECK(loaded.mesh.object_labels.front() == "cube");
  CHECK(is_closed(loaded.mesh));
  CHECK(enclosed_volume(loaded.mesh) == doctest::Approx(1.0));
}

TEST_CASE("load_mesh: degenerate triangle dropped and counted") {
  std::string text = kUnitCubeObj;
  text.replace(text.find("f 4 5 8"), 7, "f 1 2 1");
  const auto loaded = parse(text);
  CHECK(loaded.mesh.size() == 11);
  CHECK(loaded.degenerate_dropped == 1);
}

TEST_CASE("load_mesh: face index out of range") {
  std::string text = kUnitCubeObj;
  text += "f 1 2 9\n";
  CHECK_THROWS_WITH_AS(parse(text), doctest::Contains("out of range"), Error);
}

TEST_CASE("load_mesh: quads are fan-triangulated, negative indices and groups work") {
  const auto loaded = parse(R"(v 0 0 0
v 2 0 0
v 2 1 0
v 0 1 0
v 0 0 3
g floor
usemtl oak
f -5 -4 -3 -2
g pillar
f 1 2 5
)");
  CHECK(loaded.mesh.size() == 3);
  CHECK(loaded.mesh.object_labels[0] == "floor");
  CHECK(loaded.mesh.object_labels[1] == "floor");
  CHECK(loaded.mesh.object_labels[2] == "pillar");
  CHECK(loaded.mesh.material_names[loaded.mesh.triangle_material[0]] == "oak");
}

TEST_CASE("load_mesh: error cases") {
  CHECK_THROWS_AS(load_mesh("/nonexistent/scene.obj"), Error);
  CHECK_THROWS_AS(parse("v 0 0 0\nv 1 0 0\nv 0 1 0\n"), Error);
  CHECK_THROWS_AS(parse("v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n"), Error);
}

TEST_CASE("write_obj round trip") {
  const TriangleMesh m = room_with_obstacle();
  std::stringstream ss;
  write_obj(m, ss);
  const auto back = parse_obj(ss).mesh;
  REQUIRE(back.size() == m.size());
  for (std::size_t t = 0; t < m.size(); ++t) {
    CHECK(back.triangle(t).a == m.triangle(t).a);
    CHECK(back.object_labels[t] == m.object_labels[t]);
  }
}

TEST_CASE("voxelize: 1 m cube at dx = 0.25 matches the brute-force oracle") {
  const TriangleMesh cube = make_box({0, 0, 0}, {1, 1, 1}, "cube");
  const VoxelGrid g = voxelize(cube, 0.25);
  CHECK(g.dims == std::array<int, 3>{7, 7, 7});
  const auto oracle = brute_force_solid(cube, g);
  for (std::size_t i = 0; i < g.cell_count(); ++i) REQUIRE((g.cell_state[i] == CellState::solid) == oracle[i]);
  // Interior air, faces solid.
  CHECK(g.is_air(g.index(3, 3, 3)));
  const auto face = g.cell_of({0.0, 0.5, 0.5});
  REQUIRE(face.has_value());
  CHECK_FALSE(g.is_air(g.index((*face)[0], (*face)[1], (*face)[2])));
}

TEST_CASE("voxelize: a plane gives exactly one solid layer") {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0.0, 0.0, 1.0}, {0.05, 0.0, 1.0}, {0.0, 0.05, 1.0}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}, {4, 5, 6}};
  m.triangle_material = {0, 0, 0};
  m.material_names = {"plane"};
  m.object_labels = {"plane", "plane", "marker"};
  const VoxelGrid g = voxelize(m, 0.1);
  const auto oracle = brute_force_solid(m, g);
  for (std::size_t i = 0; i < g.cell_count(); ++i) REQUIRE((g.cell_state[i] == CellState::solid) == oracle[i]);
  const auto plane_cell = g.cell_of({0.5, 0.5, 0.0});
  REQUIRE(plane_cell.has_value());
  for (int j = 1; j + 1 < g.dims[1]; ++j) {
    for (int i = 1; i + 1 < g.dims[0]; ++i) {
      const Vec3 c = g.cell_center(i, j, 1);
      if (c.x < 0.3 && c.y < 0.3) continue;  // column under the marker triangle
      int solid = 0;
      int layer = -1;
      for (int k = 1; k + 1 < g.dims[2]; ++k) {
        if (!g.is_air(g.index(i, j, k))) {
          ++solid;
          layer = k;
        }
      }
      REQUIRE(solid == 1);
      REQUIRE(layer == (*plane_cell)[2]);
    }
  }
}

TEST_CASE("voxelize: error cases") {
  CHECK_THROWS_AS(voxelize(TriangleMesh{}, 0.1), Error);
  const TriangleMesh cube = make_box({0, 0, 0}, {1, 1, 1});
  CHECK_THROWS_AS(voxelize(cube, 0.34), Error);
  VoxelizeOptions opt;
  opt.memory_cap_bytes = 1000;
  CHECK_THROWS_WITH_AS(voxelize(cube, 0.01, opt), doctest::Contains("bytes"), Error);
}

TEST_CASE("voxelize: conservative and traceable on a mesh with arbitrary orientations") {
  TriangleMesh m = room_with_obstacle();
  // A tilted triangle so that not every face is axis aligned.
  const auto base = static_cast<std::uint32_t>(m.vertices.size());
  m.vertices.insert(m.vertices.end(), {{0.7, 0.4, 0.3}, {4.1, 1.3, 2.2}, {1.9, 4.4, 3.7}});
  m.triangles.push_back({base, base + 1, base + 2});
  m.triangle_material.push_back(0);
  m.object_labels.push_back("tilted");
  VoxelizeOptions opt;
  opt.material_admittance = {0.2, 0.5};
  const VoxelGrid g = voxelize(m, 0.2, opt);
  const auto oracle = brute_force_solid(m, g);
  const Vec3 half{0.1, 0.1, 0.1};
  for (int k = 0; k < g.dims[2]; ++k) {
    for (int j = 0; j < g.dims[1]; ++j) {
      for (int i = 0; i < g.dims[0]; ++i) {
        const std::size_t idx = g.index(i, j, k);
        REQUIRE((g.cell_state[idx] == CellState::solid) == oracle[idx]);
        if (g.cell_state[idx] == CellState::solid && g.cell_material[idx] != kShellMaterial) {
          bool traced = false;
          for (std::size_t t = 0; t < m.size() && !traced; ++t) {
            traced = m.triangle_material[t] == g.cell_material[idx] &&
                     geom::triangle_box_overlap(m.triangle(t), g.cell_center(i, j, k), half);
          }
          REQUIRE(traced);
        }
        REQUIRE(g.admittance[idx] >= 0.0f);
      }
    }
  }
}

TEST_CASE("voxelize: deterministic dump and header layout") {
  const TriangleMesh m = room_with_obstacle();
  const auto a = voxelize(m, 0.25).dump_bytes();
  const auto b = voxelize(m, 0.25).dump_bytes();
  CHECK(a == b);
  const VoxelGrid g = voxelize(m, 0.25);
  REQUIRE(a.size() == 44 + g.cell_count());
  std::int32_t nx = 0;
  double dx = 0.0;
  std::memcpy(&nx, a.data(), 4);
  std::memcpy(&dx, a.data() + 12, 8);
  CHECK(nx == g.dims[0]);
  CHECK(dx == 0.25);

  roomir::test::TempDir dir("dump");
  g.dump(dir.path() / "grid.bin");
  CHECK(std::filesystem::file_size(dir.path() / "grid.bin") == a.size());
}

TEST_CASE("voxelize: halving dx refines every axis") {
  const TriangleMesh m = make_box({0, 0, 0}, {2.3, 1.7, 3.1});
  for (double dx : {0.2, 0.1, 0.05}) {
    const auto coarse = voxelize(m, dx).dims;
    const auto fine = voxelize(m, dx / 2).dims;
    for (int a = 0; a < 3; ++a) {
      const int inner_coarse = coarse[a] - 2;
      const int inner_fine = fine[a] - 2;
      CHECK(inner_fine >= 2 * inner_coarse - 1);
      CHECK(fine[a] > coarse[a]);
    }
  }
}

TEST_CASE("voxelize: admittance of boundary air cells comes from the adjacent material") {
  const TriangleMesh cube = make_box({0, 0, 0}, {1, 1, 1});
  VoxelizeOptions opt;
  opt.material_admittance = {0.25};
  const VoxelGrid g = voxelize(cube, 0.1, opt);
  // Air cell right next to the x = 0 face: one solid neighbour of material 0.
  const auto c = g.cell_of({0.1, 0.5, 0.5});
  REQUIRE(c.has_value());
  const std::size_t idx = g.index((*c)[0], (*c)[1], (*c)[2]);
  REQUIRE(g.is_air(idx));
  CHECK(g.admittance[idx] == doctest::Approx(0.25));
  CHECK(g.admittance[g.index(5, 5, 5)] == 0.0f);
}

TEST_CASE("admittance_from_absorption") {
  BandSpectrum a{};
  a.fill(0.36);  // R = 0.8
  CHECK(admittance_from_absorption(a) == doctest::Approx(0.2 / 1.8));
  a.fill(0.0);
  const double r = std::sqrt(1.0 - 0.001);
  CHECK(admittance_from_absorption(a) == doctest::Approx((1 - r) / (1 + r)));
  a.fill(1.0);
  const double r1 = std::sqrt(1.0 - 0.999);
  CHECK(admittance_from_absorption(a) == doctest::Approx((1 - r1) / (1 + r1)));
  // Bands above 1 kHz do not contribute.
  BandSpectrum b{};
  b.fill(0.36);
  b[5] = b[6] = b[7] = 0.9;
  CHECK(admittance_from_absorption(b) == doctest::Approx(0.2 / 1.8));
}

TEST_CASE("sample_placements: empty 3 m box gives 8 points and 56 pairs") {
  const TriangleMesh box = make_box({0, 0, 0}, {3, 3, 3});
  const PlacementSet p = sample_placements(box, 1.0, 0.2);
  // Exhaustive lattice enumeration with exact point-triangle distances.
  std::set<std::array<double, 3>> expected;
  for (int i = -3; i <= 6; ++i) {
    for (int j = -3; j <= 6; ++j) {
      for (int k = -3; k <= 6; ++k) {
        const Vec3 q{double(i), double(j), double(k)};
        if (!(q.x > 0 && q.x < 3 && q.y > 0 && q.y < 3 && q.z > 0 && q.z < 3)) continue;
        double d = 1e300;
        for (std::size_t t = 0; t < box.size(); ++t) d = std::min(d, geom::point_triangle_distance(q, box.triangle(t)));
        if (d >= 0.2) expected.insert({q.x, q.y, q.z});
      }
    }
  }
  std::set<std::array<double, 3>> got;
  for (const Vec3& s : p.sources) got.insert({s.x, s.y, s.z});
  CHECK(expected.size() == 8);
  CHECK(got == expected);
  CHECK(p.pairs.size() == 56);
  for (const auto& [s, r] : p.pairs) {
    CHECK(s < p.sources.size());
    CHECK(r < p.receivers.size());
    CHECK(s != r);
  }
}

TEST_CASE("sample_placements: clearance larger than half extent fails") {
  const TriangleMesh box = make_box({0, 0, 0}, {3, 3, 3});
  CHECK_THROWS_AS(sample_placements(box, 1.0, 2.0), Error);
}

TEST_CASE("sample_placements: clearance and inside tests around an obstacle") {
  const TriangleMesh m = room_with_obstacle();
  const PlacementSet p = sample_placements(m, 0.5, 0.2);
  REQUIRE_FALSE(p.sources.empty());
  const auto box = m.bounds();
  for (const Vec3& s : p.sources) {
    double d = 1e300;
    for (std::size_t t = 0; t < m.size(); ++t) d = std::min(d, geom::point_triangle_distance(s, m.triangle(t)));
    CHECK(d >= 0.2);
    CHECK(box.contains_strictly(s));
    const bool in_obstacle = s.x > 2 && s.x < 3 && s.y > 2 && s.y < 3 && s.z > 2 && s.z < 3;
    CHECK_FALSE(in_obstacle);
  }
  // (2.5, 2.5, 2.5) is on the lattice and clear of all faces but enclosed by the obstacle.
  const TriangleBvh bvh(m);
  CHECK_FALSE(inside_closed_mesh(bvh, {2.5, 2.5, 2.5}));
  CHECK(inside_closed_mesh(bvh, {1.0, 1.0, 1.0}));
  CHECK_FALSE(inside_closed_mesh(bvh, {6.0, 1.0, 1.0}));
}

TEST_CASE("BVH queries agree with brute force") {
  const TriangleMesh m = room_with_obstacle();
  const TriangleBvh bvh(m);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.1, 4.9);
  std::normal_distribution<double> nd;
  for (int n = 0; n < 500; ++n) {
    const Vec3 o{u(gen), u(gen), u(gen)};
    const Vec3 d = normalized(Vec3{nd(gen), nd(gen), nd(gen)});
    double best = 1e300;
    for (std::size_t t = 0; t < m.size(); ++t) {
      if (auto h = geom::ray_triangle(o, d, m.triangle(t))) best = std::min(best, *h);
    }
    const auto hit = bvh.closest_hit(o, d, 1e9);
    REQUIRE(hit.has_value());
    CHECK(hit->t == doctest::Approx(best).epsilon(1e-12));

    double dmin = 1e300;
    for (std::size_t t = 0; t < m.size(); ++t) dmin = std::min(dmin, geom::point_triangle_distance(o, m.triangle(t)));
    CHECK(bvh.min_distance(o) == doctest::Approx(dmin).epsilon(1e-12));
  }
  CHECK(bvh.occluded({1, 2.5, 2.5}, {4, 2.5, 2.5}));
  CHECK_FALSE(bvh.occluded({1, 1, 1}, {4, 1, 1}));
}

TEST_CASE("closed box volume and area are exact") {
  for (double l : {1.0, 2.0, 3.5}) {
    const TriangleMesh m = make_box({0, 0, 0}, {l, l, l});
    CHECK(is_closed(m));
    CHECK(enclosed_volume(m) == l * l * l);
    CHECK(surface_area(m) == doctest::Approx(6 * l * l));
  }
  TriangleMesh open = make_box({0, 0, 0}, {1, 1, 1});
  open.triangles.pop_back();
  open.triangle_material.pop_back();
  open.object_labels.pop_back();
  CHECK_FALSE(is_closed(open));
}

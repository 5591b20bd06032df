#include "roomir/scene.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace roomir::scene {

namespace {

constexpr double kDegenerateArea = 1e-12;

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error("obj line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::string rest_of(const std::vector<std::string_view>& tok) {
  std::string s;
  for (std::size_t i = 1; i < tok.size(); ++i) {
    if (i > 1) s += ' ';
    s += tok[i];
  }
  return s;
}

}  // namespace

geom::Aabb TriangleMesh::bounds() const {
  geom::Aabb box;
  for (const auto& t : triangles) {
    for (auto v : t) box.expand(vertices[v]);
  }
  return box;
}

void TriangleMesh::validate() const {
  if (triangles.empty()) throw Error("mesh has no triangles");
  if (triangle_material.size() != triangles.size() || object_labels.size() != triangles.size()) {
    throw Error("mesh attribute arrays do not match triangle count");
  }
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    for (auto v : triangles[i]) {
      if (v >= vertices.size()) throw Error("triangle " + std::to_string(i) + ": index out of range");
    }
    if (triangle_material[i] >= material_names.size()) {
      throw Error("triangle " + std::to_string(i) + ": material index out of range");
    }
    if (geom::triangle_area(triangle(i)) <= kDegenerateArea) {
      throw Error("triangle " + std::to_string(i) + " is degenerate");
    }
  }
  const Vec3 ext = bounds().extent();
  if (!(ext.x > 0.0 && ext.y > 0.0 && ext.z > 0.0)) {
    throw Error("mesh bounding box is flat in at least one axis");
  }
}

LoadedMesh parse_obj(std::istream& in) {
  LoadedMesh out;
  TriangleMesh& mesh = out.mesh;
  std::map<std::string, std::uint32_t> material_ids;
  std::string group;
  std::string material = "default";
  auto material_id = [&](const std::string& name) {
    auto [it, inserted] = material_ids.try_emplace(name, static_cast<std::uint32_t>(mesh.material_names.size()));
    if (inserted) mesh.material_names.push_back(name);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  std::size_t face_count = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto tok = split_ws(line);
    if (tok.empty()) continue;
    const std::string_view kw = tok[0];
    if (kw == "v") {
      if (tok.size() < 4) throw Error("obj line " + std::to_string(line_no) + ": vertex needs 3 coordinates");
      mesh.vertices.push_back({parse_double(tok[1], line_no), parse_double(tok[2], line_no),
                               parse_double(tok[3], line_no)});
    } else if (kw == "g" || kw == "o") {
      group = rest_of(tok);
    } else if (kw == "usemtl") {
      material = rest_of(tok);
      if (material.empty()) material = "default";
    } else if (kw == "f") {
      if (tok.size() < 4) throw Error("obj line " + std::to_string(line_no) + ": face needs 3 vertices");
      ++face_count;
      std::vector<std::uint32_t> corners;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        std::string_view ref = tok[i].substr(0, tok[i].find('/'));
        long idx = 0;
        auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), idx);
        if (ec != std::errc{} || ptr != ref.data() + ref.size() || idx == 0) {
          throw Error("obj line " + std::to_string(line_no) + ": bad face index '" + std::string(tok[i]) + "'");
        }
        const long n = static_cast<long>(mesh.vertices.size());
        const long resolved = idx > 0 ? idx - 1 : n + idx;
        if (resolved < 0 || resolved >= n) {
          throw Error("obj line " + std::to_string(line_no) + ": face index " + std::to_string(idx) +
                      " out of range (" + std::to_string(n) + " vertices)");
        }
        corners.push_back(static_cast<std::uint32_t>(resolved));
      }
      const std::uint32_t mat = material_id(material);
      const std::string label = group.empty() ? material : group;
      for (std::size_t i = 1; i + 1 < corners.size(); ++i) {
        const std::array<std::uint32_t, 3> tri = {corners[0], corners[i], corners[i + 1]};
        const geom::Triangle t{mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]};
        if (geom::triangle_area(t) <= kDegenerateArea) {
          ++out.degenerate_dropped;
          continue;
        }
        mesh.triangles.push_back(tri);
        mesh.triangle_material.push_back(mat);
        mesh.object_labels.push_back(label);
      }
    }
  }
  if (face_count == 0) throw Error("obj has no faces");
  if (mesh.triangles.empty()) throw Error("obj has only degenerate faces");
  mesh.validate();
  return out;
}

LoadedMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file " + path.string());
  try {
    return parse_obj(in);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_obj(const TriangleMesh& mesh, std::ostream& out) {
  out.precision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  std::string group;
  std::uint32_t mat = kShellMaterial;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    if (mesh.object_labels[i] != group) {
      group = mesh.object_labels[i];
      out << "g " << group << '\n';
    }
    if (mesh.triangle_material[i] != mat) {
      mat = mesh.triangle_material[i];
      out << "usemtl " << mesh.material_names[mat] << '\n';
    }
    const auto& t = mesh.triangles[i];
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
}

TriangleMesh make_box(Vec3 lo, Vec3 hi, const std::string& label) {
  TriangleMesh m;
  for (int k = 0; k < 8; ++k) {
    m.vertices.push_back({(k & 1) ? hi.x : lo.x, (k & 2) ? hi.y : lo.y, (k & 4) ? hi.z : lo.z});
  }
  // Outward-facing quads split into two triangles each.
  const std::array<std::array<std::uint32_t, 4>, 6> quads = {{
      {0, 4, 6, 2},  // -x
      {1, 3, 7, 5},  // +x
      {0, 1, 5, 4},  // -y
      {2, 6, 7, 3},  // +y
      {0, 2, 3, 1},  // -z
      {4, 5, 7, 6},  // +z
  }};
  for (const auto& q : quads) {
    m.triangles.push_back({q[0], q[1], q[2]});
    m.triangles.push_back({q[0], q[2], q[3]});
  }
  m.material_names = {label};
  m.triangle_material.assign(12, 0);
  m.object_labels.assign(12, label);
  return m;
}

void append_mesh(TriangleMesh& mesh, const TriangleMesh& other) {
  const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.insert(mesh.vertices.end(), other.vertices.begin(), other.vertices.end());
  std::vector<std::uint32_t> remap(other.material_names.size());
  for (std::size_t m = 0; m < other.material_names.size(); ++m) {
    auto it = std::find(mesh.material_names.begin(), mesh.material_names.end(), other.material_names[m]);
    if (it == mesh.material_names.end()) {
      remap[m] = static_cast<std::uint32_t>(mesh.material_names.size());
      mesh.material_names.push_back(other.material_names[m]);
    } else {
      remap[m] = static_cast<std::uint32_t>(it - mesh.material_names.begin());
    }
  }
  for (std::size_t i = 0; i < other.triangles.size(); ++i) {
    const auto& t = other.triangles[i];
    mesh.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    mesh.triangle_material.push_back(remap[other.triangle_material[i]]);
    mesh.object_labels.push_back(other.object_labels[i]);
  }
}

bool is_closed(const TriangleMesh& mesh) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      auto a = t[e];
      auto b = t[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edges[{a, b}];
    }
  }
  return !edges.empty() && std::all_of(edges.begin(), edges.end(), [](const auto& kv) { return kv.second == 2; });
}

double enclosed_volume(const TriangleMesh& mesh) {
  double v = 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto t = mesh.triangle(i);
    v += dot(t.a, cross(t.b, t.c));
  }
  return std::abs(v) / 6.0;
}

double surface_area(const TriangleMesh& mesh) {
  double s = 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i) s += geom::triangle_area(mesh.triangle(i));
  return s;
}

// ---------------------------------------------------------------------------
// TriangleBvh

TriangleBvh::TriangleBvh(const TriangleMesh& mesh) {
  tris_.reserve(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) tris_.push_back(mesh.triangle(i));
  order_.resize(tris_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!tris_.empty()) {
    nodes_.reserve(2 * tris_.size());
    build(0, static_cast<std::uint32_t>(tris_.size()));
  }
}

std::uint32_t TriangleBvh::build(std::uint32_t begin, std::uint32_t end) {
  const auto node_id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  geom::Aabb box;
  geom::Aabb centroids;
  for (std::uint32_t i = begin; i < end; ++i) {
    const auto& t = tris_[order_[i]];
    box.expand(t.a);
    box.expand(t.b);
    box.expand(t.c);
    centroids.expand((t.a + t.b + t.c) / 3.0);
  }
  nodes_[node_id].box = box;
  if (end - begin <= 4) {
    nodes_[node_id].first = begin;
    nodes_[node_id].count = end - begin;
    return node_id;
  }
  const Vec3 ext = centroids.extent();
  const int axis = (ext.x >= ext.y && ext.x >= ext.z) ? 0 : (ext.y >= ext.z ? 1 : 2);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const auto& ta = tris_[a];
                     const auto& tb = tris_[b];
                     const double ca = ta.a[axis] + ta.b[axis] + ta.c[axis];
                     const double cb = tb.a[axis] + tb.b[axis] + tb.c[axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[node_id].first = right;
  nodes_[node_id].count = 0;
  return node_id;
}

std::optional<TriangleBvh::Hit> TriangleBvh::closest_hit(Vec3 origin, Vec3 dir, double t_max) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
  std::optional<Hit> best;
  double limit = t_max;
  std::uint32_t stack[64];
  int sp = 0;
  stack[sp++] = 0;
  while (sp > 0) {
    const Node& node = nodes_[stack[--sp]];
    if (!geom::ray_box(origin, inv, node.box, limit)) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        const std::uint32_t tri = order_[i];
        if (auto t = geom::ray_triangle(origin, dir, tris_[tri]); t && *t < limit) {
          limit = *t;
          best = Hit{*t, tri};
        }
      }
    } else {
      const std::uint32_t self = static_cast<std::uint32_t>(&node - nodes_.data());
      stack[sp++] = node.first;
      stack[sp++] = self + 1;
    }
  }
  return best;
}

bool TriangleBvh::occluded(Vec3 from, Vec3 to) const {
  const Vec3 d = to - from;
  const double len = norm(d);
  if (len == 0.0) return false;
  const auto hit = closest_hit(from, d / len, len * (1.0 - 1e-9));
  return hit.has_value();
}

int TriangleBvh::count_hits(Vec3 origin, Vec3 dir) const {
  if (nodes_.empty()) return 0;
  const Vec3 inv{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
  int hits = 0;
  std::uint32_t stack[64];
  int sp = 0;
  stack[sp++] = 0;
  while (sp > 0) {
    const Node& node = nodes_[stack[--sp]];
    if (!geom::ray_box(origin, inv, node.box, std::numeric_limits<double>::infinity())) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        if (geom::ray_triangle(origin, dir, tris_[order_[i]], 0.0)) ++hits;
      }
    } else {
      const std::uint32_t self = static_cast<std::uint32_t>(&node - nodes_.data());
      stack[sp++] = node.first;
      stack[sp++] = self + 1;
    }
  }
  return hits;
}

double TriangleBvh::min_distance(Vec3 p) const {
  double best = std::numeric_limits<double>::infinity();
  if (nodes_.empty()) return best;
  auto box_dist = [&](const geom::Aabb& b) {
    const double dx = std::max({b.lo.x - p.x, 0.0, p.x - b.hi.x});
    const double dy = std::max({b.lo.y - p.y, 0.0, p.y - b.hi.y});
    const double dz = std::max({b.lo.z - p.z, 0.0, p.z - b.hi.z});
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  };
  std::uint32_t stack[64];
  int sp = 0;
  stack[sp++] = 0;
  while (sp > 0) {
    const Node& node = nodes_[stack[--sp]];
    if (box_dist(node.box) >= best) continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
        best = std::min(best, geom::point_triangle_distance(p, tris_[order_[i]]));
      }
    } else {
      const std::uint32_t self = static_cast<std::uint32_t>(&node - nodes_.data());
      stack[sp++] = node.first;
      stack[sp++] = self + 1;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// VoxelGrid

std::array<int, 3> VoxelGrid::coords(std::size_t idx) const {
  const auto nx = static_cast<std::size_t>(dims[0]);
  const auto ny = static_cast<std::size_t>(dims[1]);
  return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny), static_cast<int>(idx / (nx * ny))};
}

std::optional<std::array<int, 3>> VoxelGrid::cell_of(Vec3 p) const {
  std::array<int, 3> c{};
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor((p[a] - origin[a]) / dx);
    if (f < 0.0 || f >= dims[a]) return std::nullopt;
    c[a] = static_cast<int>(f);
  }
  return c;
}

void VoxelGrid::assign_admittance(const std::vector<double>& material_admittance, double shell_admittance) {
  admittance.assign(cell_count(), 0.0f);
  const std::array<std::ptrdiff_t, 6> offsets = {
      1, -1, dims[0], -dims[0], static_cast<std::ptrdiff_t>(dims[0]) * dims[1],
      -static_cast<std::ptrdiff_t>(dims[0]) * dims[1]};
  for (int k = 1; k + 1 < dims[2]; ++k) {
    for (int j = 1; j + 1 < dims[1]; ++j) {
      for (int i = 1; i + 1 < dims[0]; ++i) {
        const std::size_t idx = index(i, j, k);
        if (!is_air(idx)) continue;
        double sum = 0.0;
        int solid = 0;
        for (auto off : offsets) {
          const std::size_t n = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + off);
          if (is_air(n)) continue;
          ++solid;
          const std::uint32_t mat = cell_material[n];
          if (mat == kShellMaterial) {
            sum += shell_admittance;
          } else if (mat < material_admittance.size()) {
            sum += material_admittance[mat];
          }
        }
        if (solid > 0) admittance[idx] = static_cast<float>(sum / solid);
      }
    }
  }
}

VoxelGrid VoxelGrid::open_domain(Vec3 origin, double dx, std::array<int, 3> dims, double shell_admittance) {
  if (!(dx > 0.0)) throw Error("voxel spacing must be positive");
  if (dims[0] < 3 || dims[1] < 3 || dims[2] < 3) throw Error("voxel grid dims must be >= 3");
  VoxelGrid g;
  g.origin = origin;
  g.dx = dx;
  g.dims = dims;
  g.cell_state.assign(g.cell_count(), CellState::air);
  g.cell_material.assign(g.cell_count(), 0);
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        if (i == 0 || j == 0 || k == 0 || i == dims[0] - 1 || j == dims[1] - 1 || k == dims[2] - 1) {
          const std::size_t idx = g.index(i, j, k);
          g.cell_state[idx] = CellState::solid;
          g.cell_material[idx] = kShellMaterial;
        }
      }
    }
  }
  g.assign_admittance({}, shell_admittance);
  return g;
}

std::vector<std::uint8_t> VoxelGrid::dump_bytes() const {
  std::vector<std::uint8_t> out;
  out.reserve(3 * 4 + 4 * 8 + cell_count());
  auto put = [&out](const void* p, std::size_t n) {
    // Little-endian hosts only; the byte order is asserted at build time below.
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  };
  static_assert(std::endian::native == std::endian::little, "dump format assumes a little-endian host");
  for (int d : dims) {
    const auto v = static_cast<std::int32_t>(d);
    put(&v, 4);
  }
  put(&dx, 8);
  for (int a = 0; a < 3; ++a) {
    const double o = origin[a];
    put(&o, 8);
  }
  for (auto s : cell_state) out.push_back(static_cast<std::uint8_t>(s));
  return out;
}

void VoxelGrid::dump(const std::filesystem::path& path) const {
  const auto bytes = dump_bytes();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

double admittance_from_absorption(const BandSpectrum& absorption) {
  double mean = 0.0;
  for (int b = 0; b < 5; ++b) mean += absorption[b];
  mean = std::clamp(mean / 5.0, 0.001, 0.999);
  const double r = std::sqrt(1.0 - mean);
  return (1.0 - r) / (1.0 + r);
}

VoxelGrid voxelize(const TriangleMesh& mesh, double dx, const VoxelizeOptions& options) {
  if (mesh.triangles.empty()) throw Error("cannot voxelize an empty mesh");
  if (!(dx > 0.0)) throw Error("voxel spacing must be positive");
  const geom::Aabb box = mesh.bounds();
  const Vec3 ext = box.extent();
  const double min_extent = std::min({ext.x, ext.y, ext.z});
  if (dx >= min_extent / 3.0) {
    throw Error("voxel spacing " + std::to_string(dx) + " m too large for smallest extent " +
                std::to_string(min_extent) + " m");
  }

  // Interior cells cover the bbox with equal margins on both sides so that
  // axis-aligned faces do not fall on cell boundaries; one padding cell per side.
  VoxelGrid g;
  g.dx = dx;
  for (int a = 0; a < 3; ++a) {
    const int inner = static_cast<int>(std::floor(ext[a] / dx)) + 1;
    g.dims[a] = inner + 2;
    g.origin[a] = box.lo[a] - 0.5 * (inner * dx - ext[a]) - dx;
  }
  const std::size_t cells = g.cell_count();
  const std::size_t required = cells * (sizeof(CellState) + sizeof(std::uint32_t) + sizeof(float));
  if (required > options.memory_cap_bytes) {
    throw Error("voxel grid needs " + std::to_string(required) + " bytes, cap is " +
                std::to_string(options.memory_cap_bytes));
  }
  g.cell_state.assign(cells, CellState::air);
  g.cell_material.assign(cells, kShellMaterial);
  std::vector<double> best_dist(cells, std::numeric_limits<double>::infinity());

  const Vec3 half{0.5 * dx, 0.5 * dx, 0.5 * dx};
  for (std::size_t t = 0; t < mesh.size(); ++t) {
    const geom::Triangle tri = mesh.triangle(t);
    std::array<int, 3> lo{};
    std::array<int, 3> hi{};
    for (int a = 0; a < 3; ++a) {
      const double mn = std::min({tri.a[a], tri.b[a], tri.c[a]});
      const double mx = std::max({tri.a[a], tri.b[a], tri.c[a]});
      lo[a] = std::max(0, static_cast<int>(std::floor((mn - g.origin[a]) / dx)) - 1);
      hi[a] = std::min(g.dims[a] - 1, static_cast<int>(std::floor((mx - g.origin[a]) / dx)) + 1);
    }
    for (int k = lo[2]; k <= hi[2]; ++k) {
      for (int j = lo[1]; j <= hi[1]; ++j) {
        for (int i = lo[0]; i <= hi[0]; ++i) {
          const Vec3 c = g.cell_center(i, j, k);
          if (!geom::triangle_box_overlap(tri, c, half)) continue;
          const std::size_t idx = g.index(i, j, k);
          g.cell_state[idx] = CellState::solid;
          const double d = geom::point_triangle_distance(c, tri);
          if (d < best_dist[idx]) {
            best_dist[idx] = d;
            g.cell_material[idx] = mesh.triangle_material[t];
          }
        }
      }
    }
  }

  for (int k = 0; k < g.dims[2]; ++k) {
    for (int j = 0; j < g.dims[1]; ++j) {
      for (int i = 0; i < g.dims[0]; ++i) {
        if (i == 0 || j == 0 || k == 0 || i == g.dims[0] - 1 || j == g.dims[1] - 1 || k == g.dims[2] - 1) {
          const std::size_t idx = g.index(i, j, k);
          if (g.cell_state[idx] == CellState::air) g.cell_state[idx] = CellState::solid;
          // Shell cells keep kShellMaterial unless a triangle claimed them.
        }
      }
    }
  }
  g.assign_admittance(options.material_admittance, options.shell_admittance);
  return g;
}

// ---------------------------------------------------------------------------
// Placement sampling

bool inside_closed_mesh(const TriangleBvh& bvh, Vec3 p) {
  // Slightly skewed axis rays avoid grazing edges shared by two triangles.
  constexpr std::array<Vec3, 3> dirs = {Vec3{1.0, 1.3e-4, 2.9e-4}, Vec3{3.1e-4, 1.0, 1.7e-4},
                                        Vec3{2.3e-4, 4.1e-4, 1.0}};
  int votes = 0;
  for (const Vec3& d : dirs) votes += bvh.count_hits(p, normalized(d)) % 2;
  return votes >= 2;
}

PlacementSet sample_placements(const TriangleMesh& mesh, double grid_spacing, double clearance) {
  if (!(grid_spacing > 0.0)) throw Error("grid spacing must be positive");
  if (clearance < 0.0) throw Error("clearance must be non-negative");
  if (mesh.triangles.empty()) throw Error("mesh has no triangles");
  const geom::Aabb box = mesh.bounds();
  const TriangleBvh bvh(mesh);

  PlacementSet set;
  set.clearance = clearance;
  std::array<int, 3> counts{};
  for (int a = 0; a < 3; ++a) {
    counts[a] = static_cast<int>(std::ceil(box.extent()[a] / grid_spacing));
  }
  for (int k = 1; k <= counts[2]; ++k) {
    for (int j = 1; j <= counts[1]; ++j) {
      for (int i = 1; i <= counts[0]; ++i) {
        const Vec3 p = box.lo + Vec3{i * grid_spacing, j * grid_spacing, k * grid_spacing};
        if (!box.contains_strictly(p)) continue;
        if (bvh.min_distance(p) < clearance) continue;
        if (!inside_closed_mesh(bvh, p)) continue;
        set.sources.push_back(p);
      }
    }
  }
  if (set.sources.empty()) throw Error("no valid placement points (scene too cluttered for the clearance)");
  set.receivers = set.sources;
  const auto n = static_cast<std::uint32_t>(set.sources.size());
  for (std::uint32_t s = 0; s < n; ++s) {
    for (std::uint32_t r = 0; r < n; ++r) {
      if (s != r) set.pairs.emplace_back(s, r);
    }
  }
  return set;
}

}  // namespace roomir::scene

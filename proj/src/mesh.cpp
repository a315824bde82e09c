#include "mcirc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "mcirc/error.hpp"
#include "mcirc/text.hpp"

namespace mcirc {

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Local faces of a tetrahedron; each omits the vertex with the same index.
constexpr std::array<std::array<int, 3>, 4> kTetFaces{{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

using FaceKey = std::array<NodeId, 3>;

FaceKey sorted_key(std::array<NodeId, 3> f) {
  std::sort(f.begin(), f.end());
  return f;
}

struct FaceRecord {
  FaceKey key;
  std::size_t tet;
  int local;
};

// All tet faces sorted by key, ties ordered by (tet, local face).
std::vector<FaceRecord> collect_faces(const TetMesh& mesh) {
  std::vector<FaceRecord> faces;
  faces.reserve(mesh.tets.size() * 4);
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const auto& tet = mesh.tets[t];
    for (int f = 0; f < 4; ++f) {
      const auto& lf = kTetFaces[f];
      faces.push_back({sorted_key({tet[lf[0]], tet[lf[1]], tet[lf[2]]}), t, f});
    }
  }
  std::sort(faces.begin(), faces.end(), [](const FaceRecord& a, const FaceRecord& b) {
    return std::tie(a.key, a.tet, a.local) < std::tie(b.key, b.tet, b.local);
  });
  return faces;
}

// Orients the face of `tet` so its normal points away from the opposite vertex.
std::array<NodeId, 3> outward_face(const TetMesh& mesh, std::size_t tet, int local) {
  const auto& t = mesh.tets[tet];
  const auto& lf = kTetFaces[local];
  std::array<NodeId, 3> f{t[lf[0]], t[lf[1]], t[lf[2]]};
  const Vec3& a = mesh.nodes[f[0]];
  Vec3 n = cross(sub(mesh.nodes[f[1]], a), sub(mesh.nodes[f[2]], a));
  if (dot(n, sub(mesh.nodes[t[local]], a)) > 0.0) std::swap(f[1], f[2]);
  return f;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  throw ValidationError("mesh parse error at line " + std::to_string(line) + ": " + msg);
}

}  // namespace

double tet_volume(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  return dot(sub(p1, p0), cross(sub(p2, p0), sub(p3, p0))) / 6.0;
}

double tet_volume(const TetMesh& mesh, std::size_t tet) {
  const auto& t = mesh.tets[tet];
  return tet_volume(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]], mesh.nodes[t[3]]);
}

Vec3 tet_centroid(const TetMesh& mesh, std::size_t tet) {
  Vec3 c{0.0, 0.0, 0.0};
  for (NodeId n : mesh.tets[tet])
    for (int d = 0; d < 3; ++d) c[d] += mesh.nodes[n][d];
  for (double& v : c) v *= 0.25;
  return c;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 n = cross(sub(b, a), sub(c, a));
  return 0.5 * std::sqrt(dot(n, n));
}

double facet_area(const TetMesh& mesh, std::size_t facet) {
  const auto& f = mesh.boundary_tris[facet].nodes;
  return triangle_area(mesh.nodes[f[0]], mesh.nodes[f[1]], mesh.nodes[f[2]]);
}

Vec3 facet_centroid(const TetMesh& mesh, std::size_t facet) {
  Vec3 c{0.0, 0.0, 0.0};
  for (NodeId n : mesh.boundary_tris[facet].nodes)
    for (int d = 0; d < 3; ++d) c[d] += mesh.nodes[n][d];
  for (double& v : c) v /= 3.0;
  return c;
}

Vec3 facet_normal(const TetMesh& mesh, std::size_t facet) {
  const auto& f = mesh.boundary_tris[facet].nodes;
  Vec3 n = cross(sub(mesh.nodes[f[1]], mesh.nodes[f[0]]), sub(mesh.nodes[f[2]], mesh.nodes[f[0]]));
  double len = std::sqrt(dot(n, n));
  if (len == 0.0) throw ValidationError("degenerate boundary facet " + std::to_string(facet));
  for (double& v : n) v /= len;
  return n;
}

double total_volume(const TetMesh& mesh) {
  double v = 0.0;
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) v += tet_volume(mesh, t);
  return v;
}

double patch_area(const TetMesh& mesh, PatchTag patch) {
  double a = 0.0;
  for (std::size_t f = 0; f < mesh.boundary_tris.size(); ++f)
    if (mesh.boundary_tris[f].patch == patch) a += facet_area(mesh, f);
  return a;
}

std::vector<std::size_t> patch_facets(const TetMesh& mesh, PatchTag patch) {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < mesh.boundary_tris.size(); ++f)
    if (mesh.boundary_tris[f].patch == patch) out.push_back(f);
  return out;
}

void validate(const TetMesh& mesh) {
  const std::size_t n = mesh.nodes.size();
  if (mesh.tet_labels.size() != mesh.tets.size())
    throw ValidationError("tet_labels length " + std::to_string(mesh.tet_labels.size()) +
                          " differs from tet count " + std::to_string(mesh.tets.size()));
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    for (NodeId v : mesh.tets[t])
      if (v >= n) throw ValidationError("tet " + std::to_string(t) + " references node " +
                                        std::to_string(v) + " beyond node count");
    if (!(tet_volume(mesh, t) > 0.0))
      throw ValidationError("tet " + std::to_string(t) + " has nonpositive volume");
  }
  for (std::size_t f = 0; f < mesh.boundary_tris.size(); ++f)
    for (NodeId v : mesh.boundary_tris[f].nodes)
      if (v >= n) throw ValidationError("boundary triangle " + std::to_string(f) +
                                        " references node beyond node count");
  if (mesh.boundary_tris.empty()) return;

  auto faces = collect_faces(mesh);
  std::map<FaceKey, int> count;
  for (std::size_t i = 0; i < faces.size();) {
    std::size_t j = i;
    while (j < faces.size() && faces[j].key == faces[i].key) ++j;
    count.emplace(faces[i].key, static_cast<int>(j - i));
    i = j;
  }
  for (std::size_t f = 0; f < mesh.boundary_tris.size(); ++f) {
    auto it = count.find(sorted_key(mesh.boundary_tris[f].nodes));
    if (it == count.end() || it->second != 1)
      throw ValidationError("boundary triangle " + std::to_string(f) +
                            " is not a face of exactly one tetrahedron");
  }
  if (!mesh.parent_nodes.empty() && mesh.parent_nodes.size() != n)
    throw ValidationError("parent node map length differs from node count");
}

std::vector<BoundaryTri> extract_boundary(const TetMesh& mesh, PatchTag tag) {
  auto faces = collect_faces(mesh);
  std::vector<std::pair<std::size_t, int>> owners;
  for (std::size_t i = 0; i < faces.size();) {
    std::size_t j = i;
    while (j < faces.size() && faces[j].key == faces[i].key) ++j;
    if (j - i == 1) owners.emplace_back(faces[i].tet, faces[i].local);
    i = j;
  }
  std::sort(owners.begin(), owners.end());
  std::vector<BoundaryTri> out;
  out.reserve(owners.size());
  for (auto [t, l] : owners) out.push_back({outward_face(mesh, t, l), tag});
  return out;
}

TetMesh generate_box_mesh(int nx, int ny, int nz, const Vec3& extents, const Vec3& origin,
                          Label label) {
  if (nx < 1 || ny < 1 || nz < 1)
    throw ValidationError("box subdivisions must be >= 1");
  if (!(extents[0] > 0.0 && extents[1] > 0.0 && extents[2] > 0.0))
    throw ValidationError("box extents must be positive");

  TetMesh mesh;
  const std::size_t sx = nx + 1, sy = ny + 1, sz = nz + 1;
  mesh.nodes.reserve(sx * sy * sz);
  for (std::size_t k = 0; k < sz; ++k)
    for (std::size_t j = 0; j < sy; ++j)
      for (std::size_t i = 0; i < sx; ++i)
        mesh.nodes.push_back({origin[0] + extents[0] * static_cast<double>(i) / nx,
                              origin[1] + extents[1] * static_cast<double>(j) / ny,
                              origin[2] + extents[2] * static_cast<double>(k) / nz});
  auto id = [&](std::size_t i, std::size_t j, std::size_t k) { return i + sx * (j + sy * k); };

  // Kuhn split: each tet follows a monotone path 0 -> 7 through the cube's
  // corners (bit 0 = x, bit 1 = y, bit 2 = z), one per axis permutation.
  constexpr std::array<std::array<int, 3>, 6> kPerms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  mesh.tets.reserve(static_cast<std::size_t>(nx) * ny * nz * 6);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        auto corner = [&](int bits) {
          return id(i + (bits & 1), j + ((bits >> 1) & 1), k + ((bits >> 2) & 1));
        };
        for (const auto& p : kPerms) {
          int b1 = 1 << p[0];
          int b2 = b1 | (1 << p[1]);
          std::array<NodeId, 4> tet{corner(0), corner(b1), corner(b2), corner(7)};
          if (tet_volume(mesh.nodes[tet[0]], mesh.nodes[tet[1]], mesh.nodes[tet[2]],
                         mesh.nodes[tet[3]]) < 0.0)
            std::swap(tet[2], tet[3]);
          mesh.tets.push_back(tet);
        }
      }
  mesh.tet_labels.assign(mesh.tets.size(), label);
  mesh.boundary_tris = extract_boundary(mesh, kOuterPatch);
  return mesh;
}

TetMesh label_by_predicate(const TetMesh& mesh, const std::vector<LabelRule>& rules,
                           const PointPredicate& arterial_surface) {
  TetMesh out = mesh;
  for (std::size_t t = 0; t < out.tets.size(); ++t) {
    const Vec3 c = tet_centroid(out, t);
    for (const auto& rule : rules)
      if (rule.region && rule.region(c)) out.tet_labels[t] = rule.label;
  }
  if (arterial_surface)
    for (std::size_t f = 0; f < out.boundary_tris.size(); ++f)
      if (arterial_surface(facet_centroid(out, f))) out.boundary_tris[f].patch = kArterialPatch;
  return out;
}

PointPredicate sphere_region(const Vec3& center, double radius) {
  return [center, radius](const Vec3& p) {
    Vec3 d = sub(p, center);
    return dot(d, d) < radius * radius;
  };
}

PointPredicate half_space(int axis, double value, bool below) {
  if (axis < 0 || axis > 2) throw ValidationError("half-space axis must be 0, 1 or 2");
  return [=](const Vec3& p) { return below ? p[axis] < value : p[axis] > value; };
}

TetMesh extract_submesh(const TetMesh& mesh, const std::function<bool(Label)>& keep) {
  TetMesh sub;
  constexpr NodeId kUnused = std::numeric_limits<NodeId>::max();
  std::vector<NodeId> local(mesh.nodes.size(), kUnused);
  std::vector<std::size_t> kept;
  for (std::size_t t = 0; t < mesh.tets.size(); ++t)
    if (keep(mesh.tet_labels[t])) {
      kept.push_back(t);
      for (NodeId v : mesh.tets[t]) local[v] = 0;
    }
  for (NodeId v = 0; v < mesh.nodes.size(); ++v)
    if (local[v] != kUnused) {
      local[v] = sub.nodes.size();
      sub.nodes.push_back(mesh.nodes[v]);
      sub.parent_nodes.push_back(mesh.parent_nodes.empty() ? v : mesh.parent_nodes[v]);
    }
  for (std::size_t t : kept) {
    const auto& tet = mesh.tets[t];
    sub.tets.push_back({local[tet[0]], local[tet[1]], local[tet[2]], local[tet[3]]});
    sub.tet_labels.push_back(mesh.tet_labels[t]);
  }

  std::map<FaceKey, PatchTag> parent_tags;
  for (const auto& bt : mesh.boundary_tris) {
    FaceKey k{local[bt.nodes[0]], local[bt.nodes[1]], local[bt.nodes[2]]};
    if (k[0] == kUnused || k[1] == kUnused || k[2] == kUnused) continue;
    parent_tags[sorted_key(k)] = bt.patch;
  }
  sub.boundary_tris = extract_boundary(sub, kArterialPatch);
  for (auto& bt : sub.boundary_tris) {
    auto it = parent_tags.find(sorted_key(bt.nodes));
    if (it != parent_tags.end()) bt.patch = it->second;
  }
  return sub;
}

TetMesh tissue_submesh(const TetMesh& mesh) {
  return extract_submesh(mesh, [](Label l) { return l != labels::kArtery; });
}

TetMesh artery_submesh(const TetMesh& mesh) {
  return extract_submesh(mesh, [](Label l) { return l == labels::kArtery; });
}

std::vector<std::size_t> facet_owner_tets(const TetMesh& mesh) {
  std::map<FaceKey, std::size_t> owner;
  for (std::size_t t = 0; t < mesh.tets.size(); ++t)
    for (const auto& lf : kTetFaces) {
      const auto& tet = mesh.tets[t];
      owner[sorted_key({tet[lf[0]], tet[lf[1]], tet[lf[2]]})] = t;
    }
  std::vector<std::size_t> out;
  out.reserve(mesh.boundary_tris.size());
  for (std::size_t f = 0; f < mesh.boundary_tris.size(); ++f) {
    auto it = owner.find(sorted_key(mesh.boundary_tris[f].nodes));
    if (it == owner.end())
      throw ValidationError("boundary facet " + std::to_string(f) + " has no owning tetrahedron");
    out.push_back(it->second);
  }
  return out;
}

std::vector<std::vector<NodeId>> node_adjacency(const TetMesh& mesh) {
  std::vector<std::vector<NodeId>> adj(mesh.nodes.size());
  for (const auto& tet : mesh.tets)
    for (NodeId a : tet)
      for (NodeId b : tet) adj[a].push_back(b);
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return adj;
}

NodeId nearest_node(const TetMesh& mesh, const Vec3& point) {
  if (mesh.nodes.empty()) throw ValidationError("nearest_node on empty mesh");
  NodeId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (NodeId v = 0; v < mesh.nodes.size(); ++v) {
    Vec3 d = sub(mesh.nodes[v], point);
    double dd = dot(d, d);
    if (dd < best_d) {
      best_d = dd;
      best = v;
    }
  }
  return best;
}

TetMesh parse_mesh(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  auto next_line = [&](std::string& out) {
    while (std::getline(in, raw)) {
      ++line_no;
      auto t = trim(raw);
      if (t.empty() || t.front() == '#') continue;
      out.assign(t);
      return true;
    }
    return false;
  };

  std::string line;
  if (!next_line(line)) parse_fail(line_no, "empty file");
  {
    auto tok = split_ws(line);
    if (tok.size() != 2 || tok[0] != "MCIRC-MESH" || tok[1] != "1")
      parse_fail(line_no, "expected header 'MCIRC-MESH 1'");
  }

  TetMesh mesh;
  bool have_nodes = false, have_tets = false, have_btris = false;
  while (next_line(line)) {
    auto head = split_ws(line);
    std::size_t count = 0;
    if (head.size() != 2 || !parse_size(head[1], count))
      parse_fail(line_no, "expected '<section> <count>'");
    const std::string section(head[0]);
    bool* seen = section == "nodes" ? &have_nodes
                 : section == "tets" ? &have_tets
                 : section == "btris" ? &have_btris
                                      : nullptr;
    if (!seen) parse_fail(line_no, "unknown section '" + section + "'");
    if (*seen) parse_fail(line_no, "duplicate section '" + section + "'");
    *seen = true;

    for (std::size_t r = 0; r < count; ++r) {
      if (!next_line(line)) parse_fail(line_no, "unexpected end of file in section " + section);
      auto tok = split_ws(line);
      if (section == "nodes") {
        Vec3 p{};
        if (tok.size() != 3 || !parse_double(tok[0], p[0]) || !parse_double(tok[1], p[1]) ||
            !parse_double(tok[2], p[2]))
          parse_fail(line_no, "expected 'x y z'");
        mesh.nodes.push_back(p);
      } else if (section == "tets") {
        std::array<NodeId, 4> t{};
        int label = 0;
        bool ok = tok.size() == 5 && parse_int(tok[4], label);
        for (int i = 0; ok && i < 4; ++i) ok = parse_size(tok[i], t[i]);
        if (!ok) parse_fail(line_no, "expected 'i0 i1 i2 i3 label'");
        mesh.tets.push_back(t);
        mesh.tet_labels.push_back(label);
      } else {
        BoundaryTri bt;
        bool ok = tok.size() == 4 && parse_int(tok[3], bt.patch);
        for (int i = 0; ok && i < 3; ++i) ok = parse_size(tok[i], bt.nodes[i]);
        if (!ok) parse_fail(line_no, "expected 'i0 i1 i2 patch'");
        mesh.boundary_tris.push_back(bt);
      }
    }
  }
  if (!have_nodes || !have_tets) parse_fail(line_no, "missing nodes or tets section");
  validate(mesh);
  if (!have_btris) mesh.boundary_tris = extract_boundary(mesh, kOuterPatch);
  return mesh;
}

TetMesh read_mesh(const std::filesystem::path& path) { return parse_mesh(read_text_file(path)); }

std::string format_mesh(const TetMesh& mesh) {
  std::string s = "MCIRC-MESH 1\n";
  s += "nodes " + std::to_string(mesh.nodes.size()) + "\n";
  for (const auto& p : mesh.nodes)
    s += format_double(p[0]) + ' ' + format_double(p[1]) + ' ' + format_double(p[2]) + '\n';
  s += "tets " + std::to_string(mesh.tets.size()) + "\n";
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const auto& tet = mesh.tets[t];
    s += std::to_string(tet[0]) + ' ' + std::to_string(tet[1]) + ' ' + std::to_string(tet[2]) +
         ' ' + std::to_string(tet[3]) + ' ' + std::to_string(mesh.tet_labels[t]) + '\n';
  }
  s += "btris " + std::to_string(mesh.boundary_tris.size()) + "\n";
  for (const auto& bt : mesh.boundary_tris)
    s += std::to_string(bt.nodes[0]) + ' ' + std::to_string(bt.nodes[1]) + ' ' +
         std::to_string(bt.nodes[2]) + ' ' + std::to_string(bt.patch) + '\n';
  return s;
}

void write_mesh(const TetMesh& mesh, const std::filesystem::path& path) {
  write_text_atomic(path, format_mesh(mesh));
}

}  // namespace mcirc

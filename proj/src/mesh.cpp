/*
 * (C) Copyright 2026 The hvbem Authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "hvbem/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "hvbem/error.hpp"
#include "hvbem/io.hpp"
#include "hvbem/quadrature.hpp"

namespace hvbem {

namespace {

[[noreturn]] void mesh_error(const std::string& what) { throw Error(ErrorCode::Mesh, what); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int floating_index_of(const PatchKind& kind) {
  if (auto* f = std::get_if<FloatingConductor>(&kind)) return f->index;
  if (auto* s = std::get_if<FloatingSheet>(&kind)) return s->index;
  return -1;
}

// Shared by build() and classify_vertex(): `tris` are the triangles having the
// vertex as a corner.
RowKind classify_corner(int vertex, const std::vector<int>& tris,
                        const std::vector<std::size_t>& tri_patch,
                        const std::vector<PatchSpec>& patches) {
  if (tris.empty()) mesh_error("vertex " + std::to_string(vertex) + " is not a triangle corner");
  const Electrode* electrode = nullptr;
  int floating = -1;
  const DielectricInterface* dielectric = nullptr;
  for (int t : tris) {
    const PatchKind& kind = patches[tri_patch[t]].kind;
    if (auto* e = std::get_if<Electrode>(&kind)) {
      if (electrode && electrode->v0 != e->v0)
        mesh_error("vertex " + std::to_string(vertex) + " touches electrodes at different potentials");
      electrode = e;
    } else if (int k = floating_index_of(kind); k >= 0) {
      if (floating >= 0 && floating != k)
        mesh_error("vertex " + std::to_string(vertex) + " touches different floating conductors");
      floating = k;
    } else if (auto* d = std::get_if<DielectricInterface>(&kind)) {
      if (!dielectric) dielectric = d;
    }
  }
  if (electrode) return Dirichlet{electrode->v0};
  if (floating >= 0) return FloatingDirichlet{floating};
  // Conflicting pairs only matter when no conductor fixes the vertex.
  for (int t : tris) {
    const auto* d = std::get_if<DielectricInterface>(&patches[tri_patch[t]].kind);
    if (d->eps_plus != dielectric->eps_plus || d->eps_minus != dielectric->eps_minus)
      mesh_error("vertex " + std::to_string(vertex) +
                 " joins dielectric interfaces with different permittivity pairs");
  }
  return DielectricJump{dielectric->eps_plus, dielectric->eps_minus};
}

}  // namespace

Vec3 map_reference(const TriangleNodes& p, RefPoint uv) {
  const double l0 = 1.0 - uv.u - uv.v, l1 = uv.u, l2 = uv.v;
  const double n[6] = {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
                       4.0 * l0 * l1,         4.0 * l1 * l2,         4.0 * l2 * l0};
  Vec3 out;
  for (int i = 0; i < 6; ++i) out += n[i] * p[i];
  return out;
}

std::pair<Vec3, Vec3> reference_tangents(const TriangleNodes& p, RefPoint uv) {
  const double l0 = 1.0 - uv.u - uv.v, l1 = uv.u, l2 = uv.v;
  const double du[6] = {-(4.0 * l0 - 1.0), 4.0 * l1 - 1.0, 0.0,
                        4.0 * (l0 - l1),   4.0 * l2,       -4.0 * l2};
  const double dv[6] = {-(4.0 * l0 - 1.0), 0.0,      4.0 * l2 - 1.0,
                        -4.0 * l1,         4.0 * l1, 4.0 * (l0 - l2)};
  Vec3 tu, tv;
  for (int i = 0; i < 6; ++i) {
    tu += du[i] * p[i];
    tv += dv[i] * p[i];
  }
  return {tu, tv};
}

SurfaceFrame surface_frame(const TriangleNodes& nodes, RefPoint uv) {
  auto [tu, tv] = reference_tangents(nodes, uv);
  Vec3 c = cross(tu, tv);
  double j = norm(c);
  if (!(j >= 1e-14)) mesh_error("degenerate surface Jacobian");
  return {c / j, j};
}

std::pair<Vec3, double> circumcircle(const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 ab = b - a, ac = c - a;
  Vec3 n = cross(ab, ac);
  double n2 = norm2(n);
  if (n2 == 0.0) return {a, 0.0};
  Vec3 offset = cross(norm2(ab) * ac - norm2(ac) * ab, n) / (2.0 * n2);
  return {a + offset, norm(offset)};
}

const PatchSpec& SurfaceMesh::patch(int tag) const {
  for (const auto& p : patches_)
    if (p.tag == tag) return p;
  throw Error(ErrorCode::InvalidArgument, "unknown patch tag " + std::to_string(tag));
}

double SurfaceMesh::total_area() const {
  double sum = 0.0;
  for (double w : lumped_weight_) sum += w;
  return sum;
}

SurfaceMesh SurfaceMesh::build(MeshInput in) {
  SurfaceMesh m;
  const std::size_t nv = in.vertices.size();
  if (nv == 0) mesh_error("mesh has no vertices");
  if (in.triangles.empty()) mesh_error("mesh has no triangles");
  for (std::size_t i = 0; i < nv; ++i)
    if (!is_finite(in.vertices[i])) mesh_error("vertex " + std::to_string(i) + " is not finite");

  // Patches.
  std::map<int, std::size_t> tag_to_patch;
  std::map<int, bool> floating_is_sheet;
  for (std::size_t p = 0; p < in.patches.size(); ++p) {
    const PatchSpec& spec = in.patches[p];
    if (!tag_to_patch.emplace(spec.tag, p).second)
      mesh_error("patch tag " + std::to_string(spec.tag) + " declared twice");
    auto positive = [&](double eps) {
      if (!(eps > 0.0)) mesh_error("patch " + std::to_string(spec.tag) + ": permittivity must be > 0");
    };
    std::visit(overloaded{
                   [&](const Electrode& e) {
                     if (!std::isfinite(e.v0)) mesh_error("patch " + std::to_string(spec.tag) + ": bad V0");
                   },
                   [&](const FloatingConductor& f) { positive(f.eps_plus); },
                   [&](const FloatingSheet& s) {
                     positive(s.eps_plus);
                     positive(s.eps_minus);
                   },
                   [&](const DielectricInterface& d) {
                     positive(d.eps_plus);
                     positive(d.eps_minus);
                   },
               },
               spec.kind);
    int k = floating_index_of(spec.kind);
    if (k >= 0) {
      bool sheet = std::holds_alternative<FloatingSheet>(spec.kind);
      auto [it, fresh] = floating_is_sheet.emplace(k, sheet);
      if (!fresh && it->second != sheet)
        mesh_error("floating index " + std::to_string(k) + " used by both a conductor and a sheet");
    }
  }
  int expected = 0;
  for (const auto& [k, sheet] : floating_is_sheet)
    if (k != expected++) mesh_error("floating indices must be contiguous from 0");

  // Triangles and vertex roles.
  enum Role : unsigned char { kUnused = 0, kCorner = 1, kMidside = 2 };
  std::vector<unsigned char> role(nv, kUnused);
  m.triangles_.reserve(in.triangles.size());
  for (std::size_t t = 0; t < in.triangles.size(); ++t) {
    const auto& tri = in.triangles[t];
    std::set<int> ids;
    for (int id : tri.corners) ids.insert(id);
    for (int id : tri.midsides) ids.insert(id);
    for (int id : ids)
      if (id < 0 || static_cast<std::size_t>(id) >= nv)
        mesh_error("triangle " + std::to_string(t) + " references vertex " + std::to_string(id) +
                   " of " + std::to_string(nv));
    if (ids.size() != 6) mesh_error("triangle " + std::to_string(t) + " repeats a vertex id");
    auto pt = tag_to_patch.find(tri.tag);
    if (pt == tag_to_patch.end())
      mesh_error("triangle " + std::to_string(t) + " has unknown patch tag " + std::to_string(tri.tag));
    for (int id : tri.corners) role[id] |= kCorner;
    for (int id : tri.midsides) role[id] |= kMidside;

    CurvedTriangle ct;
    ct.corner_ids = tri.corners;
    ct.midside_ids = tri.midsides;
    ct.patch_tag = tri.tag;
    auto [cc, r] = circumcircle(in.vertices[tri.corners[0]], in.vertices[tri.corners[1]],
                                in.vertices[tri.corners[2]]);
    if (!(r >= 1e-12) || !std::isfinite(r))
      mesh_error("triangle " + std::to_string(t) + " is degenerate");
    ct.circumcenter = cc;
    ct.circumradius = r;
    m.triangles_.push_back(ct);
    m.tri_patch_.push_back(pt->second);
    TriangleNodes nodes;
    for (int c = 0; c < 3; ++c) {
      nodes[c] = in.vertices[tri.corners[c]];
      nodes[3 + c] = in.vertices[tri.midsides[c]];
    }
    m.nodes_.push_back(nodes);
  }
  for (std::size_t i = 0; i < nv; ++i) {
    if (role[i] == kUnused) mesh_error("vertex " + std::to_string(i) + " belongs to no triangle");
    if (role[i] == (kCorner | kMidside))
      mesh_error("vertex " + std::to_string(i) + " is both a corner and a midside node");
  }

  m.vertices_ = std::move(in.vertices);
  m.patches_ = std::move(in.patches);

  m.vertex_colloc_.assign(nv, -1);
  for (std::size_t i = 0; i < nv; ++i) {
    if (role[i] == kCorner) {
      m.vertex_colloc_[i] = static_cast<int>(m.colloc_vertex_.size());
      m.colloc_vertex_.push_back(static_cast<int>(i));
    }
  }
  const std::size_t n = m.colloc_vertex_.size();
  m.adjacency_.assign(n, {});
  m.tri_columns_.resize(m.triangles_.size());
  for (std::size_t t = 0; t < m.triangles_.size(); ++t) {
    for (int c = 0; c < 3; ++c) {
      int col = m.vertex_colloc_[m.triangles_[t].corner_ids[c]];
      m.tri_columns_[t][c] = col;
      m.adjacency_[col].push_back(static_cast<int>(t));
    }
  }

  // Jacobian probe and lumped weights.
  const Rule& probe = regular_rule(6);
  const Rule& lump = regular_rule(4);
  m.lumped_weight_.assign(n, 0.0);
  std::vector<Vec3> normal_sum(n);
  for (std::size_t t = 0; t < m.triangles_.size(); ++t) {
    const auto& nodes = m.nodes_[t];
    try {
      for (const RefPoint& p : probe.nodes) surface_frame(nodes, p);
      const RefPoint corners[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
      std::array<double, 3> w{};
      for (std::size_t q = 0; q < lump.size(); ++q) {
        double jw = lump.weights[q] * surface_frame(nodes, lump.nodes[q]).area_element;
        auto psi = corner_basis(lump.nodes[q]);
        for (int c = 0; c < 3; ++c) w[c] += jw * psi[c];
      }
      for (int c = 0; c < 3; ++c) {
        int col = m.tri_columns_[t][c];
        m.lumped_weight_[col] += w[c];
        normal_sum[col] += w[c] * surface_frame(nodes, corners[c]).normal;
      }
    } catch (const Error&) {
      mesh_error("triangle " + std::to_string(t) + " has a degenerate surface Jacobian");
    }
  }
  m.colloc_normal_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double len = norm(normal_sum[i]);
    if (!(len > 0.0))
      mesh_error("collocation normal undefined at vertex " + std::to_string(m.colloc_vertex_[i]));
    m.colloc_normal_[i] = normal_sum[i] / len;
  }

  m.row_kind_.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    m.row_kind_.push_back(classify_corner(m.colloc_vertex_[i], m.adjacency_[i], m.tri_patch_, m.patches_));

  m.floating_.resize(floating_is_sheet.size());
  for (const auto& [k, sheet] : floating_is_sheet) {
    m.floating_[k].index = k;
    m.floating_[k].sheet = sheet;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (auto* f = std::get_if<FloatingDirichlet>(&m.row_kind_[i]))
      m.floating_[f->index].collocation.push_back(static_cast<int>(i));

  m.bbox_min_ = m.bbox_max_ = m.vertices_.front();
  for (const Vec3& v : m.vertices_) {
    m.bbox_min_ = {std::min(m.bbox_min_.x, v.x), std::min(m.bbox_min_.y, v.y), std::min(m.bbox_min_.z, v.z)};
    m.bbox_max_ = {std::max(m.bbox_max_.x, v.x), std::max(m.bbox_max_.y, v.y), std::max(m.bbox_max_.z, v.z)};
  }
  return m;
}

MeshInput SurfaceMesh::to_input() const {
  MeshInput in;
  in.vertices = vertices_;
  for (const auto& t : triangles_) in.triangles.push_back({t.corner_ids, t.midside_ids, t.patch_tag});
  in.patches = patches_;
  return in;
}

RowKind classify_vertex(const SurfaceMesh& mesh, int vertex) {
  if (vertex < 0 || static_cast<std::size_t>(vertex) >= mesh.num_vertices())
    throw Error(ErrorCode::InvalidArgument, "vertex id out of range");
  int col = mesh.vertex_colloc_[vertex];
  if (col < 0) mesh_error("vertex " + std::to_string(vertex) + " is not a triangle corner");
  return classify_corner(vertex, mesh.adjacency_[col], mesh.tri_patch_, mesh.patches_);
}

// ---------------------------------------------------------------------------
// Text format

SurfaceMesh parse_mesh(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header = false;
  bool relative = false;
  std::map<int, Vec3> vertices;
  MeshInput input;
  std::vector<int> tri_lines;

  auto fail = [&](const std::string& what) -> void {
    throw Error(ErrorCode::Parse, origin + ":" + std::to_string(lineno) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string keyword;
    if (!(ls >> keyword)) continue;
    if (!header) {
      int version = 0;
      if (keyword != "bemesh" || !(ls >> version) || version != 1) fail("expected header 'bemesh 1'");
      header = true;
      continue;
    }
    std::string extra;
    if (keyword == "vertex") {
      int id;
      Vec3 p;
      if (!(ls >> id >> p.x >> p.y >> p.z)) fail("malformed vertex line");
      if (id < 0) fail("negative vertex id");
      if (!vertices.emplace(id, p).second) fail("duplicate vertex id " + std::to_string(id));
    } else if (keyword == "triangle") {
      MeshInput::Tri t;
      if (!(ls >> t.corners[0] >> t.corners[1] >> t.corners[2] >> t.midsides[0] >> t.midsides[1] >>
            t.midsides[2] >> t.tag))
        fail("malformed triangle line");
      input.triangles.push_back(t);
      tri_lines.push_back(lineno);
    } else if (keyword == "patch") {
      PatchSpec spec;
      std::string kind;
      if (!(ls >> spec.tag >> kind)) fail("malformed patch line");
      if (kind == "electrode") {
        Electrode e;
        if (!(ls >> e.v0)) fail("electrode patch needs <V0>");
        spec.kind = e;
      } else if (kind == "floating") {
        FloatingConductor f;
        if (!(ls >> f.index)) fail("floating patch needs <k>");
        // Optional exterior permittivity; negative marks "use the default".
        f.eps_plus = -1.0;
        std::string eps;
        if (ls >> eps) {
          try {
            std::size_t used = 0;
            f.eps_plus = std::stod(eps, &used);
            if (used != eps.size()) throw std::invalid_argument(eps);
          } catch (const std::exception&) {
            fail("floating patch: bad permittivity '" + eps + "'");
          }
        }
        spec.kind = f;
      } else if (kind == "sheet") {
        FloatingSheet s;
        if (!(ls >> s.index >> s.eps_plus >> s.eps_minus)) fail("sheet patch needs <k> <eps+> <eps->");
        spec.kind = s;
      } else if (kind == "dielectric") {
        DielectricInterface d;
        if (!(ls >> d.eps_plus >> d.eps_minus)) fail("dielectric patch needs <eps+> <eps->");
        spec.kind = d;
      } else {
        fail("unknown patch kind '" + kind + "'");
      }
      bool is_floating = std::holds_alternative<FloatingConductor>(spec.kind) ||
                         std::holds_alternative<FloatingSheet>(spec.kind);
      if (is_floating && floating_index_of(spec.kind) < 0) fail("floating index must be >= 0");
      input.patches.push_back(spec);
    } else if (keyword == "permittivity") {
      std::string mode;
      if (!(ls >> mode) || (mode != "relative" && mode != "absolute"))
        fail("expected 'permittivity relative' or 'permittivity absolute'");
      relative = mode == "relative";
    } else {
      fail("unknown keyword '" + keyword + "'");
    }
    if (ls >> extra) fail("trailing token '" + extra + "'");
  }
  if (!header) throw Error(ErrorCode::Parse, origin + ": empty mesh file");

  int expect = 0;
  for (const auto& [id, p] : vertices) {
    if (id != expect) {
      lineno = 0;
      throw Error(ErrorCode::Parse, origin + ": vertex ids must be contiguous from 0 (missing " +
                                        std::to_string(expect) + ")");
    }
    input.vertices.push_back(p);
    ++expect;
  }
  for (std::size_t t = 0; t < input.triangles.size(); ++t) {
    const auto& tri = input.triangles[t];
    for (int id : {tri.corners[0], tri.corners[1], tri.corners[2], tri.midsides[0], tri.midsides[1],
                   tri.midsides[2]}) {
      if (id < 0 || static_cast<std::size_t>(id) >= input.vertices.size()) {
        lineno = tri_lines[t];
        fail("dangling reference to vertex " + std::to_string(id) + " of " +
             std::to_string(input.vertices.size()));
      }
    }
  }
  const double scale = relative ? kEpsilon0 : 1.0;
  for (auto& spec : input.patches) {
    std::visit(overloaded{
                   [](Electrode&) {},
                   [&](FloatingConductor& f) { f.eps_plus = f.eps_plus < 0.0 ? kEpsilon0 : f.eps_plus * scale; },
                   [&](FloatingSheet& s) {
                     s.eps_plus *= scale;
                     s.eps_minus *= scale;
                   },
                   [&](DielectricInterface& d) {
                     d.eps_plus *= scale;
                     d.eps_minus *= scale;
                   },
               },
               spec.kind);
  }
  try {
    return SurfaceMesh::build(std::move(input));
  } catch (const Error& e) {
    throw Error(e.code(), origin + ": " + e.what());
  }
}

SurfaceMesh load_mesh(const std::string& path) { return parse_mesh(read_text_file(path), path); }

std::string format_mesh(const SurfaceMesh& mesh) {
  std::string out = "bemesh 1\n";
  char buf[256];
  for (const auto& spec : mesh.patches()) {
    std::visit(overloaded{
                   [&](const Electrode& e) { std::snprintf(buf, sizeof buf, "patch %d electrode %.17g\n", spec.tag, e.v0); },
                   [&](const FloatingConductor& f) {
                     std::snprintf(buf, sizeof buf, "patch %d floating %d %.17g\n", spec.tag, f.index, f.eps_plus);
                   },
                   [&](const FloatingSheet& s) {
                     std::snprintf(buf, sizeof buf, "patch %d sheet %d %.17g %.17g\n", spec.tag, s.index,
                                   s.eps_plus, s.eps_minus);
                   },
                   [&](const DielectricInterface& d) {
                     std::snprintf(buf, sizeof buf, "patch %d dielectric %.17g %.17g\n", spec.tag, d.eps_plus,
                                   d.eps_minus);
                   },
               },
               spec.kind);
    out += buf;
  }
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const Vec3& p = mesh.vertices()[i];
    std::snprintf(buf, sizeof buf, "vertex %zu %.17g %.17g %.17g\n", i, p.x, p.y, p.z);
    out += buf;
  }
  for (const auto& t : mesh.triangles()) {
    std::snprintf(buf, sizeof buf, "triangle %d %d %d %d %d %d %d\n", t.corner_ids[0], t.corner_ids[1],
                  t.corner_ids[2], t.midside_ids[0], t.midside_ids[1], t.midside_ids[2], t.patch_tag);
    out += buf;
  }
  return out;
}

void write_mesh(const SurfaceMesh& mesh, const std::string& path) { write_text_file(path, format_mesh(mesh)); }

}  // namespace hvbem

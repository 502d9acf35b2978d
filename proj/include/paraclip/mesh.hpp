#pragma once

// Polyhedral cells and meshes. A mesh stores every face once; each cell
// lists its faces with a flag telling whether the stored cycle must be
// reversed to be counter-clockwise about the cell's outward normal.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "paraclip/core_math.hpp"
#include "paraclip/errors.hpp"

namespace paraclip {

/// Area vector (|F| n_F) of a planar polygon by Newell's method.
inline Vec3 polygon_area_vector(std::span<const Vec3> pts) {
  Vec3 a;
  const Vec3& o = pts[0];
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) a += cross(pts[i] - o, pts[i + 1] - o);
  return 0.5 * a;
}

/// A single closed polyhedron with faces ordered counter-clockwise about the
/// outward normal.
struct Polyhedron {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;

  std::size_t face_count() const { return faces.size(); }

  std::vector<Vec3> face_points(std::size_t k) const {
    std::vector<Vec3> p;
    p.reserve(faces[k].size());
    for (int i : faces[k]) p.push_back(vertices[static_cast<std::size_t>(i)]);
    return p;
  }

  Vec3 face_area_vector(std::size_t k) const {
    const auto p = face_points(k);
    return polygon_area_vector(p);
  }

  Vec3 vertex_centroid() const {
    Vec3 c;
    for (const Vec3& v : vertices) c += v;
    return c / static_cast<double>(vertices.size());
  }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i)
      for (std::size_t j = i + 1; j < vertices.size(); ++j) d = std::max(d, norm(vertices[i] - vertices[j]));
    return d;
  }

  /// Unique undirected edges as (lower, higher) local vertex index pairs.
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> e;
    for (const auto& f : faces)
      for (std::size_t i = 0; i < f.size(); ++i) {
        const int a = f[i];
        const int b = f[(i + 1) % f.size()];
        e.emplace_back(std::min(a, b), std::max(a, b));
      }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
  }

  /// |sum of face area vectors| relative to diameter^2; zero for a closed cell.
  double closure_defect() const {
    Vec3 s;
    for (std::size_t k = 0; k < faces.size(); ++k) s += face_area_vector(k);
    const double d = diameter();
    return d > 0.0 ? norm(s) / (d * d) : norm(s);
  }

  /// Largest distance of a face vertex from the face plane, relative to the
  /// cell diameter.
  double planarity_defect() const {
    double worst = 0.0;
    const double d = diameter();
    for (std::size_t k = 0; k < faces.size(); ++k) {
      const auto p = face_points(k);
      const Vec3 a = polygon_area_vector(p);
      const double an = norm(a);
      if (an == 0.0) return std::numeric_limits<double>::infinity();
      const Vec3 n = a / an;
      for (const Vec3& x : p) worst = std::max(worst, std::abs(dot(x - p[0], n)));
    }
    return d > 0.0 ? worst / d : worst;
  }

  /// Divergence-theorem volume (1/3) sum <x_{k,1} - x_ref, A_k>.
  double volume(const Vec3& x_ref) const {
    if (closure_defect() > 1e-10) throw GeometryError("cell not closed");
    CompensatedSum s;
    for (std::size_t k = 0; k < faces.size(); ++k)
      s += dot(vertices[static_cast<std::size_t>(faces[k][0])] - x_ref, face_area_vector(k));
    return s.value() / 3.0;
  }
  double volume() const { return volume(vertex_centroid()); }

  /// Applies x -> R x + t to every vertex.
  Polyhedron transformed(const Mat3& rot, const Vec3& shift) const {
    Polyhedron p = *this;
    for (Vec3& v : p.vertices) v = rot * v + shift;
    return p;
  }
};

inline double polyhedron_volume(const Polyhedron& cell) { return cell.volume(); }

/// Table polyhedron inside [0,1]^3: a 1 x 1 x a plate on top of four
/// a x a x (1-a) corner legs. The plate underside is a plus-shaped 12-gon and
/// the four side faces are Pi-shaped octagons.
inline Polyhedron build_table_polyhedron(double a = 0.25) {
  if (!(a > 0.0 && a < 0.5)) throw ParameterError("table leg width must lie in (0, 1/2)");
  Polyhedron p;
  auto vid = [&](const Vec3& x) {
    for (std::size_t i = 0; i < p.vertices.size(); ++i)
      if (norm(p.vertices[i] - x) <= 1e-12) return static_cast<int>(i);
    p.vertices.push_back(x);
    return static_cast<int>(p.vertices.size() - 1);
  };
  auto add = [&](const std::vector<Vec3>& cycle) {
    std::vector<int> f;
    for (const Vec3& x : cycle) f.push_back(vid(x));
    p.faces.push_back(std::move(f));
  };
  // Quarter turn about the vertical axis through (1/2, 1/2).
  auto rot = [](const Vec3& x, int times) {
    Vec3 r = x;
    for (int i = 0; i < times; ++i) r = {1.0 - r.y, r.x, r.z};
    return r;
  };
  const double b = 1.0 - a;

  add({{0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}});

  const std::array<Vec2, 12> plus{{{a, 0}, {b, 0}, {b, a}, {1, a}, {1, b}, {b, b},
                                   {b, 1}, {a, 1}, {a, b}, {0, b}, {0, a}, {a, a}}};
  std::vector<Vec3> under;
  for (auto it = plus.rbegin(); it != plus.rend(); ++it) under.push_back({it->x, it->y, b});
  add(under);

  const std::array<Vec2, 8> pi_face{{{0, 0}, {a, 0}, {a, b}, {b, b}, {b, 0}, {1, 0}, {1, 1}, {0, 1}}};
  for (int r = 0; r < 4; ++r) {
    std::vector<Vec3> side;
    for (const Vec2& uw : pi_face) side.push_back(rot({uw.x, 0.0, uw.y}, r));
    add(side);
  }
  for (int r = 0; r < 4; ++r) {
    add({rot({0, 0, 0}, r), rot({0, a, 0}, r), rot({a, a, 0}, r), rot({a, 0, 0}, r)});
    add({rot({a, 0, 0}, r), rot({a, a, 0}, r), rot({a, a, b}, r), rot({a, 0, b}, r)});
    add({rot({a, a, 0}, r), rot({0, a, 0}, r), rot({0, a, b}, r), rot({a, a, b}, r)});
  }
  return p;
}

// ---------------------------------------------------------------------------
// Mesh
// ---------------------------------------------------------------------------

struct CellFace {
  int face = 0;
  bool flipped = false;
};

/// VTK cell kinds the mesh can round-trip through the legacy format.
enum class CellShape { Tetra = 10, Hexahedron = 12, Polyhedron = 42 };

struct PolyMesh {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;
  std::vector<std::vector<CellFace>> cells;
  /// Original node list and shape per cell (used by the VTK writer).
  std::vector<std::vector<int>> cell_nodes;
  std::vector<CellShape> cell_shapes;

  std::size_t cell_count() const { return cells.size(); }

  Polyhedron cell(std::size_t i) const {
    Polyhedron p;
    std::vector<int> global;
    auto local = [&](int g) {
      for (std::size_t j = 0; j < global.size(); ++j)
        if (global[j] == g) return static_cast<int>(j);
      global.push_back(g);
      p.vertices.push_back(vertices[static_cast<std::size_t>(g)]);
      return static_cast<int>(global.size() - 1);
    };
    for (const CellFace& cf : cells[i]) {
      const auto& f = faces[static_cast<std::size_t>(cf.face)];
      std::vector<int> cyc;
      cyc.reserve(f.size());
      if (cf.flipped)
        for (auto it = f.rbegin(); it != f.rend(); ++it) cyc.push_back(local(*it));
      else
        for (int g : f) cyc.push_back(local(g));
      p.faces.push_back(std::move(cyc));
    }
    return p;
  }

  /// Number of cells referencing each stored face.
  std::vector<int> face_use_counts() const {
    std::vector<int> n(faces.size(), 0);
    for (const auto& c : cells)
      for (const CellFace& cf : c) ++n[static_cast<std::size_t>(cf.face)];
    return n;
  }
};

namespace detail {

struct FaceKeyHash {
  std::size_t operator()(const std::vector<int>& k) const noexcept {
    std::size_t h = k.size();
    for (int v : k) h ^= static_cast<std::size_t>(v) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

inline const std::vector<std::vector<int>>& local_faces(CellShape shape) {
  static const std::vector<std::vector<int>> tet{{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {0, 3, 2}};
  static const std::vector<std::vector<int>> hex{{0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4},
                                                 {1, 2, 6, 5}, {2, 3, 7, 6}, {3, 0, 4, 7}};
  return shape == CellShape::Tetra ? tet : hex;
}

}  // namespace detail

/// Assembles a mesh from convex tetrahedra / hexahedra given by VTK node
/// lists. Faces are shared by sorted vertex key and oriented outward using
/// the cell's vertex centroid.
class MeshBuilder {
 public:
  explicit MeshBuilder(std::vector<Vec3> vertices) { mesh_.vertices = std::move(vertices); }

  void add_cell(CellShape shape, std::vector<int> nodes) {
    const std::size_t expected = shape == CellShape::Tetra ? 4 : 8;
    if (shape == CellShape::Polyhedron || nodes.size() != expected)
      throw GeometryError("cell node count does not match its shape");
    for (int n : nodes)
      if (n < 0 || static_cast<std::size_t>(n) >= mesh_.vertices.size())
        throw GeometryError("cell references vertex " + std::to_string(n) + " out of range");
    Vec3 centroid;
    for (int n : nodes) centroid += mesh_.vertices[static_cast<std::size_t>(n)];
    centroid = centroid / static_cast<double>(nodes.size());

    std::vector<CellFace> cell;
    for (const auto& lf : detail::local_faces(shape)) {
      std::vector<int> cyc;
      std::vector<Vec3> pts;
      for (int l : lf) {
        cyc.push_back(nodes[static_cast<std::size_t>(l)]);
        pts.push_back(mesh_.vertices[static_cast<std::size_t>(cyc.back())]);
      }
      Vec3 fc;
      for (const Vec3& x : pts) fc += x;
      fc = fc / static_cast<double>(pts.size());
      const Vec3 area = polygon_area_vector(pts);
      if (norm(area) == 0.0) throw GeometryError("degenerate face in cell " + std::to_string(mesh_.cells.size()));
      if (dot(area, fc - centroid) < 0.0) std::reverse(cyc.begin(), cyc.end());

      std::vector<int> key = cyc;
      std::sort(key.begin(), key.end());
      auto [it, inserted] = index_.try_emplace(std::move(key), static_cast<int>(mesh_.faces.size()));
      if (inserted) {
        mesh_.faces.push_back(cyc);
        cell.push_back({it->second, false});
      } else {
        const auto& stored = mesh_.faces[static_cast<std::size_t>(it->second)];
        cell.push_back({it->second, !same_orientation(stored, cyc)});
      }
    }
    mesh_.cells.push_back(std::move(cell));
    mesh_.cell_nodes.push_back(std::move(nodes));
    mesh_.cell_shapes.push_back(shape);
  }

  PolyMesh finish() && { return std::move(mesh_); }

 private:
  // Two cycles over the same vertex set run the same way if the successor of
  // the first vertex matches.
  static bool same_orientation(const std::vector<int>& a, const std::vector<int>& b) {
    const auto pos = static_cast<std::size_t>(std::find(b.begin(), b.end(), a[0]) - b.begin());
    return b[(pos + 1) % b.size()] == a[1];
  }

  PolyMesh mesh_;
  std::unordered_map<std::vector<int>, int, detail::FaceKeyHash> index_;
};

struct Box {
  Vec3 lo{-1.0, -1.0, -1.0};
  Vec3 hi{1.0, 1.0, 1.0};

  double volume() const { return (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z); }
};

namespace detail {

inline std::vector<Vec3> grid_vertices(int n, const Box& box) {
  std::vector<Vec3> v;
  v.reserve(static_cast<std::size_t>(n + 1) * (n + 1) * (n + 1));
  auto coord = [n](double lo, double hi, int i) { return i == n ? hi : lo + (hi - lo) * i / n; };
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        v.push_back({coord(box.lo.x, box.hi.x, i), coord(box.lo.y, box.hi.y, j), coord(box.lo.z, box.hi.z, k)});
  return v;
}

/// Corner c (bit 0: x, bit 1: y, bit 2: z) of grid cube (i, j, k).
inline int grid_corner(int n, int i, int j, int k, int c) {
  const int m = n + 1;
  return (i + (c & 1)) + m * ((j + ((c >> 1) & 1)) + m * (k + ((c >> 2) & 1)));
}

}  // namespace detail

/// N^3 equal hexahedra filling the box.
inline PolyMesh build_cube_mesh(int n, const Box& box = {}) {
  if (n < 1) throw ParameterError("cube mesh resolution must be >= 1");
  MeshBuilder b(detail::grid_vertices(n, box));
  static constexpr std::array<int, 8> vtk_order{0, 1, 3, 2, 4, 5, 7, 6};
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        std::vector<int> nodes;
        for (int c : vtk_order) nodes.push_back(detail::grid_corner(n, i, j, k, c));
        b.add_cell(CellShape::Hexahedron, std::move(nodes));
      }
  return std::move(b).finish();
}

/// Each grid cube split into the six Kuhn tetrahedra around its main
/// diagonal; the split is conforming across neighbouring cubes.
inline PolyMesh build_tet_mesh(int n, const Box& box = {}) {
  if (n < 1) throw ParameterError("tet mesh resolution must be >= 1");
  MeshBuilder b(detail::grid_vertices(n, box));
  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (const auto& p : perms) {
          const int c1 = 1 << p[0];
          const int c2 = c1 | (1 << p[1]);
          b.add_cell(CellShape::Tetra, {detail::grid_corner(n, i, j, k, 0), detail::grid_corner(n, i, j, k, c1),
                                        detail::grid_corner(n, i, j, k, c2), detail::grid_corner(n, i, j, k, 7)});
        }
  return std::move(b).finish();
}

/// Single-cell mesh wrapping an arbitrary polyhedron.
inline PolyMesh mesh_from_polyhedron(const Polyhedron& p) {
  PolyMesh m;
  m.vertices = p.vertices;
  m.faces = p.faces;
  std::vector<CellFace> c;
  std::vector<int> nodes(p.vertices.size());
  std::iota(nodes.begin(), nodes.end(), 0);
  for (std::size_t k = 0; k < p.faces.size(); ++k) c.push_back({static_cast<int>(k), false});
  m.cells.push_back(std::move(c));
  m.cell_nodes.push_back(std::move(nodes));
  m.cell_shapes.push_back(CellShape::Polyhedron);
  return m;
}

}  // namespace paraclip

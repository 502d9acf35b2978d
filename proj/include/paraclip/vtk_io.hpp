#pragma once

// Legacy ASCII VTK unstructured grids: tetrahedra and hexahedra in, any
// mesh out (cells without a VTK node list are written as polyhedra).

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "paraclip/errors.hpp"
#include "paraclip/mesh.hpp"

namespace paraclip {

namespace detail {

/// Whitespace tokenizer that remembers the line of each token.
class LineTokenizer {
 public:
  explicit LineTokenizer(std::istream& in) : in_(in) {}

  bool next(std::string& tok) {
    while (pos_ >= line_.size() || skip_ws()) {
      if (!std::getline(in_, line_)) return false;
      ++line_no_;
      pos_ = 0;
    }
    const std::size_t start = pos_;
    while (pos_ < line_.size() && !is_ws(line_[pos_])) ++pos_;
    tok = line_.substr(start, pos_ - start);
    return true;
  }

  /// Reads the rest of the current physical line (or the next line when the
  /// current one is exhausted).
  bool next_line(std::string& out) {
    if (pos_ < line_.size() && !skip_ws()) {
      out = line_.substr(pos_);
      pos_ = line_.size();
      return true;
    }
    if (!std::getline(in_, line_)) return false;
    ++line_no_;
    out = line_;
    pos_ = line_.size();
    return true;
  }

  int line() const { return line_no_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("VTK line " + std::to_string(line_no_) + ": " + what);
  }

  std::string expect_token(const char* what) {
    std::string t;
    if (!next(t)) fail(std::string("unexpected end of file, expected ") + what);
    return t;
  }

  template <class T>
  T expect_number(const char* what) {
    const std::string t = expect_token(what);
    T v{};
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) fail(std::string("expected ") + what + ", got '" + t + "'");
    return v;
  }

 private:
  static bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }
  // Advances past whitespace; true when the line is exhausted.
  bool skip_ws() {
    while (pos_ < line_.size() && is_ws(line_[pos_])) ++pos_;
    return pos_ >= line_.size();
  }

  std::istream& in_;
  std::string line_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

inline std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

/// Parses a legacy VTK unstructured grid. Volume cells must be tetrahedra (10)
/// or hexahedra (12); vertex, line and surface cells (types 1-9) are skipped,
/// any other type is rejected.
inline PolyMesh read_vtk_legacy(std::istream& in) {
  detail::LineTokenizer tk(in);
  std::string line;
  if (!tk.next_line(line) || line.rfind("# vtk DataFile Version", 0) != 0)
    tk.fail("missing '# vtk DataFile Version' header");
  {
    const std::string ver = line.substr(std::string("# vtk DataFile Version").size());
    const auto p = ver.find_first_not_of(' ');
    if (p == std::string::npos || (ver[p] != '2' && ver[p] != '3'))
      tk.fail("unsupported legacy version '" + ver + "' (expected 2.x or 3.x)");
  }
  if (!tk.next_line(line)) tk.fail("missing title line");
  if (detail::upper(tk.expect_token("format")) != "ASCII") tk.fail("only ASCII files are supported");
  if (detail::upper(tk.expect_token("DATASET")) != "DATASET") tk.fail("expected DATASET");
  if (detail::upper(tk.expect_token("dataset type")) != "UNSTRUCTURED_GRID") tk.fail("expected UNSTRUCTURED_GRID");

  std::vector<Vec3> points;
  std::vector<std::vector<int>> conn;
  std::vector<int> types;
  bool have_points = false, have_cells = false, have_types = false;
  std::string tok;
  while (tk.next(tok)) {
    const std::string key = detail::upper(tok);
    if (key == "POINTS") {
      const long long n = tk.expect_number<long long>("point count");
      if (n < 0) tk.fail("negative point count");
      tk.expect_token("point data type");
      points.resize(static_cast<std::size_t>(n));
      for (auto& p : points)
        for (int d = 0; d < 3; ++d) p[d] = tk.expect_number<double>("point coordinate");
      have_points = true;
    } else if (key == "CELLS") {
      const long long n = tk.expect_number<long long>("cell count");
      tk.expect_number<long long>("cell list size");
      if (n < 0) tk.fail("negative cell count");
      conn.resize(static_cast<std::size_t>(n));
      for (auto& c : conn) {
        const int k = tk.expect_number<int>("cell node count");
        if (k < 0) tk.fail("negative cell node count");
        c.resize(static_cast<std::size_t>(k));
        for (int& v : c) {
          v = tk.expect_number<int>("node index");
          if (v < 0 || (have_points && static_cast<std::size_t>(v) >= points.size()))
            tk.fail("node index " + std::to_string(v) + " out of range");
        }
      }
      have_cells = true;
    } else if (key == "CELL_TYPES") {
      const long long n = tk.expect_number<long long>("cell type count");
      if (n < 0) tk.fail("negative cell type count");
      types.resize(static_cast<std::size_t>(n));
      for (int& t : types) t = tk.expect_number<int>("cell type");
      have_types = true;
    } else if (key == "CELL_DATA" || key == "POINT_DATA" || key == "METADATA") {
      break;  // attribute sections are not needed
    } else {
      tk.fail("unexpected keyword '" + tok + "'");
    }
  }
  if (!have_points || !have_cells || !have_types) tk.fail("incomplete unstructured grid (need POINTS, CELLS, CELL_TYPES)");
  if (types.size() != conn.size()) tk.fail("CELL_TYPES count does not match CELLS count");

  MeshBuilder b(std::move(points));
  for (std::size_t i = 0; i < conn.size(); ++i) {
    const int t = types[i];
    if (t >= 1 && t <= 9) continue;
    if (t != 10 && t != 12) throw ParseError("unsupported VTK cell type " + std::to_string(t));
    try {
      b.add_cell(static_cast<CellShape>(t), std::move(conn[i]));
    } catch (const GeometryError& e) {
      throw ParseError("VTK cell " + std::to_string(i) + ": " + e.what());
    }
  }
  return std::move(b).finish();
}

inline PolyMesh read_vtk_legacy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open VTK file '" + path + "'");
  return read_vtk_legacy(in);
}

/// Writes the mesh with one or more CELL_DATA scalar arrays.
inline void write_vtk(std::ostream& out, const PolyMesh& mesh,
                      const std::vector<std::pair<std::string, std::vector<double>>>& scalars) {
  for (const auto& [name, values] : scalars)
    if (values.size() != mesh.cell_count())
      throw ParameterError("scalar array '" + name + "' has " + std::to_string(values.size()) + " values for " +
                           std::to_string(mesh.cell_count()) + " cells");
  out << "# vtk DataFile Version 3.0\nparaclip\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(17);
  out << "POINTS " << mesh.vertices.size() << " double\n";
  for (const Vec3& p : mesh.vertices) out << p.x << ' ' << p.y << ' ' << p.z << '\n';

  std::vector<std::vector<int>> records(mesh.cell_count());
  std::size_t total = 0;
  for (std::size_t i = 0; i < mesh.cell_count(); ++i) {
    auto& r = records[i];
    const CellShape shape = i < mesh.cell_shapes.size() ? mesh.cell_shapes[i] : CellShape::Polyhedron;
    if (shape != CellShape::Polyhedron) {
      r = mesh.cell_nodes[i];
    } else {
      // Polyhedron record: face count, then (size, ids...) per face.
      r.push_back(static_cast<int>(mesh.cells[i].size()));
      for (const CellFace& cf : mesh.cells[i]) {
        auto f = mesh.faces[static_cast<std::size_t>(cf.face)];
        if (cf.flipped) std::reverse(f.begin(), f.end());
        r.push_back(static_cast<int>(f.size()));
        r.insert(r.end(), f.begin(), f.end());
      }
    }
    total += r.size() + 1;
  }
  out << "CELLS " << mesh.cell_count() << ' ' << total << '\n';
  for (const auto& r : records) {
    out << r.size();
    for (int v : r) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << mesh.cell_count() << '\n';
  for (std::size_t i = 0; i < mesh.cell_count(); ++i)
    out << static_cast<int>(i < mesh.cell_shapes.size() ? mesh.cell_shapes[i] : CellShape::Polyhedron) << '\n';
  if (!scalars.empty()) {
    out << "CELL_DATA " << mesh.cell_count() << '\n';
    for (const auto& [name, values] : scalars) {
      out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : values) out << v << '\n';
    }
  }
}

inline void write_vtk_cell_scalars(const PolyMesh& mesh, const std::string& name, const std::vector<double>& values,
                                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write VTK file '" + path + "'");
  write_vtk(out, mesh, {{name, values}});
}

}  // namespace paraclip

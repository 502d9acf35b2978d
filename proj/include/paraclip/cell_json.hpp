#pragma once

// Single-cell JSON: {"vertices": [[x,y,z], ...], "faces": [[i0,i1,...], ...]}
// with face cycles counter-clockwise about the outward normal.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "paraclip/errors.hpp"
#include "paraclip/mesh.hpp"

namespace paraclip {

inline Polyhedron polyhedron_from_json(const nlohmann::json& j) {
  Polyhedron p;
  try {
    for (const auto& v : j.at("vertices")) {
      if (!v.is_array() || v.size() != 3) throw ParseError("cell JSON: vertex must have three coordinates");
      p.vertices.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>()});
    }
    for (const auto& f : j.at("faces")) {
      std::vector<int> cyc = f.get<std::vector<int>>();
      if (cyc.size() < 3) throw ParseError("cell JSON: face with fewer than three vertices");
      for (int i : cyc)
        if (i < 0 || static_cast<std::size_t>(i) >= p.vertices.size())
          throw ParseError("cell JSON: face references vertex " + std::to_string(i) + " out of range");
      p.faces.push_back(std::move(cyc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("cell JSON: ") + e.what());
  }
  if (p.faces.size() < 4) throw ParseError("cell JSON: a closed cell needs at least four faces");
  return p;
}

inline Polyhedron read_cell_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open cell file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("cell JSON '" + path + "': " + e.what());
  }
  return polyhedron_from_json(j);
}

inline nlohmann::json polyhedron_to_json(const Polyhedron& p) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const Vec3& v : p.vertices) j["vertices"].push_back({v.x, v.y, v.z});
  j["faces"] = p.faces;
  return j;
}

}  // namespace paraclip

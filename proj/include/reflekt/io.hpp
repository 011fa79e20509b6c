#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "reflekt/errors.hpp"
#include "reflekt/group.hpp"
#include "reflekt/linalg.hpp"
#include "reflekt/root_system.hpp"

namespace reflekt {

using Json = nlohmann::json;

inline Json to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

inline Json to_json(const std::vector<Vec>& points) {
  Json out = Json::array();
  for (const auto& p : points) out.push_back(to_json(p));
  return out;
}

/// Row-major nested arrays.
inline Json to_json(const Mat& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vec(m.row(i).transpose())));
  return out;
}

inline Vec vec_from_json(const Json& j) {
  if (!j.is_array()) throw PreconditionError("expected a JSON array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw PreconditionError("expected a JSON array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

/// {"dimension", "family", "roots", "positive"} plus "elements" when a group is given.
inline Json root_system_to_json(const RootSystem& rs) {
  Json out;
  out["dimension"] = rs.dimension();
  out["family"] = to_string(rs.family());
  out["roots"] = to_json(rs.roots());
  out["positive"] = rs.positive_indices();
  return out;
}

inline Json group_to_json(const FiniteGroup& g) {
  Json out = root_system_to_json(g.root_system());
  Json elements = Json::array();
  for (const auto& e : g.elements()) elements.push_back(to_json(e.matrix()));
  out["elements"] = std::move(elements);
  return out;
}

/// Parses the root-system document; without "positive" the generic functional chooses U.
inline RootSystem root_system_from_json(const Json& j) {
  try {
    if (!j.contains("roots")) throw PreconditionError("root system document lacks \"roots\"");
    std::vector<Vec> roots;
    for (const auto& r : j.at("roots")) roots.push_back(vec_from_json(r));
    if (roots.empty()) throw PreconditionError("root system document has no roots");
    if (j.contains("dimension") && j.at("dimension").get<std::size_t>() != static_cast<std::size_t>(roots.front().size())) {
      throw PreconditionError("root system \"dimension\" does not match the roots");
    }
    for (const auto& r : roots) {
      if (r.size() != roots.front().size()) throw PreconditionError("roots have inconsistent dimensions");
    }
    const Family family = j.contains("family") ? family_from_string(j.at("family").get<std::string>()) : Family::Custom;
    if (j.contains("positive")) {
      return RootSystem::with_positive(family, std::move(roots), j.at("positive").get<std::vector<std::size_t>>());
    }
    return RootSystem::from_roots(family, std::move(roots));
  } catch (const Json::exception& e) {
    throw PreconditionError(std::string("malformed root system document: ") + e.what());
  }
}

/// `A:n | B:n | D:n | I2:m | custom:path.json`.
struct GroupSpec {
  Family family = Family::A;
  int parameter = 0;
  std::string custom_path;

  std::string str() const {
    return family == Family::Custom ? "custom:" + custom_path : to_string(family) + ":" + std::to_string(parameter);
  }
};

inline GroupSpec parse_group_spec(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon + 1 >= text.size()) {
    throw PreconditionError("group spec must look like A:n, B:n, D:n, I2:m or custom:path.json, got '" + text + "'");
  }
  const std::string head = text.substr(0, colon);
  const std::string tail = text.substr(colon + 1);
  GroupSpec spec;
  if (head == "custom") {
    spec.family = Family::Custom;
    spec.custom_path = tail;
    return spec;
  }
  if (head != "A" && head != "B" && head != "D" && head != "I2") {
    throw UnsupportedGroupError("unknown group family '" + head + "'");
  }
  spec.family = family_from_string(head);
  std::size_t used = 0;
  try {
    spec.parameter = std::stoi(tail, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tail.size()) throw PreconditionError("group rank must be an integer, got '" + tail + "'");
  return spec;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw PreconditionError("invalid JSON in '" + path + "': " + e.what());
  }
}

inline RootSystem build_root_system(const GroupSpec& spec) {
  if (spec.family == Family::Custom) return root_system_from_json(read_json_file(spec.custom_path));
  return standard_root_system(spec.family, spec.parameter);
}

}  // namespace reflekt

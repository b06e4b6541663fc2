#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "cred/env.hpp"

namespace cred::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(CRED_FIXTURE_DIR) / name;
}

/// Square grid from rows of terrain ids, start top-left, goal bottom-right.
inline TerrainGrid grid_from_rows(std::initializer_list<std::string> rows) {
  TerrainGrid g;
  g.size = static_cast<int>(rows.size());
  for (const auto& row : rows)
    for (char c : row) g.terrain.push_back(static_cast<std::uint8_t>(c - '0'));
  g.start = {0, 0};
  g.goal = {g.size - 1, g.size - 1};
  return g;
}

inline FeatureVector vec(std::initializer_list<double> v) {
  FeatureVector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace cred::testing

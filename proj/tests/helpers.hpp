#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "auxgrip/lattice.hpp"

namespace testing_helpers {

/// Straight beam along +x split into n equal elements. Node 0 is the root.
inline auxgrip::LatticeModel make_beam(double length, int n_el, double e_mpa, double width,
                                       double height_depth) {
  auxgrip::LatticeModel m;
  m.material.youngs_modulus_mpa = e_mpa;
  m.sections = {auxgrip::detail::rect_section(width, height_depth)};
  for (int i = 0; i <= n_el; ++i) m.nodes.push_back({length * i / n_el, 0.0});
  for (int i = 0; i < n_el; ++i) m.elements.push_back({i, i + 1, 0});
  m.interior_node_count = static_cast<int>(m.nodes.size());
  return m;
}

inline std::string test_out_dir(const std::string& name) {
  namespace fs = std::filesystem;
  fs::path p = fs::path(AUXGRIP_TEST_OUT) / name;
  fs::create_directories(p);
  return p.string();
}

inline std::string data_path(const std::string& rel) {
  return (std::filesystem::path(AUXGRIP_DATA_DIR) / rel).string();
}

}  // namespace testing_helpers

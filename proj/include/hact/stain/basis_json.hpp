#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "hact/stain/macenko.hpp"

namespace hact::stain {

/// {"stain_vectors": [[h_r, e_r], [h_g, e_g], [h_b, e_b]], "max_concentrations": [h, e]}
/// A flat row-major list of six numbers is also accepted for stain_vectors.
inline nlohmann::json to_json(const StainBasis& b) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({b.stain_vectors[0][i], b.stain_vectors[1][i]});
  return {{"stain_vectors", rows},
          {"max_concentrations", {b.max_concentrations[0], b.max_concentrations[1]}}};
}

inline StainBasis basis_from_json(const nlohmann::json& j) {
  StainBasis b;
  try {
    const auto& sv = j.at("stain_vectors");
    std::vector<double> flat;
    for (const auto& e : sv) {
      if (e.is_array())
        for (const auto& v : e) flat.push_back(v.get<double>());
      else
        flat.push_back(e.get<double>());
    }
    require(flat.size() == 6, Errc::parse_error, "stain_vectors must hold a 3x2 matrix");
    for (int i = 0; i < 3; ++i) {
      b.stain_vectors[0][i] = flat[2 * i];
      b.stain_vectors[1][i] = flat[2 * i + 1];
    }
    const auto& mc = j.at("max_concentrations");
    require(mc.size() == 2, Errc::parse_error, "max_concentrations must hold 2 values");
    b.max_concentrations = {mc[0].get<double>(), mc[1].get<double>()};
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, std::string("invalid stain basis: ") + e.what());
  }
  b.validate();
  return b;
}

inline StainBasis load_basis(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, path + ": " + e.what());
  }
  return basis_from_json(j);
}

}  // namespace hact::stain

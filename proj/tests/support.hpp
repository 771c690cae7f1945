#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "otb/dumps.hpp"
#include "otb/network.hpp"

namespace testing {

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t d, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(d);
  for (auto& x : v) x = u(rng);
  return v;
}

inline std::vector<std::vector<double>> random_points(std::mt19937_64& rng, std::size_t n,
                                                      std::size_t d, double lo = -1.0,
                                                      double hi = 1.0) {
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(random_vector(rng, d, lo, hi));
  return pts;
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("otb-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(OTB_FIXTURES_DIR) / name;
}

// Toy inputs in input order: four blue (class 0), then five green (class 1).
inline std::vector<otb::LabeledInput> toy_inputs() {
  return {{0, {0.5, 0.5}}, {0, {0.5, 0.6}}, {0, {0.4, 0.6}}, {0, {0.2, 0.7}}, {1, {0.7, 0.2}},
          {1, {0.6, 0.2}}, {1, {0.7, 0.1}}, {1, {0.8, 0.1}}, {1, {0.9, 0.2}}};
}

inline std::vector<std::vector<double>> toy_l2() {
  return {{0.3, 0.45}, {0.38, 0.51}, {0.4, 0.48}, {0.52, 0.48}, {0.02, 0.33},
          {0.04, 0.3}, {0, 0.27},    {0, 0.3},     {0, 0.39}};
}

inline otb::Dump toy_dump() {
  const auto model = otb::NetworkModel::load(fixture("toy_network.json"));
  const auto inputs = toy_inputs();
  const std::vector<otb::LayerKey> layers{-2, -1};
  return otb::make_network_dump(model, inputs, layers, "toy");
}

}  // namespace testing

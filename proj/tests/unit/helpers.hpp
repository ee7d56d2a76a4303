#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "hwfl/device_model.hpp"
#include "hwfl/local_training.hpp"
#include "hwfl/rng.hpp"

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() /
             ("hwfl_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

inline hwfl::Fleet random_fleet(std::size_t n, std::uint64_t seed) {
  hwfl::Rng rng(seed);
  hwfl::Fleet fleet;
  for (std::size_t i = 0; i < n; ++i) {
    hwfl::DeviceProfile p;
    p.client_id = static_cast<int>(i);
    p.cpu_cores = 1 + static_cast<int>(rng.uniform_index(16));
    p.ram_gb = 1.0 + 31.0 * rng.uniform();
    p.epoch_time_s = 0.2 + 5.0 * rng.uniform();
    p.latency_ms = 20.0 + 300.0 * rng.uniform();
    fleet.push_back(p);
  }
  return fleet;
}

inline hwfl::LocalDataset random_dataset(std::size_t n, std::size_t dim,
                                         std::size_t classes,
                                         std::uint64_t seed, int client = 0) {
  hwfl::Rng rng(seed);
  hwfl::LocalDataset d;
  d.client_id = client;
  d.input_dim = dim;
  d.n_classes = classes;
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.normal();
    d.push_back(x, static_cast<int>(rng.uniform_index(classes)));
  }
  return d;
}

inline hwfl::ModelParams random_params(const hwfl::ModelShape& shape,
                                       std::uint64_t seed, double scale = 0.5) {
  hwfl::Rng rng(seed);
  hwfl::ModelParams p{shape, std::vector<double>(shape.param_count())};
  for (auto& v : p.values) v = scale * rng.normal();
  return p;
}

}  // namespace testutil

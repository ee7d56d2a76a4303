#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hwfl/device_model.hpp"
#include "hwfl/local_training.hpp"

namespace hwfl {

enum class DataMode { kDirichlet, kSessionSplit, kCsv };

struct DataSpec {
  DataMode mode = DataMode::kSessionSplit;
  std::size_t n_clients = 5;
  std::size_t n_classes = 4;
  std::size_t input_dim = 40;
  std::size_t samples_per_client = 200;
  double dirichlet_alpha = 0.5;
  double class_separation = 2.5;  // norm of each class mean
  std::filesystem::path csv_path;

  void validate() const;

  bool operator==(const DataSpec&) const = default;
};

/// Mean-preserving log-normal latency noise, applied per round.
struct LatencyPerturbation {
  bool enabled = false;
  double sigma = 0.0;  // std of the log-space Gaussian

  bool operator==(const LatencyPerturbation&) const = default;
};

inline constexpr double kValidationFraction = 0.2;
inline constexpr double kDominantClassShare = 0.6;

/// Client datasets plus the central validation pool built from each
/// client's withheld share.
struct FederatedData {
  std::vector<LocalDataset> clients;
  LocalDataset validation;
  std::vector<std::string> label_names;  // index -> original label
  std::vector<std::string> warnings;
};

/// Class-conditional Gaussian clusters (unit noise, class means of norm
/// class_separation in random directions). Label mix per client:
///   kDirichlet:    proportions ~ Dirichlet(alpha * 1), labels sampled
///   kSessionSplit: client i holds 60% class (i mod C), rest spread evenly
/// floor(20%) of every client's samples go to the validation pool.
/// `client_ids` defaults to 0..n_clients-1.
FederatedData synthesize_noniid(const DataSpec& spec, std::uint64_t seed,
                                std::span<const int> client_ids = {});

/// Reads `client_id,label,f_0,...,f_{d-1}`. Labels are strings mapped to
/// indices in sorted order; clients are emitted in ascending id order.
/// Errors carry the 1-based file line number.
FederatedData load_feature_csv(const std::filesystem::path& path,
                               std::uint64_t seed,
                               double validation_fraction = kValidationFraction);

/// Writes datasets in the loader's schema. Labels are written through
/// `label_names` when given, else as their integer index.
void write_feature_csv(const std::filesystem::path& path,
                       std::span<const LocalDataset> datasets,
                       std::span<const std::string> label_names = {});

/// latency_ms * exp(g), g ~ Normal(-sigma^2/2, sigma^2), keyed by
/// (client_id, round_index, seed). Other fields are untouched.
DeviceProfile perturb_latency(const DeviceProfile& profile,
                              const LatencyPerturbation& perturbation,
                              int round_index, std::uint64_t seed);

/// Fleet table with header
/// `client_id,cpu_cores,ram_gb,epoch_time_s,latency_ms[,name]`.
Fleet load_fleet_csv(const std::filesystem::path& path);
void write_fleet_csv(const std::filesystem::path& path,
                     std::span<const DeviceProfile> fleet);

}  // namespace hwfl

#pragma once

#include <cstddef>
#include <map>
#include <span>

#include "hwfl/device_model.hpp"

namespace hwfl {

/// Per-round communication volume model.
///   kSymmetric:            2 * |S| * |w|   (download + upload per client)
///   kBroadcastPlusUploads: (|S| + 1) * |w| (one broadcast, |S| uploads)
enum class CommMode { kSymmetric, kBroadcastPlusUploads };

struct TimeModel {
  // Scales the single per-round latency charge; 1 = one round trip.
  double latency_multiplier = 1.0;

  bool operator==(const TimeModel&) const = default;
};

struct ClientWork {
  DeviceProfile profile;
  int epochs = 1;
};

/// epochs * epoch_time_s + multiplier * latency_ms / 1000
double simulate_client_time(const DeviceProfile& profile, int epochs,
                            const TimeModel& model = {});

/// Synchronous round: the slowest selected client.
double round_time(std::span<const ClientWork> work,
                  const TimeModel& model = {});

double comm_cost_round(std::size_t n_selected, double model_size_mb,
                       CommMode mode);

/// Cumulative communication. Rounds are grouped by their cost and each
/// group contributes count * cost, so T rounds of equal cost total exactly
/// T * cost with no summation drift.
class CommLedger {
 public:
  void add(double round_cost_mb);
  double total() const;
  std::size_t rounds() const { return rounds_; }

 private:
  std::map<double, std::size_t> by_cost_;
  std::size_t rounds_ = 0;
};

}  // namespace hwfl

#pragma once

#include <span>
#include <string>
#include <vector>

namespace hwfl {

/// Hardware description of one client: core count, memory, seconds per
/// local epoch and round-trip latency.
struct DeviceProfile {
  int client_id = 0;
  std::string name;
  int cpu_cores = 1;
  double ram_gb = 1.0;
  double epoch_time_s = 1.0;
  double latency_ms = 1.0;

  bool operator==(const DeviceProfile&) const = default;
};

using Fleet = std::vector<DeviceProfile>;

/// Fleet-relative profile. Every field lies in (0, 1] and the best client
/// in each dimension sits at exactly 1. `eff_hat` is min_j T_j / T_i, so it
/// grows as the device trains faster.
struct NormalizedProfile {
  int client_id = 0;
  double cpu_hat = 1.0;
  double ram_hat = 1.0;
  double eff_hat = 1.0;
  double lat_hat = 1.0;
};

struct ScoreWeights {
  double alpha = 0.4;  // CPU
  double beta = 0.2;   // RAM
  double gamma = 0.3;  // training efficiency
  double delta = 0.1;  // latency penalty

  /// Throws ValidationError for a negative weight or an all-zero set.
  void validate() const;

  bool operator==(const ScoreWeights&) const = default;
};

/// How the training-time term enters the score. kNormalized uses eff_hat;
/// kRawInverse uses 1 / epoch_time_s in raw seconds (unbounded, unit
/// dependent, kept for fidelity experiments).
enum class EfficiencyMode { kNormalized, kRawInverse };

struct HardwareScore {
  int client_id = 0;
  double score = 0.0;
};

/// Checks positivity of every numeric field and id uniqueness. Errors name
/// the offending client and field.
void validate_fleet(std::span<const DeviceProfile> fleet);

/// Max-normalizes cpu, ram and latency; min-over-self for epoch time.
/// Output order matches input order.
std::vector<NormalizedProfile> normalize_fleet(
    std::span<const DeviceProfile> fleet);

/// alpha*cpu_hat + beta*ram_hat + gamma*eff_hat - delta*lat_hat
HardwareScore hardware_score(const NormalizedProfile& norm,
                             const ScoreWeights& weights);

std::vector<HardwareScore> score_fleet(
    std::span<const DeviceProfile> fleet, const ScoreWeights& weights,
    EfficiencyMode mode = EfficiencyMode::kNormalized);

/// cpu_cores * epoch_time_s * epochs. A reported proxy, never optimized.
double energy_proxy(const DeviceProfile& profile, int epochs);

/// Finds a profile by id; throws ValidationError when absent.
const DeviceProfile& find_profile(std::span<const DeviceProfile> fleet,
                                  int client_id);

/// The five representative edge devices (laptop, tablet, two phones and a
/// legacy phone). Their per-epoch training time is not part of the source
/// table, so it is set to `epoch_time_scale / cpu_cores` seconds.
Fleet reference_fleet(double epoch_time_scale = 8.0);

}  // namespace hwfl

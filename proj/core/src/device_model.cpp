#include "hwfl/device_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "hwfl/error.hpp"

namespace hwfl {
namespace {

void require_positive(double value, int client_id, const char* field) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << "client " << client_id << ": field '" << field
        << "' must be positive and finite (got " << value << ")";
    throw ValidationError(msg.str());
  }
}

}  // namespace

void ScoreWeights::validate() const {
  for (double w : {alpha, beta, gamma, delta}) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ValidationError("score weights must be finite and non-negative");
  }
  if (!(alpha + beta + gamma + delta > 0.0))
    throw ValidationError("score weights must not all be zero");
}

void validate_fleet(std::span<const DeviceProfile> fleet) {
  if (fleet.empty()) throw ValidationError("empty fleet");
  std::set<int> seen;
  for (const auto& p : fleet) {
    if (!seen.insert(p.client_id).second) {
      throw ValidationError("duplicate client_id " +
                            std::to_string(p.client_id) + " in fleet");
    }
    require_positive(static_cast<double>(p.cpu_cores), p.client_id,
                     "cpu_cores");
    require_positive(p.ram_gb, p.client_id, "ram_gb");
    require_positive(p.epoch_time_s, p.client_id, "epoch_time_s");
    require_positive(p.latency_ms, p.client_id, "latency_ms");
  }
}

std::vector<NormalizedProfile> normalize_fleet(
    std::span<const DeviceProfile> fleet) {
  validate_fleet(fleet);
  double max_cpu = 0.0, max_ram = 0.0, max_lat = 0.0;
  double min_time = fleet.front().epoch_time_s;
  for (const auto& p : fleet) {
    max_cpu = std::max(max_cpu, static_cast<double>(p.cpu_cores));
    max_ram = std::max(max_ram, p.ram_gb);
    max_lat = std::max(max_lat, p.latency_ms);
    min_time = std::min(min_time, p.epoch_time_s);
  }
  std::vector<NormalizedProfile> out;
  out.reserve(fleet.size());
  for (const auto& p : fleet) {
    out.push_back({p.client_id, static_cast<double>(p.cpu_cores) / max_cpu,
                   p.ram_gb / max_ram, min_time / p.epoch_time_s,
                   p.latency_ms / max_lat});
  }
  return out;
}

HardwareScore hardware_score(const NormalizedProfile& norm,
                             const ScoreWeights& weights) {
  return {norm.client_id, weights.alpha * norm.cpu_hat +
                              weights.beta * norm.ram_hat +
                              weights.gamma * norm.eff_hat -
                              weights.delta * norm.lat_hat};
}

std::vector<HardwareScore> score_fleet(std::span<const DeviceProfile> fleet,
                                       const ScoreWeights& weights,
                                       EfficiencyMode mode) {
  weights.validate();
  auto norms = normalize_fleet(fleet);
  std::vector<HardwareScore> scores;
  scores.reserve(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (mode == EfficiencyMode::kRawInverse)
      norms[i].eff_hat = 1.0 / fleet[i].epoch_time_s;
    scores.push_back(hardware_score(norms[i], weights));
  }
  return scores;
}

double energy_proxy(const DeviceProfile& profile, int epochs) {
  if (epochs < 1) throw ValidationError("energy_proxy: epochs must be >= 1");
  return static_cast<double>(profile.cpu_cores) * profile.epoch_time_s *
         static_cast<double>(epochs);
}

const DeviceProfile& find_profile(std::span<const DeviceProfile> fleet,
                                  int client_id) {
  auto it = std::find_if(fleet.begin(), fleet.end(), [&](const auto& p) {
    return p.client_id == client_id;
  });
  if (it == fleet.end())
    throw ValidationError("client " + std::to_string(client_id) +
                          " not in fleet");
  return *it;
}

Fleet reference_fleet(double epoch_time_scale) {
  struct Row {
    const char* name;
    int cpu;
    double ram;
    double latency;
  };
  static constexpr Row kRows[] = {
      {"Laptop (high-end)", 16, 32.0, 170.0},
      {"Tablet", 4, 32.0, 183.0},
      {"Phone (low RAM)", 4, 16.0, 200.0},
      {"Legacy phone", 2, 32.0, 261.0},
      {"Phone (low latency)", 4, 32.0, 132.0},
  };
  Fleet fleet;
  int id = 0;
  for (const auto& r : kRows) {
    fleet.push_back({id++, r.name, r.cpu, r.ram,
                     epoch_time_scale / static_cast<double>(r.cpu),
                     r.latency});
  }
  return fleet;
}

}  // namespace hwfl

#include "hwfl/accounting.hpp"

#include <algorithm>

#include "hwfl/error.hpp"

namespace hwfl {

double simulate_client_time(const DeviceProfile& profile, int epochs,
                            const TimeModel& model) {
  if (epochs < 1)
    throw ValidationError("simulate_client_time: epochs must be >= 1");
  return static_cast<double>(epochs) * profile.epoch_time_s +
         model.latency_multiplier * profile.latency_ms / 1000.0;
}

double round_time(std::span<const ClientWork> work, const TimeModel& model) {
  if (work.empty()) throw ValidationError("round_time: empty selection");
  double makespan = 0.0;
  for (const auto& w : work)
    makespan = std::max(makespan,
                        simulate_client_time(w.profile, w.epochs, model));
  return makespan;
}

double comm_cost_round(std::size_t n_selected, double model_size_mb,
                       CommMode mode) {
  if (n_selected < 1)
    throw ValidationError("comm_cost_round: at least one client required");
  if (!(model_size_mb > 0.0))
    throw ValidationError("comm_cost_round: model size must be positive");
  const auto n = static_cast<double>(n_selected);
  switch (mode) {
    case CommMode::kSymmetric:
      return 2.0 * n * model_size_mb;
    case CommMode::kBroadcastPlusUploads:
      return (n + 1.0) * model_size_mb;
  }
  throw ValidationError("comm_cost_round: unknown mode");
}

void CommLedger::add(double round_cost_mb) {
  if (!(round_cost_mb >= 0.0))
    throw ValidationError("comm ledger: negative round cost");
  ++by_cost_[round_cost_mb];
  ++rounds_;
}

double CommLedger::total() const {
  double sum = 0.0;
  for (const auto& [cost, count] : by_cost_)
    sum += static_cast<double>(count) * cost;
  return sum;
}

}  // namespace hwfl

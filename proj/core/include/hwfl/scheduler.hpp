#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "hwfl/accounting.hpp"
#include "hwfl/device_model.hpp"
#include "hwfl/rng.hpp"

namespace hwfl {

/// One round's participants and their local epoch budgets.
struct RoundPlan {
  int round_index = 0;
  std::vector<int> selected;  // ascending client ids
  std::map<int, int> epochs;  // defined for exactly the selected clients

  /// Throws ValidationError unless selected is non-empty, strictly
  /// ascending, and epochs covers exactly the selected ids with values >= 1.
  void validate() const;

  bool operator==(const RoundPlan&) const = default;
};

/// The k highest scores, ties broken by ascending client id; the result is
/// returned sorted by client id.
std::vector<int> select_top_k(std::span<const HardwareScore> scores,
                              std::size_t k);

/// Uniform sample of k ids without replacement, sorted ascending.
std::vector<int> select_random_k(std::span<const int> client_ids,
                                 std::size_t k, Rng& rng);

std::vector<int> select_all(std::span<const int> client_ids);

/// Round half to even, as in IEEE-754 roundTiesToEven.
double round_half_even(double x);

/// max(1, round_half_even(e_base * score / s_max)). s_max <= 0 is a
/// ConfigError: the ratio would flip sign.
int adaptive_epochs(double score, double s_max, int e_base);

/// Participation counts over the whole fleet, zero-count clients included.
/// Written by the single federation driver only.
class FairnessTracker {
 public:
  FairnessTracker() = default;
  explicit FairnessTracker(std::span<const int> client_ids);

  static FairnessTracker from_counts(std::map<int, std::int64_t> counts);

  void record(std::span<const int> selected);

  const std::map<int, std::int64_t>& counts() const { return counts_; }
  std::size_t n_clients() const { return counts_.size(); }

 private:
  std::map<int, std::int64_t> counts_;
};

/// Jain's index (sum f)^2 / (N sum f^2), in [1/N, 1].
double jain_index(const FairnessTracker& tracker);

struct ObjectiveReport {
  double makespan_s = 0.0;
  double comm_load = 0.0;  // model-size units
  double lambda = 0.0;
  double objective = 0.0;  // makespan_s + lambda * comm_load
};

ObjectiveReport objective_of_plan(const RoundPlan& plan,
                                  std::span<const DeviceProfile> fleet,
                                  double lambda, CommMode mode,
                                  const TimeModel& time_model = {});

inline constexpr std::size_t kOracleFleetLimit = 12;

struct ScheduleSearch {
  std::size_t k_min = 1;
  std::size_t k_max = 1;
  std::vector<int> epoch_grid;
  double lambda = 0.1;
  CommMode comm_mode = CommMode::kSymmetric;
  TimeModel time_model;
};

struct ScheduleOptimum {
  RoundPlan plan;
  ObjectiveReport report;
  std::uint64_t plans_evaluated = 0;
};

/// Exhaustive minimizer of makespan + lambda * comm over every subset with
/// size in [k_min, k_max] and every epoch assignment drawn from the grid.
/// Ties go to the smaller subset, then lexicographically smaller ids, then
/// the lexicographically smaller epoch vector. Fleets above
/// kOracleFleetLimit are rejected.
ScheduleOptimum brute_force_schedule(std::span<const DeviceProfile> fleet,
                                     const ScheduleSearch& search);

}  // namespace hwfl

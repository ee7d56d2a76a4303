#include "hwfl/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hwfl/error.hpp"

namespace hwfl {
namespace {

void check_k(std::size_t k, std::size_t n) {
  if (k < 1 || k > n) {
    std::ostringstream msg;
    msg << "k = " << k << " is out of range for a fleet of " << n
        << " clients (need 1 <= k <= " << n << ")";
    throw ValidationError(msg.str());
  }
}

}  // namespace

void RoundPlan::validate() const {
  if (selected.empty()) throw ValidationError("round plan: empty selection");
  if (!std::is_sorted(selected.begin(), selected.end()) ||
      std::adjacent_find(selected.begin(), selected.end()) != selected.end())
    throw ValidationError("round plan: selection must be strictly ascending");
  if (epochs.size() != selected.size())
    throw ValidationError("round plan: epochs must cover exactly the selection");
  for (int id : selected) {
    auto it = epochs.find(id);
    if (it == epochs.end())
      throw ValidationError("round plan: no epoch budget for client " +
                            std::to_string(id));
    if (it->second < 1)
      throw ValidationError("round plan: epoch budget below 1 for client " +
                            std::to_string(id));
  }
}

std::vector<int> select_top_k(std::span<const HardwareScore> scores,
                              std::size_t k) {
  check_k(k, scores.size());
  std::vector<HardwareScore> ranked(scores.begin(), scores.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.client_id < b.client_id;
  });
  std::vector<int> ids;
  ids.reserve(k);
  for (std::size_t i = 0; i < k; ++i) ids.push_back(ranked[i].client_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<int> select_random_k(std::span<const int> client_ids,
                                 std::size_t k, Rng& rng) {
  check_k(k, client_ids.size());
  std::vector<int> pool(client_ids.begin(), client_ids.end());
  // Sorting first makes the sample independent of the caller's id order.
  std::sort(pool.begin(), pool.end());
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<int> select_all(std::span<const int> client_ids) {
  std::vector<int> ids(client_ids.begin(), client_ids.end());
  std::sort(ids.begin(), ids.end());
  return ids;
}

double round_half_even(double x) {
  const double fl = std::floor(x);
  const double diff = x - fl;
  if (diff < 0.5) return fl;
  if (diff > 0.5) return fl + 1.0;
  return std::fmod(fl, 2.0) == 0.0 ? fl : fl + 1.0;
}

int adaptive_epochs(double score, double s_max, int e_base) {
  if (!(s_max > 0.0)) {
    std::ostringstream msg;
    msg << "adaptive epochs need a positive maximum score (got s_max = "
        << s_max << "); the latency weight dominates every client";
    throw ConfigError(msg.str());
  }
  if (e_base < 1) throw ValidationError("adaptive epochs: e_base must be >= 1");
  const double e = round_half_even(static_cast<double>(e_base) * score / s_max);
  return std::max(1, static_cast<int>(e));
}

FairnessTracker::FairnessTracker(std::span<const int> client_ids) {
  if (client_ids.empty())
    throw ValidationError("fairness tracker needs at least one client");
  for (int id : client_ids) counts_.emplace(id, 0);
  if (counts_.size() != client_ids.size())
    throw ValidationError("fairness tracker: duplicate client ids");
}

FairnessTracker FairnessTracker::from_counts(std::map<int, std::int64_t> counts) {
  if (counts.empty())
    throw ValidationError("fairness tracker needs at least one client");
  for (const auto& [id, c] : counts) {
    if (c < 0)
      throw ValidationError("fairness tracker: negative count for client " +
                            std::to_string(id));
  }
  FairnessTracker t;
  t.counts_ = std::move(counts);
  return t;
}

void FairnessTracker::record(std::span<const int> selected) {
  for (int id : selected) {
    auto it = counts_.find(id);
    if (it == counts_.end())
      throw ValidationError("fairness tracker: unknown client " +
                            std::to_string(id));
    ++it->second;
  }
}

double jain_index(const FairnessTracker& tracker) {
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& [id, c] : tracker.counts()) {
    const auto f = static_cast<double>(c);
    sum += f;
    sum_sq += f * f;
  }
  if (sum_sq == 0.0) throw ValidationError("no participation recorded");
  return sum * sum / (static_cast<double>(tracker.n_clients()) * sum_sq);
}

ObjectiveReport objective_of_plan(const RoundPlan& plan,
                                  std::span<const DeviceProfile> fleet,
                                  double lambda, CommMode mode,
                                  const TimeModel& time_model) {
  plan.validate();
  std::vector<ClientWork> work;
  work.reserve(plan.selected.size());
  for (int id : plan.selected)
    work.push_back({find_profile(fleet, id), plan.epochs.at(id)});
  ObjectiveReport r;
  r.makespan_s = round_time(work, time_model);
  r.comm_load = comm_cost_round(plan.selected.size(), 1.0, mode);
  r.lambda = lambda;
  r.objective = r.makespan_s + lambda * r.comm_load;
  return r;
}

ScheduleOptimum brute_force_schedule(std::span<const DeviceProfile> fleet,
                                     const ScheduleSearch& search) {
  validate_fleet(fleet);
  const std::size_t n = fleet.size();
  if (n > kOracleFleetLimit) {
    throw ValidationError("oracle limit: brute-force scheduling supports at "
                          "most " + std::to_string(kOracleFleetLimit) +
                          " clients, fleet has " + std::to_string(n));
  }
  if (search.epoch_grid.empty())
    throw ValidationError("brute_force_schedule: empty epoch grid");
  check_k(search.k_min, n);
  check_k(search.k_max, n);
  if (search.k_min > search.k_max)
    throw ValidationError("brute_force_schedule: k_min > k_max");
  if (!(search.lambda >= 0.0))
    throw ValidationError("brute_force_schedule: lambda must be >= 0");

  std::vector<int> grid = search.epoch_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.front() < 1)
    throw ValidationError("brute_force_schedule: epoch grid values must be >= 1");

  std::vector<DeviceProfile> sorted(fleet.begin(), fleet.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.client_id < b.client_id;
  });

  ScheduleOptimum best;
  bool found = false;

  // Sizes ascending, then subsets in lexicographic id order, then epoch
  // vectors in lexicographic order; only strict improvements replace the
  // incumbent, which realizes the tie-break order.
  for (std::size_t k = search.k_min; k <= search.k_max; ++k) {
    const double comm = comm_cost_round(k, 1.0, search.comm_mode);
    std::vector<std::size_t> combo(k);
    std::iota(combo.begin(), combo.end(), 0);
    for (;;) {
      std::vector<std::size_t> digit(k, 0);
      for (;;) {
        double makespan = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          makespan = std::max(makespan,
                              simulate_client_time(sorted[combo[i]],
                                                   grid[digit[i]],
                                                   search.time_model));
        }
        const double objective = makespan + search.lambda * comm;
        ++best.plans_evaluated;
        if (!found || objective < best.report.objective) {
          found = true;
          best.plan = RoundPlan{};
          for (std::size_t i = 0; i < k; ++i) {
            const int id = sorted[combo[i]].client_id;
            best.plan.selected.push_back(id);
            best.plan.epochs[id] = grid[digit[i]];
          }
          best.report = {makespan, comm, search.lambda, objective};
        }
        // Odometer over epoch digits, last position fastest.
        std::size_t pos = k;
        while (pos > 0 && ++digit[pos - 1] == grid.size()) {
          digit[pos - 1] = 0;
          --pos;
        }
        if (pos == 0) break;
      }
      // Next k-combination of {0..n-1} in lexicographic order.
      std::size_t i = k;
      while (i > 0 && combo[i - 1] == n - k + (i - 1)) --i;
      if (i == 0) break;
      ++combo[i - 1];
      for (std::size_t j = i; j < k; ++j) combo[j] = combo[j - 1] + 1;
    }
  }
  return best;
}

}  // namespace hwfl

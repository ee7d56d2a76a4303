#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hwfl/accounting.hpp"
#include "hwfl/data_synth.hpp"
#include "hwfl/device_model.hpp"
#include "hwfl/local_training.hpp"
#include "hwfl/scheduler.hpp"
#include "hwfl/stats.hpp"

namespace hwfl {

enum class Method {
  kHwfl,          // top-k by score, adaptive epochs, score-weighted mean
  kFedAvg,        // all clients, e_base epochs, sample-weighted mean
  kFedProx,       // FedAvg with a proximal local objective
  kRandomTopK,    // k uniformly random clients, e_base epochs
  kTopKOnly,      // top-k by score, e_base epochs, sample-weighted mean
  kAdaptiveOnly,  // all clients, adaptive epochs, sample-weighted mean
};

std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);

enum class Selection { kTopK, kRandomK, kAll };

struct MethodTraits {
  Selection selection = Selection::kAll;
  bool adaptive_epochs = false;
  bool score_weighted = false;
  bool proximal = false;
};

MethodTraits method_traits(Method m);

/// Everything needed to run one method over a list of seeds.
struct ExperimentConfig {
  Method method = Method::kHwfl;
  int n_rounds = 50;
  std::size_t k = 3;
  int e_base = 4;
  ScoreWeights weights;
  EfficiencyMode efficiency = EfficiencyMode::kNormalized;
  double lambda = 0.1;   // reported objective only
  double prox_mu = 0.01;
  CommMode comm_mode = CommMode::kSymmetric;
  double model_size_mb = 0.04762;
  TimeModel time_model;
  LatencyPerturbation latency;
  Fleet fleet;
  DataSpec data;  // n_clients is taken from the fleet
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  std::size_t hidden_dim = 0;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t workers = 1;  // parallel local trainers per round

  /// Full validation before any work. Throws ValidationError for malformed
  /// fields and ConfigError for runnable-looking settings that cannot run
  /// (e.g. non-positive maximum score with adaptive epochs).
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

struct ClientUpdate {
  ModelParams params;
  std::size_t n_samples = 0;
  double score = 0.0;
};

/// Sum_i (n_i S_i / sum_j n_j S_j) w_i. Any S_i <= 0 is a ConfigError.
ModelParams aggregate_hwfl(std::span<const ClientUpdate> updates);

/// Sum_i (n_i / sum_j n_j) w_i. Scores are ignored.
ModelParams aggregate_fedavg(std::span<const ClientUpdate> updates);

struct RoundMetrics {
  int round_index = 0;
  std::vector<int> selected;
  std::vector<int> epochs;  // aligned with `selected`
  double sim_time_s = 0.0;
  double comm_mb = 0.0;
  double val_accuracy = 0.0;
  double val_macro_f1 = 0.0;
  double val_balanced_acc = 0.0;
  double jain = 0.0;
  double energy_proxy_total = 0.0;
  double objective = 0.0;  // makespan + lambda * comm in model units
};

struct FederationState {
  std::uint64_t trial_seed = 0;
  ModelParams global;
  FairnessTracker fairness;
  FederatedData data;
  std::map<int, std::size_t> dataset_of;  // client id -> index in data.clients
};

/// Builds datasets (synthetic or CSV, per config.data) and the initial model
/// for one trial.
FederationState make_state(const ExperimentConfig& config,
                           std::uint64_t trial_seed);

/// Same, with caller-supplied data. Client ids must cover the fleet.
FederationState make_state(const ExperimentConfig& config,
                           std::uint64_t trial_seed, FederatedData data);

/// The fleet as seen in one round: latency perturbed when enabled.
Fleet fleet_for_round(const ExperimentConfig& config, int round_index,
                      std::uint64_t trial_seed);

struct PlannedRound {
  RoundPlan plan;
  std::map<int, double> scores;  // every client in the round fleet
  double s_max = 0.0;
};

/// Selection and epoch budgets for one round, per the method's traits.
PlannedRound plan_round(const ExperimentConfig& config,
                        std::span<const DeviceProfile> round_fleet,
                        int round_index, std::uint64_t trial_seed);

/// Select, assign epochs, train, aggregate, account. Replaces state.global.
RoundMetrics run_round(FederationState& state, const ExperimentConfig& config,
                       int round_index);

struct TrialResult {
  std::uint64_t seed = 0;
  std::vector<RoundMetrics> rounds;
  TrialFinal final;
  std::vector<std::string> warnings;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
  TrialSummary summary;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace hwfl

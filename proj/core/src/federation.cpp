#include "hwfl/federation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "hwfl/error.hpp"
#include "hwfl/rng.hpp"

namespace hwfl {
namespace {

constexpr std::pair<Method, std::string_view> kMethodNames[] = {
    {Method::kHwfl, "hwfl"},
    {Method::kFedAvg, "fedavg"},
    {Method::kFedProx, "fedprox"},
    {Method::kRandomTopK, "random_topk"},
    {Method::kTopKOnly, "topk_only"},
    {Method::kAdaptiveOnly, "adaptive_only"},
};

void check_updates(std::span<const ClientUpdate> updates) {
  if (updates.empty()) throw ValidationError("aggregate: no client updates");
  const auto& shape = updates.front().params.shape;
  for (const auto& u : updates) {
    if (u.params.shape != shape ||
        u.params.values.size() != updates.front().params.values.size())
      throw ValidationError("aggregate: client updates differ in shape");
  }
}

ModelParams weighted_mean(std::span<const ClientUpdate> updates,
                          std::span<const double> raw_weights) {
  double total = 0.0;
  for (double w : raw_weights) total += w;
  if (!(total > 0.0))
    throw ValidationError("aggregate: weights sum to zero");
  ModelParams out{updates.front().params.shape,
                  std::vector<double>(updates.front().params.values.size(), 0.0)};
  for (std::size_t i = 0; i < updates.size(); ++i) {
    const double w = raw_weights[i] / total;
    const auto& v = updates[i].params.values;
    for (std::size_t j = 0; j < v.size(); ++j) out.values[j] += w * v[j];
  }
  return out;
}

std::vector<int> fleet_ids(std::span<const DeviceProfile> fleet) {
  std::vector<int> ids;
  ids.reserve(fleet.size());
  for (const auto& p : fleet) ids.push_back(p.client_id);
  return ids;
}

bool uses_scores(const MethodTraits& t) {
  return t.selection == Selection::kTopK || t.adaptive_epochs ||
         t.score_weighted;
}

}  // namespace

std::string_view method_name(Method m) {
  for (const auto& [method, name] : kMethodNames)
    if (method == m) return name;
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (const auto& [method, n] : kMethodNames)
    if (n == name) return method;
  return std::nullopt;
}

MethodTraits method_traits(Method m) {
  switch (m) {
    case Method::kHwfl:
      return {Selection::kTopK, true, true, false};
    case Method::kFedAvg:
      return {Selection::kAll, false, false, false};
    case Method::kFedProx:
      return {Selection::kAll, false, false, true};
    case Method::kRandomTopK:
      return {Selection::kRandomK, false, false, false};
    case Method::kTopKOnly:
      return {Selection::kTopK, false, false, false};
    case Method::kAdaptiveOnly:
      return {Selection::kAll, true, false, false};
  }
  throw ValidationError("unknown method");
}

void ExperimentConfig::validate() const {
  validate_fleet(fleet);
  if (n_rounds < 1) throw ValidationError("n_rounds must be >= 1");
  if (k < 1 || k > fleet.size()) {
    std::ostringstream msg;
    msg << "k = " << k << " is out of range for a fleet of " << fleet.size()
        << " clients";
    throw ValidationError(msg.str());
  }
  if (e_base < 1) throw ValidationError("e_base must be >= 1");
  weights.validate();
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
  if (!(prox_mu >= 0.0)) throw ValidationError("prox_mu must be >= 0");
  if (!(model_size_mb > 0.0))
    throw ValidationError("model_size_mb must be > 0");
  if (!(time_model.latency_multiplier >= 0.0))
    throw ValidationError("latency_multiplier must be >= 0");
  if (!(latency.sigma >= 0.0))
    throw ValidationError("latency sigma must be >= 0");
  if (!(learning_rate >= 0.0)) throw ValidationError("learning_rate must be >= 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (seeds.empty()) throw ValidationError("seeds must not be empty");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  DataSpec spec = data;
  spec.n_clients = fleet.size();
  spec.validate();

  const auto traits = method_traits(method);
  if (uses_scores(traits) && !latency.enabled) {
    const auto scores = score_fleet(fleet, weights, efficiency);
    double s_max = scores.front().score;
    for (const auto& s : scores) s_max = std::max(s_max, s.score);
    if (traits.adaptive_epochs && !(s_max > 0.0)) {
      throw ConfigError("every hardware score is non-positive (max " +
                        std::to_string(s_max) +
                        "); adaptive epochs are undefined for these weights");
    }
    if (traits.score_weighted) {
      for (int id : select_top_k(scores, k)) {
        for (const auto& s : scores) {
          if (s.client_id == id && !(s.score > 0.0))
            throw ConfigError("client " + std::to_string(id) +
                              " would be selected with non-positive score; "
                              "score-weighted aggregation needs S_i > 0");
        }
      }
    }
  }
}

ModelParams aggregate_hwfl(std::span<const ClientUpdate> updates) {
  check_updates(updates);
  std::vector<double> w;
  w.reserve(updates.size());
  for (const auto& u : updates) {
    if (!(u.score > 0.0)) {
      std::ostringstream msg;
      msg << "score-weighted aggregation needs positive scores (got "
          << u.score << ")";
      throw ConfigError(msg.str());
    }
    w.push_back(static_cast<double>(u.n_samples) * u.score);
  }
  return weighted_mean(updates, w);
}

ModelParams aggregate_fedavg(std::span<const ClientUpdate> updates) {
  check_updates(updates);
  std::vector<double> w;
  w.reserve(updates.size());
  for (const auto& u : updates) w.push_back(static_cast<double>(u.n_samples));
  return weighted_mean(updates, w);
}

FederationState make_state(const ExperimentConfig& config,
                           std::uint64_t trial_seed) {
  DataSpec spec = config.data;
  spec.n_clients = config.fleet.size();
  FederatedData data;
  if (spec.mode == DataMode::kCsv) {
    data = load_feature_csv(spec.csv_path, trial_seed);
  } else {
    data = synthesize_noniid(spec, trial_seed, fleet_ids(config.fleet));
  }
  return make_state(config, trial_seed, std::move(data));
}

FederationState make_state(const ExperimentConfig& config,
                           std::uint64_t trial_seed, FederatedData data) {
  FederationState state;
  state.trial_seed = trial_seed;
  for (std::size_t i = 0; i < data.clients.size(); ++i)
    state.dataset_of[data.clients[i].client_id] = i;
  for (const auto& p : config.fleet) {
    auto it = state.dataset_of.find(p.client_id);
    if (it == state.dataset_of.end())
      throw ConfigError("no dataset for fleet client " +
                        std::to_string(p.client_id));
    data.clients[it->second].validate();
  }
  if (data.validation.size() == 0) {
    data.warnings.push_back("evaluating on pooled client training data "
                            "because the validation pool is empty");
    for (const auto& c : data.clients)
      for (std::size_t i = 0; i < c.size(); ++i)
        data.validation.push_back(c.row(i), c.labels[i]);
  }
  const auto& first = data.clients.front();
  const ModelShape shape{first.input_dim, config.hidden_dim, first.n_classes};
  state.global = init_model(shape, derive_seed(trial_seed, Stream::kInit));
  state.fairness = FairnessTracker(fleet_ids(config.fleet));
  state.data = std::move(data);
  return state;
}

Fleet fleet_for_round(const ExperimentConfig& config, int round_index,
                      std::uint64_t trial_seed) {
  if (!config.latency.enabled) return config.fleet;
  Fleet out;
  out.reserve(config.fleet.size());
  const auto seed = derive_seed(trial_seed, Stream::kLatency);
  for (const auto& p : config.fleet)
    out.push_back(perturb_latency(p, config.latency, round_index, seed));
  return out;
}

PlannedRound plan_round(const ExperimentConfig& config,
                        std::span<const DeviceProfile> round_fleet,
                        int round_index, std::uint64_t trial_seed) {
  const auto traits = method_traits(config.method);
  PlannedRound out;
  out.plan.round_index = round_index;

  const auto scores = score_fleet(round_fleet, config.weights, config.efficiency);
  out.s_max = scores.front().score;
  for (const auto& s : scores) {
    out.scores[s.client_id] = s.score;
    out.s_max = std::max(out.s_max, s.score);
  }

  const auto ids = fleet_ids(round_fleet);
  switch (traits.selection) {
    case Selection::kTopK:
      out.plan.selected = select_top_k(scores, config.k);
      break;
    case Selection::kRandomK: {
      Rng rng(derive_seed(trial_seed, Stream::kSelection,
                          static_cast<std::uint64_t>(round_index)));
      out.plan.selected = select_random_k(ids, config.k, rng);
      break;
    }
    case Selection::kAll:
      out.plan.selected = select_all(ids);
      break;
  }
  for (int id : out.plan.selected) {
    out.plan.epochs[id] =
        traits.adaptive_epochs
            ? adaptive_epochs(out.scores.at(id), out.s_max, config.e_base)
            : config.e_base;
  }
  return out;
}

RoundMetrics run_round(FederationState& state, const ExperimentConfig& config,
                       int round_index) {
  const auto traits = method_traits(config.method);
  const Fleet fleet = fleet_for_round(config, round_index, state.trial_seed);
  const auto planned = plan_round(config, fleet, round_index, state.trial_seed);
  const auto& plan = planned.plan;

  auto train_one = [&](int id) {
    TrainSpec spec;
    spec.epochs = plan.epochs.at(id);
    spec.learning_rate = config.learning_rate;
    spec.batch_size = config.batch_size;
    spec.prox_mu = traits.proximal ? config.prox_mu : 0.0;
    spec.seed = derive_seed(state.trial_seed, Stream::kShuffle,
                            static_cast<std::uint64_t>(id),
                            static_cast<std::uint64_t>(round_index));
    const auto& ds = state.data.clients[state.dataset_of.at(id)];
    return local_train(state.global, ds, spec);
  };

  // Results are stored by selection position, so the join order (and the
  // aggregate) does not depend on which worker finishes first.
  std::vector<ClientUpdate> updates(plan.selected.size());
  auto store = [&](std::size_t pos, TrainResult r) {
    const int id = plan.selected[pos];
    updates[pos] = {std::move(r.params), r.n_samples, planned.scores.at(id)};
  };
  if (config.workers <= 1 || plan.selected.size() == 1) {
    for (std::size_t i = 0; i < plan.selected.size(); ++i)
      store(i, train_one(plan.selected[i]));
  } else {
    for (std::size_t begin = 0; begin < plan.selected.size();
         begin += config.workers) {
      const std::size_t end =
          std::min(plan.selected.size(), begin + config.workers);
      std::vector<std::future<TrainResult>> jobs;
      for (std::size_t i = begin; i < end; ++i)
        jobs.push_back(std::async(std::launch::async, train_one,
                                  plan.selected[i]));
      for (std::size_t i = begin; i < end; ++i) store(i, jobs[i - begin].get());
    }
  }

  state.global = traits.score_weighted ? aggregate_hwfl(updates)
                                       : aggregate_fedavg(updates);

  RoundMetrics m;
  m.round_index = round_index;
  m.selected = plan.selected;
  std::vector<ClientWork> work;
  for (int id : plan.selected) {
    const int e = plan.epochs.at(id);
    const auto& profile = find_profile(fleet, id);
    m.epochs.push_back(e);
    work.push_back({profile, e});
    m.energy_proxy_total += energy_proxy(profile, e);
  }
  m.sim_time_s = round_time(work, config.time_model);
  m.comm_mb = comm_cost_round(plan.selected.size(), config.model_size_mb,
                              config.comm_mode);
  m.objective = objective_of_plan(plan, fleet, config.lambda,
                                  config.comm_mode, config.time_model)
                    .objective;

  const auto eval = evaluate(state.global, state.data.validation);
  m.val_accuracy = eval.accuracy;
  m.val_macro_f1 = eval.macro_f1;
  m.val_balanced_acc = eval.balanced_accuracy;

  state.fairness.record(plan.selected);
  m.jain = jain_index(state.fairness);
  return m;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  std::vector<TrialFinal> finals;
  for (std::uint64_t seed : config.seeds) {
    auto state = make_state(config, seed);
    TrialResult trial;
    trial.seed = seed;
    trial.warnings = state.data.warnings;
    trial.rounds.reserve(static_cast<std::size_t>(config.n_rounds));
    for (int t = 1; t <= config.n_rounds; ++t)
      trial.rounds.push_back(run_round(state, config, t));

    const auto& last = trial.rounds.back();
    TrialFinal f;
    f.seed = seed;
    f.accuracy = last.val_accuracy;
    f.macro_f1 = last.val_macro_f1;
    f.balanced_accuracy = last.val_balanced_acc;
    f.jain = last.jain;
    CommLedger comm;
    for (const auto& r : trial.rounds) {
      f.total_time_s += r.sim_time_s;
      comm.add(r.comm_mb);
      f.total_energy += r.energy_proxy_total;
    }
    f.total_comm_mb = comm.total();
    f.mean_round_time_s = f.total_time_s / static_cast<double>(config.n_rounds);
    trial.final = f;
    finals.push_back(f);
    result.trials.push_back(std::move(trial));
  }
  result.summary = summarize_trials(finals);
  return result;
}

}  // namespace hwfl

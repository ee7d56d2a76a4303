#include "config_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "hwfl/data_synth.hpp"
#include "hwfl/error.hpp"

namespace hwfl::cli {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config error at " + (path.empty() ? "/" : path) + ": " +
                    what);
}

// Reads one JSON object, tracking which keys were consumed so that unknown
// (usually misspelled) keys are reported instead of silently ignored.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_, "expected an object");
  }

  std::string path_of(const std::string& key) const {
    return path_ + "/" + key;
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json* find(const std::string& key) {
    if (!node_.contains(key)) return nullptr;
    seen_.insert(key);
    return &node_.at(key);
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (!v) fail(path_of(key), "missing required field");
    return *v;
  }

  double real(const std::string& key, double def) {
    const json* v = find(key);
    if (!v) return def;
    return as_real(*v, path_of(key));
  }

  double required_real(const std::string& key) {
    return as_real(require(key), path_of(key));
  }

  long long integer(const std::string& key, long long def) {
    const json* v = find(key);
    if (!v) return def;
    return as_integer(*v, path_of(key));
  }

  long long required_integer(const std::string& key) {
    return as_integer(require(key), path_of(key));
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_boolean()) fail(path_of(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_string()) fail(path_of(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) fail(path_of(item.key()), "unknown field");
    }
  }

  static double as_real(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
  }

  static long long as_integer(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<long long>::max()))
        fail(path, "integer out of range");
      return static_cast<long long>(u);
    }
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<long long>();
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

long long at_least(long long v, long long lo, const std::string& path) {
  if (v < lo) fail(path, "must be >= " + std::to_string(lo));
  return v;
}

double positive(double v, const std::string& path) {
  if (!(v > 0.0)) fail(path, "must be > 0");
  return v;
}

double non_negative(double v, const std::string& path) {
  if (!(v >= 0.0)) fail(path, "must be >= 0");
  return v;
}

std::filesystem::path resolve_path(const std::string& p,
                                   const std::filesystem::path& base_dir) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  if (path.is_relative()) path = base_dir / path;
  return std::filesystem::absolute(path).lexically_normal();
}

const char* comm_mode_name(CommMode m) {
  return m == CommMode::kSymmetric ? "symmetric" : "broadcast_plus_uploads";
}

const char* efficiency_name(EfficiencyMode m) {
  return m == EfficiencyMode::kNormalized ? "normalized" : "raw_inverse";
}

const char* data_mode_name(DataMode m) {
  switch (m) {
    case DataMode::kDirichlet:
      return "dirichlet";
    case DataMode::kSessionSplit:
      return "session_split";
    case DataMode::kCsv:
      return "csv";
  }
  return "session_split";
}

DeviceProfile parse_profile(const json& node, const std::string& path) {
  ObjectReader r(node, path);
  DeviceProfile p;
  p.client_id = static_cast<int>(r.required_integer("client_id"));
  p.name = r.string("name", "");
  p.cpu_cores = static_cast<int>(
      at_least(r.required_integer("cpu_cores"), 1, r.path_of("cpu_cores")));
  p.ram_gb = positive(r.required_real("ram_gb"), r.path_of("ram_gb"));
  p.epoch_time_s =
      positive(r.required_real("epoch_time_s"), r.path_of("epoch_time_s"));
  p.latency_ms = positive(r.required_real("latency_ms"), r.path_of("latency_ms"));
  r.finish();
  return p;
}

template <class T, class Fn>
std::vector<T> parse_array(const json& node, const std::string& path, Fn fn) {
  if (!node.is_array()) fail(path, "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(fn(node[i], path + "/" + std::to_string(i)));
  return out;
}

}  // namespace

ConfigDocument parse_config(const json& root,
                            const std::filesystem::path& base_dir) {
  ObjectReader r(root, "");
  ConfigDocument doc;
  auto& c = doc.base;

  if (const json* m = r.find("methods")) {
    doc.methods = parse_array<Method>(*m, "/methods", [](const json& v,
                                                         const std::string& p) {
      if (!v.is_string()) fail(p, "expected a method name");
      auto method = parse_method(v.get<std::string>());
      if (!method)
        fail(p, "unknown method '" + v.get<std::string>() +
                    "' (hwfl, fedavg, fedprox, random_topk, topk_only, "
                    "adaptive_only)");
      return *method;
    });
    if (doc.methods.empty()) fail("/methods", "must list at least one method");
    std::set<Method> unique(doc.methods.begin(), doc.methods.end());
    if (unique.size() != doc.methods.size())
      fail("/methods", "duplicate method");
  } else {
    doc.methods = {Method::kHwfl};
  }

  c.n_rounds = static_cast<int>(at_least(r.integer("rounds", c.n_rounds), 1, "/rounds"));
  c.k = static_cast<std::size_t>(at_least(r.integer("k", 3), 1, "/k"));
  c.e_base = static_cast<int>(at_least(r.integer("e_base", c.e_base), 1, "/e_base"));

  if (const json* w = r.find("weights")) {
    ObjectReader wr(*w, "/weights");
    c.weights.alpha = non_negative(wr.real("alpha", c.weights.alpha), "/weights/alpha");
    c.weights.beta = non_negative(wr.real("beta", c.weights.beta), "/weights/beta");
    c.weights.gamma = non_negative(wr.real("gamma", c.weights.gamma), "/weights/gamma");
    c.weights.delta = non_negative(wr.real("delta", c.weights.delta), "/weights/delta");
    wr.finish();
    if (!(c.weights.alpha + c.weights.beta + c.weights.gamma + c.weights.delta > 0.0))
      fail("/weights", "weights must not all be zero");
  }

  const auto eff = r.string("efficiency_mode", efficiency_name(c.efficiency));
  if (eff == "normalized")
    c.efficiency = EfficiencyMode::kNormalized;
  else if (eff == "raw_inverse")
    c.efficiency = EfficiencyMode::kRawInverse;
  else
    fail("/efficiency_mode", "expected 'normalized' or 'raw_inverse'");

  c.lambda = non_negative(r.real("lambda", c.lambda), "/lambda");
  c.prox_mu = non_negative(r.real("prox_mu", c.prox_mu), "/prox_mu");

  const auto comm = r.string("comm_mode", comm_mode_name(c.comm_mode));
  if (comm == "symmetric")
    c.comm_mode = CommMode::kSymmetric;
  else if (comm == "broadcast_plus_uploads")
    c.comm_mode = CommMode::kBroadcastPlusUploads;
  else
    fail("/comm_mode", "expected 'symmetric' or 'broadcast_plus_uploads'");

  c.model_size_mb = positive(r.real("model_size_mb", c.model_size_mb), "/model_size_mb");
  c.time_model.latency_multiplier = non_negative(
      r.real("latency_multiplier", c.time_model.latency_multiplier),
      "/latency_multiplier");

  if (const json* lp = r.find("latency_perturbation")) {
    ObjectReader lr(*lp, "/latency_perturbation");
    c.latency.enabled = lr.boolean("enabled", c.latency.enabled);
    c.latency.sigma = non_negative(lr.real("sigma", c.latency.sigma),
                                   "/latency_perturbation/sigma");
    lr.finish();
  }

  const json* fleet = r.find("fleet");
  const json* fleet_csv = r.find("fleet_csv");
  if (fleet && fleet_csv) fail("/fleet_csv", "give either fleet or fleet_csv, not both");
  if (fleet) {
    c.fleet = parse_array<DeviceProfile>(*fleet, "/fleet", parse_profile);
    if (c.fleet.empty()) fail("/fleet", "empty fleet");
    std::set<int> ids;
    for (std::size_t i = 0; i < c.fleet.size(); ++i) {
      if (!ids.insert(c.fleet[i].client_id).second)
        fail("/fleet/" + std::to_string(i) + "/client_id", "duplicate client_id");
    }
  } else if (fleet_csv) {
    if (!fleet_csv->is_string()) fail("/fleet_csv", "expected a path string");
    try {
      c.fleet = load_fleet_csv(resolve_path(fleet_csv->get<std::string>(), base_dir));
    } catch (const ValidationError& e) {
      fail("/fleet_csv", e.what());
    }
  } else {
    fail("/fleet", "missing required field (inline fleet or fleet_csv)");
  }

  if (const json* d = r.find("data")) {
    ObjectReader dr(*d, "/data");
    const auto mode = dr.string("mode", data_mode_name(c.data.mode));
    if (mode == "dirichlet")
      c.data.mode = DataMode::kDirichlet;
    else if (mode == "session_split")
      c.data.mode = DataMode::kSessionSplit;
    else if (mode == "csv")
      c.data.mode = DataMode::kCsv;
    else
      fail("/data/mode", "expected 'dirichlet', 'session_split' or 'csv'");
    c.data.n_classes = static_cast<std::size_t>(
        at_least(dr.integer("n_classes", 4), 1, "/data/n_classes"));
    c.data.input_dim = static_cast<std::size_t>(
        at_least(dr.integer("input_dim", 40), 1, "/data/input_dim"));
    c.data.samples_per_client = static_cast<std::size_t>(at_least(
        dr.integer("samples_per_client", 200), 1, "/data/samples_per_client"));
    c.data.dirichlet_alpha = positive(
        dr.real("dirichlet_alpha", c.data.dirichlet_alpha), "/data/dirichlet_alpha");
    c.data.class_separation = positive(
        dr.real("class_separation", c.data.class_separation),
        "/data/class_separation");
    c.data.csv_path = resolve_path(dr.string("csv_path", ""), base_dir);
    dr.finish();
    if (c.data.mode == DataMode::kCsv && c.data.csv_path.empty())
      fail("/data/csv_path", "csv mode requires csv_path");
  }
  c.data.n_clients = c.fleet.size();

  if (const json* t = r.find("train")) {
    ObjectReader tr(*t, "/train");
    c.learning_rate = non_negative(tr.real("learning_rate", c.learning_rate),
                                   "/train/learning_rate");
    c.batch_size = static_cast<std::size_t>(
        at_least(tr.integer("batch_size", 32), 1, "/train/batch_size"));
    c.hidden_dim = static_cast<std::size_t>(
        at_least(tr.integer("hidden_dim", 0), 0, "/train/hidden_dim"));
    tr.finish();
  }

  if (const json* s = r.find("seeds")) {
    c.seeds = parse_array<std::uint64_t>(*s, "/seeds", [](const json& v,
                                                          const std::string& p) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        fail(p, "expected a non-negative integer seed");
      return v.get<std::uint64_t>();
    });
    if (c.seeds.empty()) fail("/seeds", "must list at least one seed");
  }

  c.workers = static_cast<std::size_t>(at_least(r.integer("workers", 1), 1, "/workers"));

  if (const json* sw = r.find("sweep")) {
    ObjectReader sr(*sw, "/sweep");
    if (const json* kv = sr.find("k_values")) {
      doc.k_values = parse_array<std::size_t>(*kv, "/sweep/k_values",
                                              [](const json& v, const std::string& p) {
        return static_cast<std::size_t>(at_least(ObjectReader::as_integer(v, p), 1, p));
      });
    }
    if (const json* av = sr.find("alpha_values")) {
      doc.alpha_values = parse_array<double>(*av, "/sweep/alpha_values",
                                             [](const json& v, const std::string& p) {
        return non_negative(ObjectReader::as_real(v, p), p);
      });
    }
    sr.finish();
  }
  r.finish();
  if (c.k > c.fleet.size())
    fail("/k", "k = " + std::to_string(c.k) + " exceeds the fleet size " +
                   std::to_string(c.fleet.size()));

  c.method = doc.methods.front();
  try {
    for (const auto& cfg : resolve(doc)) cfg.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  return doc;
}

ConfigDocument load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json root;
  try {
    root = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config error: " + path.string() + ": " + e.what());
  }
  auto dir = path.parent_path();
  if (dir.empty()) dir = ".";
  return parse_config(root, dir);
}

nlohmann::json to_json(const ConfigDocument& doc) {
  const auto& c = doc.base;
  json j;
  j["methods"] = json::array();
  for (auto m : doc.methods) j["methods"].push_back(std::string(method_name(m)));
  j["rounds"] = c.n_rounds;
  j["k"] = c.k;
  j["e_base"] = c.e_base;
  j["weights"] = {{"alpha", c.weights.alpha},
                  {"beta", c.weights.beta},
                  {"gamma", c.weights.gamma},
                  {"delta", c.weights.delta}};
  j["efficiency_mode"] = efficiency_name(c.efficiency);
  j["lambda"] = c.lambda;
  j["prox_mu"] = c.prox_mu;
  j["comm_mode"] = comm_mode_name(c.comm_mode);
  j["model_size_mb"] = c.model_size_mb;
  j["latency_multiplier"] = c.time_model.latency_multiplier;
  j["latency_perturbation"] = {{"enabled", c.latency.enabled},
                               {"sigma", c.latency.sigma}};
  j["fleet"] = json::array();
  for (const auto& p : c.fleet) {
    j["fleet"].push_back({{"client_id", p.client_id},
                          {"name", p.name},
                          {"cpu_cores", p.cpu_cores},
                          {"ram_gb", p.ram_gb},
                          {"epoch_time_s", p.epoch_time_s},
                          {"latency_ms", p.latency_ms}});
  }
  j["data"] = {{"mode", data_mode_name(c.data.mode)},
               {"n_classes", c.data.n_classes},
               {"input_dim", c.data.input_dim},
               {"samples_per_client", c.data.samples_per_client},
               {"dirichlet_alpha", c.data.dirichlet_alpha},
               {"class_separation", c.data.class_separation},
               {"csv_path", c.data.csv_path.string()}};
  j["train"] = {{"learning_rate", c.learning_rate},
                {"batch_size", c.batch_size},
                {"hidden_dim", c.hidden_dim}};
  j["seeds"] = c.seeds;
  j["workers"] = c.workers;
  j["sweep"] = {{"k_values", doc.k_values}, {"alpha_values", doc.alpha_values}};
  return j;
}

ConfigDocument default_document() {
  ConfigDocument doc;
  doc.methods = {Method::kFedAvg, Method::kFedProx, Method::kRandomTopK,
                 Method::kHwfl};
  doc.base.fleet = reference_fleet();
  doc.base.data.n_clients = doc.base.fleet.size();
  doc.base.method = doc.methods.front();
  doc.k_values = {1, 2, 3, 4, 5};
  doc.alpha_values = {0.3, 0.4, 0.5};
  return doc;
}

std::vector<ExperimentConfig> resolve(const ConfigDocument& doc) {
  std::vector<ExperimentConfig> out;
  for (auto m : doc.methods) {
    ExperimentConfig c = doc.base;
    c.method = m;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace hwfl::cli

#include "hwfl/data_synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "hwfl/csv.hpp"
#include "hwfl/error.hpp"
#include "hwfl/rng.hpp"

namespace hwfl {
namespace {

[[noreturn]] void parse_error(const std::filesystem::path& path,
                              std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << path.string() << ":" << line << ": " << what;
  throw ValidationError(msg.str());
}

std::vector<int> session_labels(std::size_t n, std::size_t n_classes,
                                std::size_t dominant, int client_id) {
  std::vector<int> labels;
  labels.reserve(n);
  if (n_classes == 1) {
    labels.assign(n, 0);
    return labels;
  }
  const auto n_dom = static_cast<std::size_t>(
      std::llround(kDominantClassShare * static_cast<double>(n)));
  const std::size_t rest = n - std::min(n, n_dom);
  if (n_dom == 0 || rest < n_classes - 1) {
    std::ostringstream msg;
    msg << "samples_per_client = " << n << " is too small to populate all "
        << n_classes << " classes for client " << client_id
        << " in session-split mode";
    throw ValidationError(msg.str());
  }
  labels.assign(n_dom, static_cast<int>(dominant));
  const std::size_t others = n_classes - 1;
  std::size_t slot = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (c == dominant) continue;
    const std::size_t count = rest / others + (slot < rest % others ? 1 : 0);
    labels.insert(labels.end(), count, static_cast<int>(c));
    ++slot;
  }
  return labels;
}

std::vector<int> dirichlet_labels(std::size_t n, std::size_t n_classes,
                                  double alpha, Rng& rng) {
  std::vector<double> p(n_classes);
  double total = 0.0;
  while (!(total > 0.0)) {
    total = 0.0;
    for (auto& v : p) {
      v = rng.gamma(alpha);
      total += v;
    }
  }
  std::vector<double> cdf(n_classes);
  double acc = 0.0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    acc += p[c] / total;
    cdf[c] = acc;
  }
  std::vector<int> labels(n);
  for (auto& y : labels) {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    y = static_cast<int>(std::min<std::size_t>(it - cdf.begin(), n_classes - 1));
  }
  return labels;
}

// Moves floor(fraction * n) randomly chosen samples into the pool; the
// remaining samples keep their original order.
LocalDataset withhold(const LocalDataset& all, double fraction, Rng& rng,
                      LocalDataset& pool) {
  const std::size_t n = all.size();
  const auto n_val = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i)
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  std::vector<char> held(n, 0);
  for (std::size_t i = 0; i < n_val; ++i) held[order[i]] = 1;

  LocalDataset train{all.client_id, all.input_dim, all.n_classes, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    if (held[i])
      pool.push_back(all.row(i), all.labels[i]);
    else
      train.push_back(all.row(i), all.labels[i]);
  }
  return train;
}

}  // namespace

void DataSpec::validate() const {
  if (n_clients < 1) throw ValidationError("data: n_clients must be >= 1");
  if (n_classes < 1) throw ValidationError("data: n_classes must be >= 1");
  if (input_dim < 1) throw ValidationError("data: input_dim must be >= 1");
  if (samples_per_client < 1)
    throw ValidationError("data: samples_per_client must be >= 1");
  if (mode == DataMode::kDirichlet &&
      !(dirichlet_alpha > 0.0 && std::isfinite(dirichlet_alpha)))
    throw ValidationError("data: dirichlet_alpha must be > 0");
  if (!(class_separation > 0.0))
    throw ValidationError("data: class_separation must be > 0");
  if (mode == DataMode::kCsv && csv_path.empty())
    throw ValidationError("data: csv mode requires csv_path");
}

FederatedData synthesize_noniid(const DataSpec& spec, std::uint64_t seed,
                                std::span<const int> client_ids) {
  spec.validate();
  if (spec.mode == DataMode::kCsv)
    throw ValidationError("synthesize_noniid: csv mode has no generator");
  std::vector<int> ids(client_ids.begin(), client_ids.end());
  if (ids.empty()) {
    ids.resize(spec.n_clients);
    std::iota(ids.begin(), ids.end(), 0);
  } else if (ids.size() != spec.n_clients) {
    throw ValidationError("synthesize_noniid: client id list does not match "
                          "n_clients");
  }

  const std::size_t d = spec.input_dim, n_classes = spec.n_classes;
  Rng mean_rng(derive_seed(seed, Stream::kData));
  std::vector<std::vector<double>> means(n_classes, std::vector<double>(d));
  for (auto& m : means) {
    double norm = 0.0;
    while (!(norm > 0.0)) {
      norm = 0.0;
      for (auto& v : m) {
        v = mean_rng.normal();
        norm += v * v;
      }
    }
    const double scale = spec.class_separation / std::sqrt(norm);
    for (auto& v : m) v *= scale;
  }

  FederatedData out;
  out.validation = {-1, d, n_classes, {}, {}};
  for (std::size_t c = 0; c < n_classes; ++c)
    out.label_names.push_back(std::to_string(c));

  std::vector<double> x(d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Rng rng(derive_seed(seed, Stream::kData, i + 1));
    std::vector<int> labels;
    if (spec.mode == DataMode::kSessionSplit) {
      labels = session_labels(spec.samples_per_client, n_classes,
                              i % n_classes, ids[i]);
      for (std::size_t j = labels.size(); j > 1; --j)
        std::swap(labels[j - 1], labels[rng.uniform_index(j)]);
    } else {
      labels = dirichlet_labels(spec.samples_per_client, n_classes,
                                spec.dirichlet_alpha, rng);
    }
    LocalDataset all{ids[i], d, n_classes, {}, {}};
    all.features.reserve(labels.size() * d);
    for (int y : labels) {
      const auto& mu = means[static_cast<std::size_t>(y)];
      for (std::size_t k = 0; k < d; ++k) x[k] = mu[k] + rng.normal();
      all.push_back(x, y);
    }
    Rng vrng(derive_seed(seed, Stream::kValidation, i + 1));
    out.clients.push_back(withhold(all, kValidationFraction, vrng,
                                   out.validation));
  }
  return out;
}

FederatedData load_feature_csv(const std::filesystem::path& path,
                               std::uint64_t seed,
                               double validation_fraction) {
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw ValidationError("validation fraction must lie in [0, 1)");
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open feature CSV " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    header = csv::split_line(line);
    break;
  }
  if (header.empty()) parse_error(path, line_no, "missing header row");
  if (header.size() < 3 || header[0] != "client_id" || header[1] != "label") {
    parse_error(path, line_no,
                "missing column: header must be client_id,label,f_0,...");
  }
  const std::size_t dim = header.size() - 2;
  for (std::size_t k = 0; k < dim; ++k) {
    if (header[k + 2] != "f_" + std::to_string(k))
      parse_error(path, line_no, "expected column 'f_" + std::to_string(k) +
                                     "', found '" + header[k + 2] + "'");
  }

  struct Row {
    std::string label;
    std::vector<double> x;
  };
  std::map<int, std::vector<Row>> by_client;
  std::set<std::string> label_set;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != header.size()) {
      parse_error(path, line_no,
                  "expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    }
    long long cid = 0;
    if (!csv::parse_int(fields[0], cid))
      parse_error(path, line_no, "non-integer client_id '" + fields[0] + "'");
    if (fields[1].empty()) parse_error(path, line_no, "empty label");
    Row row{fields[1], std::vector<double>(dim)};
    for (std::size_t k = 0; k < dim; ++k) {
      if (!csv::parse_real(fields[k + 2], row.x[k]) ||
          !std::isfinite(row.x[k])) {
        parse_error(path, line_no,
                    "non-numeric feature f_" + std::to_string(k) + " '" +
                        fields[k + 2] + "'");
      }
    }
    label_set.insert(row.label);
    by_client[static_cast<int>(cid)].push_back(std::move(row));
  }
  if (by_client.empty()) parse_error(path, line_no, "no data rows");

  FederatedData out;
  out.label_names.assign(label_set.begin(), label_set.end());
  std::map<std::string, int> label_index;
  for (std::size_t i = 0; i < out.label_names.size(); ++i)
    label_index[out.label_names[i]] = static_cast<int>(i);
  const std::size_t n_classes = out.label_names.size();
  out.validation = {-1, dim, n_classes, {}, {}};

  std::size_t index = 0;
  for (const auto& [cid, rows] : by_client) {
    LocalDataset all{cid, dim, n_classes, {}, {}};
    for (const auto& r : rows) all.push_back(r.x, label_index.at(r.label));
    Rng vrng(derive_seed(seed, Stream::kValidation, ++index));
    out.clients.push_back(withhold(all, validation_fraction, vrng,
                                   out.validation));
  }
  if (out.validation.size() == 0 && validation_fraction > 0.0)
    out.warnings.push_back("validation pool is empty: too few samples per "
                           "client to withhold any");
  return out;
}

void write_feature_csv(const std::filesystem::path& path,
                       std::span<const LocalDataset> datasets,
                       std::span<const std::string> label_names) {
  if (datasets.empty()) throw ValidationError("write_feature_csv: no data");
  const std::size_t dim = datasets.front().input_dim;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "client_id,label";
  for (std::size_t k = 0; k < dim; ++k) out << ",f_" << k;
  out << '\n';
  for (const auto& ds : datasets) {
    if (ds.input_dim != dim)
      throw ValidationError("write_feature_csv: inconsistent input_dim");
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto y = static_cast<std::size_t>(ds.labels[i]);
      out << ds.client_id << ','
          << (label_names.empty() ? std::to_string(y)
                                  : csv::escape(label_names[y]));
      for (double v : ds.row(i)) out << ',' << csv::format_real(v);
      out << '\n';
    }
  }
}

DeviceProfile perturb_latency(const DeviceProfile& profile,
                              const LatencyPerturbation& perturbation,
                              int round_index, std::uint64_t seed) {
  if (!(perturbation.sigma >= 0.0))
    throw ValidationError("latency perturbation: sigma must be >= 0");
  if (!perturbation.enabled || perturbation.sigma == 0.0) return profile;
  Rng rng(derive_seed(seed, Stream::kLatency,
                      static_cast<std::uint64_t>(profile.client_id),
                      static_cast<std::uint64_t>(round_index)));
  const double s = perturbation.sigma;
  DeviceProfile out = profile;
  out.latency_ms = profile.latency_ms * std::exp(-0.5 * s * s + s * rng.normal());
  return out;
}

Fleet load_fleet_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open fleet CSV " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    header = csv::split_line(line);
    break;
  }
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required :
       {"client_id", "cpu_cores", "ram_gb", "epoch_time_s", "latency_ms"}) {
    if (!col.count(required))
      parse_error(path, line_no, std::string("missing column '") + required +
                                     "'");
  }

  Fleet fleet;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split_line(line);
    if (f.size() != header.size())
      parse_error(path, line_no, "expected " + std::to_string(header.size()) +
                                     " fields, found " +
                                     std::to_string(f.size()));
    auto integer = [&](const char* name) {
      long long v = 0;
      if (!csv::parse_int(f[col.at(name)], v))
        parse_error(path, line_no, std::string("non-integer ") + name);
      return static_cast<int>(v);
    };
    auto real = [&](const char* name) {
      double v = 0.0;
      if (!csv::parse_real(f[col.at(name)], v))
        parse_error(path, line_no, std::string("non-numeric ") + name);
      return v;
    };
    DeviceProfile p;
    p.client_id = integer("client_id");
    p.cpu_cores = integer("cpu_cores");
    p.ram_gb = real("ram_gb");
    p.epoch_time_s = real("epoch_time_s");
    p.latency_ms = real("latency_ms");
    if (col.count("name")) p.name = f[col.at("name")];
    fleet.push_back(std::move(p));
  }
  validate_fleet(fleet);
  return fleet;
}

void write_fleet_csv(const std::filesystem::path& path,
                     std::span<const DeviceProfile> fleet) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << "client_id,cpu_cores,ram_gb,epoch_time_s,latency_ms,name\n";
  for (const auto& p : fleet) {
    out << p.client_id << ',' << p.cpu_cores << ','
        << csv::format_real(p.ram_gb) << ','
        << csv::format_real(p.epoch_time_s) << ','
        << csv::format_real(p.latency_ms) << ',' << csv::escape(p.name)
        << '\n';
  }
}

}  // namespace hwfl

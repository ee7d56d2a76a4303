#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "hwfl/csv.hpp"
#include "hwfl/error.hpp"

namespace hwfl::cli {
namespace {

using csv::format_real;
using nlohmann::json;

std::string join_ints(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(xs[i]);
  }
  return out;
}

std::string csv_text(const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += csv::join(row);
    out += '\n';
  }
  return out;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string pm(const MetricStat& s, int digits = 4) {
  return fixed(s.mean, digits) + " +/- " + fixed(s.std, digits);
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return {};
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  std::ostringstream os;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) os << "  ";
      if (c == 0)
        os << std::left << std::setw(static_cast<int>(width[c])) << rows[r][c];
      else
        os << std::right << std::setw(static_cast<int>(width[c])) << rows[r][c];
    }
    os << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      os << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  return os.str();
}

// Each experiment is an independent deterministic job; results come back in
// submission order.
std::vector<ExperimentResult> run_all(const std::vector<ExperimentConfig>& configs) {
  for (const auto& c : configs) c.validate();
  std::vector<std::future<ExperimentResult>> jobs;
  jobs.reserve(configs.size());
  for (const auto& c : configs)
    jobs.push_back(std::async(std::launch::async,
                              [&c] { return run_experiment(c); }));
  std::vector<ExperimentResult> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::vector<std::string> collect_warnings(const std::vector<ExperimentResult>& results) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (const auto& r : results)
    for (const auto& t : r.trials)
      for (const auto& w : t.warnings)
        if (seen.insert(w).second) out.push_back(w);
  return out;
}

std::vector<double> accuracies(const ExperimentResult& r) {
  std::vector<double> xs;
  for (const auto& f : r.summary.finals) xs.push_back(f.accuracy);
  return xs;
}

std::string method_label(const ExperimentResult& r) {
  return std::string(method_name(r.config.method));
}

void add_round_files(const std::vector<ExperimentResult>& results,
                     CommandOutput& out) {
  for (const auto& r : results)
    for (const auto& t : r.trials)
      out.files.push_back({"rounds_" + method_label(r) + "_" +
                               std::to_string(t.seed) + ".csv",
                           rounds_csv(t)});
}

std::string selection_fingerprint(const ExperimentResult& r) {
  std::set<std::string> sets;
  for (const auto& t : r.trials)
    for (const auto& round : t.rounds) sets.insert(join_ints(round.selected));
  std::string out;
  for (const auto& s : sets) {
    if (!out.empty()) out += '|';
    out += s;
  }
  return out;
}

}  // namespace

std::string rounds_csv(const TrialResult& trial) {
  std::vector<std::vector<std::string>> rows{
      {"round", "selected", "epochs", "sim_time_s", "comm_mb", "cum_time_s",
       "cum_comm_mb", "objective", "val_accuracy", "val_macro_f1",
       "val_balanced_acc", "jain", "energy_proxy"}};
  double cum_time = 0.0;
  CommLedger comm;
  for (const auto& r : trial.rounds) {
    cum_time += r.sim_time_s;
    comm.add(r.comm_mb);
    rows.push_back({std::to_string(r.round_index), join_ints(r.selected),
                    join_ints(r.epochs), format_real(r.sim_time_s),
                    format_real(r.comm_mb), format_real(cum_time),
                    format_real(comm.total()), format_real(r.objective),
                    format_real(r.val_accuracy), format_real(r.val_macro_f1),
                    format_real(r.val_balanced_acc), format_real(r.jain),
                    format_real(r.energy_proxy_total)});
  }
  return csv_text(rows);
}

std::string summary_csv(const std::vector<ExperimentResult>& results) {
  std::vector<std::vector<std::string>> rows{
      {"method", "seeds", "degenerate", "accuracy_mean", "accuracy_std",
       "macro_f1_mean", "macro_f1_std", "balanced_acc_mean", "balanced_acc_std",
       "total_time_s_mean", "total_time_s_std", "mean_round_time_s_mean",
       "mean_round_time_s_std", "total_comm_mb_mean", "total_comm_mb_std",
       "total_energy_mean", "total_energy_std", "jain_mean", "jain_std"}};
  for (const auto& r : results) {
    const auto& s = r.summary;
    std::vector<std::string> row{method_label(r),
                                 std::to_string(s.finals.size()),
                                 s.degenerate ? "1" : "0"};
    for (const MetricStat* m :
         {&s.accuracy, &s.macro_f1, &s.balanced_accuracy, &s.total_time_s,
          &s.mean_round_time_s, &s.total_comm_mb, &s.total_energy, &s.jain}) {
      row.push_back(format_real(m->mean));
      row.push_back(format_real(m->std));
    }
    rows.push_back(std::move(row));
  }
  return csv_text(rows);
}

std::string comparison_csv(const std::vector<ExperimentResult>& results) {
  std::vector<std::vector<std::string>> rows{
      {"method", "accuracy_mean", "accuracy_std", "macro_f1_mean",
       "macro_f1_std", "balanced_acc_mean", "balanced_acc_std",
       "sim_time_s_mean", "sim_time_s_std", "mean_round_time_s_mean",
       "comm_total_mb", "baseline", "welch_t", "welch_dof", "p_value",
       "cohens_d"}};
  if (results.empty()) return csv_text(rows);
  const auto base_acc = accuracies(results.front());
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& s = results[i].summary;
    std::vector<std::string> row{
        method_label(results[i]),          format_real(s.accuracy.mean),
        format_real(s.accuracy.std),       format_real(s.macro_f1.mean),
        format_real(s.macro_f1.std),       format_real(s.balanced_accuracy.mean),
        format_real(s.balanced_accuracy.std), format_real(s.total_time_s.mean),
        format_real(s.total_time_s.std),   format_real(s.mean_round_time_s.mean),
        format_real(s.total_comm_mb.mean), method_label(results.front())};
    std::string t, dof, p, d;
    if (i > 0) {
      const auto acc = accuracies(results[i]);
      // Undefined statistics (one seed, zero variance) stay blank.
      try {
        const auto w = welch_t(acc, base_acc);
        t = format_real(w.t);
        dof = format_real(w.dof);
        p = format_real(w.p_two_sided);
      } catch (const ValidationError&) {
      }
      try {
        d = format_real(cohens_d(acc, base_acc));
      } catch (const ValidationError&) {
      }
    }
    row.insert(row.end(), {t, dof, p, d});
    rows.push_back(std::move(row));
  }
  return csv_text(rows);
}

CommandOutput cmd_run(const ConfigDocument& doc) {
  const auto results = run_all(resolve(doc));
  CommandOutput out;
  add_round_files(results, out);
  out.files.push_back({"summary.csv", summary_csv(results)});
  out.warnings = collect_warnings(results);

  std::vector<std::vector<std::string>> rows{
      {"Method", "Acc", "MacroF1", "BalAcc", "SimTime (s)", "Comm (MB)"}};
  for (const auto& r : results) {
    const auto& s = r.summary;
    rows.push_back({method_label(r), pm(s.accuracy), pm(s.macro_f1),
                    pm(s.balanced_accuracy), pm(s.total_time_s, 3),
                    fixed(s.total_comm_mb.mean, 3)});
  }
  out.table = render_table(rows);
  return out;
}

CommandOutput cmd_compare(const ConfigDocument& doc) {
  if (doc.methods.size() < 2)
    throw ConfigError("compare requires ≥ 2 methods");
  const auto results = run_all(resolve(doc));
  CommandOutput out;
  add_round_files(results, out);
  out.files.push_back({"summary.csv", summary_csv(results)});
  out.files.push_back({"comparison.csv", comparison_csv(results)});
  out.warnings = collect_warnings(results);

  const auto base_acc = accuracies(results.front());
  std::vector<std::vector<std::string>> rows{
      {"Method", "Acc", "MacroF1", "BalAcc", "SimTime (s)", "Comm (MB)",
       "p vs " + method_label(results.front()), "d"}};
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& s = results[i].summary;
    std::string p = "-", d = "-";
    if (i > 0) {
      const auto acc = accuracies(results[i]);
      try {
        p = fixed(welch_t(acc, base_acc).p_two_sided, 3);
      } catch (const ValidationError&) {
      }
      try {
        d = fixed(cohens_d(acc, base_acc), 3);
      } catch (const ValidationError&) {
      }
    }
    rows.push_back({method_label(results[i]), pm(s.accuracy), pm(s.macro_f1),
                    pm(s.balanced_accuracy), pm(s.total_time_s, 3),
                    fixed(s.total_comm_mb.mean, 3), p, d});
  }
  out.table = render_table(rows);
  return out;
}

CommandOutput cmd_sweep_k(const ConfigDocument& doc,
                          std::vector<std::size_t> k_values) {
  if (k_values.empty()) throw ConfigError("sweep-k requires at least one k value");
  std::sort(k_values.begin(), k_values.end());
  if (std::adjacent_find(k_values.begin(), k_values.end()) != k_values.end())
    throw ConfigError("sweep-k: duplicate k value");
  const Method method = doc.methods.front();
  if (method_traits(method).selection == Selection::kAll)
    throw ConfigError("sweep-k: method '" + std::string(method_name(method)) +
                      "' selects every client, so k has no effect");

  std::vector<ExperimentConfig> configs;
  for (auto k : k_values) {
    if (k < 1 || k > doc.base.fleet.size())
      throw ConfigError("sweep-k: k = " + std::to_string(k) +
                        " is outside 1.." + std::to_string(doc.base.fleet.size()));
    ExperimentConfig c = doc.base;
    c.method = method;
    c.k = k;
    configs.push_back(std::move(c));
  }
  const auto results = run_all(configs);
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (!(results[i].summary.total_comm_mb.mean >
          results[i - 1].summary.total_comm_mb.mean))
      throw std::runtime_error("sweep-k: communication total is not increasing in k");
  }

  std::vector<std::vector<std::string>> csv_rows{
      {"method", "k", "accuracy_mean", "accuracy_std", "comm_total_mb",
       "sim_time_s_mean", "sim_time_s_std", "mean_round_time_s_mean"}};
  std::vector<std::vector<std::string>> rows{
      {"K", "Acc", "Comm (MB)", "SimTime (s)"}};
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& s = results[i].summary;
    csv_rows.push_back({std::string(method_name(method)),
                        std::to_string(k_values[i]), format_real(s.accuracy.mean),
                        format_real(s.accuracy.std),
                        format_real(s.total_comm_mb.mean),
                        format_real(s.total_time_s.mean),
                        format_real(s.total_time_s.std),
                        format_real(s.mean_round_time_s.mean)});
    rows.push_back({std::to_string(k_values[i]), pm(s.accuracy),
                    fixed(s.total_comm_mb.mean, 3), pm(s.total_time_s, 3)});
  }
  CommandOutput out;
  out.files.push_back({"sweep_k.csv", csv_text(csv_rows)});
  out.table = render_table(rows);
  out.warnings = collect_warnings(results);
  return out;
}

CommandOutput cmd_sweep_weights(const ConfigDocument& doc,
                                std::vector<double> alpha_values) {
  if (alpha_values.empty())
    throw ConfigError("sweep-weights requires at least one alpha value");
  const Method method = doc.methods.front();
  std::vector<ExperimentConfig> configs;
  for (double a : alpha_values) {
    if (!(a >= 0.0)) throw ConfigError("sweep-weights: alpha must be >= 0");
    ExperimentConfig c = doc.base;
    c.method = method;
    c.weights.alpha = a;
    configs.push_back(std::move(c));
  }
  const auto results = run_all(configs);

  std::vector<std::vector<std::string>> csv_rows{
      {"method", "alpha", "beta", "gamma", "delta", "accuracy_mean",
       "accuracy_std", "comm_total_mb", "sim_time_s_mean", "selected_sets"}};
  std::vector<std::vector<std::string>> rows{
      {"alpha", "Acc", "SimTime (s)", "Selected sets"}};
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& s = results[i].summary;
    const auto& w = configs[i].weights;
    const auto fp = selection_fingerprint(results[i]);
    csv_rows.push_back({std::string(method_name(method)), format_real(w.alpha),
                        format_real(w.beta), format_real(w.gamma),
                        format_real(w.delta), format_real(s.accuracy.mean),
                        format_real(s.accuracy.std),
                        format_real(s.total_comm_mb.mean),
                        format_real(s.total_time_s.mean), fp});
    rows.push_back({format_real(w.alpha), pm(s.accuracy), pm(s.total_time_s, 3), fp});
  }
  CommandOutput out;
  out.files.push_back({"sweep_weights.csv", csv_text(csv_rows)});
  out.table = render_table(rows);
  out.warnings = collect_warnings(results);
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string manifest_json(const ManifestInfo& info, const ConfigDocument& doc,
                          const std::vector<Artifact>& files) {
  json j;
  j["command"] = info.command;
  j["config_path"] = info.config_path.string();
  j["output_dir"] = info.output_dir.string();
  j["config"] = to_json(doc);
  j["files"] = json::array();
  for (const auto& f : files)
    j["files"].push_back(
        {{"name", f.name}, {"bytes", f.content.size()}, {"sha256", sha256_hex(f.content)}});
  return j.dump(2) + "\n";
}

void commit_outputs(const std::filesystem::path& out_dir,
                    const ManifestInfo& info, const ConfigDocument& doc,
                    const CommandOutput& output) {
  namespace fs = std::filesystem;
  std::vector<Artifact> files = output.files;
  std::sort(files.begin(), files.end(),
            [](const Artifact& a, const Artifact& b) { return a.name < b.name; });
  files.push_back({"manifest.json", manifest_json(info, doc, files)});

  fs::create_directories(out_dir);
  std::vector<fs::path> staged;
  try {
    for (const auto& f : files) {
      const auto tmp = out_dir / ("." + f.name + ".tmp");
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os) throw std::runtime_error("cannot write " + tmp.string());
      staged.push_back(tmp);
      os.write(f.content.data(), static_cast<std::streamsize>(f.content.size()));
      os.close();
      if (!os) throw std::runtime_error("write failed: " + tmp.string());
    }
    for (std::size_t i = 0; i < files.size(); ++i)
      fs::rename(staged[i], out_dir / files[i].name);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : staged) fs::remove(p, ec);
    throw;
  }
}

std::filesystem::path resolve_out_dir(const Invocation& inv) {
  if (inv.out_dir) return *inv.out_dir;
  if (const char* env = std::getenv("HWFL_OUT_DIR"); env && *env) return env;
  return "hwfl_out";
}

int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    auto doc = load_config(inv.config_path);
    if (inv.seeds) {
      if (inv.seeds->empty()) throw ConfigError("--seeds: empty seed list");
      doc.base.seeds = *inv.seeds;
    }

    CommandOutput output;
    if (inv.command == "run")
      output = cmd_run(doc);
    else if (inv.command == "compare")
      output = cmd_compare(doc);
    else if (inv.command == "sweep-k")
      output = cmd_sweep_k(doc, inv.k_values ? *inv.k_values : doc.k_values);
    else if (inv.command == "sweep-weights")
      output = cmd_sweep_weights(
          doc, inv.alpha_values ? *inv.alpha_values : doc.alpha_values);
    else
      throw ConfigError("unknown command '" + inv.command + "'");

    const auto dir = resolve_out_dir(inv);
    commit_outputs(dir, {inv.command, inv.config_path, dir}, doc, output);
    for (const auto& w : output.warnings) err << "warning: " << w << '\n';
    out << output.table;
    out << "wrote " << output.files.size() + 1 << " files to " << dir.string()
        << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace hwfl::cli

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config_io.hpp"

namespace hwfl::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

/// One emitted file, held in memory until every artifact of a command has
/// been produced.
struct Artifact {
  std::string name;
  std::string content;
};

struct CommandOutput {
  std::vector<Artifact> files;  // manifest.json is added when committed
  std::string table;            // aligned text for stdout
  std::vector<std::string> warnings;
};

CommandOutput cmd_run(const ConfigDocument& doc);
CommandOutput cmd_compare(const ConfigDocument& doc);
/// Runs the first listed method once per k.
CommandOutput cmd_sweep_k(const ConfigDocument& doc,
                          std::vector<std::size_t> k_values);
/// Runs the first listed method once per alpha; beta, gamma and delta are
/// left as configured.
CommandOutput cmd_sweep_weights(const ConfigDocument& doc,
                                std::vector<double> alpha_values);

std::string rounds_csv(const TrialResult& trial);
std::string summary_csv(const std::vector<ExperimentResult>& results);
std::string comparison_csv(const std::vector<ExperimentResult>& results);

std::string sha256_hex(const std::string& bytes);

struct ManifestInfo {
  std::string command;
  std::filesystem::path config_path;
  std::filesystem::path output_dir;
};

std::string manifest_json(const ManifestInfo& info, const ConfigDocument& doc,
                          const std::vector<Artifact>& files);

/// Writes every artifact plus manifest.json. Files are staged under
/// temporary names and renamed only once all writes have succeeded.
void commit_outputs(const std::filesystem::path& out_dir,
                    const ManifestInfo& info, const ConfigDocument& doc,
                    const CommandOutput& output);

struct Invocation {
  std::string command;  // run | compare | sweep-k | sweep-weights
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::vector<std::size_t>> k_values;
  std::optional<std::vector<double>> alpha_values;
};

/// Output directory precedence: --out, then HWFL_OUT_DIR, then "hwfl_out".
std::filesystem::path resolve_out_dir(const Invocation& inv);

/// Full command: load, compute, write, print. Returns an ExitCode.
int execute(const Invocation& inv, std::ostream& out, std::ostream& err);

}  // namespace hwfl::cli

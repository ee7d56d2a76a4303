#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwfl/federation.hpp"

namespace hwfl::cli {

/// A parsed config file: shared experiment settings plus the method list
/// and optional sweep grids.
struct ConfigDocument {
  std::vector<Method> methods;
  ExperimentConfig base;
  std::vector<std::size_t> k_values;
  std::vector<double> alpha_values;

  bool operator==(const ConfigDocument&) const = default;
};

/// Parses the JSON config tree. Relative paths (fleet_csv, data.csv_path)
/// resolve against `base_dir`. Unknown keys, wrong types and out-of-range
/// values throw ConfigError with a JSON-pointer path such as
/// "/fleet/2/cpu_cores".
ConfigDocument parse_config(const nlohmann::json& root,
                            const std::filesystem::path& base_dir);

ConfigDocument load_config(const std::filesystem::path& path);

/// Complete, self-describing form: every field present, fleet inline.
nlohmann::json to_json(const ConfigDocument& doc);

/// Every default, with the bundled five-device fleet filled in.
ConfigDocument default_document();

/// One ExperimentConfig per listed method.
std::vector<ExperimentConfig> resolve(const ConfigDocument& doc);

}  // namespace hwfl::cli

#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnpde/train.hpp"

namespace nnpde {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitAborted = 3;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ExperimentConfig {
  std::string name = "custom";
  TrainConfig train;
  std::filesystem::path out_dir = "runs/custom";
  int grid = 64;
};

/// INI-style text: `[section]` headers, `key = value` lines, `#` comments.
/// Sections: problem, network, sampling, training, validation, output.
/// Throws ConfigError naming the key for unknown, missing or malformed entries.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Writes every setting explicitly; the output parses back to the same config.
void write_config(std::ostream& os, const ExperimentConfig& config);

struct PresetInfo {
  std::string name;
  std::string benchmark;
  std::string summary;
};

const std::vector<PresetInfo>& presets();
bool is_preset(const std::string& name);
ExperimentConfig preset(const std::string& name);

struct RunSummary {
  TrainResult result;
  double final_val = 0.0;
  double best_val = 0.0;
  long best_iter = 0;
};

/// Trains and writes record.csv, final_metrics.csv, exact.csv, approx.csv,
/// abs_error.csv, resolved_config.ini and notes.txt into `dir`.
/// Progress lines go to `log` when it is not null.
RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir, std::ostream* log);

}  // namespace nnpde

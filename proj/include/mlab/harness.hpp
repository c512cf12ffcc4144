// Experiment configs, learner composition trees and reports.
#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>

#include "mlab/evaluate.hpp"

namespace mlab {

// Config problems, naming the offending key as a JSON pointer.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class InputMode { Samples, Prefix };

struct ExperimentConfig {
  json raw;
  std::filesystem::path base_dir;
  std::filesystem::path table_path;
  std::optional<json> flips;  // replaces the manifest's flip schedules
  std::vector<std::string> codecs;
  json learner;
  Index truth = 0;
  InputMode input = InputMode::Samples;
  EvalConfig eval;
  std::vector<std::uint64_t> seeds;
  std::size_t agreement_bits = 32;  // prefix mode
  std::optional<double> success_threshold;
  std::optional<std::filesystem::path> json_out;
  std::optional<std::filesystem::path> csv_out;
};

// Relative paths resolve against base_dir.
ExperimentConfig parse_config(const json& raw, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

TablePtr build_table(const ExperimentConfig& cfg);
Estimator build_estimator(const std::vector<std::string>& codecs, const std::string& path = "/codecs");

// Composition trees: {"ideal_real": [..]}, {"lift": {"learner": .., "map": .., "class": ..}}, ...
LearnerPtr build_learner(const json& tree, const TablePtr& t, const Estimator& est, const std::string& path = "/learner");

// Index-transform trees for `mlab transform`: an index, {"bernoulli_lift": tree},
// {"param_lift": {"map": .., "of": tree}}, {"inverse_lift": {"map", "class", "of"}},
// {"pad": [tree, j]}, {"majority": [[tree, "p/q"], ...]}.
Index materialize(const json& tree, const Table& t, const std::string& path = "/");

struct Report {
  json body;  // deterministic part
  double wall_clock_seconds = 0;
  bool passed = true;  // success_threshold met (true when none is set)
  SuccessReport success;

  // body plus the wall-clock field
  json to_json() const;
};

Report run_experiment(const ExperimentConfig& cfg);
// Writes the JSON report and the CSV named in cfg.
void write_outputs(const ExperimentConfig& cfg, const Report& r);

// CSV seed,n,guess,stabilized,verdict from a report's stored grid rows.
std::string convergence_table(const json& report, const std::vector<std::size_t>& grid);
void emit_convergence_table(const json& report, const std::vector<std::size_t>& grid,
                            const std::filesystem::path& path);

}  // namespace mlab

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hcae/classify.hpp"
#include "hcae/data.hpp"
#include "hcae/model.hpp"

namespace hcae {

// Fully-resolved run configuration: config-file values overridden by
// command-line flags. The resolved form is echoed into every output
// directory.
struct RunConfig {
  // data source: a manifest path, or the synthetic generator
  std::string manifest;  // empty -> synthetic
  SyntheticParams synthetic;

  int k = 5;
  int hidden_dim = 32;
  int latent_dim = 16;
  int epochs = 30;
  double lr = 0.025;
  double disc_lr = 0.001;
  std::string prior = "projection";
  double recon_weight = 1.0;
  double gen_weight = 0.05;

  int n_runs = 100;
  double train_frac = 0.8;
  double svm_reg = 1e-3;
  int svm_epochs = 200;

  std::uint64_t seed = 0;
  std::string out = "hcae_out";
  int threads = 0;  // 0 = hardware concurrency
  bool ablate_views = false;

  HcaeConfig model_config() const;
  Cohort load_source() const;
  // stable key order, matching the config-file key set
  std::vector<std::pair<std::string, std::string>> echo() const;
};

// Flat key = value file; '#' starts a comment. Unknown keys are errors.
RunConfig load_run_config(const std::filesystem::path& file);
void apply_config_line(RunConfig& cfg, const std::string& key,
                       const std::string& value);
void write_resolved_config(const RunConfig& cfg,
                           const std::filesystem::path& dir);

// Stage commands. They write into stage-named subdirectories of cfg.out and
// return a process exit code: 0 success, 2 usage/parameter/input error,
// 1 runtime failure. Diagnostics go to stderr.
int cmd_build(const RunConfig& cfg);
int cmd_embed(const RunConfig& cfg);
int cmd_evaluate(const RunConfig& cfg);
int cmd_pipeline(const RunConfig& cfg);

// Maps an exception to the documented exit code and prints a one-line
// diagnostic.
int report_error_code(const std::exception& e);

}  // namespace hcae

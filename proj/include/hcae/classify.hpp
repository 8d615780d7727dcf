#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hcae/model.hpp"
#include "hcae/numerics.hpp"

namespace hcae {

// Linear SVM trained by seeded Pegasos-style stochastic subgradient descent
// on the L2-regularized hinge loss. Features are standardized per column;
// the standardization is part of the model.
struct SvmModel {
  Vector weights;
  double bias = 0.0;
  double reg = 1e-3;
  Vector feature_mean;
  Vector feature_scale;
  std::vector<double> epoch_objectives;  // hinge + L2 after each epoch

  double objective(const Matrix& standardized, const std::vector<int>& labels) const;
};

struct SvmOptions {
  double reg = 1e-3;
  int epochs = 200;
};

// labels are +1/-1 per row. Throws TrainingError if only one class is
// present.
SvmModel svm_train(const Matrix& features, const std::vector<int>& labels,
                   double reg, int epochs, std::uint64_t seed);

// sign(w . standardize(x) + b); exact zero maps to +1.
std::vector<int> svm_predict(const SvmModel& model, const Matrix& features);

struct EvalReport {
  std::vector<double> accuracies;  // one per run
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population standard deviation over runs
  int n_runs = 0;
  double train_frac = 0.0;
  std::uint64_t seed = 0;
  // final per-subject reconstruction error, when available
  std::vector<std::pair<std::string, double>> recon_errors;
  // resolved configuration echo, when produced by the pipeline
  std::vector<std::pair<std::string, std::string>> config_echo;

  double mean_recon_error() const;
};

// The repeated randomized split protocol: for each run, a seeded stratified
// train_frac split, an SVM fit on flattened embeddings, and the test
// accuracy. Exactly two classes are supported; each class needs at least
// two subjects so every run has train and test members of both.
EvalReport evaluate_protocol(const std::vector<Embedding>& embeddings,
                             const std::vector<std::string>& labels,
                             const std::vector<std::string>& class_names,
                             int n_runs, double train_frac, std::uint64_t seed,
                             const SvmOptions& svm = {});

// Stratified index split; returns (train, test) indices. Class proportions
// are preserved within one subject per class.
std::pair<std::vector<int>, std::vector<int>> stratified_split(
    const std::vector<std::string>& labels,
    const std::vector<std::string>& class_names, double train_frac, Rng& rng);

// Structured text report: one block per run plus a summary block.
void write_report(const std::filesystem::path& file, const EvalReport& report);
// Plot-ready delimited table: run,accuracy rows.
void write_report_table(const std::filesystem::path& file,
                        const EvalReport& report);

}  // namespace hcae

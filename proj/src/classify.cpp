#include "hcae/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

namespace hcae {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Matrix standardize(const Matrix& features, const Vector& mean,
                   const Vector& scale) {
  Matrix out = features;
  out.rowwise() -= mean.transpose();
  out.array().rowwise() /= scale.transpose().array();
  return out;
}

}  // namespace

double SvmModel::objective(const Matrix& standardized,
                           const std::vector<int>& labels) const {
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < standardized.rows(); ++i) {
    const double margin =
        labels[i] * (standardized.row(i).dot(weights) + bias);
    hinge += std::max(0.0, 1.0 - margin);
  }
  hinge /= static_cast<double>(standardized.rows());
  return 0.5 * reg * (weights.squaredNorm() + bias * bias) + hinge;
}

SvmModel svm_train(const Matrix& features, const std::vector<int>& labels,
                   double reg, int epochs, std::uint64_t seed) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (n == 0 || static_cast<Eigen::Index>(labels.size()) != n) {
    throw ParameterError("svm_train: labels do not match feature rows");
  }
  if (!(reg > 0.0)) throw ParameterError("svm_train: reg must be > 0");
  if (epochs < 1) throw ParameterError("svm_train: epochs must be >= 1");
  if (!features.allFinite()) {
    throw ValidationError("svm_train: non-finite feature matrix");
  }
  bool has_pos = false, has_neg = false;
  for (int y : labels) {
    if (y == 1) has_pos = true;
    else if (y == -1) has_neg = true;
    else throw ParameterError("svm_train: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) {
    throw TrainingError("svm_train: training set contains a single class");
  }

  SvmModel model;
  model.reg = reg;
  model.feature_mean = features.colwise().mean();
  Vector var = (features.rowwise() - model.feature_mean.transpose())
                   .array()
                   .square()
                   .colwise()
                   .mean();
  model.feature_scale = var.array().sqrt().max(1e-12).matrix();
  const Matrix x = standardize(features, model.feature_mean, model.feature_scale);

  // Pegasos on the bias-augmented weight vector: the step-size schedule
  // 1/(reg*t) starts huge, and shrinking the bias together with the weights
  // is what damps the first-step transient. The returned model is the tail
  // average of the iterates; the last iterate still jitters by ~1/(reg*T).
  Vector w = Vector::Zero(d);
  double b = 0.0;
  Rng rng(seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const long total_steps = static_cast<long>(epochs) * n;
  const long burn_in = total_steps / 5;
  Vector w_sum = Vector::Zero(d);
  double b_sum = 0.0;
  long avg_count = 0;
  long t = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (int idx : order) {
      ++t;
      const double eta = 1.0 / (reg * static_cast<double>(t));
      const double margin = labels[idx] * (x.row(idx).dot(w) + b);
      w *= (1.0 - eta * reg);
      b *= (1.0 - eta * reg);
      if (margin < 1.0) {
        w += eta * labels[idx] * x.row(idx).transpose();
        b += eta * labels[idx];
      }
      if (t > burn_in) {
        w_sum += w;
        b_sum += b;
        ++avg_count;
      }
    }
    // objective of the model that would be returned if training stopped here
    if (avg_count > 0) {
      model.weights = w_sum / static_cast<double>(avg_count);
      model.bias = b_sum / static_cast<double>(avg_count);
    } else {
      model.weights = w;
      model.bias = b;
    }
    model.epoch_objectives.push_back(model.objective(x, labels));
  }
  if (!model.weights.allFinite() || !std::isfinite(model.bias)) {
    throw TrainingError("svm_train: diverged to non-finite weights");
  }
  return model;
}

std::vector<int> svm_predict(const SvmModel& model, const Matrix& features) {
  if (features.cols() != model.weights.size()) {
    throw ShapeError("svm_predict: feature dim " +
                     std::to_string(features.cols()) + " does not match model dim " +
                     std::to_string(model.weights.size()));
  }
  const Matrix x = standardize(features, model.feature_mean, model.feature_scale);
  std::vector<int> out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double score = x.row(i).dot(model.weights) + model.bias;
    out[i] = score < 0.0 ? -1 : 1;  // zero maps to +1
  }
  return out;
}

std::pair<std::vector<int>, std::vector<int>> stratified_split(
    const std::vector<std::string>& labels,
    const std::vector<std::string>& class_names, double train_frac, Rng& rng) {
  std::vector<int> train, test;
  for (const auto& cls : class_names) {
    std::vector<int> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(static_cast<int>(i));
    }
    if (members.size() < 2) {
      throw ProtocolError("class '" + cls + "' has fewer than 2 subjects");
    }
    rng.shuffle(members);
    long n_train = std::lround(train_frac * static_cast<double>(members.size()));
    n_train = std::clamp(n_train, 1l, static_cast<long>(members.size()) - 1);
    train.insert(train.end(), members.begin(), members.begin() + n_train);
    test.insert(test.end(), members.begin() + n_train, members.end());
  }
  return {train, test};
}

EvalReport evaluate_protocol(const std::vector<Embedding>& embeddings,
                             const std::vector<std::string>& labels,
                             const std::vector<std::string>& class_names,
                             int n_runs, double train_frac, std::uint64_t seed,
                             const SvmOptions& svm) {
  if (embeddings.empty() || embeddings.size() != labels.size()) {
    throw ParameterError("evaluate_protocol: labels do not match embeddings");
  }
  if (n_runs < 1) throw ParameterError("evaluate_protocol: n_runs must be >= 1");
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw ParameterError("evaluate_protocol: train_frac must lie in (0,1)");
  }
  if (class_names.size() != 2) {
    throw ProtocolError("evaluate_protocol: exactly 2 classes required, got " +
                        std::to_string(class_names.size()));
  }
  for (const auto& l : labels) {
    if (std::find(class_names.begin(), class_names.end(), l) ==
        class_names.end()) {
      throw ProtocolError("evaluate_protocol: label '" + l +
                          "' not in class names");
    }
  }

  const Eigen::Index dim = embeddings.front().z.size();
  Matrix features(embeddings.size(), dim);
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].z.size() != dim) {
      throw ShapeError("evaluate_protocol: embedding dims differ across subjects");
    }
    features.row(i) = embeddings[i].flattened().transpose();
  }
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[i] = labels[i] == class_names[0] ? 1 : -1;
  }

  EvalReport report;
  report.n_runs = n_runs;
  report.train_frac = train_frac;
  report.seed = seed;
  for (int run = 0; run < n_runs; ++run) {
    Rng rng(derive_seed(seed, "run", run));
    auto [train_idx, test_idx] =
        stratified_split(labels, class_names, train_frac, rng);
    Matrix train_x(train_idx.size(), dim);
    std::vector<int> train_y(train_idx.size());
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
      train_x.row(i) = features.row(train_idx[i]);
      train_y[i] = y[train_idx[i]];
    }
    const SvmModel model =
        svm_train(train_x, train_y, svm.reg, svm.epochs,
                  derive_seed(seed, "svm", run));
    Matrix test_x(test_idx.size(), dim);
    for (std::size_t i = 0; i < test_idx.size(); ++i) {
      test_x.row(i) = features.row(test_idx[i]);
    }
    const std::vector<int> pred = svm_predict(model, test_x);
    int correct = 0;
    for (std::size_t i = 0; i < test_idx.size(); ++i) {
      if (pred[i] == y[test_idx[i]]) ++correct;
    }
    report.accuracies.push_back(static_cast<double>(correct) /
                                static_cast<double>(test_idx.size()));
  }

  double sum = 0.0;
  for (double a : report.accuracies) sum += a;
  report.mean_accuracy = sum / static_cast<double>(n_runs);
  double sq = 0.0;
  for (double a : report.accuracies) {
    sq += (a - report.mean_accuracy) * (a - report.mean_accuracy);
  }
  report.std_accuracy = std::sqrt(sq / static_cast<double>(n_runs));
  return report;
}

double EvalReport::mean_recon_error() const {
  if (recon_errors.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const auto& [id, e] : recon_errors) sum += e;
  return sum / static_cast<double>(recon_errors.size());
}

void write_report(const std::filesystem::path& file, const EvalReport& report) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write report: " + file.string());
  out << "evaluation report\n";
  out << "n_runs = " << report.n_runs << '\n';
  out << "train_frac = " << fmt_double(report.train_frac) << '\n';
  out << "seed = " << report.seed << '\n';
  out << '\n';
  for (std::size_t i = 0; i < report.accuracies.size(); ++i) {
    out << "run " << (i + 1) << '\n';
    out << "accuracy = " << fmt_double(report.accuracies[i]) << '\n';
    out << '\n';
  }
  out << "summary\n";
  out << "mean_accuracy = " << fmt_double(report.mean_accuracy) << '\n';
  out << "std_accuracy = " << fmt_double(report.std_accuracy) << '\n';
  if (!report.recon_errors.empty()) {
    out << "mean_reconstruction_error = " << fmt_double(report.mean_recon_error())
        << '\n';
    for (const auto& [id, e] : report.recon_errors) {
      out << "reconstruction_error " << id << " = " << fmt_double(e) << '\n';
    }
  }
  if (!report.config_echo.empty()) {
    out << '\n' << "configuration\n";
    for (const auto& [k, v] : report.config_echo) {
      out << k << " = " << v << '\n';
    }
  }
}

void write_report_table(const std::filesystem::path& file,
                        const EvalReport& report) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write report table: " + file.string());
  out << "run,accuracy\n";
  for (std::size_t i = 0; i < report.accuracies.size(); ++i) {
    out << (i + 1) << ',' << fmt_double(report.accuracies[i]) << '\n';
  }
}

}  // namespace hcae

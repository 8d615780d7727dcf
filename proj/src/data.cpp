#include "hcae/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "hcae/rng.hpp"

namespace hcae {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_finite_square(const Matrix& m, const std::string& context) {
  if (m.rows() != m.cols()) {
    throw ValidationError(context + ": matrix is " + detail::shape_str(m) +
                          ", expected square");
  }
  if (!m.allFinite()) {
    throw ValidationError(context + ": matrix contains NaN/Inf entries");
  }
}

}  // namespace

Matrix read_matrix_text(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open matrix file: " + file.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (row.empty()) continue;  // blank line
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw IoError("ragged row in matrix file: " + file.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty matrix file: " + file.string());
  Matrix m(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void write_matrix_text(const fs::path& file, const Matrix& m) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write matrix file: " + file.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << fmt_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + file.string());
}

ConnectivityMatrix symmetrize(const Matrix& values, int view_id) {
  check_finite_square(values, "symmetrize");
  Matrix s = 0.5 * (values + values.transpose());
  s.diagonal().setZero();
  return {std::move(s), view_id};
}

ConnectivityMatrix make_connectivity(const Matrix& values, int view_id,
                                     const std::string& context, double tol) {
  check_finite_square(values, context);
  const double asym = (values - values.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol) {
    throw ValidationError(context + ": matrix is asymmetric (max |A-A^T| = " +
                          fmt_double(asym) + ")");
  }
  const double diag = values.diagonal().cwiseAbs().maxCoeff();
  if (diag > tol) {
    throw ValidationError(context + ": nonzero diagonal (max |A_ii| = " +
                          fmt_double(diag) + ")");
  }
  return symmetrize(values, view_id);
}

Cohort load_cohort(const fs::path& dir_path, const fs::path& manifest) {
  const fs::path manifest_path =
      manifest.is_absolute() ? manifest : dir_path / manifest;
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest: " + manifest_path.string());
  const fs::path base = manifest_path.parent_path();

  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("manifest is empty: " + manifest_path.string());
  }
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "subject_id" || header[1] != "label") {
    throw ValidationError(
        "manifest header must be subject_id,label,view_1,...: " +
        manifest_path.string());
  }
  const int n_views = static_cast<int>(header.size()) - 2;

  Cohort cohort;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != n_views + 2) {
      throw ValidationError("manifest row has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(n_views + 2) + ": " + line);
    }
    MultiViewConnectome subject;
    subject.subject_id = fields[0];
    subject.label = fields[1];
    for (int v = 0; v < n_views; ++v) {
      const fs::path file = base / fields[2 + v];
      if (!fs::exists(file)) {
        throw IoError("missing matrix file: " + file.string() +
                      " (subject " + subject.subject_id + ", view " +
                      std::to_string(v + 1) + ")");
      }
      const Matrix m = read_matrix_text(file);
      subject.views.push_back(make_connectivity(
          m, v + 1,
          "subject " + subject.subject_id + " view " + std::to_string(v + 1)));
    }
    for (const auto& view : subject.views) {
      if (view.n_nodes() != subject.n_nodes()) {
        throw ValidationError("subject " + subject.subject_id +
                              ": views disagree on node count");
      }
    }
    if (!subject.label.empty() && seen.insert(subject.label).second) {
      cohort.class_names.push_back(subject.label);
    }
    cohort.subjects.push_back(std::move(subject));
  }
  if (cohort.subjects.empty()) {
    throw ValidationError("no subjects in manifest: " + manifest_path.string());
  }
  const int n = cohort.n_nodes();
  const int m = cohort.n_views();
  for (const auto& s : cohort.subjects) {
    if (s.n_nodes() != n || s.n_views() != m) {
      throw ValidationError("subject " + s.subject_id +
                            ": inconsistent matrix size across cohort");
    }
  }
  return cohort;
}

void write_cohort(const Cohort& cohort, const fs::path& dir,
                  const std::string& manifest_name) {
  fs::create_directories(dir);
  std::ofstream out(dir / manifest_name);
  if (!out) throw IoError("cannot write manifest: " + (dir / manifest_name).string());
  out << "subject_id,label";
  for (int v = 1; v <= cohort.n_views(); ++v) out << ",view_" << v;
  out << '\n';
  for (const auto& subject : cohort.subjects) {
    out << subject.subject_id << ',' << subject.label;
    for (const auto& view : subject.views) {
      const std::string file =
          subject.subject_id + "_view" + std::to_string(view.view_id) + ".txt";
      write_matrix_text(dir / file, view.values);
      out << ',' << file;
    }
    out << '\n';
  }
}

Cohort generate_synthetic_cohort(const SyntheticParams& p, std::uint64_t seed) {
  if (p.n_classes < 1) throw ParameterError("n_classes must be >= 1");
  if (p.n_subjects < 2 * p.n_classes) {
    throw ParameterError("n_subjects must be >= 2 * n_classes");
  }
  if (p.n_nodes < 4) throw ParameterError("n_nodes must be >= 4");
  if (p.n_views < 1) throw ParameterError("n_views must be >= 1");
  if (!(p.signal > 0.0 && p.signal <= 1.0)) {
    throw ParameterError("signal must lie in (0, 1]");
  }

  const int n_blocks = std::min(4, p.n_nodes / 2);
  auto block_of = [&](int node) {
    return static_cast<int>(static_cast<long>(node) * n_blocks / p.n_nodes);
  };

  // Per (class, view) template: shared block strengths, class-specific block
  // shifts on a view-dependent subset of block pairs (so every view carries a
  // partial share of the class signal), and class-specific per-pair texture.
  // The texture gives nodes individual connectivity profiles, which is what
  // makes the k-NN hyperedges template-driven rather than noise-driven.
  std::vector<Matrix> templates(
      static_cast<std::size_t>(p.n_classes) * p.n_views);
  for (int m = 0; m < p.n_views; ++m) {
    Rng base_rng(derive_seed(seed, "view-base", m));
    Matrix base(n_blocks, n_blocks);
    for (int a = 0; a < n_blocks; ++a) {
      for (int b = a; b < n_blocks; ++b) {
        // community structure: within-block ties are clearly stronger
        base(a, b) = base(b, a) =
            a == b ? base_rng.uniform(0.6, 0.75) : base_rng.uniform(0.2, 0.35);
      }
    }
    for (int c = 0; c < p.n_classes; ++c) {
      Rng cls_rng(derive_seed(seed, "class-template",
                              static_cast<std::uint64_t>(c) * p.n_views + m));
      Matrix block_shift = Matrix::Zero(n_blocks, n_blocks);
      for (int a = 0; a < n_blocks; ++a) {
        for (int b = a; b < n_blocks; ++b) {
          // roughly half the block pairs differ per class in any one view
          if (cls_rng.uniform() < 0.5) {
            block_shift(a, b) = block_shift(b, a) =
                p.signal * 0.3 * (cls_rng.uniform() < 0.5 ? -1.0 : 1.0);
          }
        }
      }
      Matrix t(p.n_nodes, p.n_nodes);
      t.setZero();
      for (int i = 0; i < p.n_nodes; ++i) {
        for (int j = i + 1; j < p.n_nodes; ++j) {
          const int bi = block_of(i), bj = block_of(j);
          const double texture = p.signal * cls_rng.uniform(-0.1, 0.1);
          t(i, j) = t(j, i) = base(bi, bj) + block_shift(bi, bj) + texture;
        }
      }
      templates[static_cast<std::size_t>(c) * p.n_views + m] = std::move(t);
    }
  }

  Cohort cohort;
  for (int c = 0; c < p.n_classes; ++c) {
    cohort.class_names.push_back("class_" + std::to_string(c));
  }
  const double noise_amp = 1.0 - p.signal;
  char id[32];
  for (int s = 0; s < p.n_subjects; ++s) {
    const int c = s % p.n_classes;  // balanced within one
    Rng rng(derive_seed(seed, "subject-noise", s));
    MultiViewConnectome subject;
    std::snprintf(id, sizeof(id), "subj_%03d", s);
    subject.subject_id = id;
    subject.label = cohort.class_names[c];
    for (int m = 0; m < p.n_views; ++m) {
      const Matrix& t = templates[static_cast<std::size_t>(c) * p.n_views + m];
      Matrix x = Matrix::Zero(p.n_nodes, p.n_nodes);
      for (int i = 0; i < p.n_nodes; ++i) {
        for (int j = i + 1; j < p.n_nodes; ++j) {
          x(i, j) = x(j, i) = t(i, j) + noise_amp * rng.uniform(-0.5, 0.5);
        }
      }
      subject.views.push_back({std::move(x), m + 1});
    }
    cohort.subjects.push_back(std::move(subject));
  }
  return cohort;
}

}  // namespace hcae

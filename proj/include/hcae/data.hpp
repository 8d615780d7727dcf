#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hcae/numerics.hpp"

namespace hcae {

// One connectivity view: symmetric, zero-diagonal, finite.
struct ConnectivityMatrix {
  Matrix values;
  int view_id = 1;

  int n_nodes() const { return static_cast<int>(values.rows()); }
};

// All views of one subject, identical node set and ordering across views.
struct MultiViewConnectome {
  std::string subject_id;
  std::vector<ConnectivityMatrix> views;
  std::string label;  // empty = unlabeled

  int n_nodes() const { return views.empty() ? 0 : views.front().n_nodes(); }
  int n_views() const { return static_cast<int>(views.size()); }
};

struct Cohort {
  std::vector<MultiViewConnectome> subjects;
  std::vector<std::string> class_names;  // distinct labels, first-appearance order

  int n_subjects() const { return static_cast<int>(subjects.size()); }
  int n_nodes() const { return subjects.empty() ? 0 : subjects.front().n_nodes(); }
  int n_views() const { return subjects.empty() ? 0 : subjects.front().n_views(); }
};

// Plain-text matrix grid: one row per line, whitespace-separated decimals.
// Written with 17 significant digits so a round trip is value-exact.
Matrix read_matrix_text(const std::filesystem::path& file);
void write_matrix_text(const std::filesystem::path& file, const Matrix& m);

// (A + A^T)/2 with the diagonal forced to zero. Throws ValidationError on
// non-square or non-finite input.
ConnectivityMatrix symmetrize(const Matrix& values, int view_id = 1);

// Validating constructor used by the loaders: asymmetry up to `tol` is
// silently averaged away (textual round-off), anything larger is an error.
ConnectivityMatrix make_connectivity(const Matrix& values, int view_id,
                                     const std::string& context,
                                     double tol = 1e-9);

// Loads a cohort described by a manifest with header
//   subject_id,label,view_1,...,view_M
// Matrix paths are resolved relative to the manifest's directory. `manifest`
// may itself be relative to `dir_path`.
Cohort load_cohort(const std::filesystem::path& dir_path,
                   const std::filesystem::path& manifest);

// Writes every view matrix plus a manifest (named `manifest_name`) into
// `dir`; load_cohort on the result reproduces the cohort.
void write_cohort(const Cohort& cohort, const std::filesystem::path& dir,
                  const std::string& manifest_name = "manifest.csv");

struct SyntheticParams {
  int n_subjects = 40;
  int n_nodes = 35;
  int n_views = 4;
  int n_classes = 2;
  double signal = 0.8;  // in (0,1]; noise amplitude is (1 - signal)
};

// Deterministic labeled cohort with block-community class templates. Each
// (class, view) pair gets its own template (block strengths plus per-pair
// texture), so the class signal is spread across views and no single view
// carries all of it. Subjects are the class template plus i.i.d. symmetric
// noise scaled by (1 - signal); labels are balanced within one subject.
Cohort generate_synthetic_cohort(const SyntheticParams& params,
                                 std::uint64_t seed);

}  // namespace hcae

#include "hcae/hypergraph.hpp"

#include <algorithm>

#include <vector>

namespace hcae {

Matrix build_view_incidence(const ConnectivityMatrix& x, int k) {
  const int n = x.n_nodes();
  if (k < 1 || k > n - 1) {
    throw ParameterError("build_view_incidence: k = " + std::to_string(k) +
                         " out of range [1, " + std::to_string(n - 1) + "]");
  }
  Matrix h = Matrix::Zero(n, n);
  std::vector<int> order;
  order.reserve(n - 1);
  for (int center = 0; center < n; ++center) {
    order.clear();
    for (int i = 0; i < n; ++i) {
      if (i != center) order.push_back(i);
    }
    // strongest connectivity first, lower index wins ties
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return x.values(center, a) > x.values(center, b);
    });
    h(center, center) = 1.0;
    for (int i = 0; i < k; ++i) h(order[i], center) = 1.0;
  }
  return h;
}

std::pair<Hyperconnectome, StackedFeatures> build_hyperconnectome(
    const MultiViewConnectome& subject, int k) {
  if (subject.n_views() < 1) {
    throw ParameterError("build_hyperconnectome: subject '" +
                         subject.subject_id + "' has no views");
  }
  const int n = subject.n_nodes();
  const int m = subject.n_views();

  Hyperconnectome h;
  h.k = k;
  h.n_views = m;
  h.incidence.resize(n, static_cast<Eigen::Index>(m) * n);
  StackedFeatures features;
  features.values.resize(n, static_cast<Eigen::Index>(m) * n);
  for (int v = 0; v < m; ++v) {
    h.incidence.middleCols(static_cast<Eigen::Index>(v) * n, n) =
        build_view_incidence(subject.views[v], k);
    features.values.middleCols(static_cast<Eigen::Index>(v) * n, n) =
        subject.views[v].values;
  }
  h.edge_weights = Vector::Ones(h.incidence.cols());
  h.vertex_degrees = h.incidence * h.edge_weights;
  h.edge_degrees = h.incidence.transpose() * Vector::Ones(n);
  return {std::move(h), std::move(features)};
}

Matrix propagation_operator(const Hyperconnectome& h) {
  if ((h.vertex_degrees.array() <= 0.0).any() ||
      (h.edge_degrees.array() <= 0.0).any()) {
    // cannot occur for incidences built here (every vertex centers an edge)
    throw TrainingError("propagation_operator: zero degree");
  }
  const Vector dv_inv_sqrt = h.vertex_degrees.array().rsqrt();
  const Vector col_scale =
      (h.edge_weights.array() / h.edge_degrees.array()).sqrt();
  // Delta = S S^T with S = D_v^{-1/2} H (W D_e^{-1})^{1/2}; forming it this
  // way keeps the result PSD, then the average enforces exact symmetry.
  const Matrix s = dv_inv_sqrt.asDiagonal() * h.incidence * col_scale.asDiagonal();
  const Matrix delta = s * s.transpose();
  return 0.5 * (delta + delta.transpose());
}

}  // namespace hcae

#pragma once

#include <utility>

#include "hcae/data.hpp"
#include "hcae/numerics.hpp"

namespace hcae {

// Multi-view hyperconnectome: horizontally stacked per-view incidence
// matrices. Column block b holds the N hyperedges of view b, one centered on
// each vertex; every hyperedge contains its center plus its k nearest
// neighbors, so every column sums to k+1. Hyperedge weights are fixed at 1.
struct Hyperconnectome {
  Matrix incidence;       // N x (M*N), entries in {0,1}
  Vector edge_weights;    // M*N, all ones
  Vector vertex_degrees;  // N, sum_e w_e * H(v,e)
  Vector edge_degrees;    // M*N, sum_v H(v,e) == k+1
  int k = 0;
  int n_views = 0;

  int n_nodes() const { return static_cast<int>(incidence.rows()); }
  int n_edges() const { return static_cast<int>(incidence.cols()); }
};

// Horizontal stack of the view connectivity matrices, N x (M*N); node i's
// feature vector is row i.
struct StackedFeatures {
  Matrix values;
};

// Incidence matrix of one view. Column j is the hyperedge centered on node
// j: entry (i,j) = 1 iff i == j or i is among the k nodes with the largest
// connectivity x(j,i), ties broken toward the lower node index.
Matrix build_view_incidence(const ConnectivityMatrix& x, int k);

// Stacks per-view incidences and features in view order and computes the
// degree vectors.
std::pair<Hyperconnectome, StackedFeatures> build_hyperconnectome(
    const MultiViewConnectome& subject, int k);

// Normalized propagation operator
//   Delta = D_v^{-1/2} H W D_e^{-1} H^T D_v^{-1/2}
// Symmetric PSD with spectral radius <= 1; fixed vector D_v^{1/2} * 1.
Matrix propagation_operator(const Hyperconnectome& h);

}  // namespace hcae

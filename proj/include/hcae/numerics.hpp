#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hcae/errors.hpp"

namespace hcae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Shape-checked wrappers around the dense backend. Shape mismatches throw
// ShapeError naming both shapes instead of aborting inside the backend.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix scale(const Matrix& a, double s);
Matrix hadamard(const Matrix& a, const Matrix& b);

// Elementwise activations.
Matrix relu(const Matrix& x);
// Numerically stable logistic; no overflow anywhere in double range.
Matrix sigmoid(const Matrix& x);
double sigmoid_scalar(double x);

// log(sigmoid(x)) and log(1 - sigmoid(x)) without ever forming sigmoid(x),
// exact down to the underflow limit.
double log_sigmoid(double x);
double log_one_minus_sigmoid(double x);

// Scalar loss value plus named gradients of matching shapes.
struct GradientBundle {
  double loss = 0.0;
  std::map<std::string, Matrix> grads;
};

// Named views into a parameter set; the optimizer and the finite-difference
// harness both walk parameters through this.
using ParamRefs = std::vector<std::pair<std::string, Matrix*>>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  Eigen::Index worst_row = 0;
  Eigen::Index worst_col = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::map<std::string, double> per_param;

  bool passed(double tol) const { return max_rel_error <= tol; }
};

// Central-difference check of an analytic gradient. `f` is evaluated with the
// referenced parameters perturbed in place (restored afterwards). Relative
// error per entry uses denominator max(|analytic|, |numeric|, 1e-8). Throws
// TrainingError naming the parameter if the loss goes non-finite while
// probing.
GradCheckReport grad_check(const std::function<double()>& f,
                           const ParamRefs& params,
                           const GradientBundle& analytic, double eps);

// Adam-style adaptive first/second moment state. One instance per optimized
// parameter group; the step counter is shared across parameters.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step_count = 0;
  std::map<std::string, std::pair<Matrix, Matrix>> moments;
};

// One adaptive update of every parameter in `params` using the gradients in
// `grads`. Throws TrainingError naming the parameter on a non-finite
// gradient. Parameters with zero gradient are left bit-identical.
void adaptive_sgd_step(const ParamRefs& params, const GradientBundle& grads,
                       AdamState& state, double lr);

namespace detail {
inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}
}  // namespace detail

}  // namespace hcae

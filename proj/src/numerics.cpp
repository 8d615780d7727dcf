#include "hcae/numerics.hpp"

#include <cmath>

namespace hcae {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     detail::shape_str(a) + " vs " + detail::shape_str(b));
  }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: shape mismatch " + detail::shape_str(a) +
                     " vs " + detail::shape_str(b));
  }
  return a * b;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  return a + b;
}

Matrix transpose(const Matrix& a) { return a.transpose(); }

Matrix scale(const Matrix& a, double s) { return a * s; }

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  return a.cwiseProduct(b);
}

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

double sigmoid_scalar(double x) {
  // branch on sign so exp never overflows
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix sigmoid(const Matrix& x) {
  return x.unaryExpr([](double v) { return sigmoid_scalar(v); });
}

double log_sigmoid(double x) {
  // log sigmoid(x) = -softplus(-x)
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double log_one_minus_sigmoid(double x) { return log_sigmoid(-x); }

GradCheckReport grad_check(const std::function<double()>& f,
                           const ParamRefs& params,
                           const GradientBundle& analytic, double eps) {
  if (!(eps > 0.0)) throw ParameterError("grad_check: eps must be positive");
  GradCheckReport report;
  for (const auto& [name, param] : params) {
    auto it = analytic.grads.find(name);
    if (it == analytic.grads.end()) {
      throw ParameterError("grad_check: no analytic gradient for parameter '" +
                           name + "'");
    }
    const Matrix& grad = it->second;
    if (grad.rows() != param->rows() || grad.cols() != param->cols()) {
      throw ShapeError("grad_check: gradient shape " + detail::shape_str(grad) +
                       " does not match parameter '" + name + "' shape " +
                       detail::shape_str(*param));
    }
    double param_max = 0.0;
    for (Eigen::Index c = 0; c < param->cols(); ++c) {
      for (Eigen::Index r = 0; r < param->rows(); ++r) {
        const double saved = (*param)(r, c);
        (*param)(r, c) = saved + eps;
        const double f_plus = f();
        (*param)(r, c) = saved - eps;
        const double f_minus = f();
        (*param)(r, c) = saved;
        if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
          throw TrainingError("grad_check: non-finite loss while perturbing '" +
                              name + "'");
        }
        const double numeric = (f_plus - f_minus) / (2.0 * eps);
        const double a = grad(r, c);
        const double denom =
            std::max({std::abs(a), std::abs(numeric), 1e-8});
        const double rel = std::abs(a - numeric) / denom;
        if (rel > param_max) param_max = rel;
        if (rel > report.max_rel_error) {
          report.max_rel_error = rel;
          report.worst_param = name;
          report.worst_row = r;
          report.worst_col = c;
          report.worst_analytic = a;
          report.worst_numeric = numeric;
        }
      }
    }
    report.per_param[name] = param_max;
  }
  return report;
}

void adaptive_sgd_step(const ParamRefs& params, const GradientBundle& grads,
                       AdamState& state, double lr) {
  if (!(lr > 0.0)) throw ParameterError("adaptive_sgd_step: lr must be > 0");
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step_count);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step_count);
  for (const auto& [name, param] : params) {
    auto it = grads.grads.find(name);
    if (it == grads.grads.end()) {
      throw ParameterError("adaptive_sgd_step: missing gradient for '" + name +
                           "'");
    }
    const Matrix& g = it->second;
    if (!g.allFinite()) {
      throw TrainingError("adaptive_sgd_step: non-finite gradient for '" +
                          name + "'");
    }
    if (g.rows() != param->rows() || g.cols() != param->cols()) {
      throw ShapeError("adaptive_sgd_step: gradient shape " +
                       detail::shape_str(g) + " does not match '" + name +
                       "' shape " + detail::shape_str(*param));
    }
    auto [mit, inserted] = state.moments.try_emplace(
        name, Matrix::Zero(g.rows(), g.cols()), Matrix::Zero(g.rows(), g.cols()));
    Matrix& m = mit->second.first;
    Matrix& v = mit->second.second;
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    const Matrix m_hat = m / bc1;
    const Matrix v_hat = v / bc2;
    param->array() -=
        lr * m_hat.array() / (v_hat.array().sqrt() + state.eps);
  }
}

}  // namespace hcae

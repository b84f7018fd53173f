#include "qshield/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qshield/errors.hpp"

namespace qshield::numerics {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
  out << ']';
  return out.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  require(shape_size(shape_) == data_.size(), Errc::ShapeMismatch,
          "tensor shape " + shape_string(shape_) + " does not match " +
              std::to_string(data_.size()) + " elements");
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  require(a.shape() == b.shape(), Errc::ShapeMismatch,
          std::string(what) + ": " + shape_string(a.shape()) + " vs " +
              shape_string(b.shape()));
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& x, const Tensor& dy) {
  require_same_shape(x, dy, "relu_backward");
  Tensor dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
  return dx;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = sigmoid(v);
  return y;
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& dy) {
  require_same_shape(y, dy, "sigmoid_backward");
  Tensor dx(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * y[i] * (1.0 - y[i]);
  return dx;
}

MseResult mse(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "mse");
  MseResult result{0.0, Tensor(pred.shape())};
  const std::size_t n = pred.size();
  if (n == 0) return result;
  const double scale = 2.0 / static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = pred[i] - target[i];
    sum += diff * diff;
    result.d_pred[i] = scale * diff;
  }
  result.loss = sum / static_cast<double>(n);
  return result;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr) {
  require(params.size() == grads.size() && params.size() == state.m.size() &&
              params.size() == state.v.size(),
          Errc::ShapeMismatch, "adam_step: parameter/gradient/state sizes differ");
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(AdamState::kBeta1, t);
  const double correction2 = 1.0 - std::pow(AdamState::kBeta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = AdamState::kBeta1 * state.m[i] + (1.0 - AdamState::kBeta1) * g;
    state.v[i] = AdamState::kBeta2 * state.v[i] + (1.0 - AdamState::kBeta2) * g * g;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::kEpsHat);
  }
}

namespace {

struct FcDims {
  std::size_t batch;
  std::size_t in;
  std::size_t out;
};

FcDims fc_dims(const Tensor& x, const Tensor& weights) {
  require(weights.rank() == 2, Errc::ShapeMismatch, "fc weights must be [out, in]");
  require(x.rank() == 1 || x.rank() == 2, Errc::ShapeMismatch, "fc input must be [in] or [batch, in]");
  const std::size_t in = x.shape().back();
  require(in == weights.dim(1), Errc::ShapeMismatch,
          "fc inner dimensions: input " + shape_string(x.shape()) + " vs weights " +
              shape_string(weights.shape()));
  return {x.rank() == 2 ? x.dim(0) : 1, in, weights.dim(0)};
}

}  // namespace

Tensor fc_forward(const Tensor& x, const Tensor& weights, const Tensor& bias) {
  const FcDims d = fc_dims(x, weights);
  require(bias.size() == d.out, Errc::ShapeMismatch, "fc bias length must equal output width");
  Tensor y(x.rank() == 2 ? Shape{d.batch, d.out} : Shape{d.out});
  for (std::size_t b = 0; b < d.batch; ++b) {
    const double* xb = x.data().data() + b * d.in;
    double* yb = y.data().data() + b * d.out;
    for (std::size_t o = 0; o < d.out; ++o) {
      const double* w = weights.data().data() + o * d.in;
      double acc = bias[o];
      for (std::size_t i = 0; i < d.in; ++i) acc += w[i] * xb[i];
      yb[o] = acc;
    }
  }
  return y;
}

FcGrads fc_backward(const Tensor& x, const Tensor& weights, const Tensor& dy) {
  const FcDims d = fc_dims(x, weights);
  require(dy.size() == d.batch * d.out, Errc::ShapeMismatch, "fc dy has the wrong size");
  FcGrads g{Tensor(x.shape()), Tensor(weights.shape()), Tensor(Shape{d.out})};
  // dx = dy * W ; dW = dy^T * x ; db = column sums of dy
  gemm_nn(d.batch, d.in, d.out, dy.data().data(), weights.data().data(), g.dx.data().data(),
          false);
  gemm_tn(d.out, d.in, d.batch, dy.data().data(), x.data().data(),
          g.d_weights.data().data(), false);
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t o = 0; o < d.out; ++o) g.d_bias[o] += dy[b * d.out + o];
  return g;
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a + p * m;
    const double* bp = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double api = ap[i];
      if (api == 0.0) continue;
      double* ci = c + i * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += api * bp[j];
    }
  }
}

void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      c[i * n + j] = accumulate ? c[i * n + j] + acc : acc;
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), Errc::ShapeMismatch, "dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace qshield::numerics

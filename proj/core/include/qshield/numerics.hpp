#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace qshield::numerics {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array of doubles with shape metadata.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Same data, new shape with equal element count.
  Tensor reshaped(Shape shape) const;
  void fill(double value);

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

Tensor relu(const Tensor& x);
// dx = dy where x > 0, else 0 (including x == 0).
Tensor relu_backward(const Tensor& x, const Tensor& dy);

double sigmoid(double x);
Tensor sigmoid(const Tensor& x);
// Takes the forward output y, not the input.
Tensor sigmoid_backward(const Tensor& y, const Tensor& dy);

struct MseResult {
  double loss = 0.0;
  Tensor d_pred;
};
MseResult mse(const Tensor& pred, const Tensor& target);

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsHat = 1e-8;

  explicit AdamState(std::size_t n_params = 0) : m(n_params, 0.0), v(n_params, 0.0) {}

  std::size_t step = 0;
  std::vector<double> m;
  std::vector<double> v;
};

// In-place Adam update with bias correction.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               double lr);

// x: [batch, in] or [in]; weights: [out, in]; bias: [out]. Output has the
// matching rank ([batch, out] or [out]).
Tensor fc_forward(const Tensor& x, const Tensor& weights, const Tensor& bias);

struct FcGrads {
  Tensor dx;
  Tensor d_weights;
  Tensor d_bias;
};
FcGrads fc_backward(const Tensor& x, const Tensor& weights, const Tensor& dy);

// Plain GEMM kernels over row-major buffers. `accumulate` adds into C.
// C[m,n] (+)= A[m,k] * B[k,n]
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate);
// C[m,n] (+)= A[k,m]^T * B[k,n]
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate);
// C[m,n] (+)= A[m,k] * B[n,k]^T
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
             double* c, bool accumulate);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace qshield::numerics

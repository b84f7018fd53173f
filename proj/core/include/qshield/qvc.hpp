#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qshield/dataio.hpp"
#include "qshield/diffsim.hpp"

namespace qshield::qvc {

inline constexpr std::size_t kNumQubits = 10;
inline constexpr std::size_t kNumClasses = 10;
inline constexpr const char* kParamsVersion = "qvc-v1";

struct QvcParams {
  std::size_t n_qubits = kNumQubits;
  std::size_t n_layers = 0;
  diffsim::RotationKind rotation = diffsim::RotationKind::Euler;
  diffsim::Topology topology = diffsim::Topology::Ring;
  std::vector<double> angles;  // [layer][qubit][slot], row-major
  std::string version = kParamsVersion;

  std::size_t expected_angle_count() const;
  bool operator==(const QvcParams&) const = default;
};

// Angles i.i.d. Uniform[0, 2*pi) from Rng(seed).
QvcParams init_params(std::size_t n_layers, std::uint64_t seed,
                      diffsim::RotationKind rotation = diffsim::RotationKind::Euler,
                      diffsim::Topology topology = diffsim::Topology::Ring);

enum class GradMode { Adjoint, ParameterShift };

std::string_view to_string(GradMode mode);
GradMode parse_grad_mode(std::string_view text);

struct LossResult {
  double loss = 0.0;
  std::vector<double> d_logits;
};

// Softmax cross-entropy: loss = -log softmax(logits)[label], d = p - onehot.
LossResult loss_and_adjoint(std::span<const double> logits, int label);

// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

struct SampleGradient {
  double loss = 0.0;
  std::vector<double> logits;
  std::vector<double> d_params;
  std::vector<double> d_pixels;
};

class Qvc {
 public:
  explicit Qvc(QvcParams params);

  const QvcParams& params() const noexcept { return params_; }
  const diffsim::CircuitTape& tape() const noexcept { return tape_; }
  std::span<double> angles() noexcept { return params_.angles; }

  // logits[c] = <Z_c> after the circuit.
  std::vector<double> forward_logits(std::span<const double> pixels) const;
  std::size_t predict(std::span<const double> pixels) const;

  // Loss, parameter gradient (by `mode`) and pixel gradient (always adjoint).
  SampleGradient gradient(std::span<const double> pixels, int label,
                          GradMode mode = GradMode::Adjoint) const;

  // Short identity string: layer count plus a digest of the angles.
  std::string tag() const;

 private:
  QvcParams params_;
  diffsim::CircuitTape tape_;
};

struct TrainConfig {
  double learning_rate = 0.005;
  std::size_t batch_size = 256;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  GradMode grad_mode = GradMode::Adjoint;
  std::size_t workers = 1;

  void validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;  // mean per-sample loss seen during the epoch
  double eval_accuracy = 0.0;
  std::size_t optimizer_steps = 0;  // cumulative
};

struct TrainResult {
  QvcParams params;
  std::vector<EpochMetrics> epochs;
  std::size_t optimizer_steps = 0;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

TrainResult train_qvc(const TrainConfig& config, QvcParams initial, const dataio::Split& train,
                      const dataio::Split& eval, const EpochCallback& on_epoch = {});

double evaluate_accuracy(const Qvc& model, const dataio::ImageSet& images,
                         const dataio::LabelSet& labels, std::size_t workers = 1);

std::vector<std::size_t> predict_all(const Qvc& model, const dataio::ImageSet& images,
                                     std::size_t workers = 1);

}  // namespace qshield::qvc

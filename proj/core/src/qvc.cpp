#include "qshield/qvc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qshield/errors.hpp"
#include "qshield/numerics.hpp"
#include "qshield/parallel.hpp"
#include "qshield/rng.hpp"

namespace qshield::qvc {

std::size_t QvcParams::expected_angle_count() const {
  return n_layers * n_qubits * diffsim::angles_per_qubit(rotation);
}

QvcParams init_params(std::size_t n_layers, std::uint64_t seed, diffsim::RotationKind rotation,
                      diffsim::Topology topology) {
  require(n_layers >= 1, Errc::InvalidArgument, "a QVC needs at least one layer");
  QvcParams params;
  params.n_layers = n_layers;
  params.rotation = rotation;
  params.topology = topology;
  params.angles.resize(params.expected_angle_count());
  Rng rng(seed);
  for (double& a : params.angles) a = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return params;
}

std::string_view to_string(GradMode mode) {
  return mode == GradMode::Adjoint ? "adjoint" : "parameter-shift";
}

GradMode parse_grad_mode(std::string_view text) {
  if (text == "adjoint") return GradMode::Adjoint;
  if (text == "parameter-shift") return GradMode::ParameterShift;
  fail(Errc::InvalidArgument, "unknown gradient mode '" + std::string(text) + "'");
}

LossResult loss_and_adjoint(std::span<const double> logits, int label) {
  require(label >= 0 && static_cast<std::size_t>(label) < logits.size(), Errc::LabelOutOfRange,
          "label " + std::to_string(label) + " outside 0.." + std::to_string(logits.size() - 1));
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  LossResult result{0.0, std::vector<double>(logits.size())};
  double denom = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    result.d_logits[c] = std::exp(logits[c] - max_logit);
    denom += result.d_logits[c];
  }
  for (double& p : result.d_logits) p /= denom;
  result.loss = -(logits[label] - max_logit - std::log(denom));
  result.d_logits[label] -= 1.0;
  return result;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Qvc::Qvc(QvcParams params)
    : params_(std::move(params)),
      tape_(diffsim::CircuitTape::layered(params_.n_qubits, params_.n_layers, params_.rotation,
                                          params_.topology)) {
  require(params_.n_qubits >= kNumClasses, Errc::InvalidArgument,
          "the classifier reads one qubit per class and needs at least 10 qubits");
  require(params_.angles.size() == tape_.n_params(), Errc::ShapeMismatch,
          "QVC angle count " + std::to_string(params_.angles.size()) + " does not match " +
              std::to_string(tape_.n_params()) + " for the declared shape");
  for (double a : params_.angles) {
    require(std::isfinite(a), Errc::InvalidArgument, "non-finite QVC angle");
  }
}

std::vector<double> Qvc::forward_logits(std::span<const double> pixels) const {
  auto state = statevec::amplitude_encode(pixels, params_.n_qubits);
  diffsim::apply_tape(tape_, params_.angles, state);
  auto z = state.expect_z_all();
  z.resize(kNumClasses);
  return z;
}

std::size_t Qvc::predict(std::span<const double> pixels) const {
  return argmax(forward_logits(pixels));
}

SampleGradient Qvc::gradient(std::span<const double> pixels, int label, GradMode mode) const {
  const auto encoded = statevec::amplitude_encode(pixels, params_.n_qubits);
  auto fwd = diffsim::forward(tape_, params_.angles, encoded);
  std::vector<double> logits(fwd.expectations.begin(), fwd.expectations.begin() + kNumClasses);
  auto loss = loss_and_adjoint(logits, label);

  std::vector<double> d_expectations(params_.n_qubits, 0.0);
  std::copy(loss.d_logits.begin(), loss.d_logits.end(), d_expectations.begin());
  auto bundle = diffsim::backward_adjoint(tape_, fwd.cache, d_expectations);

  SampleGradient out;
  out.loss = loss.loss;
  out.logits = std::move(logits);
  out.d_pixels = diffsim::pixel_gradient(bundle.d_input_amplitudes, pixels);
  if (mode == GradMode::ParameterShift) {
    out.d_params = diffsim::parameter_shift_gradients(tape_, params_.angles, encoded,
                                                      d_expectations);
  } else {
    out.d_params = std::move(bundle.d_params);
  }
  return out;
}

std::string Qvc::tag() const {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(params_.angles.data());
  const auto digest =
      dataio::sha256_hex({bytes, params_.angles.size() * sizeof(double)}).substr(0, 12);
  return "qvc-L" + std::to_string(params_.n_layers) + "-" + digest;
}

void TrainConfig::validate() const {
  require(learning_rate > 0.0, Errc::InvalidArgument, "learning rate must be positive");
  require(batch_size >= 1, Errc::InvalidArgument, "batch size must be at least 1");
  require(epochs >= 1, Errc::InvalidArgument, "epochs must be at least 1");
}

TrainResult train_qvc(const TrainConfig& config, QvcParams initial, const dataio::Split& train,
                      const dataio::Split& eval, const EpochCallback& on_epoch) {
  config.validate();
  require(train.images.count > 0, Errc::InvalidArgument, "empty training split");
  require(train.images.count == train.labels.count, Errc::ShapeMismatch,
          "training images and labels disagree in count");

  Qvc model(std::move(initial));
  numerics::AdamState adam(model.tape().n_params());
  TrainResult result;
  std::vector<SampleGradient> grads;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto batches =
        dataio::epoch_batches(train.images.count, config.batch_size, config.seed, epoch);
    double loss_sum = 0.0;
    for (const auto& batch : batches) {
      grads.assign(batch.size(), {});
      parallel_for(batch.size(), config.workers, [&](std::size_t i) {
        const std::size_t sample = batch[i];
        grads[i] = model.gradient(train.images.sample(sample), train.labels.labels[sample],
                                  config.grad_mode);
      });
      std::vector<double> mean_grad(model.tape().n_params(), 0.0);
      for (const auto& g : grads) {
        loss_sum += g.loss;
        for (std::size_t p = 0; p < mean_grad.size(); ++p) mean_grad[p] += g.d_params[p];
      }
      const double inv = 1.0 / static_cast<double>(batch.size());
      for (double& g : mean_grad) g *= inv;
      numerics::adam_step(model.angles(), mean_grad, adam, config.learning_rate);
      result.optimizer_steps += 1;
    }

    EpochMetrics metrics;
    metrics.epoch = epoch + 1;
    metrics.train_loss = loss_sum / static_cast<double>(train.images.count);
    metrics.eval_accuracy =
        eval.images.count > 0
            ? evaluate_accuracy(model, eval.images, eval.labels, config.workers)
            : 0.0;
    metrics.optimizer_steps = result.optimizer_steps;
    result.epochs.push_back(metrics);
    if (on_epoch) on_epoch(metrics);
  }
  result.params = model.params();
  return result;
}

std::vector<std::size_t> predict_all(const Qvc& model, const dataio::ImageSet& images,
                                     std::size_t workers) {
  std::vector<std::size_t> predictions(images.count);
  parallel_for(images.count, workers,
               [&](std::size_t i) { predictions[i] = model.predict(images.sample(i)); });
  return predictions;
}

double evaluate_accuracy(const Qvc& model, const dataio::ImageSet& images,
                         const dataio::LabelSet& labels, std::size_t workers) {
  require(images.count > 0, Errc::InvalidArgument, "accuracy of an empty set is undefined");
  require(images.count == labels.count, Errc::ShapeMismatch, "image/label counts differ");
  const auto predictions = predict_all(model, images, workers);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    correct += predictions[i] == labels.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(images.count);
}

}  // namespace qshield::qvc

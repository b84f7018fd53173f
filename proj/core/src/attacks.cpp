#include "qshield/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "qshield/errors.hpp"
#include "qshield/parallel.hpp"
#include "qshield/rng.hpp"

namespace qshield::attacks {

namespace {
constexpr double kLinfSlack = 1e-12;
}

std::vector<double> QvcTarget::input_gradient(std::span<const double> x, int label) const {
  return model_.gradient(x, label).d_pixels;
}

std::string_view to_string(AttackKind kind) { return kind == AttackKind::Fgsm ? "fgsm" : "pgd"; }

AttackKind parse_attack_kind(std::string_view text) {
  if (text == "fgsm" || text == "FGSM") return AttackKind::Fgsm;
  if (text == "pgd" || text == "PGD") return AttackKind::Pgd;
  fail(Errc::InvalidArgument, "unknown attack '" + std::string(text) + "'");
}

void AttackConfig::validate() const {
  require(std::isfinite(epsilon) && epsilon >= 0.0, Errc::InvalidArgument,
          "epsilon must be a finite non-negative number");
  if (kind == AttackKind::Pgd) {
    require(steps >= 1, Errc::InvalidArgument, "PGD needs at least one step");
    if (epsilon > 0.0) {
      const double a = step_size();
      require(a > 0.0 && a <= epsilon, Errc::InvalidArgument,
              "PGD step size must lie in (0, epsilon]");
    }
  }
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::vector<double> fgsm(const DifferentiableClassifier& model, std::span<const double> x,
                         int label, const AttackConfig& config) {
  config.validate();
  std::vector<double> adv(x.begin(), x.end());
  if (config.epsilon == 0.0) return adv;
  const auto grad = model.input_gradient(x, label);
  for (std::size_t i = 0; i < adv.size(); ++i) {
    adv[i] += config.epsilon * sign(grad[i]);
    if (config.clip_pixels) adv[i] = std::clamp(adv[i], 0.0, 1.0);
  }
  return adv;
}

std::vector<double> pgd(const DifferentiableClassifier& model, std::span<const double> x,
                        int label, const AttackConfig& config, std::uint64_t sample_index) {
  config.validate();
  std::vector<double> adv(x.begin(), x.end());
  const double eps = config.epsilon;
  if (eps == 0.0) return adv;

  auto project = [&](std::size_t i) {
    adv[i] = std::clamp(adv[i], x[i] - eps, x[i] + eps);
    if (config.clip_pixels) adv[i] = std::clamp(adv[i], 0.0, 1.0);
  };

  if (config.random_start) {
    Rng rng(derive_seed(config.seed, sample_index));
    for (std::size_t i = 0; i < adv.size(); ++i) {
      adv[i] += rng.uniform(-eps, eps);
      project(i);
    }
  }
  const double alpha = config.step_size();
  for (std::size_t step = 0; step < config.steps; ++step) {
    const auto grad = model.input_gradient(adv, label);
    for (std::size_t i = 0; i < adv.size(); ++i) {
      adv[i] += alpha * sign(grad[i]);
      project(i);
    }
  }
  return adv;
}

std::vector<double> attack(const DifferentiableClassifier& model, std::span<const double> x,
                           int label, const AttackConfig& config, std::uint64_t sample_index) {
  return config.kind == AttackKind::Fgsm ? fgsm(model, x, label, config)
                                         : pgd(model, x, label, config, sample_index);
}

double AdversarialBatch::max_linf() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < originals.pixels.size(); ++i) {
    worst = std::max(worst, std::abs(adversarials.pixels[i] - originals.pixels[i]));
  }
  return worst;
}

AdversarialBatch attack_batch(const DifferentiableClassifier& model,
                              const dataio::ImageSet& images, const dataio::LabelSet& labels,
                              const AttackConfig& config, std::size_t workers) {
  config.validate();
  require(images.count == labels.count, Errc::ShapeMismatch, "image/label counts differ");
  AdversarialBatch batch{images, images, labels, config, model.tag()};
  parallel_for(images.count, workers, [&](std::size_t i) {
    const auto adv = attack(model, images.sample(i), labels.labels[i], config, i);
    std::ranges::copy(adv, batch.adversarials.sample(i).begin());
  });
  return batch;
}

void verify(const AdversarialBatch& batch) {
  require(batch.originals.pixels.shape() == batch.adversarials.pixels.shape(),
          Errc::ShapeMismatch, "adversarial and original batches differ in shape");
  const double linf = batch.max_linf();
  require(linf <= batch.config.epsilon + kLinfSlack, Errc::InvalidArgument,
          "L-inf distance " + std::to_string(linf) + " exceeds epsilon " +
              std::to_string(batch.config.epsilon));
  if (batch.config.clip_pixels) {
    for (double v : batch.adversarials.pixels.data()) {
      require(v >= 0.0 && v <= 1.0, Errc::InvalidArgument, "adversarial pixel outside [0, 1]");
    }
  }
}

}  // namespace qshield::attacks

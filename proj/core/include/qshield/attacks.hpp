#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qshield/dataio.hpp"
#include "qshield/qvc.hpp"

namespace qshield::attacks {

// Anything that can report dL(y, f(x))/dx for its own loss.
class DifferentiableClassifier {
 public:
  virtual ~DifferentiableClassifier() = default;
  virtual std::vector<double> input_gradient(std::span<const double> x, int label) const = 0;
  virtual std::string tag() const = 0;
};

// Cross-entropy pixel gradient of a QVC, chained through amplitude encoding.
class QvcTarget final : public DifferentiableClassifier {
 public:
  explicit QvcTarget(const qvc::Qvc& model) : model_(model) {}
  std::vector<double> input_gradient(std::span<const double> x, int label) const override;
  std::string tag() const override { return model_.tag(); }

 private:
  const qvc::Qvc& model_;
};

enum class AttackKind : std::uint8_t { Fgsm, Pgd };

std::string_view to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view text);

struct AttackConfig {
  AttackKind kind = AttackKind::Pgd;
  double epsilon = 0.0;
  std::optional<double> alpha;  // PGD step; epsilon / 4 when unset
  std::size_t steps = 10;
  bool clip_pixels = true;
  bool random_start = false;
  std::uint64_t seed = 0;

  double step_size() const { return alpha.value_or(epsilon / 4.0); }
  void validate() const;
};

// sign(0) = 0.
double sign(double v);

// x + eps * sign(grad), then clamped to [0, 1] when clip_pixels.
std::vector<double> fgsm(const DifferentiableClassifier& model, std::span<const double> x,
                         int label, const AttackConfig& config);

// Iterates x <- clip(x + alpha * sign(grad), x0 - eps, x0 + eps), clamping to
// [0, 1] after every step when clip_pixels. `sample_index` selects the random
// stream for random_start.
std::vector<double> pgd(const DifferentiableClassifier& model, std::span<const double> x,
                        int label, const AttackConfig& config, std::uint64_t sample_index = 0);

std::vector<double> attack(const DifferentiableClassifier& model, std::span<const double> x,
                           int label, const AttackConfig& config, std::uint64_t sample_index = 0);

struct AdversarialBatch {
  dataio::ImageSet originals;
  dataio::ImageSet adversarials;
  dataio::LabelSet labels;
  AttackConfig config;
  std::string model_tag;

  // Largest per-pixel |adv - orig| over the batch.
  double max_linf() const;
};

AdversarialBatch attack_batch(const DifferentiableClassifier& model,
                              const dataio::ImageSet& images, const dataio::LabelSet& labels,
                              const AttackConfig& config, std::size_t workers = 1);

// Throws InvalidArgument if the batch breaks the L-inf budget or pixel range.
void verify(const AdversarialBatch& batch);

}  // namespace qshield::attacks

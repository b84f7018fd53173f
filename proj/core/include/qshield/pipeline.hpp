#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qshield/attacks.hpp"
#include "qshield/cednet.hpp"
#include "qshield/dataio.hpp"
#include "qshield/diffsim.hpp"
#include "qshield/qvc.hpp"
#include "qshield/report.hpp"

namespace qshield::pipeline {

enum class BoxMode { White, Black };

std::string_view to_string(BoxMode mode);
BoxMode parse_box_mode(std::string_view text);

// Per-epsilon trains one autoencoder per grid point; Shared trains a single
// one on the pooled pairs of every grid point.
enum class AeMode { PerEpsilon, Shared };

std::string_view to_string(AeMode mode);
AeMode parse_ae_mode(std::string_view text);

struct ModelSpec {
  std::size_t n_layers = 20;
  std::uint64_t seed = 0;
  diffsim::RotationKind rotation = diffsim::RotationKind::Euler;
  diffsim::Topology topology = diffsim::Topology::Ring;

  bool operator==(const ModelSpec&) const = default;
};

struct ExperimentConfig {
  dataio::DatasetName dataset = dataio::DatasetName::Mnist;
  std::optional<std::string> data_dir;  // falls back to $QSHIELD_DATA_DIR, then "data"
  BoxMode box = BoxMode::White;
  ModelSpec attacker;
  ModelSpec evaluator;
  attacks::AttackConfig attack;  // template; epsilon and seed are set per run
  std::vector<double> epsilons = default_epsilons();
  qvc::TrainConfig qvc_train;       // seed is derived from the model spec
  cednet::AeTrainConfig ae_train;   // seed is derived from the global seed
  std::optional<std::size_t> train_per_class;  // unset: the full split
  std::optional<std::size_t> test_per_class;
  AeMode ae_mode = AeMode::PerEpsilon;
  std::filesystem::path output_dir = "runs/latest";
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool use_cache = true;

  static std::vector<double> default_epsilons();  // 0.00, 0.05, ..., 0.30

  // 200/50 per class, 20-layer QVC for 10 epochs, 10 AE epochs. The black-box
  // evaluator has 40 layers and seed + 1.
  static ExperimentConfig desk_scale(std::uint64_t seed = 0, BoxMode box = BoxMode::White);
  // Full splits, 100-layer attacker, 20 epochs at batch 256. The black-box
  // evaluator has 200 layers and seed + 1.
  static ExperimentConfig paper_scale(std::uint64_t seed = 0, BoxMode box = BoxMode::White);

  // Throws InvalidArgument on an unsorted or negative grid, a white-box run
  // with distinct specs, or a black-box run with identical specs.
  void validate() const;
};

// JSON document with the same field names as ExperimentConfig. Keys absent
// from the document keep the values of `base`; unknown keys are rejected.
ExperimentConfig config_from_json(std::string_view text, const ExperimentConfig& base = {});
std::string config_to_json(const ExperimentConfig& config);

// Called after each finished row, before the next epsilon starts.
using RowCallback = std::function<void(const report::RunReport& partial)>;

report::RunReport run_whitebox(const ExperimentConfig& config, const RowCallback& on_row = {});
report::RunReport run_blackbox(const ExperimentConfig& config, const RowCallback& on_row = {});
// Dispatches on config.box.
report::RunReport run(const ExperimentConfig& config, const RowCallback& on_row = {});

// Hex digest naming a cache entry; equal inputs give equal names.
std::string cache_key(std::string_view description);

}  // namespace qshield::pipeline

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qshield/numerics.hpp"

namespace qshield::dataio {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
inline constexpr int kNumClasses = 10;

// Images as stored on disk, before normalization.
struct RawImageSet {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols

  bool operator==(const RawImageSet&) const = default;
};

// Normalized images; pixels has shape [count, rows, cols], values in [0, 1].
struct ImageSet {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  numerics::Tensor pixels;

  std::size_t sample_size() const noexcept { return rows * cols; }
  std::span<const double> sample(std::size_t i) const {
    return pixels.data().subspan(i * sample_size(), sample_size());
  }
  std::span<double> sample(std::size_t i) {
    return pixels.data().subspan(i * sample_size(), sample_size());
  }

  static ImageSet zeros(std::size_t count, std::size_t rows, std::size_t cols);
  bool operator==(const ImageSet&) const = default;
};

struct LabelSet {
  std::size_t count = 0;
  std::vector<std::uint8_t> labels;

  bool operator==(const LabelSet&) const = default;
};

enum class DatasetName { Mnist, Fmnist };

std::string_view to_string(DatasetName name);
DatasetName parse_dataset_name(std::string_view text);

struct Split {
  ImageSet images;
  LabelSet labels;
};

struct DatasetSplit {
  DatasetName name = DatasetName::Mnist;
  Split train;
  Split test;
};

RawImageSet parse_idx_images(std::span<const std::uint8_t> bytes);
LabelSet parse_idx_labels(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_idx_images(const RawImageSet& images);
std::vector<std::uint8_t> serialize_idx_labels(const LabelSet& labels);

ImageSet normalize(const RawImageSet& raw);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// Reads <data_dir>/<mnist|fmnist>/{train,t10k}-{images-idx3,labels-idx1}-ubyte.
// Files with a known SHA-256 are checked; a mismatch is logged, not fatal.
DatasetSplit load_dataset(const std::filesystem::path& data_dir, DatasetName name);

// Resolves an explicit directory, else $QSHIELD_DATA_DIR, else "data".
std::filesystem::path resolve_data_dir(const std::optional<std::string>& explicit_dir);

std::optional<std::string> known_sha256(DatasetName name, std::string_view file_name);
std::string sha256_hex(std::span<const std::uint8_t> bytes);

// Gathers the listed samples, in order, into a new split.
Split select(const Split& split, std::span<const std::size_t> indices);

// Exactly per_class samples of every class, drawn and ordered by seed.
Split subset(const Split& split, std::size_t per_class, std::uint64_t seed);
DatasetSplit subset(const DatasetSplit& split, std::size_t train_per_class,
                    std::size_t test_per_class, std::uint64_t seed);

std::vector<std::size_t> class_counts(const LabelSet& labels);

// Index batches for one epoch. The permutation depends only on (seed, epoch).
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t count, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch);

// Materialized batches for one epoch, same order as epoch_batches.
std::vector<Split> batch_iter(const ImageSet& images, const LabelSet& labels,
                              std::size_t batch_size, std::uint64_t seed,
                              std::size_t epoch = 0);

}  // namespace qshield::dataio

#include "qshield/dataio.hpp"

#include <openssl/sha.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>

#include "qshield/errors.hpp"
#include "qshield/rng.hpp"

namespace qshield::dataio {
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t value) {
  out.push_back(static_cast<std::uint8_t>(value >> 24));
  out.push_back(static_cast<std::uint8_t>(value >> 16));
  out.push_back(static_cast<std::uint8_t>(value >> 8));
  out.push_back(static_cast<std::uint8_t>(value));
}

void check_magic(std::span<const std::uint8_t> bytes, std::uint32_t expected) {
  require(bytes.size() >= 4, Errc::TruncatedPayload, "IDX file shorter than its magic number");
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != expected) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "expected 0x%08x, found 0x%08x", expected, magic);
    fail(Errc::BadMagic, buf);
  }
}

void check_payload(std::size_t available, std::size_t declared) {
  require(available >= declared, Errc::TruncatedPayload,
          "IDX payload has " + std::to_string(available) + " bytes, header declares " +
              std::to_string(declared));
  require(available == declared, Errc::TrailingBytes,
          std::to_string(available - declared) + " bytes after the declared payload");
}

struct KnownFile {
  DatasetName dataset;
  std::string_view file;
  std::string_view sha256;
};

constexpr std::array kKnownFiles{
    KnownFile{DatasetName::Mnist, "train-images-idx3-ubyte",
              "ba891046e6505d7aadcbbe25680a0738ad16aec93bde7f9b65e87a2fc25776db"},
    KnownFile{DatasetName::Mnist, "train-labels-idx1-ubyte",
              "65a50cbbf4e906d70832878ad85ccda5333a97f0f4c3dd2ef09a8a9eef7101c5"},
    KnownFile{DatasetName::Mnist, "t10k-images-idx3-ubyte",
              "0fa7898d509279e482958e8ce81c8e77db3f2f8254e26661ceb7762c4d494ce7"},
    KnownFile{DatasetName::Mnist, "t10k-labels-idx1-ubyte",
              "ff7bcfd416de33731a308c3f266cc351222c34898ecbeaf847f06e48f7ec33f2"},
};

std::vector<std::uint8_t> read_checked(const std::filesystem::path& dir, DatasetName name,
                                       std::string_view file) {
  const auto path = dir / file;
  auto bytes = read_file(path);
  if (auto expected = known_sha256(name, file)) {
    const auto actual = sha256_hex(bytes);
    if (actual != *expected) {
      spdlog::warn("{}: SHA-256 {} differs from the known value {}", path.string(), actual,
                   *expected);
    }
  }
  return bytes;
}

}  // namespace

ImageSet ImageSet::zeros(std::size_t count, std::size_t rows, std::size_t cols) {
  return ImageSet{count, rows, cols, numerics::Tensor({count, rows, cols})};
}

std::string_view to_string(DatasetName name) {
  return name == DatasetName::Mnist ? "mnist" : "fmnist";
}

DatasetName parse_dataset_name(std::string_view text) {
  if (text == "mnist" || text == "MNIST") return DatasetName::Mnist;
  if (text == "fmnist" || text == "FMNIST" || text == "fashion-mnist")
    return DatasetName::Fmnist;
  fail(Errc::InvalidArgument, "unknown dataset '" + std::string(text) + "'");
}

RawImageSet parse_idx_images(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxImageMagic);
  require(bytes.size() >= 16, Errc::TruncatedPayload, "IDX image header is 16 bytes");
  RawImageSet raw;
  raw.count = read_be32(bytes, 4);
  raw.rows = read_be32(bytes, 8);
  raw.cols = read_be32(bytes, 12);
  const std::size_t declared = raw.count * raw.rows * raw.cols;
  check_payload(bytes.size() - 16, declared);
  raw.pixels.assign(bytes.begin() + 16, bytes.end());
  return raw;
}

LabelSet parse_idx_labels(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxLabelMagic);
  require(bytes.size() >= 8, Errc::TruncatedPayload, "IDX label header is 8 bytes");
  LabelSet set;
  set.count = read_be32(bytes, 4);
  check_payload(bytes.size() - 8, set.count);
  set.labels.assign(bytes.begin() + 8, bytes.end());
  for (std::size_t i = 0; i < set.count; ++i) {
    require(set.labels[i] < kNumClasses, Errc::LabelOutOfRange,
            "label " + std::to_string(set.labels[i]) + " at index " + std::to_string(i));
  }
  return set;
}

std::vector<std::uint8_t> serialize_idx_images(const RawImageSet& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_be32(out, kIdxImageMagic);
  write_be32(out, static_cast<std::uint32_t>(images.count));
  write_be32(out, static_cast<std::uint32_t>(images.rows));
  write_be32(out, static_cast<std::uint32_t>(images.cols));
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(const LabelSet& labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.labels.size());
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.count));
  out.insert(out.end(), labels.labels.begin(), labels.labels.end());
  return out;
}

ImageSet normalize(const RawImageSet& raw) {
  ImageSet set = ImageSet::zeros(raw.count, raw.rows, raw.cols);
  for (std::size_t i = 0; i < raw.pixels.size(); ++i) set.pixels[i] = raw.pixels[i] / 255.0;
  return set;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

DatasetSplit load_dataset(const std::filesystem::path& data_dir, DatasetName name) {
  const auto dir = data_dir / std::string(to_string(name));
  if (!std::filesystem::is_directory(dir)) {
    fail(Errc::IoError, "data directory " + dir.string() + " does not exist");
  }
  auto load_split = [&](std::string_view prefix) {
    const std::string images_file = std::string(prefix) + "-images-idx3-ubyte";
    const std::string labels_file = std::string(prefix) + "-labels-idx1-ubyte";
    Split split{normalize(parse_idx_images(read_checked(dir, name, images_file))),
                parse_idx_labels(read_checked(dir, name, labels_file))};
    require(split.images.count == split.labels.count, Errc::ShapeMismatch,
            images_file + " and " + labels_file + " disagree on sample count");
    return split;
  };
  return DatasetSplit{name, load_split("train"), load_split("t10k")};
}

std::filesystem::path resolve_data_dir(const std::optional<std::string>& explicit_dir) {
  if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
  if (const char* env = std::getenv("QSHIELD_DATA_DIR"); env && *env) return env;
  return "data";
}

std::optional<std::string> known_sha256(DatasetName name, std::string_view file_name) {
  for (const auto& known : kKnownFiles) {
    if (known.dataset == name && known.file == file_name) return std::string(known.sha256);
  }
  return std::nullopt;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(bytes.data(), bytes.size(), digest.data());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(digest.size() * 2);
  for (unsigned char b : digest) {
    hex.push_back(kHex[b >> 4]);
    hex.push_back(kHex[b & 0xF]);
  }
  return hex;
}

Split select(const Split& split, std::span<const std::size_t> indices) {
  const auto& src = split.images;
  Split out{ImageSet::zeros(indices.size(), src.rows, src.cols),
            LabelSet{indices.size(), std::vector<std::uint8_t>(indices.size())}};
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t from = indices[i];
    require(from < src.count, Errc::IndexOutOfRange, "sample index out of range");
    std::ranges::copy(src.sample(from), out.images.sample(i).begin());
    out.labels.labels[i] = split.labels.labels[from];
  }
  return out;
}

std::vector<std::size_t> class_counts(const LabelSet& labels) {
  std::vector<std::size_t> counts(kNumClasses, 0);
  for (auto label : labels.labels) counts.at(label) += 1;
  return counts;
}

Split subset(const Split& split, std::size_t per_class, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(kNumClasses);
  for (std::size_t i = 0; i < split.labels.count; ++i) {
    by_class[split.labels.labels[i]].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(per_class * kNumClasses);
  for (int c = 0; c < kNumClasses; ++c) {
    auto& pool = by_class[c];
    require(pool.size() >= per_class, Errc::InsufficientSamples,
            "class " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                " samples, " + std::to_string(per_class) + " requested");
    rng.shuffle(std::span(pool));
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + per_class);
  }
  rng.shuffle(std::span(chosen));
  return select(split, chosen);
}

DatasetSplit subset(const DatasetSplit& split, std::size_t train_per_class,
                    std::size_t test_per_class, std::uint64_t seed) {
  return DatasetSplit{split.name, subset(split.train, train_per_class, derive_seed(seed, 1)),
                      subset(split.test, test_per_class, derive_seed(seed, 2))};
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t count, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch) {
  require(batch_size >= 1, Errc::InvalidArgument, "batch_size must be at least 1");
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, epoch));
  rng.shuffle(std::span(order));
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < count; start += batch_size) {
    const std::size_t end = std::min(count, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

std::vector<Split> batch_iter(const ImageSet& images, const LabelSet& labels,
                              std::size_t batch_size, std::uint64_t seed, std::size_t epoch) {
  require(images.count == labels.count, Errc::ShapeMismatch, "image/label counts differ");
  const Split whole{images, labels};
  std::vector<Split> batches;
  for (const auto& idx : epoch_batches(images.count, batch_size, seed, epoch)) {
    batches.push_back(select(whole, idx));
  }
  return batches;
}

}  // namespace qshield::dataio

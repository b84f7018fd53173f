#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qshield/attacks.hpp"
#include "qshield/cednet.hpp"
#include "qshield/numerics.hpp"
#include "qshield/qvc.hpp"

namespace qshield::checkpoint {

// Binary layout, all integers little-endian:
//   "QSHD" | u16 version | u8 kind
//   u32 n_meta   { u32 len, key bytes, u32 len, value bytes } * n_meta
//   u32 n_tensor { u16 len, name bytes, u8 rank, u64 dim * rank } * n_tensor
//   IEEE-754 binary64 payload of every tensor, in table order
//   u32 CRC-32 (zlib polynomial) of everything before it
inline constexpr std::uint16_t kFormatVersion = 1;

enum class Kind : std::uint8_t { Qvc = 1, Autoencoder = 2, AdversarialBatch = 3 };

std::string_view to_string(Kind kind);

struct NamedTensor {
  std::string name;
  numerics::Tensor tensor;

  bool operator==(const NamedTensor&) const = default;
};

struct Checkpoint {
  Kind kind = Kind::Qvc;
  std::map<std::string, std::string> metadata;
  std::vector<NamedTensor> tensors;

  const numerics::Tensor& tensor(std::string_view name) const;
  const std::string& meta(const std::string& key) const;

  bool operator==(const Checkpoint&) const = default;
};

std::vector<std::uint8_t> encode(const Checkpoint& checkpoint);
Checkpoint decode(std::span<const std::uint8_t> bytes);

// Writes to a temporary sibling and renames it into place.
void save(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load(const std::filesystem::path& path);

Checkpoint to_checkpoint(const qvc::QvcParams& params);
// Rejects a checkpoint of another kind, or one whose depth differs from
// expected_layers when given.
qvc::QvcParams qvc_from_checkpoint(const Checkpoint& checkpoint,
                                   std::optional<std::size_t> expected_layers = std::nullopt);

Checkpoint to_checkpoint(const cednet::AeParams& params);
cednet::AeParams autoencoder_from_checkpoint(const Checkpoint& checkpoint);

Checkpoint to_checkpoint(const attacks::AdversarialBatch& batch);
attacks::AdversarialBatch adversarial_batch_from_checkpoint(const Checkpoint& checkpoint);

// Decimal text that parses back to the identical double.
std::string exact_double(double value);

}  // namespace qshield::checkpoint

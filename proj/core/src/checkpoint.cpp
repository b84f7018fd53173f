#include "qshield/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <system_error>

#include "qshield/errors.hpp"

namespace qshield::checkpoint {

using numerics::Shape;
using numerics::Tensor;

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'Q', 'S', 'H', 'D'};

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { little_endian(v, 2); }
  void u32(std::uint32_t v) { little_endian(v, 4); }
  void u64(std::uint64_t v) { little_endian(v, 8); }
  void f64(double v) { little_endian(std::bit_cast<std::uint64_t>(v), 8); }
  void text32(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void text16(const std::string& s) {
    require(s.size() <= 0xFFFF, Errc::InvalidArgument, "tensor name too long");
    u16(static_cast<std::uint16_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  void little_endian(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(little_endian(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(little_endian(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(little_endian(4)); }
  std::uint64_t u64() { return little_endian(8); }
  double f64() { return std::bit_cast<double>(little_endian(8)); }
  std::string text(std::size_t length) {
    need(length);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), length);
    pos_ += length;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void need(std::size_t n) const {
    require(remaining() >= n, Errc::TruncatedPayload, "checkpoint ends unexpectedly");
  }

 private:
  std::uint64_t little_endian(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

void require_kind(const Checkpoint& cp, Kind kind) {
  require(cp.kind == kind, Errc::ShapeMismatch,
          "checkpoint holds " + std::string(to_string(cp.kind)) + ", expected " +
              std::string(to_string(kind)));
}

std::size_t meta_size(const Checkpoint& cp, const std::string& key) {
  const std::string& text = cp.meta(key);
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  require(ec == std::errc() && ptr == text.data() + text.size(), Errc::InvalidArgument,
          "metadata '" + key + "' is not an integer: " + text);
  return value;
}

double meta_double(const Checkpoint& cp, const std::string& key) {
  const std::string& text = cp.meta(key);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  require(ec == std::errc() && ptr == text.data() + text.size(), Errc::InvalidArgument,
          "metadata '" + key + "' is not a number: " + text);
  return value;
}

dataio::ImageSet image_set(const Tensor& t) {
  require(t.rank() == 3, Errc::ShapeMismatch, "image tensor must be [count, rows, cols]");
  return dataio::ImageSet{t.dim(0), t.dim(1), t.dim(2), t};
}

}  // namespace

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::Qvc: return "qvc";
    case Kind::Autoencoder: return "autoencoder";
    case Kind::AdversarialBatch: return "adversarial_batch";
  }
  return "unknown";
}

const Tensor& Checkpoint::tensor(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.tensor;
  }
  fail(Errc::ShapeMismatch, "checkpoint has no tensor '" + std::string(name) + "'");
}

const std::string& Checkpoint::meta(const std::string& key) const {
  const auto it = metadata.find(key);
  if (it == metadata.end()) fail(Errc::ShapeMismatch, "checkpoint lacks metadata '" + key + "'");
  return it->second;
}

std::vector<std::uint8_t> encode(const Checkpoint& cp) {
  Writer w;
  for (auto b : kMagic) w.u8(b);
  w.u16(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(cp.kind));
  w.u32(static_cast<std::uint32_t>(cp.metadata.size()));
  for (const auto& [key, value] : cp.metadata) {
    w.text32(key);
    w.text32(value);
  }
  w.u32(static_cast<std::uint32_t>(cp.tensors.size()));
  for (const auto& t : cp.tensors) {
    w.text16(t.name);
    require(t.tensor.rank() <= 0xFF, Errc::ShapeMismatch, "tensor rank too large");
    w.u8(static_cast<std::uint8_t>(t.tensor.rank()));
    for (auto d : t.tensor.shape()) w.u64(d);
  }
  for (const auto& t : cp.tensors) {
    for (double v : t.tensor.data()) w.f64(v);
  }
  w.u32(crc32_of(w.bytes()));
  return std::move(w.bytes());
}

Checkpoint decode(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= kMagic.size() &&
              std::equal(kMagic.begin(), kMagic.end(), bytes.begin()),
          Errc::BadMagic, "not a QSHD checkpoint");
  Reader r(bytes.subspan(kMagic.size()));
  const std::uint16_t version = r.u16();
  require(version == kFormatVersion, Errc::BadVersion,
          "checkpoint format version " + std::to_string(version) + ", this build reads " +
              std::to_string(kFormatVersion));
  Checkpoint cp;
  const std::uint8_t kind = r.u8();
  require(kind >= 1 && kind <= 3, Errc::ShapeMismatch, "unknown checkpoint kind");
  cp.kind = static_cast<Kind>(kind);

  const std::uint32_t n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string key = r.text(r.u32());
    std::string value = r.text(r.u32());
    cp.metadata.emplace(std::move(key), std::move(value));
  }
  const std::uint32_t n_tensors = r.u32();
  std::vector<std::pair<std::string, Shape>> table;
  std::size_t total = 0;
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = r.text(r.u16());
    Shape shape(r.u8());
    for (auto& d : shape) d = static_cast<std::size_t>(r.u64());
    total += numerics::shape_size(shape);
    table.emplace_back(std::move(name), std::move(shape));
  }
  require(total <= r.remaining() / 8, Errc::TruncatedPayload,
          "checkpoint payload shorter than its shape table declares");
  r.need(total * 8 + 4);
  for (auto& [name, shape] : table) {
    std::vector<double> data(numerics::shape_size(shape));
    for (double& v : data) v = r.f64();
    cp.tensors.push_back({std::move(name), Tensor(std::move(shape), std::move(data))});
  }
  const std::uint32_t stored_crc = r.u32();
  require(r.remaining() == 0, Errc::TrailingBytes, "bytes after the checkpoint checksum");
  require(stored_crc == crc32_of(bytes.first(bytes.size() - 4)), Errc::ChecksumMismatch,
          "checkpoint CRC-32 does not match its contents");
  return cp;
}

void save(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const auto bytes = encode(checkpoint);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoError, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(Errc::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

Checkpoint load(const std::filesystem::path& path) { return decode(dataio::read_file(path)); }

std::string exact_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

Checkpoint to_checkpoint(const qvc::QvcParams& p) {
  Checkpoint cp;
  cp.kind = Kind::Qvc;
  cp.metadata = {
      {"n_qubits", std::to_string(p.n_qubits)},
      {"n_layers", std::to_string(p.n_layers)},
      {"rotation", std::string(diffsim::to_string(p.rotation))},
      {"topology", std::string(diffsim::to_string(p.topology))},
      {"version", p.version},
  };
  const std::size_t k = diffsim::angles_per_qubit(p.rotation);
  cp.tensors.push_back({"angles", Tensor({p.n_layers, p.n_qubits, k}, p.angles)});
  return cp;
}

qvc::QvcParams qvc_from_checkpoint(const Checkpoint& cp,
                                   std::optional<std::size_t> expected_layers) {
  require_kind(cp, Kind::Qvc);
  qvc::QvcParams p;
  p.n_qubits = meta_size(cp, "n_qubits");
  p.n_layers = meta_size(cp, "n_layers");
  p.rotation = diffsim::parse_rotation(cp.meta("rotation"));
  p.topology = diffsim::parse_topology(cp.meta("topology"));
  p.version = cp.meta("version");
  const Tensor& angles = cp.tensor("angles");
  const Shape expected{p.n_layers, p.n_qubits, diffsim::angles_per_qubit(p.rotation)};
  require(angles.shape() == expected, Errc::ShapeMismatch,
          "angle tensor " + numerics::shape_string(angles.shape()) + " disagrees with metadata " +
              numerics::shape_string(expected));
  if (expected_layers) {
    require(*expected_layers == p.n_layers, Errc::ShapeMismatch,
            "checkpoint has " + std::to_string(p.n_layers) + " layers, request needs " +
                std::to_string(*expected_layers));
  }
  p.angles = angles.storage();
  return p;
}

Checkpoint to_checkpoint(const cednet::AeParams& p) {
  Checkpoint cp;
  cp.kind = Kind::Autoencoder;
  cp.metadata = {
      {"side", std::to_string(p.geometry.side)},
      {"latent", std::to_string(p.geometry.latent)},
      {"channels1", std::to_string(p.geometry.channels1)},
      {"channels2", std::to_string(p.geometry.channels2)},
  };
  const auto tensors = p.tensors();
  const auto& names = cednet::AeParams::tensor_names();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    cp.tensors.push_back({std::string(names[i]), *tensors[i]});
  }
  return cp;
}

cednet::AeParams autoencoder_from_checkpoint(const Checkpoint& cp) {
  require_kind(cp, Kind::Autoencoder);
  cednet::AeGeometry geo;
  geo.side = meta_size(cp, "side");
  geo.latent = meta_size(cp, "latent");
  geo.channels1 = meta_size(cp, "channels1");
  geo.channels2 = meta_size(cp, "channels2");
  cednet::AeParams p = cednet::AeParams::zeros(geo);
  const auto tensors = p.tensors();
  const auto& names = cednet::AeParams::tensor_names();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const Tensor& stored = cp.tensor(names[i]);
    require(stored.shape() == tensors[i]->shape(), Errc::ShapeMismatch,
            std::string(names[i]) + " has shape " + numerics::shape_string(stored.shape()));
    *tensors[i] = stored;
  }
  return p;
}

Checkpoint to_checkpoint(const attacks::AdversarialBatch& batch) {
  Checkpoint cp;
  cp.kind = Kind::AdversarialBatch;
  const auto& c = batch.config;
  cp.metadata = {
      {"attack", std::string(attacks::to_string(c.kind))},
      {"epsilon", exact_double(c.epsilon)},
      {"alpha", exact_double(c.step_size())},
      {"steps", std::to_string(c.steps)},
      {"clip_pixels", c.clip_pixels ? "true" : "false"},
      {"random_start", c.random_start ? "true" : "false"},
      {"seed", std::to_string(c.seed)},
      {"model_tag", batch.model_tag},
  };
  std::vector<double> labels(batch.labels.labels.begin(), batch.labels.labels.end());
  cp.tensors.push_back({"originals", batch.originals.pixels});
  cp.tensors.push_back({"adversarials", batch.adversarials.pixels});
  cp.tensors.push_back({"labels", Tensor({batch.labels.count}, std::move(labels))});
  return cp;
}

attacks::AdversarialBatch adversarial_batch_from_checkpoint(const Checkpoint& cp) {
  require_kind(cp, Kind::AdversarialBatch);
  attacks::AdversarialBatch batch;
  batch.originals = image_set(cp.tensor("originals"));
  batch.adversarials = image_set(cp.tensor("adversarials"));
  require(batch.originals.pixels.shape() == batch.adversarials.pixels.shape(),
          Errc::ShapeMismatch, "original and adversarial tensors differ in shape");
  const Tensor& labels = cp.tensor("labels");
  require(labels.shape() == Shape{batch.originals.count}, Errc::ShapeMismatch,
          "label tensor does not match the image count");
  batch.labels.count = labels.size();
  for (double v : labels.data()) {
    require(v >= 0 && v < dataio::kNumClasses && v == static_cast<int>(v),
            Errc::LabelOutOfRange, "stored label " + exact_double(v));
    batch.labels.labels.push_back(static_cast<std::uint8_t>(v));
  }
  auto& c = batch.config;
  c.kind = attacks::parse_attack_kind(cp.meta("attack"));
  c.epsilon = meta_double(cp, "epsilon");
  c.alpha = meta_double(cp, "alpha");
  c.steps = meta_size(cp, "steps");
  c.clip_pixels = cp.meta("clip_pixels") == "true";
  c.random_start = cp.meta("random_start") == "true";
  c.seed = meta_size(cp, "seed");
  batch.model_tag = cp.meta("model_tag");
  return batch;
}

}  // namespace qshield::checkpoint

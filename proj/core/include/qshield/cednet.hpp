#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "qshield/dataio.hpp"
#include "qshield/numerics.hpp"

namespace qshield::cednet {

using numerics::Tensor;

struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel = 3;
  std::size_t stride = 2;
  std::size_t padding = 1;
  std::size_t output_padding = 0;  // transposed convolution only

  std::size_t conv_out(std::size_t in) const;       // floor((in + 2p - k) / s) + 1
  std::size_t transpose_out(std::size_t in) const;  // (in - 1) s - 2p + k + op
};

// Direct loops are the reference; Im2col lowers to GEMM and must agree with
// Direct to 1e-12.
enum class ConvAlgo : std::uint8_t { Direct, Im2col };

struct ConvGrads {
  Tensor d_input;
  Tensor d_weights;
  Tensor d_bias;
};

// input [C_in, H, W], weights [C_out, C_in, k, k], bias [C_out].
Tensor conv2d(const Tensor& input, const ConvSpec& spec, const Tensor& weights,
              const Tensor& bias, ConvAlgo algo = ConvAlgo::Im2col);
ConvGrads conv2d_backward(const Tensor& input, const ConvSpec& spec, const Tensor& weights,
                          const Tensor& d_output, ConvAlgo algo = ConvAlgo::Im2col);

// input [C_in, H, W], weights [C_in, C_out, k, k], bias [C_out]. Adjoint of
// conv2d with the same weights.
Tensor conv_transpose2d(const Tensor& input, const ConvSpec& spec, const Tensor& weights,
                        const Tensor& bias, ConvAlgo algo = ConvAlgo::Im2col);
ConvGrads conv_transpose2d_backward(const Tensor& input, const ConvSpec& spec,
                                    const Tensor& weights, const Tensor& d_output,
                                    ConvAlgo algo = ConvAlgo::Im2col);

// Encoder: conv(1->c1) ReLU conv(c1->c2) ReLU flatten fc(->latent) ReLU.
// Decoder: fc(latent->flat) ReLU reshape deconv(c2->c1) ReLU deconv(c1->1) Sigmoid.
// Every conv is k=3, s=2, p=1 (transposes with output_padding=1), so the image
// side must be a multiple of 4.
struct AeGeometry {
  std::size_t side = 28;
  std::size_t latent = 20;
  std::size_t channels1 = 16;
  std::size_t channels2 = 32;

  std::size_t half() const { return side / 2; }
  std::size_t quarter() const { return side / 4; }
  std::size_t flat() const { return channels2 * quarter() * quarter(); }
  ConvSpec conv1() const { return {1, channels1, 3, 2, 1, 0}; }
  ConvSpec conv2() const { return {channels1, channels2, 3, 2, 1, 0}; }
  ConvSpec deconv1() const { return {channels2, channels1, 3, 2, 1, 1}; }
  ConvSpec deconv2() const { return {channels1, 1, 3, 2, 1, 1}; }
  void validate() const;
  bool operator==(const AeGeometry&) const = default;
};

inline constexpr std::size_t kAeTensorCount = 12;

struct AeParams {
  AeGeometry geometry;
  Tensor conv1_w, conv1_b;
  Tensor conv2_w, conv2_b;
  Tensor fc_enc_w, fc_enc_b;
  Tensor fc_dec_w, fc_dec_b;
  Tensor deconv1_w, deconv1_b;
  Tensor deconv2_w, deconv2_b;

  // Zero-filled tensors with the shapes implied by the geometry.
  static AeParams zeros(const AeGeometry& geometry);

  std::array<Tensor*, kAeTensorCount> tensors();
  std::array<const Tensor*, kAeTensorCount> tensors() const;
  static const std::array<std::string_view, kAeTensorCount>& tensor_names();

  std::size_t parameter_count() const;
  bool operator==(const AeParams&) const = default;
};

// He-normal weights (std = sqrt(2 / fan_in)), zero biases.
AeParams init_autoencoder(const AeGeometry& geometry, std::uint64_t seed);

// Intermediate activations of one forward pass.
struct AeCache {
  Tensor input;     // [1, S, S]
  Tensor h1_pre, h1;  // [c1, S/2, S/2]
  Tensor h2_pre, h2;  // [c2, S/4, S/4]
  Tensor z_pre, z;    // [latent]
  Tensor g_pre, g;    // [flat]
  Tensor u1_pre, u1;  // [c1, S/2, S/2]
  Tensor output;      // [1, S, S]
  AeGeometry geometry;
};

Tensor encode(const Tensor& image, const AeParams& params, ConvAlgo algo = ConvAlgo::Im2col);
Tensor decode(const Tensor& latent, const AeParams& params, ConvAlgo algo = ConvAlgo::Im2col);
Tensor forward(const Tensor& image, const AeParams& params, AeCache* cache = nullptr,
               ConvAlgo algo = ConvAlgo::Im2col);

struct AeGradients {
  AeParams params;  // dL/d(each tensor)
  Tensor d_input;
};

AeGradients ae_backward(const AeParams& params, const AeCache& cache, const Tensor& d_output,
                        ConvAlgo algo = ConvAlgo::Im2col);

struct AeTrainConfig {
  double learning_rate = 0.001;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  ConvAlgo algo = ConvAlgo::Im2col;

  void validate() const;
};

struct AeTrainResult {
  AeParams params;
  // losses[0]: MSE of the initial parameters before any update.
  // losses[e]: mean per-sample training MSE during epoch e (1-based).
  std::vector<double> losses;
};

using AeEpochCallback = std::function<void(std::size_t epoch, double loss)>;

// Learns adversarial -> clean. inputs[i] pairs with targets[i].
AeTrainResult train_autoencoder(const dataio::ImageSet& inputs, const dataio::ImageSet& targets,
                                const AeTrainConfig& config,
                                std::optional<AeGeometry> geometry = std::nullopt,
                                const AeEpochCallback& on_epoch = {});

// Mean per-pixel squared error of reconstruct(inputs) against targets.
double evaluate_mse(const AeParams& params, const dataio::ImageSet& inputs,
                    const dataio::ImageSet& targets, std::size_t workers = 1);

dataio::ImageSet reconstruct_batch(const AeParams& params, const dataio::ImageSet& images,
                                   std::size_t workers = 1);

}  // namespace qshield::cednet

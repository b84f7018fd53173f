#include "qshield/cednet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qshield/errors.hpp"
#include "qshield/parallel.hpp"
#include "qshield/rng.hpp"

namespace qshield::cednet {

using numerics::Shape;
using numerics::shape_string;

std::size_t ConvSpec::conv_out(std::size_t in) const {
  require(in + 2 * padding >= kernel && stride >= 1, Errc::ShapeMismatch,
          "convolution window larger than padded input");
  return (in + 2 * padding - kernel) / stride + 1;
}

std::size_t ConvSpec::transpose_out(std::size_t in) const {
  require(in >= 1 && (in - 1) * stride + kernel + output_padding >= 2 * padding,
          Errc::ShapeMismatch, "transposed convolution output would be empty");
  return (in - 1) * stride + kernel + output_padding - 2 * padding;
}

namespace {

struct Geometry {
  std::size_t channels_in, height_in, width_in;
  std::size_t channels_out, height_out, width_out;
};

// Geometry of the forward convolution (big image -> small image).
Geometry conv_geometry(const Tensor& input, const ConvSpec& spec, const Tensor& weights) {
  require(input.rank() == 3 && input.dim(0) == spec.in_channels, Errc::ShapeMismatch,
          "conv2d input " + shape_string(input.shape()) + " does not have " +
              std::to_string(spec.in_channels) + " channels");
  const Shape expected{spec.out_channels, spec.in_channels, spec.kernel, spec.kernel};
  require(weights.shape() == expected, Errc::ShapeMismatch,
          "conv2d weights " + shape_string(weights.shape()) + ", expected " +
              shape_string(expected));
  return {spec.in_channels, input.dim(1), input.dim(2),
          spec.out_channels, spec.conv_out(input.dim(1)), spec.conv_out(input.dim(2))};
}

// Geometry of the transposed convolution, expressed as the forward conv that
// maps the (large) output back to the (small) input.
Geometry transpose_geometry(const Tensor& input, const ConvSpec& spec, const Tensor& weights) {
  require(input.rank() == 3 && input.dim(0) == spec.in_channels, Errc::ShapeMismatch,
          "conv_transpose2d input " + shape_string(input.shape()) + " does not have " +
              std::to_string(spec.in_channels) + " channels");
  const Shape expected{spec.in_channels, spec.out_channels, spec.kernel, spec.kernel};
  require(weights.shape() == expected, Errc::ShapeMismatch,
          "conv_transpose2d weights " + shape_string(weights.shape()) + ", expected " +
              shape_string(expected));
  // big = transposed output, small = transposed input
  return {spec.out_channels, spec.transpose_out(input.dim(1)), spec.transpose_out(input.dim(2)),
          spec.in_channels, input.dim(1), input.dim(2)};
}

void check_bias(const Tensor& bias, std::size_t channels) {
  require(bias.size() == channels, Errc::ShapeMismatch,
          "bias has " + std::to_string(bias.size()) + " entries, expected " +
              std::to_string(channels));
}

// Invokes fn(big_index, small_index, weight_offset_in_kernel) for every
// (output pixel, kernel tap) pair that lands inside the padded image. Shared
// by all direct-loop kernels; g describes big [C_big, H, W] -> small
// [C_small, H', W'].
template <typename Fn>
void for_each_tap(const Geometry& g, const ConvSpec& spec, Fn&& fn) {
  const std::size_t k = spec.kernel;
  for (std::size_t oh = 0; oh < g.height_out; ++oh) {
    for (std::size_t ow = 0; ow < g.width_out; ++ow) {
      for (std::size_t kh = 0; kh < k; ++kh) {
        const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh * spec.stride + kh) -
                                  static_cast<std::ptrdiff_t>(spec.padding);
        if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(g.height_in)) continue;
        for (std::size_t kw = 0; kw < k; ++kw) {
          const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow * spec.stride + kw) -
                                    static_cast<std::ptrdiff_t>(spec.padding);
          if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(g.width_in)) continue;
          fn(static_cast<std::size_t>(ih) * g.width_in + static_cast<std::size_t>(iw),
             oh * g.width_out + ow, kh * k + kw);
        }
      }
    }
  }
}

// cols[(c * k + kh) * k + kw, oh * W' + ow] = big[c, ih, iw] (0 in padding).
std::vector<double> im2col(const double* big, const Geometry& g, const ConvSpec& spec) {
  const std::size_t kk = spec.kernel * spec.kernel;
  const std::size_t hw_small = g.height_out * g.width_out;
  const std::size_t hw_big = g.height_in * g.width_in;
  std::vector<double> cols(g.channels_in * kk * hw_small, 0.0);
  for_each_tap(g, spec, [&](std::size_t big_idx, std::size_t small_idx, std::size_t tap) {
    for (std::size_t c = 0; c < g.channels_in; ++c) {
      cols[(c * kk + tap) * hw_small + small_idx] = big[c * hw_big + big_idx];
    }
  });
  return cols;
}

void col2im(const std::vector<double>& cols, const Geometry& g, const ConvSpec& spec,
            double* big) {
  const std::size_t kk = spec.kernel * spec.kernel;
  const std::size_t hw_small = g.height_out * g.width_out;
  const std::size_t hw_big = g.height_in * g.width_in;
  for_each_tap(g, spec, [&](std::size_t big_idx, std::size_t small_idx, std::size_t tap) {
    for (std::size_t c = 0; c < g.channels_in; ++c) {
      big[c * hw_big + big_idx] += cols[(c * kk + tap) * hw_small + small_idx];
    }
  });
}

void add_bias(Tensor& out, const Tensor& bias) {
  const std::size_t plane = out.dim(1) * out.dim(2);
  for (std::size_t c = 0; c < out.dim(0); ++c)
    for (std::size_t i = 0; i < plane; ++i) out[c * plane + i] += bias[c];
}

Tensor channel_sums(const Tensor& t) {
  Tensor sums(Shape{t.dim(0)});
  const std::size_t plane = t.dim(1) * t.dim(2);
  for (std::size_t c = 0; c < t.dim(0); ++c)
    for (std::size_t i = 0; i < plane; ++i) sums[c] += t[c * plane + i];
  return sums;
}

}  // namespace

Tensor conv2d(const Tensor& input, const ConvSpec& spec, const Tensor& weights,
              const Tensor& bias, ConvAlgo algo) {
  const Geometry g = conv_geometry(input, spec, weights);
  check_bias(bias, g.channels_out);
  Tensor out(Shape{g.channels_out, g.height_out, g.width_out});
  const std::size_t hw_small = g.height_out * g.width_out;
  const std::size_t hw_big = g.height_in * g.width_in;
  const std::size_t kk = spec.kernel * spec.kernel;
  if (algo == ConvAlgo::Direct) {
    for (std::size_t co = 0; co < g.channels_out; ++co) {
      for (std::size_t ci = 0; ci < g.channels_in; ++ci) {
        const double* w = weights.data().data() + (co * g.channels_in + ci) * kk;
        const double* x = input.data().data() + ci * hw_big;
        double* y = out.data().data() + co * hw_small;
        for_each_tap(g, spec, [&](std::size_t big, std::size_t small, std::size_t tap) {
          y[small] += w[tap] * x[big];
        });
      }
    }
  } else {
    const auto cols = im2col(input.data().data(), g, spec);
    numerics::gemm_nn(g.channels_out, hw_small, g.channels_in * kk, weights.data().data(),
                      cols.data(), out.data().data(), false);
  }
  add_bias(out, bias);
  return out;
}

ConvGrads conv2d_backward(const Tensor& input, const ConvSpec& spec, const Tensor& weights,
                          const Tensor& d_output, ConvAlgo algo) {
  const Geometry g = conv_geometry(input, spec, weights);
  require(d_output.shape() == Shape{g.channels_out, g.height_out, g.width_out},
          Errc::ShapeMismatch, "conv2d_backward: d_output " + shape_string(d_output.shape()));
  ConvGrads grads{Tensor(input.shape()), Tensor(weights.shape()), channel_sums(d_output)};
  const std::size_t hw_small = g.height_out * g.width_out;
  const std::size_t hw_big = g.height_in * g.width_in;
  const std::size_t kk = spec.kernel * spec.kernel;
  if (algo == ConvAlgo::Direct) {
    for (std::size_t co = 0; co < g.channels_out; ++co) {
      for (std::size_t ci = 0; ci < g.channels_in; ++ci) {
        const double* w = weights.data().data() + (co * g.channels_in + ci) * kk;
        double* dw = grads.d_weights.data().data() + (co * g.channels_in + ci) * kk;
        const double* x = input.data().data() + ci * hw_big;
        double* dx = grads.d_input.data().data() + ci * hw_big;
        const double* dy = d_output.data().data() + co * hw_small;
        for_each_tap(g, spec, [&](std::size_t big, std::size_t small, std::size_t tap) {
          dx[big] += w[tap] * dy[small];
          dw[tap] += x[big] * dy[small];
        });
      }
    }
  } else {
    const std::size_t rows = g.channels_in * kk;
    const auto cols = im2col(input.data().data(), g, spec);
    numerics::gemm_nt(g.channels_out, rows, hw_small, d_output.data().data(), cols.data(),
                      grads.d_weights.data().data(), false);
    std::vector<double> d_cols(rows * hw_small);
    numerics::gemm_tn(rows, hw_small, g.channels_out, weights.data().data(),
                      d_output.data().data(), d_cols.data(), false);
    col2im(d_cols, g, spec, grads.d_input.data().data());
  }
  return grads;
}

Tensor conv_transpose2d(const Tensor& input, const ConvSpec& spec, const Tensor& weights,
                        const Tensor& bias, ConvAlgo algo) {
  const Geometry g = transpose_geometry(input, spec, weights);
  check_bias(bias, g.channels_in);
  Tensor out(Shape{g.channels_in, g.height_in, g.width_in});
  const std::size_t hw_small = g.height_out * g.width_out;
  const std::size_t hw_big = g.height_in * g.width_in;
  const std::size_t kk = spec.kernel * spec.kernel;
  if (algo == ConvAlgo::Direct) {
    // weights[ci_small, co_big, kh, kw]
    for (std::size_t cs = 0; cs < g.channels_out; ++cs) {
      for (std::size_t cb = 0; cb < g.channels_in; ++cb) {
        const double* w = weights.data().data() + (cs * g.channels_in + cb) * kk;
        const double* x = input.data().data() + cs * hw_small;
        double* y = out.data().data() + cb * hw_big;
        for_each_tap(g, spec, [&](std::size_t big, std::size_t small, std::size_t tap) {
          y[big] += w[tap] * x[small];
        });
      }
    }
  } else {
    const std::size_t rows = g.channels_in * kk;
    std::vector<double> cols(rows * hw_small);
    numerics::gemm_tn(rows, hw_small, g.channels_out, weights.data().data(),
                      input.data().data(), cols.data(), false);
    col2im(cols, g, spec, out.data().data());
  }
  add_bias(out, bias);
  return out;
}

ConvGrads conv_transpose2d_backward(const Tensor& input, const ConvSpec& spec,
                                    const Tensor& weights, const Tensor& d_output,
                                    ConvAlgo algo) {
  const Geometry g = transpose_geometry(input, spec, weights);
  require(d_output.shape() == Shape{g.channels_in, g.height_in, g.width_in},
          Errc::ShapeMismatch,
          "conv_transpose2d_backward: d_output " + shape_string(d_output.shape()));
  ConvGrads grads{Tensor(input.shape()), Tensor(weights.shape()), channel_sums(d_output)};
  const std::size_t hw_small = g.height_out * g.width_out;
  const std::size_t hw_big = g.height_in * g.width_in;
  const std::size_t kk = spec.kernel * spec.kernel;
  if (algo == ConvAlgo::Direct) {
    for (std::size_t cs = 0; cs < g.channels_out; ++cs) {
      for (std::size_t cb = 0; cb < g.channels_in; ++cb) {
        const double* w = weights.data().data() + (cs * g.channels_in + cb) * kk;
        double* dw = grads.d_weights.data().data() + (cs * g.channels_in + cb) * kk;
        const double* x = input.data().data() + cs * hw_small;
        double* dx = grads.d_input.data().data() + cs * hw_small;
        const double* dy = d_output.data().data() + cb * hw_big;
        for_each_tap(g, spec, [&](std::size_t big, std::size_t small, std::size_t tap) {
          dx[small] += w[tap] * dy[big];
          dw[tap] += x[small] * dy[big];
        });
      }
    }
  } else {
    const std::size_t rows = g.channels_in * kk;
    const auto cols = im2col(d_output.data().data(), g, spec);
    numerics::gemm_nn(g.channels_out, hw_small, rows, weights.data().data(), cols.data(),
                      grads.d_input.data().data(), false);
    numerics::gemm_nt(g.channels_out, rows, hw_small, input.data().data(), cols.data(),
                      grads.d_weights.data().data(), false);
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Encoder-decoder
// ---------------------------------------------------------------------------

void AeGeometry::validate() const {
  require(side >= 4 && side % 4 == 0, Errc::ShapeMismatch,
          "autoencoder image side must be a positive multiple of 4");
  require(latent >= 1 && channels1 >= 1 && channels2 >= 1, Errc::ShapeMismatch,
          "autoencoder widths must be positive");
}

AeParams AeParams::zeros(const AeGeometry& geo) {
  geo.validate();
  AeParams p;
  p.geometry = geo;
  p.conv1_w = Tensor({geo.channels1, 1, 3, 3});
  p.conv1_b = Tensor({geo.channels1});
  p.conv2_w = Tensor({geo.channels2, geo.channels1, 3, 3});
  p.conv2_b = Tensor({geo.channels2});
  p.fc_enc_w = Tensor({geo.latent, geo.flat()});
  p.fc_enc_b = Tensor({geo.latent});
  p.fc_dec_w = Tensor({geo.flat(), geo.latent});
  p.fc_dec_b = Tensor({geo.flat()});
  p.deconv1_w = Tensor({geo.channels2, geo.channels1, 3, 3});
  p.deconv1_b = Tensor({geo.channels1});
  p.deconv2_w = Tensor({geo.channels1, 1, 3, 3});
  p.deconv2_b = Tensor({1});
  return p;
}

std::array<Tensor*, kAeTensorCount> AeParams::tensors() {
  return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc_enc_w, &fc_enc_b,
          &fc_dec_w, &fc_dec_b, &deconv1_w, &deconv1_b, &deconv2_w, &deconv2_b};
}

std::array<const Tensor*, kAeTensorCount> AeParams::tensors() const {
  return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &fc_enc_w, &fc_enc_b,
          &fc_dec_w, &fc_dec_b, &deconv1_w, &deconv1_b, &deconv2_w, &deconv2_b};
}

const std::array<std::string_view, kAeTensorCount>& AeParams::tensor_names() {
  static const std::array<std::string_view, kAeTensorCount> names{
      "conv1.weight",   "conv1.bias",   "conv2.weight",   "conv2.bias",
      "fc_enc.weight",  "fc_enc.bias",  "fc_dec.weight",  "fc_dec.bias",
      "deconv1.weight", "deconv1.bias", "deconv2.weight", "deconv2.bias"};
  return names;
}

std::size_t AeParams::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* t : tensors()) n += t->size();
  return n;
}

AeParams init_autoencoder(const AeGeometry& geometry, std::uint64_t seed) {
  AeParams p = AeParams::zeros(geometry);
  Rng rng(seed);
  auto he = [&rng](Tensor& w, std::size_t fan_in) {
    const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& v : w.data()) v = std_dev * rng.normal();
  };
  he(p.conv1_w, 1 * 9);
  he(p.conv2_w, geometry.channels1 * 9);
  he(p.fc_enc_w, geometry.flat());
  he(p.fc_dec_w, geometry.latent);
  he(p.deconv1_w, geometry.channels2 * 9);
  he(p.deconv2_w, geometry.channels1 * 9);
  return p;
}

namespace {

void check_image(const Tensor& image, const AeGeometry& geo) {
  require(image.shape() == Shape{1, geo.side, geo.side}, Errc::ShapeMismatch,
          "autoencoder expects a [1," + std::to_string(geo.side) + "," +
              std::to_string(geo.side) + "] image, got " + shape_string(image.shape()));
}

}  // namespace

Tensor forward(const Tensor& image, const AeParams& p, AeCache* cache, ConvAlgo algo) {
  const AeGeometry& geo = p.geometry;
  check_image(image, geo);
  AeCache local;
  AeCache& c = cache ? *cache : local;
  c.geometry = geo;
  c.input = image;
  c.h1_pre = conv2d(image, geo.conv1(), p.conv1_w, p.conv1_b, algo);
  c.h1 = numerics::relu(c.h1_pre);
  c.h2_pre = conv2d(c.h1, geo.conv2(), p.conv2_w, p.conv2_b, algo);
  c.h2 = numerics::relu(c.h2_pre);
  c.z_pre = numerics::fc_forward(c.h2.reshaped({geo.flat()}), p.fc_enc_w, p.fc_enc_b);
  c.z = numerics::relu(c.z_pre);
  c.g_pre = numerics::fc_forward(c.z, p.fc_dec_w, p.fc_dec_b);
  c.g = numerics::relu(c.g_pre);
  const Tensor g_img = c.g.reshaped({geo.channels2, geo.quarter(), geo.quarter()});
  c.u1_pre = conv_transpose2d(g_img, geo.deconv1(), p.deconv1_w, p.deconv1_b, algo);
  c.u1 = numerics::relu(c.u1_pre);
  c.output = numerics::sigmoid(conv_transpose2d(c.u1, geo.deconv2(), p.deconv2_w, p.deconv2_b, algo));
  return c.output;
}

Tensor encode(const Tensor& image, const AeParams& p, ConvAlgo algo) {
  const AeGeometry& geo = p.geometry;
  check_image(image, geo);
  const Tensor h1 = numerics::relu(conv2d(image, geo.conv1(), p.conv1_w, p.conv1_b, algo));
  const Tensor h2 = numerics::relu(conv2d(h1, geo.conv2(), p.conv2_w, p.conv2_b, algo));
  return numerics::relu(numerics::fc_forward(h2.reshaped({geo.flat()}), p.fc_enc_w, p.fc_enc_b));
}

Tensor decode(const Tensor& latent, const AeParams& p, ConvAlgo algo) {
  const AeGeometry& geo = p.geometry;
  require(latent.shape() == Shape{geo.latent}, Errc::ShapeMismatch,
          "latent vector must have length " + std::to_string(geo.latent));
  const Tensor g = numerics::relu(numerics::fc_forward(latent, p.fc_dec_w, p.fc_dec_b));
  const Tensor u1 = numerics::relu(conv_transpose2d(
      g.reshaped({geo.channels2, geo.quarter(), geo.quarter()}), geo.deconv1(), p.deconv1_w,
      p.deconv1_b, algo));
  return numerics::sigmoid(conv_transpose2d(u1, geo.deconv2(), p.deconv2_w, p.deconv2_b, algo));
}

AeGradients ae_backward(const AeParams& p, const AeCache& c, const Tensor& d_output,
                        ConvAlgo algo) {
  const AeGeometry& geo = p.geometry;
  require(c.geometry == geo && c.output.shape() == Shape{1, geo.side, geo.side} &&
              c.h2.shape() == Shape{geo.channels2, geo.quarter(), geo.quarter()},
          Errc::CacheMismatch, "autoencoder cache does not match these parameters");
  numerics::require_same_shape(c.output, d_output, "ae_backward d_output");

  AeGradients grads{AeParams::zeros(geo), Tensor()};
  AeParams& d = grads.params;

  const Tensor d_out_pre = numerics::sigmoid_backward(c.output, d_output);
  auto g_deconv2 = conv_transpose2d_backward(c.u1, geo.deconv2(), p.deconv2_w, d_out_pre, algo);
  d.deconv2_w = std::move(g_deconv2.d_weights);
  d.deconv2_b = std::move(g_deconv2.d_bias);

  const Tensor d_u1_pre = numerics::relu_backward(c.u1_pre, g_deconv2.d_input);
  const Tensor g_img = c.g.reshaped({geo.channels2, geo.quarter(), geo.quarter()});
  auto g_deconv1 = conv_transpose2d_backward(g_img, geo.deconv1(), p.deconv1_w, d_u1_pre, algo);
  d.deconv1_w = std::move(g_deconv1.d_weights);
  d.deconv1_b = std::move(g_deconv1.d_bias);

  const Tensor d_g_pre =
      numerics::relu_backward(c.g_pre, g_deconv1.d_input.reshaped({geo.flat()}));
  auto g_fc_dec = numerics::fc_backward(c.z, p.fc_dec_w, d_g_pre);
  d.fc_dec_w = std::move(g_fc_dec.d_weights);
  d.fc_dec_b = std::move(g_fc_dec.d_bias);

  const Tensor d_z_pre = numerics::relu_backward(c.z_pre, g_fc_dec.dx);
  const Tensor h2_flat = c.h2.reshaped({geo.flat()});
  auto g_fc_enc = numerics::fc_backward(h2_flat, p.fc_enc_w, d_z_pre);
  d.fc_enc_w = std::move(g_fc_enc.d_weights);
  d.fc_enc_b = std::move(g_fc_enc.d_bias);

  const Tensor d_h2_pre = numerics::relu_backward(
      c.h2_pre, g_fc_enc.dx.reshaped({geo.channels2, geo.quarter(), geo.quarter()}));
  auto g_conv2 = conv2d_backward(c.h1, geo.conv2(), p.conv2_w, d_h2_pre, algo);
  d.conv2_w = std::move(g_conv2.d_weights);
  d.conv2_b = std::move(g_conv2.d_bias);

  const Tensor d_h1_pre = numerics::relu_backward(c.h1_pre, g_conv2.d_input);
  auto g_conv1 = conv2d_backward(c.input, geo.conv1(), p.conv1_w, d_h1_pre, algo);
  d.conv1_w = std::move(g_conv1.d_weights);
  d.conv1_b = std::move(g_conv1.d_bias);
  grads.d_input = std::move(g_conv1.d_input);
  return grads;
}

void AeTrainConfig::validate() const {
  require(learning_rate >= 0.0, Errc::InvalidArgument, "learning rate must be non-negative");
  require(batch_size >= 1, Errc::InvalidArgument, "batch size must be at least 1");
  require(epochs >= 1, Errc::InvalidArgument, "epochs must be at least 1");
}

namespace {

Tensor image_tensor(const dataio::ImageSet& set, std::size_t i) {
  const auto px = set.sample(i);
  return Tensor({1, set.rows, set.cols}, std::vector<double>(px.begin(), px.end()));
}

double sample_mse(const Tensor& pred, std::span<const double> target) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    sum += diff * diff;
  }
  return sum / static_cast<double>(pred.size());
}

void check_pairs(const dataio::ImageSet& inputs, const dataio::ImageSet& targets) {
  require(inputs.pixels.shape() == targets.pixels.shape(), Errc::ShapeMismatch,
          "autoencoder inputs and targets must pair 1:1 with equal shapes");
  require(inputs.rows == inputs.cols, Errc::ShapeMismatch, "autoencoder needs square images");
}

}  // namespace

double evaluate_mse(const AeParams& params, const dataio::ImageSet& inputs,
                    const dataio::ImageSet& targets, std::size_t workers) {
  check_pairs(inputs, targets);
  if (inputs.count == 0) return 0.0;
  std::vector<double> errors(inputs.count);
  parallel_for(inputs.count, workers, [&](std::size_t i) {
    errors[i] = sample_mse(forward(image_tensor(inputs, i), params), targets.sample(i));
  });
  double sum = 0.0;
  for (double e : errors) sum += e;
  return sum / static_cast<double>(inputs.count);
}

AeTrainResult train_autoencoder(const dataio::ImageSet& inputs, const dataio::ImageSet& targets,
                                const AeTrainConfig& config, std::optional<AeGeometry> geometry,
                                const AeEpochCallback& on_epoch) {
  config.validate();
  check_pairs(inputs, targets);
  require(inputs.count > 0, Errc::InvalidArgument, "no autoencoder training pairs");
  AeGeometry geo = geometry.value_or(AeGeometry{});
  geo.side = inputs.rows;

  AeTrainResult result{init_autoencoder(geo, derive_seed(config.seed, 0)), {}};
  AeParams& params = result.params;
  result.losses.push_back(evaluate_mse(params, inputs, targets, config.workers));

  std::array<numerics::AdamState, kAeTensorCount> adam;
  {
    const auto tensors = params.tensors();
    for (std::size_t t = 0; t < kAeTensorCount; ++t) adam[t] = numerics::AdamState(tensors[t]->size());
  }

  struct SampleResult {
    double mse = 0.0;
    AeParams grads;
  };
  std::vector<SampleResult> per_sample;
  const std::uint64_t shuffle_seed = derive_seed(config.seed, 1);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (const auto& batch : dataio::epoch_batches(inputs.count, config.batch_size,
                                                   shuffle_seed, epoch)) {
      per_sample.assign(batch.size(), {});
      const double scale =
          2.0 / static_cast<double>(batch.size() * inputs.sample_size());
      parallel_for(batch.size(), config.workers, [&](std::size_t i) {
        const std::size_t s = batch[i];
        AeCache cache;
        const Tensor out = forward(image_tensor(inputs, s), params, &cache, config.algo);
        const auto target = targets.sample(s);
        Tensor d_out(out.shape());
        for (std::size_t j = 0; j < out.size(); ++j) d_out[j] = scale * (out[j] - target[j]);
        per_sample[i].mse = sample_mse(out, target);
        per_sample[i].grads = ae_backward(params, cache, d_out, config.algo).params;
      });

      AeParams total = AeParams::zeros(geo);
      auto total_tensors = total.tensors();
      for (auto& r : per_sample) {
        loss_sum += r.mse;
        const auto g = r.grads.tensors();
        for (std::size_t t = 0; t < kAeTensorCount; ++t) {
          auto dst = total_tensors[t]->data();
          const auto src = g[t]->data();
          for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
        }
      }
      auto param_tensors = params.tensors();
      for (std::size_t t = 0; t < kAeTensorCount; ++t) {
        numerics::adam_step(param_tensors[t]->data(), total_tensors[t]->data(), adam[t],
                            config.learning_rate);
      }
    }
    result.losses.push_back(loss_sum / static_cast<double>(inputs.count));
    if (on_epoch) on_epoch(epoch + 1, result.losses.back());
  }
  return result;
}

dataio::ImageSet reconstruct_batch(const AeParams& params, const dataio::ImageSet& images,
                                   std::size_t workers) {
  dataio::ImageSet out = dataio::ImageSet::zeros(images.count, images.rows, images.cols);
  if (images.count == 0) return out;
  require(images.rows == params.geometry.side && images.cols == params.geometry.side,
          Errc::ShapeMismatch, "image size does not match the autoencoder");
  parallel_for(images.count, workers, [&](std::size_t i) {
    const Tensor rec = forward(image_tensor(images, i), params);
    std::ranges::copy(rec.data(), out.sample(i).begin());
  });
  return out;
}

}  // namespace qshield::cednet

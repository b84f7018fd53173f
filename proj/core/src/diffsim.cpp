#include "qshield/diffsim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qshield/errors.hpp"

namespace qshield::diffsim {

using statevec::Complex;
using statevec::PureState;

std::size_t angles_per_qubit(RotationKind kind) { return kind == RotationKind::Euler ? 3 : 1; }

std::string_view to_string(RotationKind kind) { return kind == RotationKind::Euler ? "euler" : "ry"; }

RotationKind parse_rotation(std::string_view text) {
  if (text == "euler") return RotationKind::Euler;
  if (text == "ry") return RotationKind::Ry;
  fail(Errc::InvalidArgument, "unknown rotation '" + std::string(text) + "'");
}

std::string_view to_string(Topology topology) {
  return topology == Topology::Ring ? "ring" : "chain";
}

Topology parse_topology(std::string_view text) {
  if (text == "ring") return Topology::Ring;
  if (text == "chain") return Topology::Chain;
  fail(Errc::InvalidArgument, "unknown topology '" + std::string(text) + "'");
}

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

CircuitTape CircuitTape::layered(std::size_t n_qubits, std::size_t n_layers,
                                 RotationKind rotation, Topology topology) {
  require(n_qubits >= 1 && n_qubits <= statevec::kMaxQubits, Errc::InvalidArgument,
          "qubit count must be in [1, 20]");
  CircuitTape tape;
  tape.n_qubits_ = n_qubits;
  tape.n_layers_ = n_layers;
  tape.rotation_ = rotation;
  tape.topology_ = topology;
  const std::size_t k = angles_per_qubit(rotation);
  tape.n_params_ = n_layers * n_qubits * k;

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n_qubits >= 2) {
    for (std::size_t q = 0; q + 1 < n_qubits; ++q) pairs.emplace_back(q, q + 1);
    if (topology == Topology::Ring && n_qubits > 2) pairs.emplace_back(n_qubits - 1, 0);
  }

  const auto kind = rotation == RotationKind::Euler ? TapeOp::Kind::Rot : TapeOp::Kind::Ry;
  for (std::size_t layer = 0; layer < n_layers; ++layer) {
    for (std::size_t q = 0; q < n_qubits; ++q) {
      tape.ops_.push_back(TapeOp{kind, q, 0, (layer * n_qubits + q) * k});
    }
    for (auto [a, b] : pairs) tape.ops_.push_back(TapeOp{TapeOp::Kind::Cz, a, b, 0});
  }

  // All CZ gates of a layer are diagonal and commute; fold them into the list
  // of basis indices whose amplitude flips sign.
  if (!pairs.empty()) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    std::vector<std::size_t> negate;
    for (std::size_t i = 0; i < dim; ++i) {
      int parity = 0;
      for (auto [a, b] : pairs) {
        const bool bit_a = i & (std::size_t{1} << (n_qubits - 1 - a));
        const bool bit_b = i & (std::size_t{1} << (n_qubits - 1 - b));
        parity ^= (bit_a && bit_b);
      }
      if (parity) negate.push_back(i);
    }
    tape.cz_block_negations_.push_back(std::move(negate));
  }

  std::uint64_t h = mix(0, n_qubits);
  h = mix(h, n_layers);
  h = mix(h, static_cast<std::uint64_t>(rotation));
  h = mix(h, static_cast<std::uint64_t>(topology));
  for (const auto& op : tape.ops_) {
    h = mix(h, static_cast<std::uint64_t>(op.kind));
    h = mix(h, op.qubit);
    h = mix(h, op.qubit2);
    h = mix(h, op.first_param);
  }
  tape.fingerprint_ = h;
  return tape;
}

std::size_t CircuitTape::param_index(ParamSlot slot) const {
  const std::size_t k = angles_per_qubit(rotation_);
  require(slot.layer < n_layers_ && slot.qubit < n_qubits_ && slot.slot < k,
          Errc::IndexOutOfRange, "parameter slot out of range");
  return (slot.layer * n_qubits_ + slot.qubit) * k + slot.slot;
}

ParamSlot CircuitTape::param_slot(std::size_t index) const {
  require(index < n_params_, Errc::IndexOutOfRange,
          "parameter index " + std::to_string(index) + " out of range");
  const std::size_t k = angles_per_qubit(rotation_);
  return {index / k / n_qubits_, (index / k) % n_qubits_, index % k};
}

struct Simulator {
  // Applies the tape; consecutive CZ ops of one layer are applied as a single
  // sign sweep.
  static void run(const CircuitTape& tape, std::span<const double> params, PureState& state) {
    const auto& ops = tape.ops_;
    for (std::size_t i = 0; i < ops.size();) {
      const TapeOp& op = ops[i];
      switch (op.kind) {
        case TapeOp::Kind::Rot:
          state.apply_rot(op.qubit, params[op.first_param], params[op.first_param + 1],
                          params[op.first_param + 2]);
          ++i;
          break;
        case TapeOp::Kind::Ry:
          state.apply_ry(op.qubit, params[op.first_param]);
          ++i;
          break;
        case TapeOp::Kind::Cz:
          negate(tape, state.amplitudes());
          i = skip_cz_block(ops, i);
          break;
      }
    }
  }

  static void negate(const CircuitTape& tape, std::span<Complex> amps) {
    for (std::size_t idx : tape.cz_block_negations_.front()) amps[idx] = -amps[idx];
  }

  static std::size_t skip_cz_block(const std::vector<TapeOp>& ops, std::size_t i) {
    while (i < ops.size() && ops[i].kind == TapeOp::Kind::Cz) ++i;
    return i;
  }

  static GradientBundle backward(const CircuitTape& tape, const ForwardCache& cache,
                                 std::span<const double> d_expectations) {
    const std::size_t n = tape.n_qubits_;
    const std::size_t dim = std::size_t{1} << n;
    const auto& params = cache.params;

    std::vector<Complex> psi(cache.final_state.amplitudes().begin(),
                             cache.final_state.amplitudes().end());
    // lambda = (sum_q g_q Z_q) psi
    std::vector<Complex> lam(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      double weight = 0.0;
      for (std::size_t q = 0; q < n; ++q) {
        weight += (i & (std::size_t{1} << (n - 1 - q))) ? -d_expectations[q] : d_expectations[q];
      }
      lam[i] = weight * psi[i];
    }

    GradientBundle out{std::vector<double>(tape.n_params_, 0.0), std::vector<double>(dim, 0.0)};
    const auto& ops = tape.ops_;
    for (std::size_t pos = ops.size(); pos-- > 0;) {
      const TapeOp& op = ops[pos];
      if (op.kind == TapeOp::Kind::Cz) {
        while (pos > 0 && ops[pos - 1].kind == TapeOp::Kind::Cz) --pos;
        negate(tape, psi);
        negate(tape, lam);
        continue;
      }
      const std::size_t s = std::size_t{1} << (n - 1 - op.qubit);
      if (op.kind == TapeOp::Kind::Rot) {
        reverse_rot(psi, lam, s, params[op.first_param], params[op.first_param + 1],
                    params[op.first_param + 2], out.d_params.data() + op.first_param);
      } else {
        reverse_ry(psi, lam, s, params[op.first_param], out.d_params[op.first_param]);
      }
    }
    for (std::size_t i = 0; i < dim; ++i) out.d_input_amplitudes[i] = 2.0 * lam[i].real();
    return out;
  }

  // Undoes RZ(c) RY(b) RZ(a) on psi and lambda in one sweep. For each
  // elementary gate exp(-i t P / 2), dL/dt = Im <lambda | P | psi_after>.
  static void reverse_rot(std::vector<Complex>& psi, std::vector<Complex>& lam, std::size_t s,
                          double a, double b, double c, double* grads) {
    const Complex ec = std::polar(1.0, c / 2), ea = std::polar(1.0, a / 2);
    const double cb = std::cos(b / 2), sb = std::sin(b / 2);
    double ga = 0.0, gb = 0.0, gc = 0.0;
    const std::size_t dim = psi.size();
    for (std::size_t base = 0; base < dim; base += 2 * s) {
      for (std::size_t i = base; i < base + s; ++i) {
        Complex x0 = psi[i], x1 = psi[i + s], l0 = lam[i], l1 = lam[i + s];

        gc += (std::conj(l0) * x0 - std::conj(l1) * x1).imag();
        x0 *= ec; x1 *= std::conj(ec);
        l0 *= ec; l1 *= std::conj(ec);

        gb += (std::conj(l1) * x0).real() - (std::conj(l0) * x1).real();
        Complex t0 = cb * x0 + sb * x1, t1 = cb * x1 - sb * x0;
        x0 = t0; x1 = t1;
        t0 = cb * l0 + sb * l1; t1 = cb * l1 - sb * l0;
        l0 = t0; l1 = t1;

        ga += (std::conj(l0) * x0 - std::conj(l1) * x1).imag();
        x0 *= ea; x1 *= std::conj(ea);
        l0 *= ea; l1 *= std::conj(ea);

        psi[i] = x0; psi[i + s] = x1;
        lam[i] = l0; lam[i + s] = l1;
      }
    }
    grads[0] += ga;
    grads[1] += gb;
    grads[2] += gc;
  }

  static void reverse_ry(std::vector<Complex>& psi, std::vector<Complex>& lam, std::size_t s,
                         double b, double& grad) {
    const double cb = std::cos(b / 2), sb = std::sin(b / 2);
    double gb = 0.0;
    const std::size_t dim = psi.size();
    for (std::size_t base = 0; base < dim; base += 2 * s) {
      for (std::size_t i = base; i < base + s; ++i) {
        const Complex x0 = psi[i], x1 = psi[i + s], l0 = lam[i], l1 = lam[i + s];
        gb += (std::conj(l1) * x0).real() - (std::conj(l0) * x1).real();
        psi[i] = cb * x0 + sb * x1;
        psi[i + s] = cb * x1 - sb * x0;
        lam[i] = cb * l0 + sb * l1;
        lam[i + s] = cb * l1 - sb * l0;
      }
    }
    grad += gb;
  }
};

void apply_tape(const CircuitTape& tape, std::span<const double> params, PureState& state) {
  require(params.size() == tape.n_params(), Errc::ShapeMismatch,
          "tape expects " + std::to_string(tape.n_params()) + " parameters, got " +
              std::to_string(params.size()));
  require(state.n_qubits() == tape.n_qubits(), Errc::ShapeMismatch,
          "state and tape qubit counts differ");
  Simulator::run(tape, params, state);
}

ForwardResult forward(const CircuitTape& tape, std::span<const double> params,
                      PureState state_in) {
  apply_tape(tape, params, state_in);
  ForwardResult result;
  result.expectations = state_in.expect_z_all();
  result.cache.tape_fingerprint = tape.fingerprint();
  result.cache.params.assign(params.begin(), params.end());
  result.cache.final_state = std::move(state_in);
  return result;
}

GradientBundle backward_adjoint(const CircuitTape& tape, const ForwardCache& cache,
                                std::span<const double> d_expectations) {
  require(cache.tape_fingerprint == tape.fingerprint() &&
              cache.params.size() == tape.n_params() &&
              cache.final_state.n_qubits() == tape.n_qubits(),
          Errc::CacheMismatch, "forward cache was produced by a different tape");
  require(d_expectations.size() == tape.n_qubits(), Errc::ShapeMismatch,
          "one expectation adjoint per qubit is required");
  return Simulator::backward(tape, cache, d_expectations);
}

namespace {

double linear_loss(const CircuitTape& tape, std::span<const double> params,
                   const PureState& state_in, std::span<const double> d_expectations) {
  PureState state = state_in;
  apply_tape(tape, params, state);
  const auto z = state.expect_z_all();
  double loss = 0.0;
  for (std::size_t q = 0; q < z.size(); ++q) loss += d_expectations[q] * z[q];
  return loss;
}

}  // namespace

double parameter_shift_grad(const CircuitTape& tape, std::span<const double> params,
                            const PureState& state_in, std::span<const double> d_expectations,
                            std::size_t index) {
  require(index < tape.n_params(), Errc::IndexOutOfRange,
          "parameter index " + std::to_string(index) + " out of range");
  require(d_expectations.size() == tape.n_qubits(), Errc::ShapeMismatch,
          "one expectation adjoint per qubit is required");
  std::vector<double> shifted(params.begin(), params.end());
  constexpr double kShift = std::numbers::pi / 2;
  shifted[index] = params[index] + kShift;
  const double plus = linear_loss(tape, shifted, state_in, d_expectations);
  shifted[index] = params[index] - kShift;
  const double minus = linear_loss(tape, shifted, state_in, d_expectations);
  return 0.5 * (plus - minus);
}

std::vector<double> parameter_shift_gradients(const CircuitTape& tape,
                                              std::span<const double> params,
                                              const PureState& state_in,
                                              std::span<const double> d_expectations) {
  std::vector<double> grads(tape.n_params());
  for (std::size_t i = 0; i < grads.size(); ++i) {
    grads[i] = parameter_shift_grad(tape, params, state_in, d_expectations, i);
  }
  return grads;
}

std::vector<double> pixel_gradient(std::span<const double> d_input_amplitudes,
                                   std::span<const double> pixels) {
  require(d_input_amplitudes.size() >= pixels.size(), Errc::ShapeMismatch,
          "amplitude gradient shorter than the pixel vector");
  double sum_sq = 0.0;
  for (double p : pixels) sum_sq += p * p;
  require(sum_sq > 0.0, Errc::ZeroVector, "pixel gradient of an all-zero image");
  const double norm = std::sqrt(sum_sq);
  // Padded amplitudes are zero, so psi . g only involves the live pixels.
  double radial = 0.0;
  for (std::size_t i = 0; i < pixels.size(); ++i) radial += pixels[i] / norm * d_input_amplitudes[i];
  std::vector<double> grad(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    grad[i] = (d_input_amplitudes[i] - pixels[i] / norm * radial) / norm;
  }
  return grad;
}

}  // namespace qshield::diffsim

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "qshield/statevec.hpp"

namespace qshield::diffsim {

enum class RotationKind : std::uint8_t {
  Euler,  // RZ(c) RY(b) RZ(a): three angles per qubit per layer
  Ry,     // single RY angle per qubit per layer
};

enum class Topology : std::uint8_t {
  Ring,   // CZ(q, q+1 mod n)
  Chain,  // CZ(q, q+1) for q < n-1
};

std::size_t angles_per_qubit(RotationKind kind);

std::string_view to_string(RotationKind kind);
RotationKind parse_rotation(std::string_view text);
std::string_view to_string(Topology topology);
Topology parse_topology(std::string_view text);

struct ParamSlot {
  std::size_t layer;
  std::size_t qubit;
  std::size_t slot;  // 0, 1, 2 = a, b, c for Euler; 0 for Ry

  bool operator==(const ParamSlot&) const = default;
};

struct TapeOp {
  enum class Kind : std::uint8_t { Rot, Ry, Cz };
  Kind kind;
  std::size_t qubit = 0;
  std::size_t qubit2 = 0;       // Cz only
  std::size_t first_param = 0;  // Rot: 3 consecutive angles, Ry: 1
};

// Ordered gate list with a flat parameter layout
// index = (layer * n_qubits + qubit) * angles_per_qubit + slot.
class CircuitTape {
 public:
  static CircuitTape layered(std::size_t n_qubits, std::size_t n_layers, RotationKind rotation,
                             Topology topology);

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  std::size_t n_layers() const noexcept { return n_layers_; }
  std::size_t n_params() const noexcept { return n_params_; }
  RotationKind rotation() const noexcept { return rotation_; }
  Topology topology() const noexcept { return topology_; }
  const std::vector<TapeOp>& ops() const noexcept { return ops_; }

  std::size_t param_index(ParamSlot slot) const;
  ParamSlot param_slot(std::size_t index) const;

  // Identifies the gate structure; used to reject caches from another tape.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

 private:
  std::size_t n_qubits_ = 0;
  std::size_t n_layers_ = 0;
  std::size_t n_params_ = 0;
  RotationKind rotation_ = RotationKind::Euler;
  Topology topology_ = Topology::Ring;
  std::vector<TapeOp> ops_;
  // Basis indices negated by one layer's CZ block (identical for every layer).
  std::vector<std::vector<std::size_t>> cz_block_negations_;
  std::uint64_t fingerprint_ = 0;

  friend struct Simulator;
};

struct ForwardCache {
  std::uint64_t tape_fingerprint = 0;
  std::vector<double> params;
  statevec::PureState final_state{1};
};

struct ForwardResult {
  std::vector<double> expectations;  // <Z_q> for q = 0..n-1
  ForwardCache cache;
};

struct GradientBundle {
  std::vector<double> d_params;
  // dL/d(input amplitude), real part of the input perturbation.
  std::vector<double> d_input_amplitudes;
};

void apply_tape(const CircuitTape& tape, std::span<const double> params,
                statevec::PureState& state);

ForwardResult forward(const CircuitTape& tape, std::span<const double> params,
                      statevec::PureState state_in);

// Reverse sweep given dL/d<Z_q>. Exact for any loss of the expectations.
GradientBundle backward_adjoint(const CircuitTape& tape, const ForwardCache& cache,
                                std::span<const double> d_expectations);

// dL/dtheta_index = 1/2 (L(theta + pi/2) - L(theta - pi/2)) for the linearized
// loss L = sum_q d_expectations[q] * <Z_q>. Two forward passes.
double parameter_shift_grad(const CircuitTape& tape, std::span<const double> params,
                            const statevec::PureState& state_in,
                            std::span<const double> d_expectations, std::size_t index);

std::vector<double> parameter_shift_gradients(const CircuitTape& tape,
                                              std::span<const double> params,
                                              const statevec::PureState& state_in,
                                              std::span<const double> d_expectations);

// Chains an amplitude-space gradient through v -> v / |v| (v = pixels,
// zero-padded): dL/dv = (I - psi psi^T) g / |v|, restricted to the pixels.
std::vector<double> pixel_gradient(std::span<const double> d_input_amplitudes,
                                   std::span<const double> pixels);

}  // namespace qshield::diffsim

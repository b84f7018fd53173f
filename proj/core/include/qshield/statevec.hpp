#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace qshield::statevec {

using Complex = std::complex<double>;
// Row-major 2x2 matrix {m00, m01, m10, m11}.
using Mat2 = std::array<Complex, 4>;

inline constexpr std::size_t kMaxQubits = 20;

// General Euler rotation RZ(c) * RY(b) * RZ(a) on one qubit.
struct RotGate {
  std::size_t qubit;
  double a;
  double b;
  double c;
};

struct CzGate {
  std::size_t control;
  std::size_t target;
};

using GateOp = std::variant<RotGate, CzGate>;

// RY(t) = exp(-i t Y / 2), RZ(t) = exp(-i t Z / 2).
Mat2 ry_matrix(double theta);
Mat2 rz_matrix(double theta);
Mat2 rot_matrix(double a, double b, double c);

// Pure state of n qubits. Qubit 0 is the most significant bit of the basis
// index, so |q0 q1 ... q_{n-1}> has index sum_q q_k * 2^(n-1-k).
class PureState {
 public:
  // |0...0>
  explicit PureState(std::size_t n_qubits);

  static PureState basis(std::size_t n_qubits, std::size_t index);
  // Takes the amplitudes as given; no normalization.
  static PureState from_amplitudes(std::size_t n_qubits, std::vector<Complex> amplitudes);

  std::size_t n_qubits() const noexcept { return n_; }
  std::size_t dim() const noexcept { return amps_.size(); }
  std::span<const Complex> amplitudes() const noexcept { return amps_; }
  std::span<Complex> amplitudes() noexcept { return amps_; }

  double norm() const;

  void apply_matrix(std::size_t qubit, const Mat2& u);
  void apply_rot(std::size_t qubit, double a, double b, double c);
  void apply_ry(std::size_t qubit, double theta);
  void apply_rz(std::size_t qubit, double theta);
  void apply_cz(std::size_t q1, std::size_t q2);
  void apply(const GateOp& op);

  double expect_z(std::size_t qubit) const;
  // <Z_q> for every qubit in one sweep.
  std::vector<double> expect_z_all() const;

 private:
  void check_qubit(std::size_t qubit) const;
  std::size_t stride(std::size_t qubit) const noexcept { return std::size_t{1} << (n_ - 1 - qubit); }

  std::size_t n_;
  std::vector<Complex> amps_;
};

// Places pixels on basis states |0>, |1>, ..., zero-pads the remaining
// amplitudes and divides by the L2 norm. Throws ZeroVector for an all-zero
// input.
PureState amplitude_encode(std::span<const double> pixels, std::size_t n_qubits = 10);

}  // namespace qshield::statevec

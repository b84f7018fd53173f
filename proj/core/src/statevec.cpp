#include "qshield/statevec.hpp"

#include <cmath>
#include <string>

#include "qshield/errors.hpp"

namespace qshield::statevec {

Mat2 ry_matrix(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  return {Complex(c), Complex(-s), Complex(s), Complex(c)};
}

Mat2 rz_matrix(double theta) {
  const Complex e = std::polar(1.0, -theta / 2);
  return {e, Complex(0), Complex(0), std::conj(e)};
}

Mat2 rot_matrix(double a, double b, double c) {
  const double cb = std::cos(b / 2), sb = std::sin(b / 2);
  const Complex plus = std::polar(1.0, -(a + c) / 2);   // e^{-i(a+c)/2}
  const Complex minus = std::polar(1.0, (a - c) / 2);   // e^{ i(a-c)/2}
  return {plus * cb, -minus * sb, std::conj(minus) * sb, std::conj(plus) * cb};
}

PureState::PureState(std::size_t n_qubits) : n_(n_qubits) {
  require(n_qubits >= 1 && n_qubits <= kMaxQubits, Errc::InvalidArgument,
          "qubit count must be in [1, 20]");
  amps_.assign(std::size_t{1} << n_qubits, Complex(0));
  amps_[0] = 1.0;
}

PureState PureState::basis(std::size_t n_qubits, std::size_t index) {
  PureState state(n_qubits);
  require(index < state.dim(), Errc::IndexOutOfRange, "basis index out of range");
  state.amps_[0] = 0.0;
  state.amps_[index] = 1.0;
  return state;
}

PureState PureState::from_amplitudes(std::size_t n_qubits, std::vector<Complex> amplitudes) {
  PureState state(n_qubits);
  require(amplitudes.size() == state.dim(), Errc::ShapeMismatch,
          "amplitude vector length must be 2^n");
  state.amps_ = std::move(amplitudes);
  return state;
}

double PureState::norm() const {
  double sum = 0.0;
  for (const auto& a : amps_) sum += std::norm(a);
  return std::sqrt(sum);
}

void PureState::check_qubit(std::size_t qubit) const {
  require(qubit < n_, Errc::QubitOutOfRange,
          "qubit " + std::to_string(qubit) + " on a " + std::to_string(n_) + "-qubit register");
}

void PureState::apply_matrix(std::size_t qubit, const Mat2& u) {
  check_qubit(qubit);
  const std::size_t s = stride(qubit);
  const std::size_t dim = amps_.size();
  Complex* psi = amps_.data();
  for (std::size_t base = 0; base < dim; base += 2 * s) {
    for (std::size_t i = base; i < base + s; ++i) {
      const Complex x0 = psi[i], x1 = psi[i + s];
      psi[i] = u[0] * x0 + u[1] * x1;
      psi[i + s] = u[2] * x0 + u[3] * x1;
    }
  }
}

void PureState::apply_rot(std::size_t qubit, double a, double b, double c) {
  apply_matrix(qubit, rot_matrix(a, b, c));
}

void PureState::apply_ry(std::size_t qubit, double theta) {
  apply_matrix(qubit, ry_matrix(theta));
}

void PureState::apply_rz(std::size_t qubit, double theta) {
  check_qubit(qubit);
  const Complex e0 = std::polar(1.0, -theta / 2), e1 = std::conj(e0);
  const std::size_t s = stride(qubit);
  for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] *= (i & s) ? e1 : e0;
}

void PureState::apply_cz(std::size_t q1, std::size_t q2) {
  check_qubit(q1);
  check_qubit(q2);
  require(q1 != q2, Errc::SameQubit, "CZ endpoints must differ");
  const std::size_t mask = stride(q1) | stride(q2);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if ((i & mask) == mask) amps_[i] = -amps_[i];
  }
}

void PureState::apply(const GateOp& op) {
  std::visit(
      [this](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, RotGate>) {
          apply_rot(g.qubit, g.a, g.b, g.c);
        } else {
          apply_cz(g.control, g.target);
        }
      },
      op);
}

double PureState::expect_z(std::size_t qubit) const {
  check_qubit(qubit);
  const std::size_t s = stride(qubit);
  double zero = 0.0, one = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    ((i & s) ? one : zero) += std::norm(amps_[i]);
  }
  return zero - one;
}

std::vector<double> PureState::expect_z_all() const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    const double p = std::norm(amps_[i]);
    for (std::size_t q = 0; q < n_; ++q) out[q] += (i & stride(q)) ? -p : p;
  }
  return out;
}

PureState amplitude_encode(std::span<const double> pixels, std::size_t n_qubits) {
  PureState state(n_qubits);
  require(pixels.size() <= state.dim(), Errc::ShapeMismatch,
          std::to_string(pixels.size()) + " values do not fit in " + std::to_string(n_qubits) +
              " qubits");
  double sum_sq = 0.0;
  for (double p : pixels) sum_sq += p * p;
  require(sum_sq > 0.0, Errc::ZeroVector, "cannot amplitude-encode an all-zero vector");
  const double inv_norm = 1.0 / std::sqrt(sum_sq);
  auto amps = state.amplitudes();
  amps[0] = 0.0;
  for (std::size_t i = 0; i < pixels.size(); ++i) amps[i] = pixels[i] * inv_norm;
  return state;
}

}  // namespace qshield::statevec

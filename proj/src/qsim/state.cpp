#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "ghztp/qsim.hpp"
#include "kernel.hpp"

namespace ghztp::qsim {

namespace {

void check_qubit(const StateVector& state, int qubit) {
  if (qubit < 0 || qubit >= state.num_qubits()) {
    throw DomainError("qubit " + std::to_string(qubit) + " out of range for " +
                      std::to_string(state.num_qubits()) + "-qubit state");
  }
}

std::size_t bit_of(const StateVector& state, int qubit) {
  return std::size_t{1} << (state.num_qubits() - 1 - qubit);
}

}  // namespace

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
  const std::size_t n = amplitudes.size();
  if (n < 2 || !std::has_single_bit(n)) {
    throw ValidationError("amplitude count " + std::to_string(n) +
                          " is not a power of two >= 2");
  }
  const int qubits = std::countr_zero(n);
  if (qubits > kMaxQubits) {
    throw DomainError("more than " + std::to_string(kMaxQubits) + " qubits");
  }
  double norm2 = 0.0;
  for (const auto& a : amplitudes) {
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
      throw ValidationError("non-finite amplitude");
    }
    norm2 += std::norm(a);
  }
  const double norm = std::sqrt(norm2);
  if (std::abs(norm - 1.0) > tol::kRenormalize) {
    throw ValidationError("state norm " + std::to_string(norm) +
                          " is not within 1e-6 of 1");
  }
  // Skip rescaling at rounding level so already-normalized input keeps its
  // exact bits.
  if (std::abs(norm2 - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) {
    for (auto& a : amplitudes) a /= norm;
  }
  return StateVector(qubits, std::move(amplitudes));
}

double StateVector::norm_squared() const {
  double sum = 0.0;
  for (const auto& a : amplitudes_) sum += std::norm(a);
  return sum;
}

StateVector new_basis_state(int num_qubits, std::uint64_t index) {
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw DomainError("num_qubits must be in [1, " + std::to_string(kMaxQubits) + "]");
  }
  const std::uint64_t dim = std::uint64_t{1} << num_qubits;
  if (index >= dim) {
    throw DomainError("basis index " + std::to_string(index) + " >= " + std::to_string(dim));
  }
  std::vector<Complex> amps(dim);
  amps[index] = 1.0;
  return Kernel::make(num_qubits, std::move(amps));
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  if (a.num_qubits() + b.num_qubits() > kMaxQubits) {
    throw DomainError("tensor product exceeds " + std::to_string(kMaxQubits) + " qubits");
  }
  std::vector<Complex> amps;
  amps.reserve(a.dim() * b.dim());
  for (const auto& x : a.amplitudes()) {
    for (const auto& y : b.amplitudes()) amps.push_back(x * y);
  }
  return Kernel::make(a.num_qubits() + b.num_qubits(), std::move(amps));
}

StateVector apply_single(StateVector state, int qubit, const Unitary2x2& u) {
  check_qubit(state, qubit);
  const std::size_t mask = bit_of(state, qubit);
  auto& amps = Kernel::amplitudes(state);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & mask) continue;
    const Complex a0 = amps[i];
    const Complex a1 = amps[i | mask];
    amps[i] = u.at(0, 0) * a0 + u.at(0, 1) * a1;
    amps[i | mask] = u.at(1, 0) * a0 + u.at(1, 1) * a1;
  }
  return state;
}

StateVector apply_two(StateVector state, int q1, int q2, const Unitary4x4& u) {
  check_qubit(state, q1);
  check_qubit(state, q2);
  if (q1 == q2) throw DomainError("apply_two needs two distinct qubits");
  const std::size_t m1 = bit_of(state, q1);
  const std::size_t m2 = bit_of(state, q2);
  auto& amps = Kernel::amplitudes(state);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & (m1 | m2)) continue;
    const std::array<std::size_t, 4> idx = {i, i | m2, i | m1, i | m1 | m2};
    std::array<Complex, 4> in;
    for (int k = 0; k < 4; ++k) in[k] = amps[idx[k]];
    for (int r = 0; r < 4; ++r) {
      Complex acc = 0.0;
      for (int c = 0; c < 4; ++c) acc += u.at(r, c) * in[c];
      amps[idx[r]] = acc;
    }
  }
  return state;
}

Complex inner_product(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw DomainError("inner product of states with different dimension");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double fidelity(const StateVector& a, const StateVector& b) {
  return std::norm(inner_product(a, b));
}

std::uint64_t fingerprint(const StateVector& state) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& a : state.amplitudes()) {
    const double parts[2] = {a.real(), a.imag()};
    unsigned char bytes[sizeof parts];
    std::memcpy(bytes, parts, sizeof parts);
    for (unsigned char byte : bytes) {
      h ^= byte;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace ghztp::qsim

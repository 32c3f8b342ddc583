#include <cmath>
#include <string>

#include "ghztp/qsim.hpp"

namespace ghztp::qsim {

namespace {

template <std::size_t N>
void require_unitary(const std::array<Complex, N * N>& m) {
  for (std::size_t r = 0; r < N; ++r) {
    for (std::size_t c = 0; c < N; ++c) {
      Complex acc = 0.0;
      for (std::size_t k = 0; k < N; ++k) acc += std::conj(m[k * N + r]) * m[k * N + c];
      const Complex expected = (r == c) ? 1.0 : 0.0;
      if (std::abs(acc.real() - expected.real()) > tol::kAlgebraic ||
          std::abs(acc.imag() - expected.imag()) > tol::kAlgebraic) {
        throw ValidationError("matrix is not unitary: (U^dagger U)[" + std::to_string(r) +
                              "][" + std::to_string(c) + "] deviates from identity");
      }
    }
  }
}

}  // namespace

Unitary2x2::Unitary2x2(const std::array<Complex, 4>& entries) : m_(entries) {
  require_unitary<2>(m_);
}

Unitary4x4::Unitary4x4(const std::array<Complex, 16>& entries) : m_(entries) {
  require_unitary<4>(m_);
}

namespace gates {

Unitary2x2 identity() { return Unitary2x2({1.0, 0.0, 0.0, 1.0}); }

Unitary2x2 hadamard() {
  const double s = 1.0 / std::sqrt(2.0);
  return Unitary2x2({s, s, s, -s});
}

Unitary2x2 pauli_x() { return Unitary2x2({0.0, 1.0, 1.0, 0.0}); }

Unitary2x2 pauli_z() { return Unitary2x2({1.0, 0.0, 0.0, -1.0}); }

Unitary2x2 z_times_x() { return Unitary2x2({0.0, 1.0, -1.0, 0.0}); }

Unitary4x4 cnot() {
  return Unitary4x4({1.0, 0.0, 0.0, 0.0,
                     0.0, 1.0, 0.0, 0.0,
                     0.0, 0.0, 0.0, 1.0,
                     0.0, 0.0, 1.0, 0.0});
}

Unitary4x4 kron(const Unitary2x2& high, const Unitary2x2& low) {
  std::array<Complex, 16> m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m[r * 4 + c] = high.at(r / 2, c / 2) * low.at(r % 2, c % 2);
  }
  return Unitary4x4(m);
}

}  // namespace gates

MeasurementBasis::MeasurementBasis(const Vector& b0, const Vector& b1) : b0_(b0), b1_(b1) {
  auto dot = [](const Vector& x, const Vector& y) {
    return std::conj(x[0]) * y[0] + std::conj(x[1]) * y[1];
  };
  const Complex n0 = dot(b0_, b0_);
  const Complex n1 = dot(b1_, b1_);
  const Complex cross = dot(b0_, b1_);
  if (std::abs(n0 - 1.0) > tol::kAlgebraic || std::abs(n1 - 1.0) > tol::kAlgebraic ||
      std::abs(cross) > tol::kAlgebraic) {
    throw ValidationError("measurement basis vectors are not orthonormal");
  }
}

MeasurementBasis MeasurementBasis::computational() {
  return MeasurementBasis({1.0, 0.0}, {0.0, 1.0});
}

MeasurementBasis MeasurementBasis::plus_minus() {
  const double s = 1.0 / std::sqrt(2.0);
  return MeasurementBasis({s, s}, {s, -s});
}

std::array<Complex, 4> bell_vector(BellOutcome outcome) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (outcome) {
    case BellOutcome::PhiPlus: return {s, 0.0, 0.0, s};
    case BellOutcome::PhiMinus: return {s, 0.0, 0.0, -s};
    case BellOutcome::PsiPlus: return {0.0, s, s, 0.0};
    case BellOutcome::PsiMinus: return {0.0, s, -s, 0.0};
  }
  throw DomainError("unknown Bell outcome");
}

std::string_view to_string(BellOutcome outcome) {
  switch (outcome) {
    case BellOutcome::PhiPlus: return "PhiPlus";
    case BellOutcome::PhiMinus: return "PhiMinus";
    case BellOutcome::PsiPlus: return "PsiPlus";
    case BellOutcome::PsiMinus: return "PsiMinus";
  }
  return "?";
}

std::string_view to_string(CharlieOutcome outcome) {
  return outcome == CharlieOutcome::Plus ? "Plus" : "Minus";
}

BellOutcome parse_bell_outcome(std::string_view name) {
  for (auto o : kBellOutcomes) {
    if (to_string(o) == name) return o;
  }
  throw ValidationError("unknown Bell outcome '" + std::string(name) + "'");
}

CharlieOutcome parse_charlie_outcome(std::string_view name) {
  for (auto o : kCharlieOutcomes) {
    if (to_string(o) == name) return o;
  }
  throw ValidationError("unknown Charlie outcome '" + std::string(name) + "'");
}

}  // namespace ghztp::qsim

#pragma once

// Dense state-vector simulator for a handful of qubits.
//
// Qubit ordering: qubit 0 is the MOST significant bit of the amplitude
// index. For an n-qubit state, qubit q corresponds to bit (n - 1 - q).
// With the session roles D=0, A=1, B=2, C=3 the amplitude at index 0b0111
// is the coefficient of |0111>_DABC, i.e. indices read like ket labels.
//
// All operations are value-in/value-out; nothing shares mutable state.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "ghztp/errors.hpp"

namespace ghztp::qsim {

using Complex = std::complex<double>;
using Rng = std::mt19937_64;

namespace tol {
// algebraic identities (unitarity, orthonormality, Hermiticity)
inline constexpr double kAlgebraic = 1e-12;
// accumulated arithmetic (normalization, traces, Born completeness)
inline constexpr double kAccumulated = 1e-10;
// constructors renormalize inputs whose norm is off by at most this much
inline constexpr double kRenormalize = 1e-6;
// forced outcomes below this Born probability are rejected
inline constexpr double kImpossible = 1e-12;
}  // namespace tol

inline constexpr int kMaxQubits = 16;

class StateVector {
 public:
  // Validates length (power of two, 1..kMaxQubits qubits) and finiteness,
  // renormalizes when |norm - 1| <= tol::kRenormalize, throws otherwise.
  static StateVector from_amplitudes(std::vector<Complex> amplitudes);

  int num_qubits() const { return num_qubits_; }
  std::size_t dim() const { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }
  double norm_squared() const;

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  StateVector(int num_qubits, std::vector<Complex> amplitudes)
      : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {}

  int num_qubits_ = 0;
  std::vector<Complex> amplitudes_;

  friend struct Kernel;
};

class Unitary2x2 {
 public:
  // Row-major entries; throws ValidationError unless U^dagger U = I
  // entrywise within tol::kAlgebraic.
  explicit Unitary2x2(const std::array<Complex, 4>& entries);

  const Complex& at(int row, int col) const { return m_[row * 2 + col]; }
  const std::array<Complex, 4>& entries() const { return m_; }

  friend bool operator==(const Unitary2x2&, const Unitary2x2&) = default;

 private:
  std::array<Complex, 4> m_;
};

class Unitary4x4 {
 public:
  explicit Unitary4x4(const std::array<Complex, 16>& entries);

  const Complex& at(int row, int col) const { return m_[row * 4 + col]; }

 private:
  std::array<Complex, 16> m_;
};

namespace gates {
Unitary2x2 identity();
Unitary2x2 hadamard();
// |0><1| + |1><0|
Unitary2x2 pauli_x();
// |0><0| - |1><1|
Unitary2x2 pauli_z();
// |0><1| - |1><0|  (= Z X, a real rotation by -pi/2)
Unitary2x2 z_times_x();
// first qubit is the control
Unitary4x4 cnot();
Unitary4x4 kron(const Unitary2x2& high, const Unitary2x2& low);
}  // namespace gates

class MeasurementBasis {
 public:
  using Vector = std::array<Complex, 2>;

  // Throws ValidationError unless the two vectors are orthonormal within
  // tol::kAlgebraic.
  MeasurementBasis(const Vector& b0, const Vector& b1);

  static MeasurementBasis computational();
  // (|0> + |1>)/sqrt2, (|0> - |1>)/sqrt2
  static MeasurementBasis plus_minus();

  const Vector& operator[](int k) const { return k == 0 ? b0_ : b1_; }

 private:
  Vector b0_;
  Vector b1_;
};

enum class BellOutcome { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };
enum class CharlieOutcome { Plus = 0, Minus = 1 };

inline constexpr std::array<BellOutcome, 4> kBellOutcomes = {
    BellOutcome::PhiPlus, BellOutcome::PhiMinus, BellOutcome::PsiPlus,
    BellOutcome::PsiMinus};
inline constexpr std::array<CharlieOutcome, 2> kCharlieOutcomes = {
    CharlieOutcome::Plus, CharlieOutcome::Minus};

std::string_view to_string(BellOutcome outcome);
std::string_view to_string(CharlieOutcome outcome);
// Throws ValidationError on unknown names.
BellOutcome parse_bell_outcome(std::string_view name);
CharlieOutcome parse_charlie_outcome(std::string_view name);

// Amplitudes of the Bell vector over (first, second), first more significant.
std::array<Complex, 4> bell_vector(BellOutcome outcome);

// Uniform double in [0, 1) from the top 53 bits of one PRNG draw.
double uniform_unit(Rng& rng);

// Picks a measurement outcome: either forced, or drawn by inverse CDF over
// the outcomes in declaration order using one uniform draw.
class OutcomeSelector {
 public:
  static OutcomeSelector forced(int outcome) { return OutcomeSelector(outcome, nullptr); }
  static OutcomeSelector sampled(Rng& rng) { return OutcomeSelector(-1, &rng); }

  bool is_forced() const { return rng_ == nullptr; }

  // Throws ImpossibleOutcomeError if a forced outcome has probability below
  // tol::kImpossible, DomainError if it is out of range. Sampling never
  // returns an outcome below that threshold.
  int select(std::span<const double> probabilities) const;

 private:
  OutcomeSelector(int forced, Rng* rng) : forced_(forced), rng_(rng) {}

  int forced_;
  Rng* rng_;
};

struct Measurement {
  int outcome = 0;
  double probability = 0.0;
  StateVector post_state;
};

struct BellMeasurement {
  BellOutcome outcome = BellOutcome::PhiPlus;
  double probability = 0.0;
  StateVector post_state;
};

StateVector new_basis_state(int num_qubits, std::uint64_t index);

// Kronecker product; a's qubits become the more significant ones.
StateVector tensor(const StateVector& a, const StateVector& b);

StateVector apply_single(StateVector state, int qubit, const Unitary2x2& u);

// u acts on the 4-dim subspace of (q1, q2) with q1 as the more significant bit.
StateVector apply_two(StateVector state, int q1, int q2, const Unitary4x4& u);

// Born probabilities of each basis vector on one qubit, in basis order.
std::array<double, 2> basis_probabilities(const StateVector& state, int qubit,
                                          const MeasurementBasis& basis);

Measurement measure_in_basis(const StateVector& state, int qubit,
                             const MeasurementBasis& basis,
                             const OutcomeSelector& selector);

// Born probabilities of the four Bell projections on (q1, q2), indexed by
// BellOutcome.
std::array<double, 4> bell_probabilities(const StateVector& state, int q1, int q2);

// Projects onto the explicit Bell vectors of (q1, q2).
BellMeasurement measure_bell(const StateVector& state, int q1, int q2,
                             const OutcomeSelector& selector);

class DensityMatrix {
 public:
  // Validates Hermiticity (tol::kAlgebraic), unit trace (tol::kAccumulated)
  // and positive semidefiniteness (eigenvalues >= -tol::kAccumulated).
  DensityMatrix(std::size_t dim, std::vector<Complex> entries);

  std::size_t dim() const { return dim_; }
  const Complex& at(std::size_t row, std::size_t col) const { return entries_[row * dim_ + col]; }
  std::span<const Complex> entries() const { return entries_; }
  Complex trace() const;

  friend bool operator==(const DensityMatrix&, const DensityMatrix&) = default;

 private:
  struct Unchecked {};
  DensityMatrix(Unchecked, std::size_t dim, std::vector<Complex> entries)
      : dim_(dim), entries_(std::move(entries)) {}

  std::size_t dim_;
  std::vector<Complex> entries_;

  friend DensityMatrix partial_trace(const StateVector&, std::span<const int>);
};

// Reduced density matrix over `keep` (treated as a set; kept qubits retain
// their relative significance order).
DensityMatrix partial_trace(const StateVector& state, std::span<const int> keep);

// <psi|rho|psi>
double fidelity_pure(const DensityMatrix& rho, const StateVector& psi);

// |<a|b>|^2
double fidelity(const StateVector& a, const StateVector& b);

Complex inner_product(const StateVector& a, const StateVector& b);

// Pure single factor of a state whose reduced state on `qubit` is pure
// (rank one within tol::kAccumulated); throws ValidationError otherwise.
StateVector extract_qubit(const StateVector& state, int qubit);

// FNV-1a over the raw amplitude bytes; equal iff bitwise-equal amplitudes.
std::uint64_t fingerprint(const StateVector& state);

}  // namespace ghztp::qsim

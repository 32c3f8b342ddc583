#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "ghztp/qsim.hpp"
#include "oracle.hpp"

using namespace ghztp;
using namespace ghztp::qsim;

namespace {

const double kS = 1.0 / std::sqrt(2.0);

StateVector state_of(const oracle::Vec& v) { return StateVector::from_amplitudes(v); }

oracle::Vec vec_of(const StateVector& s) { return {s.amplitudes().begin(), s.amplitudes().end()}; }

void expect_amplitudes(const StateVector& s, const std::vector<Complex>& ref, double tol = 1e-12) {
  ASSERT_EQ(s.dim(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_NEAR(s[i].real(), ref[i].real(), tol) << "i=" << i;
    EXPECT_NEAR(s[i].imag(), ref[i].imag(), tol) << "i=" << i;
  }
}

oracle::Mat oracle_of(const Unitary2x2& u) {
  return oracle::from2x2(u.at(0, 0), u.at(0, 1), u.at(1, 0), u.at(1, 1));
}

// CNOT(control, target) on n qubits as P0_c + P1_c X_t.
oracle::Mat oracle_cnot(int control, int target, int n) {
  const auto p0 = oracle::from2x2(1, 0, 0, 0);
  const auto p1 = oracle::from2x2(0, 0, 0, 1);
  const auto x = oracle::from2x2(0, 1, 1, 0);
  auto a = oracle::embed(p0, control, n);
  auto b = oracle::embed(p1, control, n);
  auto xt = oracle::embed(x, target, n);
  oracle::Mat bx(a.n);
  for (std::size_t r = 0; r < a.n; ++r)
    for (std::size_t c = 0; c < a.n; ++c) {
      oracle::C acc = 0.0;
      for (std::size_t k = 0; k < a.n; ++k) acc += b(r, k) * xt(k, c);
      bx(r, c) = acc + a(r, c);
    }
  return bx;
}

const Complex kAlpha(0.6, 0.0);
const Complex kBeta(0.8, 0.0);

// (alpha, beta) (x) GHZ3, written out amplitude by amplitude.
StateVector signal_times_ghz(Complex alpha, Complex beta) {
  std::vector<Complex> a(16, 0.0);
  a[0b0000] = alpha * kS;
  a[0b0111] = alpha * kS;
  a[0b1000] = beta * kS;
  a[0b1111] = beta * kS;
  return StateVector::from_amplitudes(a);
}

// Fidelity of the reduced state of qubits (2, 3) with a 2-qubit target.
double bc_fidelity(const StateVector& s, const std::vector<Complex>& target) {
  const std::array<int, 2> keep = {2, 3};
  return fidelity_pure(partial_trace(s, keep), StateVector::from_amplitudes(target));
}

}  // namespace

// ---------- StateVector construction ----------

TEST(StateVectorTest, BasisStates) {
  expect_amplitudes(new_basis_state(1, 0), {1.0, 0.0});
  auto s = new_basis_state(3, 7);
  EXPECT_EQ(s.num_qubits(), 3);
  std::vector<Complex> ref(8, 0.0);
  ref[7] = 1.0;
  expect_amplitudes(s, ref);
}

TEST(StateVectorTest, BasisIndexOutOfRange) {
  EXPECT_THROW(new_basis_state(2, 4), DomainError);
  EXPECT_THROW(new_basis_state(0, 0), DomainError);
  EXPECT_THROW(new_basis_state(kMaxQubits + 1, 0), DomainError);
}

TEST(StateVectorTest, RenormalizesSmallDriftRejectsLarge) {
  auto s = StateVector::from_amplitudes({1.0 + 5e-7, 0.0});
  EXPECT_NEAR(s.norm_squared(), 1.0, 1e-15);
  EXPECT_THROW(StateVector::from_amplitudes({1.1, 0.0}), ValidationError);
  EXPECT_THROW(StateVector::from_amplitudes({0.0, 0.0}), ValidationError);
  EXPECT_THROW(StateVector::from_amplitudes({1.0, 0.0, 0.0}), ValidationError);
  EXPECT_THROW(StateVector::from_amplitudes({std::nan(""), 1.0}), ValidationError);
}

TEST(StateVectorTest, NormalizedInputKeepsExactBits) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    auto s = state_of(oracle::random_state(rng, 8));
    auto again = StateVector::from_amplitudes(vec_of(s));
    EXPECT_EQ(fingerprint(s), fingerprint(again));
  }
}

// ---------- tensor ----------

TEST(TensorTest, ZeroOne) {
  auto s = tensor(new_basis_state(1, 0), new_basis_state(1, 1));
  expect_amplitudes(s, {0.0, 1.0, 0.0, 0.0});
}

TEST(TensorTest, SignalTimesGhzMatchesDisplayedState) {
  const auto ghz = StateVector::from_amplitudes({kS, 0, 0, 0, 0, 0, 0, kS});
  const auto d = StateVector::from_amplitudes({kAlpha, kBeta});
  const auto s = tensor(d, ghz);
  ASSERT_EQ(s.num_qubits(), 4);
  const auto expected = signal_times_ghz(kAlpha, kBeta);
  expect_amplitudes(s, {expected.amplitudes().begin(), expected.amplitudes().end()});
}

TEST(TensorTest, NormPreservedAndMatchesOracle) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const auto a = oracle::random_state(rng, 2 << (k % 3));
    const auto b = oracle::random_state(rng, 2 << ((k / 3) % 3));
    const auto t = tensor(state_of(a), state_of(b));
    EXPECT_NEAR(t.norm_squared(), 1.0, 1e-12);
    const auto ref = oracle::kron(a, b);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(std::abs(t[i] - ref[i]), 0.0, 1e-15);
  }
}

// ---------- unitaries ----------

TEST(UnitaryTest, CorrectionMatricesAreUnitary) {
  for (const auto& u : {gates::identity(), gates::pauli_x(), gates::pauli_z(), gates::z_times_x(),
                        gates::hadamard()}) {
    auto m = oracle_of(u);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        oracle::C acc = std::conj(m(0, r)) * m(0, c) + std::conj(m(1, r)) * m(1, c);
        EXPECT_NEAR(std::abs(acc - (r == c ? 1.0 : 0.0)), 0.0, 1e-12);
      }
  }
}

TEST(UnitaryTest, RejectsNonUnitary) {
  EXPECT_THROW(Unitary2x2({1.0, 1.0, 0.0, 1.0}), ValidationError);
  EXPECT_THROW(Unitary2x2({1.0, 0.0, 0.0, 1.0 + 1e-9}), ValidationError);
  std::array<Complex, 16> m{};
  m[0] = 2.0;
  EXPECT_THROW(Unitary4x4{m}, ValidationError);
}

TEST(UnitaryTest, ZTimesXIsTheSignedFlip) {
  // |0><1| - |1><0|
  const auto u = gates::z_times_x();
  EXPECT_EQ(u.at(0, 1), Complex(1.0));
  EXPECT_EQ(u.at(1, 0), Complex(-1.0));
  EXPECT_EQ(u.at(0, 0), Complex(0.0));
  EXPECT_EQ(u.at(1, 1), Complex(0.0));
}

// ---------- apply_single ----------

TEST(ApplySingleTest, ZRestoresSignOnB) {
  const auto s = StateVector::from_amplitudes({kAlpha, -kBeta});
  expect_amplitudes(apply_single(s, 0, gates::pauli_z()), {kAlpha, kBeta});
}

TEST(ApplySingleTest, IdentityIsExact) {
  std::mt19937_64 rng(2);
  const auto s = state_of(oracle::random_state(rng, 16));
  for (int q = 0; q < 4; ++q) EXPECT_EQ(apply_single(s, q, gates::identity()), s);
}

TEST(ApplySingleTest, XTwiceIsIdentity) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const auto s = state_of(oracle::random_state(rng, 8));
    const auto t = apply_single(apply_single(s, 0, gates::pauli_x()), 0, gates::pauli_x());
    for (std::size_t i = 0; i < s.dim(); ++i) EXPECT_NEAR(std::abs(t[i] - s[i]), 0.0, 1e-12);
  }
}

TEST(ApplySingleTest, MatchesOracleOnEveryQubit) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 30; ++k) {
    const auto v = oracle::random_state(rng, 16);
    for (int q = 0; q < 4; ++q) {
      for (const auto& u : {gates::hadamard(), gates::pauli_x(), gates::z_times_x()}) {
        const auto got = apply_single(state_of(v), q, u);
        const auto ref = oracle::apply(oracle::embed(oracle_of(u), q, 4), v);
        for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(std::abs(got[i] - ref[i]), 0.0, 1e-12);
      }
    }
  }
}

TEST(ApplySingleTest, QubitOutOfRange) {
  const auto s = new_basis_state(2, 0);
  EXPECT_THROW(apply_single(s, 2, gates::pauli_x()), DomainError);
  EXPECT_THROW(apply_single(s, -1, gates::pauli_x()), DomainError);
}

// ---------- apply_two ----------

TEST(ApplyTwoTest, CnotFlipsTarget) {
  expect_amplitudes(apply_two(new_basis_state(2, 0b10), 0, 1, gates::cnot()), {0, 0, 0, 1});
}

TEST(ApplyTwoTest, CnotMakesBellPair) {
  const auto s = StateVector::from_amplitudes({kS, 0, kS, 0});
  expect_amplitudes(apply_two(s, 0, 1, gates::cnot()), {kS, 0, 0, kS});
}

TEST(ApplyTwoTest, HadamardThenCnotIsPhiPlus) {
  auto s = apply_single(new_basis_state(2, 0), 0, gates::hadamard());
  s = apply_two(s, 0, 1, gates::cnot());
  const auto phi = bell_vector(BellOutcome::PhiPlus);
  expect_amplitudes(s, {phi.begin(), phi.end()});
}

TEST(ApplyTwoTest, MatchesOracleCnotOnAnyPair) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const auto v = oracle::random_state(rng, 16);
    for (int c = 0; c < 4; ++c)
      for (int t = 0; t < 4; ++t) {
        if (c == t) continue;
        const auto got = apply_two(state_of(v), c, t, gates::cnot());
        const auto ref = oracle::apply(oracle_cnot(c, t, 4), v);
        for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(std::abs(got[i] - ref[i]), 0.0, 1e-12);
      }
  }
}

TEST(ApplyTwoTest, KronOfSinglesMatchesSequentialSingles) {
  std::mt19937_64 rng(6);
  const auto v = state_of(oracle::random_state(rng, 8));
  const auto a = apply_two(v, 2, 0, gates::kron(gates::hadamard(), gates::z_times_x()));
  const auto b = apply_single(apply_single(v, 2, gates::hadamard()), 0, gates::z_times_x());
  for (std::size_t i = 0; i < a.dim(); ++i) EXPECT_NEAR(std::abs(a[i] - b[i]), 0.0, 1e-12);
}

TEST(ApplyTwoTest, SameQubitRejected) {
  EXPECT_THROW(apply_two(new_basis_state(2, 0), 1, 1, gates::cnot()), DomainError);
}

TEST(ApplyTest, NormalizationSurvivesLongGateSequences) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int k = 0; k < 20; ++k) {
    auto s = state_of(oracle::random_state(rng, 16));
    for (int step = 0; step < 200; ++step) {
      const int q = pick(rng);
      const int r = (q + 1 + pick(rng) % 3) % 4;
      switch (pick(rng)) {
        case 0: s = apply_single(std::move(s), q, gates::hadamard()); break;
        case 1: s = apply_single(std::move(s), q, gates::z_times_x()); break;
        case 2: s = apply_two(std::move(s), q, r, gates::cnot()); break;
        default: s = apply_two(std::move(s), q, r, gates::kron(gates::hadamard(), gates::pauli_z()));
      }
    }
    EXPECT_LT(std::abs(s.norm_squared() - 1.0), 1e-10);
  }
}

// ---------- measure_in_basis ----------

TEST(MeasureInBasisTest, CharlieBasisOnBcState) {
  const auto bc = StateVector::from_amplitudes({kAlpha, 0, 0, kBeta});
  const auto m = measure_in_basis(bc, 1, MeasurementBasis::plus_minus(), OutcomeSelector::forced(0));
  EXPECT_EQ(m.outcome, 0);
  EXPECT_NEAR(m.probability, 0.5, 1e-12);
  const std::array<int, 1> keep = {0};
  EXPECT_NEAR(fidelity_pure(partial_trace(m.post_state, keep),
                            StateVector::from_amplitudes({kAlpha, kBeta})),
              1.0, 1e-12);
  const auto minus = measure_in_basis(bc, 1, MeasurementBasis::plus_minus(), OutcomeSelector::forced(1));
  EXPECT_NEAR(minus.probability, 0.5, 1e-12);
  EXPECT_NEAR(fidelity_pure(partial_trace(minus.post_state, keep),
                            StateVector::from_amplitudes({kAlpha, -kBeta})),
              1.0, 1e-12);
}

TEST(MeasureInBasisTest, ComputationalZero) {
  std::mt19937_64 rng(8);
  const auto m = measure_in_basis(new_basis_state(1, 0), 0, MeasurementBasis::computational(),
                                  OutcomeSelector::sampled(rng));
  EXPECT_EQ(m.outcome, 0);
  EXPECT_DOUBLE_EQ(m.probability, 1.0);
}

TEST(MeasureInBasisTest, ForcedImpossibleOutcomeIsError) {
  EXPECT_THROW(measure_in_basis(new_basis_state(1, 0), 0, MeasurementBasis::computational(),
                                OutcomeSelector::forced(1)),
               ImpossibleOutcomeError);
  EXPECT_THROW(measure_in_basis(new_basis_state(1, 0), 0, MeasurementBasis::computational(),
                                OutcomeSelector::forced(2)),
               DomainError);
}

TEST(MeasureInBasisTest, BornCompletenessAndOracleProbabilities) {
  std::mt19937_64 rng(9);
  const auto p0 = oracle::from2x2(1, 0, 0, 0);
  for (int k = 0; k < 200; ++k) {
    const auto v = oracle::random_state(rng, 8);
    const auto w = oracle::random_state(rng, 2);
    const MeasurementBasis basis({w[0], w[1]}, {-std::conj(w[1]), std::conj(w[0])});
    const int q = k % 3;
    const auto p = basis_probabilities(state_of(v), q, basis);
    EXPECT_NEAR(p[0] + p[1], 1.0, 1e-10);
    // Oracle: rotate basis vector 0 onto |0>, then project.
    const auto rot = oracle::from2x2(std::conj(w[0]), std::conj(w[1]), -w[1], w[0]);
    const auto rotated = oracle::apply(oracle::embed(rot, q, 3), v);
    EXPECT_NEAR(p[0], oracle::norm2(oracle::apply(oracle::embed(p0, q, 3), rotated)), 1e-12);
  }
}

TEST(MeasureInBasisTest, RepeatedMeasurementIsIdempotent) {
  std::mt19937_64 rng(10);
  for (int k = 0; k < 100; ++k) {
    const auto s = state_of(oracle::random_state(rng, 8));
    const auto first = measure_in_basis(s, k % 3, MeasurementBasis::plus_minus(), OutcomeSelector::sampled(rng));
    const auto p = basis_probabilities(first.post_state, k % 3, MeasurementBasis::plus_minus());
    EXPECT_NEAR(p[first.outcome], 1.0, 1e-12);
    const auto second =
        measure_in_basis(first.post_state, k % 3, MeasurementBasis::plus_minus(), OutcomeSelector::sampled(rng));
    EXPECT_EQ(second.outcome, first.outcome);
  }
}

TEST(MeasureInBasisTest, RejectsNonOrthonormalBasis) {
  EXPECT_THROW(MeasurementBasis({1.0, 0.0}, {kS, kS}), ValidationError);
  EXPECT_THROW(MeasurementBasis({1.0, 0.0}, {0.0, 2.0}), ValidationError);
}

// ---------- measure_bell ----------

TEST(MeasureBellTest, EachOutcomeQuarterOnSignalTimesGhz) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 50; ++k) {
    const auto sig = oracle::random_state(rng, 2);
    const auto s = signal_times_ghz(sig[0], sig[1]);
    const auto p = bell_probabilities(s, 0, 1);
    for (auto o : kBellOutcomes) {
      const auto b = bell_vector(o);
      // Oracle: ||(|B><B| (x) I4) psi||^2
      const auto proj = oracle::kron(oracle::outer({b.begin(), b.end()}, {b.begin(), b.end()}),
                                     oracle::identity(4));
      const double ref = oracle::norm2(oracle::apply(proj, vec_of(s)));
      EXPECT_NEAR(ref, 0.25, 1e-12);
      EXPECT_NEAR(p[static_cast<int>(o)], ref, 1e-12);
    }
  }
}

TEST(MeasureBellTest, ResidualBcStatesMatchDecomposition) {
  const auto s = signal_times_ghz(kAlpha, kBeta);
  auto residual = [&](BellOutcome o) {
    return measure_bell(s, 0, 1, OutcomeSelector::forced(static_cast<int>(o)));
  };
  EXPECT_NEAR(bc_fidelity(residual(BellOutcome::PhiPlus).post_state, {kAlpha, 0, 0, kBeta}), 1.0, 1e-12);
  EXPECT_NEAR(bc_fidelity(residual(BellOutcome::PhiMinus).post_state, {kAlpha, 0, 0, -kBeta}), 1.0, 1e-12);
  EXPECT_NEAR(bc_fidelity(residual(BellOutcome::PsiPlus).post_state, {kBeta, 0, 0, kAlpha}), 1.0, 1e-12);
  EXPECT_NEAR(bc_fidelity(residual(BellOutcome::PsiMinus).post_state, {-kBeta, 0, 0, kAlpha}), 1.0, 1e-12);
  EXPECT_NEAR(residual(BellOutcome::PsiMinus).probability, 0.25, 1e-12);
}

TEST(MeasureBellTest, BornCompletenessOnRandomStates) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 200; ++k) {
    const auto s = state_of(oracle::random_state(rng, 16));
    const int q1 = k % 4;
    const int q2 = (q1 + 1 + k % 3) % 4;
    const auto p = bell_probabilities(s, q1, q2);
    EXPECT_NEAR(p[0] + p[1] + p[2] + p[3], 1.0, 1e-10);
  }
}

TEST(MeasureBellTest, PostStateIsProjectedBellPair) {
  std::mt19937_64 rng(14);
  const auto s = state_of(oracle::random_state(rng, 8));
  const auto m = measure_bell(s, 2, 0, OutcomeSelector::sampled(rng));
  EXPECT_NEAR(m.post_state.norm_squared(), 1.0, 1e-12);
  const std::array<int, 2> keep = {0, 2};
  // keep order is by significance: qubit 0 is the high bit, but the Bell
  // pair was (2, 0), i.e. qubit 2 high. The Bell vectors are symmetric under
  // swap except PsiMinus, which only flips sign.
  const auto b = bell_vector(m.outcome);
  EXPECT_NEAR(fidelity_pure(partial_trace(m.post_state, keep),
                            StateVector::from_amplitudes({b[0], b[2], b[1], b[3]})),
              1.0, 1e-12);
}

TEST(MeasureBellTest, Errors) {
  const auto s = new_basis_state(2, 0);
  EXPECT_THROW(measure_bell(s, 0, 0, OutcomeSelector::forced(0)), DomainError);
  EXPECT_THROW(measure_bell(s, 0, 1, OutcomeSelector::forced(2)), ImpossibleOutcomeError);
}

// ---------- sampling ----------

TEST(OutcomeSelectorTest, InverseCdfInDeclarationOrder) {
  // u = first draw; outcome k is the first with u < cumulative probability.
  Rng rng(99);
  Rng probe(99);
  const double u = uniform_unit(probe);
  const std::array<double, 4> p = {0.25, 0.25, 0.25, 0.25};
  const int expected = static_cast<int>(std::floor(u / 0.25));
  EXPECT_EQ(OutcomeSelector::sampled(rng).select(p), expected);
}

TEST(OutcomeSelectorTest, NeverSamplesImpossibleOutcomes) {
  Rng rng(5);
  const std::array<double, 3> p = {0.0, 1.0, 0.0};
  for (int k = 0; k < 1000; ++k) EXPECT_EQ(OutcomeSelector::sampled(rng).select(p), 1);
}

TEST(OutcomeSelectorTest, SameSeedSameSequence) {
  Rng a(42), b(42);
  const std::array<double, 2> p = {0.3, 0.7};
  for (int k = 0; k < 100; ++k) {
    EXPECT_EQ(OutcomeSelector::sampled(a).select(p), OutcomeSelector::sampled(b).select(p));
  }
}

// ---------- partial_trace / fidelity ----------

TEST(PartialTraceTest, BasisState) {
  const std::array<int, 1> keep = {0};
  const auto rho = partial_trace(new_basis_state(2, 0), keep);
  ASSERT_EQ(rho.dim(), 2u);
  EXPECT_EQ(rho.at(0, 0), Complex(1.0));
  EXPECT_EQ(rho.at(1, 1), Complex(0.0));
  EXPECT_EQ(rho.at(0, 1), Complex(0.0));
}

TEST(PartialTraceTest, BcStateReducesToDiagonal) {
  const auto bc = StateVector::from_amplitudes({kAlpha, 0, 0, kBeta});
  const std::array<int, 1> keep = {0};
  const auto rho = partial_trace(bc, keep);
  EXPECT_NEAR(rho.at(0, 0).real(), 0.36, 1e-12);
  EXPECT_NEAR(rho.at(1, 1).real(), 0.64, 1e-12);
  EXPECT_NEAR(std::abs(rho.at(0, 1)), 0.0, 1e-12);
}

TEST(PartialTraceTest, GhzSingleQubitIsMaximallyMixed) {
  const auto ghz = StateVector::from_amplitudes({kS, 0, 0, 0, 0, 0, 0, kS});
  for (int q = 0; q < 3; ++q) {
    const std::array<int, 1> keep = {q};
    const auto rho = partial_trace(ghz, keep);
    EXPECT_NEAR(rho.at(0, 0).real(), 0.5, 1e-12);
    EXPECT_NEAR(rho.at(1, 1).real(), 0.5, 1e-12);
    EXPECT_NEAR(std::abs(rho.at(0, 1)), 0.0, 1e-12);
  }
}

TEST(PartialTraceTest, MatchesOracleOnRandomKeepSets) {
  std::mt19937_64 rng(15);
  for (int k = 0; k < 100; ++k) {
    const auto v = oracle::random_state(rng, 16);
    std::vector<int> keep;
    for (int q = 0; q < 4; ++q)
      if ((k + 1) & (1 << q)) keep.push_back(q);
    if (keep.empty() || keep.size() == 4) keep = {1};
    const auto rho = partial_trace(state_of(v), keep);
    const auto ref = oracle::reduce(v, 4, keep);
    ASSERT_EQ(rho.dim(), ref.n);
    for (std::size_t r = 0; r < ref.n; ++r)
      for (std::size_t c = 0; c < ref.n; ++c) EXPECT_NEAR(std::abs(rho.at(r, c) - ref(r, c)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(rho.trace() - 1.0), 0.0, 1e-10);
  }
}

TEST(PartialTraceTest, ProductStateFactors) {
  std::mt19937_64 rng(16);
  for (int k = 0; k < 50; ++k) {
    const auto a = state_of(oracle::random_state(rng, 2));
    const auto b = state_of(oracle::random_state(rng, 4));
    const auto s = tensor(a, b);
    const std::array<int, 1> keep_a = {0};
    const std::array<int, 2> keep_b = {1, 2};
    EXPECT_NEAR(fidelity_pure(partial_trace(s, keep_a), a), 1.0, 1e-10);
    EXPECT_NEAR(fidelity_pure(partial_trace(s, keep_b), b), 1.0, 1e-10);
  }
}

TEST(PartialTraceTest, Errors) {
  const auto s = new_basis_state(2, 0);
  EXPECT_THROW(partial_trace(s, std::span<const int>{}), DomainError);
  const std::array<int, 1> bad = {2};
  EXPECT_THROW(partial_trace(s, bad), DomainError);
}

TEST(FidelityTest, Examples) {
  const std::array<int, 1> keep = {0};
  EXPECT_NEAR(fidelity_pure(partial_trace(new_basis_state(1, 0), keep), new_basis_state(1, 0)), 1.0, 1e-15);
  const DensityMatrix mixed(2, {0.5, 0.0, 0.0, 0.5});
  std::mt19937_64 rng(17);
  for (int k = 0; k < 20; ++k) {
    EXPECT_NEAR(fidelity_pure(mixed, state_of(oracle::random_state(rng, 2))), 0.5, 1e-12);
  }
  // diag(|a|^2, |b|^2) against a|0> + b|1>: |a|^4 + |b|^4
  const DensityMatrix diag(2, {0.36, 0.0, 0.0, 0.64});
  EXPECT_NEAR(fidelity_pure(diag, StateVector::from_amplitudes({kAlpha, kBeta})), 0.5392, 1e-12);
}

TEST(FidelityTest, GlobalPhaseInvariant) {
  std::mt19937_64 rng(18);
  const auto v = oracle::random_state(rng, 4);
  const auto s = state_of(v);
  const std::array<int, 2> keep = {0, 1};
  const auto rho = partial_trace(s, keep);
  oracle::Vec rotated = v;
  for (auto& a : rotated) a *= std::polar(1.0, 0.73);
  EXPECT_NEAR(fidelity_pure(rho, state_of(rotated)), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(s, state_of(rotated)), 1.0, 1e-12);
}

TEST(FidelityTest, DimensionMismatch) {
  const DensityMatrix rho(2, {1.0, 0.0, 0.0, 0.0});
  EXPECT_THROW(fidelity_pure(rho, new_basis_state(2, 0)), DomainError);
}

TEST(DensityMatrixTest, ValidatesInvariants) {
  EXPECT_THROW(DensityMatrix(2, {0.5, 0.1, 0.2, 0.5}), ValidationError);    // not Hermitian
  EXPECT_THROW(DensityMatrix(2, {0.6, 0.0, 0.0, 0.6}), ValidationError);    // trace
  EXPECT_THROW(DensityMatrix(2, {1.5, 0.0, 0.0, -0.5}), ValidationError);   // negative eigenvalue
  EXPECT_THROW(DensityMatrix(2, {0.5, 0.6, 0.6, 0.5}), ValidationError);    // eigenvalue -0.1
  EXPECT_THROW(DensityMatrix(3, std::vector<Complex>(9, 0.0)), ValidationError);
  EXPECT_NO_THROW(DensityMatrix(2, {0.5, 0.5, 0.5, 0.5}));
}

TEST(ExtractQubitTest, RecoversFactorAndRejectsEntangled) {
  std::mt19937_64 rng(19);
  const auto a = state_of(oracle::random_state(rng, 2));
  const auto s = tensor(tensor(new_basis_state(1, 1), a), state_of(oracle::random_state(rng, 2)));
  EXPECT_NEAR(fidelity(extract_qubit(s, 1), a), 1.0, 1e-12);
  const auto bell = StateVector::from_amplitudes({kS, 0, 0, kS});
  EXPECT_THROW(extract_qubit(bell, 0), ValidationError);
}

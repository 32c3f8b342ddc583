#include <cmath>
#include <string>

#include "ghztp/qsim.hpp"
#include "kernel.hpp"

namespace ghztp::qsim {

namespace {

// Projection of `state` onto |v> (2^k amplitudes over `qubits`, first qubit
// most significant) tensored with identity on the rest. Returns the
// unnormalized projected amplitudes and the Born weight.
template <std::size_t K>
struct Projection {
  std::vector<Complex> amplitudes;
  double weight = 0.0;
};

template <std::size_t K>
Projection<K> project(const StateVector& state, const std::array<int, K>& qubits,
                      std::span<const Complex, (std::size_t{1} << K)> v, bool keep_amplitudes) {
  const int n = state.num_qubits();
  std::array<std::size_t, K> masks;
  std::size_t all = 0;
  for (std::size_t j = 0; j < K; ++j) {
    if (qubits[j] < 0 || qubits[j] >= n) {
      throw DomainError("qubit " + std::to_string(qubits[j]) + " out of range for " +
                        std::to_string(n) + "-qubit state");
    }
    masks[j] = std::size_t{1} << (n - 1 - qubits[j]);
    all |= masks[j];
  }
  constexpr std::size_t local_dim = std::size_t{1} << K;
  auto offset = [&](std::size_t local) {
    std::size_t off = 0;
    for (std::size_t j = 0; j < K; ++j) {
      if (local & (std::size_t{1} << (K - 1 - j))) off |= masks[j];
    }
    return off;
  };

  Projection<K> out;
  if (keep_amplitudes) out.amplitudes.assign(state.dim(), Complex{0.0});
  for (std::size_t base = 0; base < state.dim(); ++base) {
    if (base & all) continue;
    Complex overlap = 0.0;
    for (std::size_t l = 0; l < local_dim; ++l) overlap += std::conj(v[l]) * state[base | offset(l)];
    out.weight += std::norm(overlap);
    if (keep_amplitudes) {
      for (std::size_t l = 0; l < local_dim; ++l) out.amplitudes[base | offset(l)] = v[l] * overlap;
    }
  }
  return out;
}

StateVector renormalized(const StateVector& like, std::vector<Complex> amps, double weight) {
  const double scale = 1.0 / std::sqrt(weight);
  for (auto& a : amps) a *= scale;
  return Kernel::make(like.num_qubits(), std::move(amps));
}

void require_distinct(int q1, int q2) {
  if (q1 == q2) throw DomainError("Bell measurement needs two distinct qubits");
}

}  // namespace

double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int OutcomeSelector::select(std::span<const double> probabilities) const {
  const int count = static_cast<int>(probabilities.size());
  if (rng_ == nullptr) {
    if (forced_ < 0 || forced_ >= count) {
      throw DomainError("forced outcome " + std::to_string(forced_) + " out of range");
    }
    if (probabilities[forced_] < tol::kImpossible) {
      throw ImpossibleOutcomeError("forced outcome " + std::to_string(forced_) +
                                   " has Born probability " +
                                   std::to_string(probabilities[forced_]));
    }
    return forced_;
  }
  const double u = uniform_unit(*rng_);
  double cumulative = 0.0;
  int last_possible = -1;
  for (int k = 0; k < count; ++k) {
    if (probabilities[k] < tol::kImpossible) continue;
    cumulative += probabilities[k];
    last_possible = k;
    if (u < cumulative) return k;
  }
  if (last_possible < 0) throw ImpossibleOutcomeError("no outcome has nonzero probability");
  return last_possible;
}

std::array<double, 2> basis_probabilities(const StateVector& state, int qubit,
                                          const MeasurementBasis& basis) {
  std::array<double, 2> p{};
  for (int k = 0; k < 2; ++k) {
    p[k] = project<1>(state, {qubit}, std::span<const Complex, 2>(basis[k]), false).weight;
  }
  return p;
}

Measurement measure_in_basis(const StateVector& state, int qubit, const MeasurementBasis& basis,
                             const OutcomeSelector& selector) {
  const auto p = basis_probabilities(state, qubit, basis);
  const int k = selector.select(p);
  auto proj = project<1>(state, {qubit}, std::span<const Complex, 2>(basis[k]), true);
  return Measurement{k, p[k], renormalized(state, std::move(proj.amplitudes), proj.weight)};
}

std::array<double, 4> bell_probabilities(const StateVector& state, int q1, int q2) {
  require_distinct(q1, q2);
  std::array<double, 4> p{};
  for (auto o : kBellOutcomes) {
    const auto v = bell_vector(o);
    p[static_cast<int>(o)] = project<2>(state, {q1, q2}, std::span<const Complex, 4>(v), false).weight;
  }
  return p;
}

BellMeasurement measure_bell(const StateVector& state, int q1, int q2,
                             const OutcomeSelector& selector) {
  const auto p = bell_probabilities(state, q1, q2);
  const int k = selector.select(p);
  const auto v = bell_vector(static_cast<BellOutcome>(k));
  auto proj = project<2>(state, {q1, q2}, std::span<const Complex, 4>(v), true);
  return BellMeasurement{static_cast<BellOutcome>(k), p[k],
                         renormalized(state, std::move(proj.amplitudes), proj.weight)};
}

}  // namespace ghztp::qsim

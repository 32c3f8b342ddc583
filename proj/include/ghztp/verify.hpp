#pragma once

// Oracles over the protocol: every (Bell, Charlie) branch run with forced
// outcomes, and what Bob can learn from his qubit before Charlie speaks.

#include <array>
#include <cstdint>

#include "ghztp/protocol.hpp"

namespace ghztp::verify {

using protocol::BellOutcome;
using protocol::CharlieOutcome;
using protocol::SignalState;

struct BranchReport {
  BellOutcome bell;
  CharlieOutcome charlie;
  double probability;
  double bob_fidelity;

  friend bool operator==(const BranchReport&, const BranchReport&) = default;
};

// Bell-major order: (PhiPlus, Plus), (PhiPlus, Minus), (PhiMinus, Plus), ...
std::array<BranchReport, 8> enumerate_branches(const SignalState& signal);

// Largest eigenvalue of a 2x2 Hermitian matrix, closed form:
// (tr + sqrt((a - d)^2 + 4|b|^2)) / 2.
double max_eigenvalue_2x2(const qsim::DensityMatrix& rho);

struct SecurityReport {
  BellOutcome bell;
  qsim::DensityMatrix rho_bob;
  // <signal|rho_bob|signal>
  double raw_fidelity;
  // best fidelity any unitary Bob applies on his own can reach
  double unitary_bound;

  friend bool operator==(const SecurityReport&, const SecurityReport&) = default;
};

// Runs through both Bell corrections, then traces the BC state down to B.
SecurityReport bob_view_before_charlie(const SignalState& signal, BellOutcome bell);

// Same view for Charlie (qubit C) at the same point of the protocol.
SecurityReport charlie_view_before_cooperation(const SignalState& signal, BellOutcome bell);

struct SweepSummary {
  int samples = 0;
  std::uint64_t seed = 0;
  // over all samples and Bell outcomes
  double max_bound_deviation = 0.0;       // |bound - max(|a|^2, |b|^2)|
  double max_raw_fidelity_deviation = 0.0;  // |raw - (|a|^4 + |b|^4)|
  double max_offdiagonal = 0.0;           // |rho_bob[0][1]|
  double min_bound_excess = 0.0;          // min of bound - max(|a|^2, |b|^2)
  double max_bound_excess = 0.0;
  // largest bound among signals with min(|a|^2, |b|^2) > kProtectedThreshold
  double max_protected_bound = 0.0;
  int protected_samples = 0;
};

inline constexpr double kProtectedThreshold = 1e-3;

// Throws DomainError for samples < 1.
SweepSummary security_sweep(int samples, std::uint64_t seed);

}  // namespace ghztp::verify

#include <algorithm>
#include <cmath>
#include <limits>

#include "ghztp/verify.hpp"

namespace ghztp::verify {

namespace {

protocol::Session corrected_session(const SignalState& signal, BellOutcome bell) {
  auto session = protocol::Session::compose(signal);
  protocol::alice_bell_measure(session, qsim::OutcomeSelector::forced(static_cast<int>(bell)));
  protocol::apply_bell_correction(session, bell);
  return session;
}

SecurityReport view_of(const SignalState& signal, BellOutcome bell, protocol::Qubit qubit) {
  const auto session = corrected_session(signal, bell);
  const std::array<int, 1> keep = {protocol::index(qubit)};
  auto rho = qsim::partial_trace(session.state(), keep);
  const double raw = qsim::fidelity_pure(rho, protocol::prepare_signal(signal));
  const double bound = max_eigenvalue_2x2(rho);
  return SecurityReport{bell, std::move(rho), raw, bound};
}

}  // namespace

std::array<BranchReport, 8> enumerate_branches(const SignalState& signal) {
  std::array<BranchReport, 8> out{};
  std::size_t i = 0;
  for (auto bell : qsim::kBellOutcomes) {
    for (auto charlie : qsim::kCharlieOutcomes) {
      const auto r = protocol::run_protocol(signal, protocol::ForcedPolicy{bell, charlie});
      out[i++] = BranchReport{bell, charlie, r.path_probability, r.fidelity};
    }
  }
  return out;
}

double max_eigenvalue_2x2(const qsim::DensityMatrix& rho) {
  if (rho.dim() != 2) throw DomainError("max_eigenvalue_2x2 needs a 2x2 matrix");
  const double a = rho.at(0, 0).real();
  const double d = rho.at(1, 1).real();
  const double gap = std::sqrt((a - d) * (a - d) + 4.0 * std::norm(rho.at(0, 1)));
  return 0.5 * (a + d + gap);
}

SecurityReport bob_view_before_charlie(const SignalState& signal, BellOutcome bell) {
  return view_of(signal, bell, protocol::Qubit::B);
}

SecurityReport charlie_view_before_cooperation(const SignalState& signal, BellOutcome bell) {
  return view_of(signal, bell, protocol::Qubit::C);
}

SweepSummary security_sweep(int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("security_sweep needs at least one sample");
  SweepSummary s;
  s.samples = samples;
  s.seed = seed;
  s.min_bound_excess = std::numeric_limits<double>::infinity();
  s.max_bound_excess = -std::numeric_limits<double>::infinity();
  qsim::Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    const auto signal = SignalState::random(rng);
    const double p0 = std::norm(signal.alpha());
    const double p1 = std::norm(signal.beta());
    const double expected_bound = std::max(p0, p1);
    const double expected_raw = p0 * p0 + p1 * p1;
    const bool is_protected = std::min(p0, p1) > kProtectedThreshold;
    if (is_protected) ++s.protected_samples;
    for (auto bell : qsim::kBellOutcomes) {
      const auto r = bob_view_before_charlie(signal, bell);
      const double excess = r.unitary_bound - expected_bound;
      s.max_bound_deviation = std::max(s.max_bound_deviation, std::abs(excess));
      s.max_raw_fidelity_deviation =
          std::max(s.max_raw_fidelity_deviation, std::abs(r.raw_fidelity - expected_raw));
      s.max_offdiagonal = std::max(s.max_offdiagonal, std::abs(r.rho_bob.at(0, 1)));
      s.min_bound_excess = std::min(s.min_bound_excess, excess);
      s.max_bound_excess = std::max(s.max_bound_excess, excess);
      if (is_protected) s.max_protected_bound = std::max(s.max_protected_bound, r.unitary_bound);
    }
  }
  return s;
}

}  // namespace ghztp::verify

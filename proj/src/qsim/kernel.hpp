#pragma once

#include "ghztp/qsim.hpp"

namespace ghztp::qsim {

// Internal access to StateVector storage for operations that already
// guarantee the invariants.
struct Kernel {
  static StateVector make(int num_qubits, std::vector<Complex> amplitudes) {
    return StateVector(num_qubits, std::move(amplitudes));
  }
  static std::vector<Complex>& amplitudes(StateVector& s) { return s.amplitudes_; }
};

}  // namespace ghztp::qsim

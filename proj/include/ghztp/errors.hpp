#pragma once

#include <stdexcept>
#include <string>

namespace ghztp {

// Index or argument outside the operation's domain (qubit out of range,
// empty keep-set, mismatched dimensions).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A value violates a type invariant (non-unitary matrix, unnormalizable
// amplitudes, non-orthonormal basis).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A forced measurement outcome whose Born probability is below the
// impossible-outcome threshold.
class ImpossibleOutcomeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A protocol step invoked out of phase order.
class ProtocolOrderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ghztp

#include <algorithm>
#include <cmath>
#include <string>

#include "ghztp/qsim.hpp"
#include "kernel.hpp"

namespace ghztp::qsim {

namespace {

// Cholesky on rho + shift*I; a negative pivot means an eigenvalue below
// -shift.
bool positive_semidefinite(std::size_t n, std::span<const Complex> rho, double shift) {
  std::vector<Complex> l(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = rho[j * n + j].real() + shift;
    for (std::size_t k = 0; k < j; ++k) diag -= std::norm(l[j * n + k]);
    if (diag < 0.0) return false;
    const double ljj = std::sqrt(diag);
    l[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Complex acc = rho[i * n + j];
      for (std::size_t k = 0; k < j; ++k) acc -= l[i * n + k] * std::conj(l[j * n + k]);
      l[i * n + j] = ljj > 0.0 ? acc / ljj : Complex{0.0};
    }
  }
  return true;
}

}  // namespace

DensityMatrix::DensityMatrix(std::size_t dim, std::vector<Complex> entries)
    : dim_(dim), entries_(std::move(entries)) {
  if (dim_ == 0 || (dim_ & (dim_ - 1)) != 0) {
    throw ValidationError("density matrix dimension must be a power of two");
  }
  if (entries_.size() != dim_ * dim_) {
    throw ValidationError("density matrix needs dim*dim entries");
  }
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t c = r; c < dim_; ++c) {
      if (std::abs(at(r, c) - std::conj(at(c, r))) > tol::kAlgebraic) {
        throw ValidationError("density matrix is not Hermitian");
      }
    }
  }
  if (std::abs(trace() - 1.0) > tol::kAccumulated) {
    throw ValidationError("density matrix trace is not 1");
  }
  if (!positive_semidefinite(dim_, entries_, tol::kAccumulated)) {
    throw ValidationError("density matrix has a negative eigenvalue");
  }
}

Complex DensityMatrix::trace() const {
  Complex t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += at(i, i);
  return t;
}

DensityMatrix partial_trace(const StateVector& state, std::span<const int> keep) {
  if (keep.empty()) throw DomainError("partial trace needs at least one kept qubit");
  const int n = state.num_qubits();
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  for (int q : kept) {
    if (q < 0 || q >= n) {
      throw DomainError("qubit " + std::to_string(q) + " out of range for " +
                        std::to_string(n) + "-qubit state");
    }
  }
  const int k = static_cast<int>(kept.size());
  const std::size_t sub = std::size_t{1} << k;
  const std::size_t env = state.dim() / sub;

  // Split each full index into (kept index, environment index).
  std::vector<std::size_t> kept_masks(k);
  std::size_t kept_all = 0;
  for (int j = 0; j < k; ++j) {
    kept_masks[j] = std::size_t{1} << (n - 1 - kept[j]);
    kept_all |= kept_masks[j];
  }
  std::vector<std::size_t> full_of(sub);
  for (std::size_t l = 0; l < sub; ++l) {
    std::size_t off = 0;
    for (int j = 0; j < k; ++j) {
      if (l & (std::size_t{1} << (k - 1 - j))) off |= kept_masks[j];
    }
    full_of[l] = off;
  }
  std::vector<std::size_t> env_base;
  env_base.reserve(env);
  for (std::size_t i = 0; i < state.dim(); ++i) {
    if ((i & kept_all) == 0) env_base.push_back(i);
  }

  std::vector<Complex> rho(sub * sub, 0.0);
  for (std::size_t r = 0; r < sub; ++r) {
    for (std::size_t c = 0; c < sub; ++c) {
      Complex acc = 0.0;
      for (std::size_t e : env_base) acc += state[e | full_of[r]] * std::conj(state[e | full_of[c]]);
      rho[r * sub + c] = acc;
    }
  }
  return DensityMatrix(DensityMatrix::Unchecked{}, sub, std::move(rho));
}

double fidelity_pure(const DensityMatrix& rho, const StateVector& psi) {
  if (rho.dim() != psi.dim()) {
    throw DomainError("fidelity: density matrix dim " + std::to_string(rho.dim()) +
                      " vs state dim " + std::to_string(psi.dim()));
  }
  Complex acc = 0.0;
  for (std::size_t r = 0; r < rho.dim(); ++r) {
    Complex row = 0.0;
    for (std::size_t c = 0; c < rho.dim(); ++c) row += rho.at(r, c) * psi[c];
    acc += std::conj(psi[r]) * row;
  }
  return acc.real();
}

StateVector extract_qubit(const StateVector& state, int qubit) {
  const std::array<int, 1> keep = {qubit};
  const DensityMatrix rho = partial_trace(state, keep);
  const double det = (rho.at(0, 0) * rho.at(1, 1) - rho.at(0, 1) * rho.at(1, 0)).real();
  if (std::abs(det) > tol::kAccumulated) {
    throw ValidationError("qubit " + std::to_string(qubit) + " is entangled with the rest");
  }
  const std::size_t pivot = rho.at(0, 0).real() >= rho.at(1, 1).real() ? 0 : 1;
  const double scale = 1.0 / std::sqrt(rho.at(pivot, pivot).real());
  std::vector<Complex> amps = {rho.at(0, pivot) * scale, rho.at(1, pivot) * scale};
  return StateVector::from_amplitudes(std::move(amps));
}

}  // namespace ghztp::qsim

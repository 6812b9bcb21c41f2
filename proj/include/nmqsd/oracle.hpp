#pragma once

#include <vector>

#include "nmqsd/hilbert.hpp"
#include "nmqsd/noise.hpp"

namespace nmqsd {

// Full system⊗environment model: H_tot = H_sys + Σ_k χ_k (L a_k† + L† a_k)
// + Σ_k ω_k a_k†a_k, every mode starting in vacuum. Negative mode frequencies
// are allowed (needed to realize real decaying kernels).
struct OracleMode {
  Real omega;
  Real chi;
  int n_trunc;
};

struct MicroscopicModel {
  Matrix H_sys;
  Matrix L;
  std::vector<OracleMode> modes;

  int total_dim() const;
};

// The kernel this environment induces: Σ_k χ_k² e^{-iω_k(t-s)}.
CorrelationKernel kernel_of_model(const MicroscopicModel& model);

inline constexpr int kOracleDimLimit = 20000;

// Sparse-RK4 evolution of the closed total system from ψ0_sys ⊗ |vac…⟩;
// reduced system density matrix every `stride` grid nodes (plus the final one).
// Throws DimensionTooLarge past the dim limit, TruncationError when any mode's
// top Fock level exceeds 1e-6 population, NumericalBlowup when the total norm
// drifts beyond 1e-8.
std::vector<Matrix> evolve_exact(const MicroscopicModel& model, const Vector& psi0_sys,
                                 const TimeGrid& grid, int stride = 1);

// Symmetric discrete-mode fit of the exponential kernel (γ/2)e^{-γ|τ|} on
// τ∈[0, t_max]: frequencies {0, ±ω₁, ±ω₂}, positive weights, least squares
// with a small frequency search. Returns the 5 modes; max deviation from the
// target kernel on the fit grid is written to *residual when non-null.
std::vector<SpectralMode> fit_exponential_modes(Real gamma, Real t_max, Real* residual = nullptr);

}  // namespace nmqsd

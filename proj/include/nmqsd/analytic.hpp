#pragma once

#include <vector>

#include "nmqsd/ansatz.hpp"
#include "nmqsd/noise.hpp"

namespace nmqsd {

struct AnalyticCurve {
  std::vector<Real> times;
  std::vector<Matrix> values;
};

// Dephasing solution for H = (ω/2)σz, L = λσz:
// diagonal constant, ρ₁₂(t) = ρ₁₂(0) e^{-F(t)} with
// F(t) = iωt + 2λ² ∫₀ᵗ ds ∫₀ˢ du (α + α*)(s-u).
AnalyticCurve rho_sigma_z(const Matrix& rho0, Real omega, Real lambda,
                          const CorrelationKernel& kernel, const std::vector<Real>& times);

// Ensemble mean for H = (ω/2)σz, L = λσ₋ in terms of the memory coefficient:
// ρ₁₁(t) = ρ₁₁(0) e^{-λ∫(F+F*)}, ρ₁₂(t) = ρ₁₂(0) e^{-iωt-λ∫F}, ρ₂₂ = 1-ρ₁₁.
// Past a divergence of Re∫F the state is the ground state. F is stepped at
// grid.dt; the curve is recorded every `stride` nodes.
AnalyticCurve rho_dissipative(const Matrix& rho0, Real omega, Real lambda,
                              const CorrelationKernel& kernel, const TimeGrid& grid,
                              int stride = 1);

// Time-local master equation for the σz model:
// ρ̇ = -i(ω/2)[σz,ρ] - (λ²/2)(∫₀ᵗ(α+α*)ds)[σz,[σz,ρ]].
Matrix master_rhs_sigma_z(const Matrix& rho, Real t, Real omega, Real lambda,
                          const CorrelationKernel& kernel);

// One Heun step of the Markov QSD equation with shifted noise z + ⟨L†⟩;
// renormalizes afterwards. Reference baseline for the Markov-limit regression.
void markov_qsd_step(Vector& psi, const Matrix& H, const Matrix& L, Complex z, Real dt);

}  // namespace nmqsd

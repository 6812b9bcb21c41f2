#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "nmqsd/types.hpp"

namespace nmqsd {

// Environment correlation kernels α(t,s) with M[z*_t z_s] = α(t,s), M[z_t z_s] = 0.

struct ExponentialKernel {
  Real gamma;  // memory rate > 0
  Real Omega;  // central frequency
};

struct SingleModeKernel {
  Real Omega;  // α(t,s) = e^{-iΩ(t-s)}
};

struct SpectralMode {
  Real omega;
  Real weight;  // α_k > 0
};

struct DiscreteSpectrumKernel {
  std::vector<SpectralMode> modes;  // α(τ) = Σ_k α_k e^{-iω_k τ}
};

struct MarkovDeltaKernel {};  // α(t,s) = δ(t-s)

struct QBMThermalMode {
  Real omega;
  Real chi2;  // χ_k² > 0
  Real nbar;  // n̄_k >= 0
};

struct QBMThermalKernel {
  // α(τ) = Σ_k χ_k² [(2n̄_k+1) cos ω_k τ - i sin ω_k τ]
  std::vector<QBMThermalMode> modes;
};

struct FiniteTempPairKernel {
  // The two finite-temperature kernels: α⁻ governs emission (weights
  // χ²(n̄+1), frequencies +ω), α⁺ absorption (weights χ²n̄, frequencies -ω).
  DiscreteSpectrumKernel minus;
  DiscreteSpectrumKernel plus;
};

using CorrelationKernel = std::variant<ExponentialKernel, SingleModeKernel, DiscreteSpectrumKernel,
                                       MarkovDeltaKernel, QBMThermalKernel, FiniteTempPairKernel>;

// Closed-form kernel value. Throws DistributionalKernel for MarkovDelta.
// FiniteTempPair evaluates to the self-adjoint sum α⁻ + α⁺.
Complex kernel_eval(const CorrelationKernel& kernel, Real t, Real s);

bool is_markov(const CorrelationKernel& kernel);

// Representation α(τ) = Σ_j w_j e^{-μ_j τ} (τ >= 0). Every non-Markov variant
// decomposes this way; exact O(1) recursions for memory integrals build on it.
struct ExpTerm {
  Complex weight;
  Complex mu;
};

std::vector<ExpTerm> exp_terms(const CorrelationKernel& kernel);

struct TimeGrid {
  Real dt = 1e-3;
  int n_steps = 1;

  int n_points() const { return n_steps + 1; }
  Real time(int i) const { return dt * i; }
  Real t_max() const { return dt * n_steps; }
};

struct NoisePath {
  TimeGrid grid;
  Vector z;      // values at grid nodes; for white noise, per-step values with M[|z|²]=1/dt
  Vector shift;  // accumulated Girsanov shift, written by the dynamics module
  bool white = false;

  Complex shifted(int i) const { return z(i) + shift(i); }
};

// One independent, counter-derived stream per trajectory index.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

// Spectral synthesis z_t = Σ_ω z_ω e^{iωt} with M[|z_ω|²] = α_ω.
// Accepts any kernel whose exp_terms are purely oscillatory with positive weights
// (SingleMode, DiscreteSpectrum, QBMThermal).
NoisePath sample_spectral(const CorrelationKernel& kernel, const TimeGrid& grid, std::uint64_t seed);

// Universal sampler: Cholesky factor of the grid covariance C_ij = α(t_i,t_j).
NoisePath sample_cholesky(const CorrelationKernel& kernel, const TimeGrid& grid, std::uint64_t seed);

// Stationary complex Ornstein-Uhlenbeck path for the exponential kernel.
NoisePath sample_ou(const ExponentialKernel& kernel, const TimeGrid& grid, std::uint64_t seed);

// White-noise values for the Markov limit: M[|z_i|²] = 1/dt, independent steps.
NoisePath markov_increments(const TimeGrid& grid, std::uint64_t seed);

enum class SamplerKind { Default, Spectral, Cholesky, OU };

// Default dispatch: OU for Exponential, spectral for mode lists, Cholesky fallback.
NoisePath sample_noise(const CorrelationKernel& kernel, const TimeGrid& grid, std::uint64_t seed,
                       SamplerKind sampler = SamplerKind::Default);

}  // namespace nmqsd

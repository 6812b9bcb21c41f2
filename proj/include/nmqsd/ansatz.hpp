#pragma once

#include <optional>
#include <vector>

#include "nmqsd/noise.hpp"
#include "nmqsd/types.hpp"

namespace nmqsd {

// Memory coefficients for the operator replacing the functional derivative,
// and the closed kernel integrals that feed the drift of the integrators.

// ∫₀ᵗ α(t,s) ds; closed form per exponential term, ½ for MarkovDelta.
Complex kernel_integral(const CorrelationKernel& kernel, Real t);

// ∫₀ᵗ (t-s) α(t,s) ds; 0 for MarkovDelta.
Complex kernel_first_moment(const CorrelationKernel& kernel, Real t);

// 2 Re ∫₀ᵗ ds ∫₀ˢ du α(s,u); t for MarkovDelta. The dephasing double integral.
Real kernel_double_integral_sym(const CorrelationKernel& kernel, Real t);

inline constexpr Real kCoefficientDivergenceThreshold = 1e8;

// One RK4 step of the dissipative Riccati equation
//   Ḟ = -γF + i(ω-Ω)F + λF² + λγ/2,   F(0) = 0.
// Throws FDiverged once |F| exceeds the divergence threshold.
Complex evolve_F_dissipative(Complex F, const ExponentialKernel& kernel, Real omega, Real lambda,
                             Real dt);

// Closed tanh form of the same equation (pre-divergence window).
Complex F_dissipative_closed_form(const ExponentialKernel& kernel, Real omega, Real lambda, Real t);

// Finite divergence time at resonance for γ < 2λ²; nullopt otherwise.
std::optional<Real> critical_time(Real gamma, Real lambda);

// F(t) = Σ_k F_k for kernels decomposed as Σ_k w_k e^{-μ_k τ}:
//   Ḟ_k = λ w_k + (iω - μ_k + λF) F_k.
// Reduces to the single Riccati for the exponential kernel. Used by the
// lowering-operator models (dissipative spin, zero-T oscillator, §6 spin).
class DampedCoefficient {
 public:
  DampedCoefficient(const CorrelationKernel& kernel, Real omega, Real lambda);

  Complex F() const;
  Real t() const { return t_; }
  bool diverged() const { return diverged_; }
  void step(Real dt);  // one RK4 step; marks diverged instead of throwing

 private:
  std::vector<ExpTerm> terms_;
  std::vector<Complex> Fk_;
  Real omega_, lambda_, t_ = 0.0;
  bool markov_ = false;
  bool diverged_ = false;
};

// Direct (t,s)-grid evolution of ∂_t f = (iω + λF) f with f(s,s) = λ and
// F(t) = ∫ α(t,s) f(t,s) ds by trapezoid. O(n²) fallback for kernels without
// an exponential-sum recursion; also the cross-check for DampedCoefficient.
class DampedCoefficientGrid {
 public:
  DampedCoefficientGrid(const CorrelationKernel& kernel, Real omega, Real lambda, Real dt);

  Complex F() const { return F_; }
  // f(t, s_j) at the grid nodes s_j = j·dt for the current t
  const std::vector<Complex>& f() const { return f_; }
  void step();

 private:
  Complex compute_F(Real t, const std::vector<Complex>& f) const;

  CorrelationKernel kernel_;
  Real omega_, lambda_, dt_;
  std::vector<Complex> f_;  // f(t, s_j) for nodes s_j <= t
  int n_ = 0;
  Complex F_ = 0.0;
};

// Closed set of quantum Brownian motion coefficient equations for the
// exponential kernel with Ω = 0:
//   Ḟ = λγ/2 - γF + ωG - iλFG - iλJ̃
//   Ġ = -γG - ωF - iλG²
//   J̃' = (λγ/2)G - 2γJ̃ - iλGJ̃
class QbmCoefficients {
 public:
  QbmCoefficients(Real gamma, Real omega, Real lambda, Real dt);

  Complex F() const { return F_; }
  Complex G() const { return G_; }
  Complex Jtilde() const { return Jt_; }
  Real t() const { return dt_ * n_; }
  const std::vector<Complex>& G_history() const { return G_hist_; }
  Real dt() const { return dt_; }
  Real gamma() const { return gamma_; }
  Real lambda() const { return lambda_; }

  void step();  // RK4; throws CoefficientDiverged past the threshold

 private:
  Real gamma_, omega_, lambda_, dt_;
  Complex F_ = 0.0, G_ = 0.0, Jt_ = 0.0;
  std::vector<Complex> G_hist_;  // G at grid nodes, for J(t,s) reconstruction
  int n_ = 0;
};

// J(t,s) = λG(s) e^{-∫_s^t (γ + iλG(s')) ds'}, trapezoidal exponent over the
// recorded history. Throws HistoryMissing when [s,t] is not covered.
Complex qbm_J(const QbmCoefficients& coeffs, Real s, Real t);

// §6 coefficient: Ḟ = χ + (iω₁ - iω₂ + λ²/2 + χF)F, F(0) = 0. One RK4 step.
Complex evolve_F_cut(Complex F, Real omega1, Real omega2, Real lambda, Real chi, Real dt);

}  // namespace nmqsd

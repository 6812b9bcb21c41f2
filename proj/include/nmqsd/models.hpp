#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nmqsd/hilbert.hpp"
#include "nmqsd/noise.hpp"

namespace nmqsd {

// Which operator replaces the functional derivative δψ/δz_s.
enum class AnsatzVariant {
  ConstantOp,     // Ô = L (σz measurement, energy measurement)
  ScalarTimesOp,  // Ô(t,s) = f(t,s)·(lowering op), F(t) from the Riccati system
  ToyShift,       // Ô(t,s) = q - (t-s)
  Qbm,            // Ô(t,s,z) = f q + g p + i∫ j z̃, closed F/G/J̃ set
};

struct ModelSpec {
  std::string name;
  Matrix H;
  Matrix L;         // environment coupling, λ folded in
  Matrix lowering;  // bare lowering operator for ScalarTimesOp (σ₋ or a)
  Real lambda = 1.0;
  Real omega = 1.0;  // system frequency entering the coefficient ODEs
  AnsatzVariant ansatz = AnsatzVariant::ConstantOp;
  std::optional<Vector> absorbing_state;
  Vector psi0;  // default initial state
  CorrelationKernel default_kernel = ExponentialKernel{1.0, 0.0};
  bool check_truncation = false;   // boson models: top-Fock self-check
  bool toy_drift_enabled = true;   // test hook for the ∫(t-s)α ds drift term
  std::map<std::string, Real> default_params;

  int dim() const { return int(H.rows()); }
};

// Ready-to-run specs for every catalog entry. Boson models take the Fock
// truncation; spin models ignore it.
ModelSpec measurement_sigma_z_model(Real omega = 1.0, Real lambda = std::sqrt(2.0));
ModelSpec dissipative_spin_model(Real omega = 1.0, Real lambda = 1.0);
ModelSpec energy_measurement_model(const Matrix& H);  // H = L = L†, dim <= 16
ModelSpec toy_model(int n_trunc, Real lambda = 1.0);  // H = p, L = λq
ModelSpec qbm_model(int n_trunc, Real omega = 1.0, Real lambda = 0.2);
ModelSpec oscillator_zero_T_model(int n_trunc, Real omega = 1.0, Real lambda = 1.0);

// §5 cat run: system oscillator + one environment mode at Ω, coupling χ.
ModelSpec cat_model(int n_trunc, Real omega = 1.0, Real Omega = 0.5, Real chi = 0.1,
                    Complex beta = 2.0);

std::vector<ModelSpec> catalog();
ModelSpec model_by_name(const std::string& name, const std::map<std::string, Real>& params = {});

// ----- §6 Heisenberg-cut pair -------------------------------------------------

struct CutParams {
  Real omega1 = 1.0;
  Real omega2 = 1.5;
  Real lambda = 0.6;  // spin-heat-bath coupling
  Real chi = 0.2;     // spin-oscillator coupling
  Complex up0 = Complex(1.0 / std::sqrt(2.0));    // initial ⟨↑|φ₀⟩
  Complex down0 = Complex(1.0 / std::sqrt(2.0));  // initial ⟨↓|φ₀⟩
};

struct CutPairState {
  // Spin⊗oscillator expansion ψ = c0|↓0⟩ + c1|↑0⟩ + c2|↓1⟩
  Complex c0, c1, c2;
  // Spin-only description: φ = v0|↓⟩ + v1|↑⟩; M0 = M_z[v0], F the §6 coefficient
  Complex v1, M0, F;

  Matrix rho1() const;  // Tr₂ |ψ⟩⟨ψ|  (↑↓ basis)
  Matrix rho2() const;  // M_z[|φ⟩⟨φ|] computed in closed form
};

CutPairState cut_pair_initial(const CutParams& p);

// One step driven by the shared white noise value ξ (constant over the step).
// Deterministic components advance by RK4, noise-driven ones by Heun.
void cut_pair_step(CutPairState& state, const CutParams& p, Complex xi, Real dt);

struct CutPairRecord {
  std::vector<Real> times;
  std::vector<CutPairState> states;
};

CutPairRecord run_cut_pair(const CutParams& p, const TimeGrid& grid, std::uint64_t seed,
                           int record_stride = 1);

}  // namespace nmqsd

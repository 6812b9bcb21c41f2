#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "nmqsd/ansatz.hpp"
#include "nmqsd/models.hpp"
#include "nmqsd/noise.hpp"

namespace nmqsd {

// Girsanov shift ∫₀ᵗ α(t,s)* ⟨L†⟩_s ds, maintained by an O(1) recursion per
// exponential kernel term. For the Markov delta the shift is ½⟨L†⟩_t.
class ShiftAccumulator {
 public:
  explicit ShiftAccumulator(const CorrelationKernel& kernel);

  Complex shift() const;
  // Shift value after a step of size h with ⟨L†⟩ endpoints (ldag_a at the start,
  // ldag_b at the end), without committing.
  Complex advanced(Real h, Complex ldag_a, Complex ldag_b) const;
  void commit(Real h, Complex ldag_a, Complex ldag_b);

 private:
  std::vector<ExpTerm> terms_;
  std::vector<Complex> S_;  // per-term partial shifts
  bool markov_ = false;
  Complex markov_shift_ = 0.0;
};

// Per-trajectory evolution of the reduced memory operator Obar(t) entering the
// drift. apply_obar computes Obar·ψ (plus the scalar noise kick for QBM).
class MemoryEngine {
 public:
  virtual ~MemoryEngine() = default;
  virtual void apply_obar(const Vector& psi, Vector& out) const = 0;
  // Advance internal coefficients from t to t+h. ztilde_a/ztilde_b are the
  // shifted-noise endpoints (used only by the QBM noise kick).
  virtual void advance(Real h, Complex ztilde_a, Complex ztilde_b) = 0;
  virtual bool diverged() const { return false; }
  // Magnitude of the fastest drift coefficient; the stepper keeps h·stiffness
  // bounded by substepping. 0 means no constraint.
  virtual Real stiffness() const { return 0.0; }
};

std::unique_ptr<MemoryEngine> make_memory_engine(const ModelSpec& model,
                                                 const CorrelationKernel& kernel, Real dt);

enum class Mode { Linear, Nonlinear };
enum class ShiftConvention { SelfConsistent, PostHoc };

struct TrajectoryOptions {
  Mode mode = Mode::Nonlinear;
  ShiftConvention shift_convention = ShiftConvention::SelfConsistent;
  int record_stride = 1;
  std::vector<Matrix> observables;
  bool record_states = false;
  SamplerKind sampler = SamplerKind::Default;
  std::optional<Vector> psi0;  // overrides the model default
};

struct TrajectoryRecord {
  std::vector<Real> times;
  std::vector<std::vector<Complex>> observables;  // [record index][observable]
  std::vector<Real> norm_sq;                      // linear: Girsanov weight; nonlinear: 1
  std::vector<Vector> states;                     // filled when record_states
  Vector final_state;
  Real final_norm_sq = 1.0;
  bool truncation_suspect = false;
  bool absorbed = false;
};

// One full trajectory; deterministic in (model, kernel, grid, seed, options).
TrajectoryRecord run_trajectory(const ModelSpec& model, const CorrelationKernel& kernel,
                                const TimeGrid& grid, std::uint64_t seed,
                                const TrajectoryOptions& options);

// Same, but driven by a caller-supplied noise path (its shift array is filled
// in with the accumulated Girsanov shift at grid nodes).
TrajectoryRecord run_trajectory_with_noise(const ModelSpec& model, const CorrelationKernel& kernel,
                                           NoisePath& noise, const TrajectoryOptions& options);

}  // namespace nmqsd

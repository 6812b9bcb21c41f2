#pragma once

#include <vector>

#include "nmqsd/dynamics.hpp"

namespace nmqsd {

struct EnsembleOptions {
  int n_trajectories = 1;
  std::uint64_t master_seed = 0;
  TrajectoryOptions trajectory;
  int n_threads = 0;    // 0: NMQSD_THREADS env var, else hardware concurrency
  int block_size = 256;  // trajectories per deterministic accumulation block
  bool collect_final_states = false;
};

// Trajectory i uses derive_seed(master_seed, i). Accumulation is grouped into
// fixed-size blocks summed in trajectory order and merged in block order, so
// the result is bit-identical for any worker count.
struct EnsembleResult {
  std::vector<Real> times;
  int n = 0;

  // mean of |ψ⟩⟨ψ| (nonlinear: unit-trace projectors; linear: Girsanov-weighted,
  // i.e. the raw unnormalized projector whose mean is ρ_t). Symmetrized.
  std::vector<Matrix> mean_rho;
  std::vector<RealMatrix> se_rho;  // entrywise √(var_re+var_im)/√n

  std::vector<Real> mean_norm, se_norm;  // of the recorded norm_sq (linear weight)

  // per recorded observable: mean/SE of the per-trajectory Re⟨A⟩
  std::vector<std::vector<Real>> obs_mean, obs_se;  // [record index][observable]

  std::vector<Vector> final_states;  // when collect_final_states
  int n_absorbed = 0;
  int n_truncation_suspect = 0;
  int n_failed = 0;
};

EnsembleResult run_ensemble(const ModelSpec& model, const CorrelationKernel& kernel,
                            const TimeGrid& grid, const EnsembleOptions& options);

// Fidelity ⟨cat(β_t)|ρ_t|cat(β_t)⟩ against the rotating cat β_t = β e^{-iωt}.
std::vector<Real> cat_fidelity(const std::vector<Matrix>& rhos, const std::vector<Real>& times,
                               Complex beta, Real omega);

int resolve_thread_count(int requested);

}  // namespace nmqsd

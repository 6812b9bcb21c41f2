#include "nmqsd/noise.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <random>

namespace nmqsd {

namespace {

Complex exp_sum_eval(const std::vector<ExpTerm>& terms, Real tau) {
  // α(-τ) = α(τ)* by Hermitian symmetry.
  const Real a = std::abs(tau);
  Complex v = 0.0;
  for (const auto& term : terms) v += term.weight * std::exp(-term.mu * a);
  return tau >= 0.0 ? v : std::conj(v);
}

}  // namespace

Complex kernel_eval(const CorrelationKernel& kernel, Real t, Real s) {
  if (is_markov(kernel)) throw DistributionalKernel("kernel_eval: MarkovDelta is distributional");
  return exp_sum_eval(exp_terms(kernel), t - s);
}

bool is_markov(const CorrelationKernel& kernel) {
  return std::holds_alternative<MarkovDeltaKernel>(kernel);
}

std::vector<ExpTerm> exp_terms(const CorrelationKernel& kernel) {
  std::vector<ExpTerm> out;
  std::visit(
      [&out](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ExponentialKernel>) {
          out.push_back({Complex(0.5 * k.gamma), Complex(k.gamma, k.Omega)});
        } else if constexpr (std::is_same_v<T, SingleModeKernel>) {
          out.push_back({Complex(1.0), Complex(0.0, k.Omega)});
        } else if constexpr (std::is_same_v<T, DiscreteSpectrumKernel>) {
          for (const auto& m : k.modes) out.push_back({Complex(m.weight), Complex(0.0, m.omega)});
        } else if constexpr (std::is_same_v<T, QBMThermalKernel>) {
          for (const auto& m : k.modes) {
            out.push_back({Complex(m.chi2 * (m.nbar + 1.0)), Complex(0.0, m.omega)});
            if (m.nbar > 0.0) out.push_back({Complex(m.chi2 * m.nbar), Complex(0.0, -m.omega)});
          }
        } else if constexpr (std::is_same_v<T, FiniteTempPairKernel>) {
          for (const auto& m : k.minus.modes) out.push_back({Complex(m.weight), Complex(0.0, m.omega)});
          for (const auto& m : k.plus.modes) out.push_back({Complex(m.weight), Complex(0.0, m.omega)});
        } else {
          throw DistributionalKernel("exp_terms: MarkovDelta has no exponential decomposition");
        }
      },
      kernel);
  return out;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  // splitmix64 over master ⊕ counter; independent streams per trajectory.
  std::uint64_t x = master_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

namespace {

// Circular complex Gaussian with M[|g|²] = 1, M[g²] = 0.
struct ComplexGaussian {
  std::mt19937_64 rng;
  std::normal_distribution<Real> dist{0.0, std::sqrt(0.5)};

  explicit ComplexGaussian(std::uint64_t seed) : rng(seed) {}
  Complex operator()() {
    const Real re = dist(rng);
    const Real im = dist(rng);
    return {re, im};
  }
};

NoisePath empty_path(const TimeGrid& grid) {
  NoisePath path;
  path.grid = grid;
  path.z = Vector::Zero(grid.n_points());
  path.shift = Vector::Zero(grid.n_points());
  return path;
}

}  // namespace

NoisePath sample_spectral(const CorrelationKernel& kernel, const TimeGrid& grid, std::uint64_t seed) {
  const auto terms = exp_terms(kernel);
  for (const auto& term : terms) {
    if (std::abs(term.mu.real()) > 1e-14 || term.weight.imag() != 0.0 || term.weight.real() <= 0.0)
      throw NotPositiveSemidefinite(
          "sample_spectral: kernel is not a positive discrete spectrum; use sample_cholesky");
  }
  ComplexGaussian gauss(seed);
  NoisePath path = empty_path(grid);
  for (const auto& term : terms) {
    const Complex z_omega = std::sqrt(term.weight.real()) * gauss();
    const Real omega = term.mu.imag();
    for (int i = 0; i < grid.n_points(); ++i) path.z(i) += z_omega * std::exp(I * omega * grid.time(i));
  }
  return path;
}

NoisePath sample_cholesky(const CorrelationKernel& kernel, const TimeGrid& grid, std::uint64_t seed) {
  const int n = grid.n_points();
  // E[z z†](i,j) = E[z_i z*_j] must equal α(t_j, t_i) so that the estimator
  // convention M[z*_t z_s] = α(t,s) comes out right (matters for complex kernels).
  Matrix C(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      C(i, j) = kernel_eval(kernel, grid.time(j), grid.time(i));
      C(j, i) = std::conj(C(i, j));
    }
  const Real jitter = 1e-10 * C.cwiseAbs().maxCoeff();
  Eigen::LLT<Matrix> llt(C + jitter * Matrix::Identity(n, n));
  if (llt.info() != Eigen::Success)
    throw NotPositiveSemidefinite("sample_cholesky: grid covariance not positive semidefinite");
  ComplexGaussian gauss(seed);
  Vector g(n);
  for (int i = 0; i < n; ++i) g(i) = gauss();
  NoisePath path = empty_path(grid);
  path.z = llt.matrixL() * g;
  return path;
}

NoisePath sample_ou(const ExponentialKernel& kernel, const TimeGrid& grid, std::uint64_t seed) {
  // Exact discretization of dz = -(γ - iΩ) z dt + ... with stationary
  // variance γ/2, so that M[z*_{t+τ} z_t] = (γ/2) e^{-γτ - iΩτ}.
  ComplexGaussian gauss(seed);
  NoisePath path = empty_path(grid);
  const Real var = 0.5 * kernel.gamma;
  const Complex decay = std::exp(-Complex(kernel.gamma, -kernel.Omega) * grid.dt);
  const Real innov = std::sqrt(var * (1.0 - std::exp(-2.0 * kernel.gamma * grid.dt)));
  Complex z = std::sqrt(var) * gauss();
  path.z(0) = z;
  for (int i = 1; i < grid.n_points(); ++i) {
    z = decay * z + innov * gauss();
    path.z(i) = z;
  }
  return path;
}

NoisePath markov_increments(const TimeGrid& grid, std::uint64_t seed) {
  ComplexGaussian gauss(seed);
  NoisePath path = empty_path(grid);
  path.white = true;
  const Real scale = 1.0 / std::sqrt(grid.dt);
  for (int i = 0; i < grid.n_points(); ++i) path.z(i) = scale * gauss();
  return path;
}

NoisePath sample_noise(const CorrelationKernel& kernel, const TimeGrid& grid, std::uint64_t seed,
                       SamplerKind sampler) {
  switch (sampler) {
    case SamplerKind::Spectral:
      return sample_spectral(kernel, grid, seed);
    case SamplerKind::Cholesky:
      return sample_cholesky(kernel, grid, seed);
    case SamplerKind::OU:
      return sample_ou(std::get<ExponentialKernel>(kernel), grid, seed);
    case SamplerKind::Default:
      break;
  }
  if (is_markov(kernel)) return markov_increments(grid, seed);
  if (const auto* exp = std::get_if<ExponentialKernel>(&kernel)) return sample_ou(*exp, grid, seed);
  if (std::holds_alternative<SingleModeKernel>(kernel) ||
      std::holds_alternative<DiscreteSpectrumKernel>(kernel) ||
      std::holds_alternative<QBMThermalKernel>(kernel))
    return sample_spectral(kernel, grid, seed);
  return sample_cholesky(kernel, grid, seed);
}

}  // namespace nmqsd

#include "nmqsd/oracle.hpp"

#include <cmath>
#include <limits>

namespace nmqsd {

int MicroscopicModel::total_dim() const {
  int d = int(H_sys.rows());
  for (const auto& m : modes) d *= m.n_trunc;
  return d;
}

CorrelationKernel kernel_of_model(const MicroscopicModel& model) {
  DiscreteSpectrumKernel kernel;
  for (const auto& m : model.modes) kernel.modes.push_back({m.omega, m.chi * m.chi});
  return kernel;
}

namespace {

SparseMatrix build_h_total(const MicroscopicModel& model, const CompositeSpace& space) {
  const int D = space.total_dim();
  const int ds = int(model.H_sys.rows());
  const Matrix Ldag = model.L.adjoint();
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(size_t(D) * (ds + 2 * model.modes.size() * ds + 1));

  for (int n = 0; n < D; ++n) {
    const auto idx = space.unflatten(n);
    const int isys = idx[0];

    Real diag = 0.0;
    for (size_t k = 0; k < model.modes.size(); ++k) diag += model.modes[k].omega * idx[k + 1];
    if (diag != 0.0) trip.emplace_back(n, n, Complex(diag));

    // system Hamiltonian: column isys of H_sys
    for (int i2 = 0; i2 < ds; ++i2) {
      const Complex h = model.H_sys(i2, isys);
      if (h != Complex(0.0)) trip.emplace_back(n + (i2 - isys) * space.stride(0), n, h);
    }

    // interaction Σ_k χ_k (L a_k† + L† a_k), acting on column state n
    for (size_t k = 0; k < model.modes.size(); ++k) {
      const Real chi = model.modes[k].chi;
      if (chi == 0.0) continue;
      const int e = idx[k + 1];
      const int stride_e = space.stride(int(k) + 1);
      const int ncap = model.modes[k].n_trunc;
      for (int i2 = 0; i2 < ds; ++i2) {
        const int dsys = (i2 - isys) * space.stride(0);
        if (e + 1 < ncap) {  // a_k† raises the mode, L acts on the system
          const Complex c = chi * std::sqrt(Real(e + 1)) * model.L(i2, isys);
          if (c != Complex(0.0)) trip.emplace_back(n + dsys + stride_e, n, c);
        }
        if (e > 0) {  // a_k lowers the mode, L† acts on the system
          const Complex c = chi * std::sqrt(Real(e)) * Ldag(i2, isys);
          if (c != Complex(0.0)) trip.emplace_back(n + dsys - stride_e, n, c);
        }
      }
    }
  }
  SparseMatrix H(D, D);
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

void check_top_fock(const Vector& psi, const CompositeSpace& space,
                    const std::vector<OracleMode>& modes) {
  const int D = space.total_dim();
  Real top = 0.0;
  for (int n = 0; n < D; ++n) {
    const auto idx = space.unflatten(n);
    for (size_t k = 0; k < modes.size(); ++k)
      if (idx[k + 1] == modes[k].n_trunc - 1) {
        top += std::norm(psi(n));
        break;
      }
  }
  if (top > 1e-6) throw TruncationError("evolve_exact: top Fock level population exceeds 1e-6");
}

}  // namespace

std::vector<Matrix> evolve_exact(const MicroscopicModel& model, const Vector& psi0_sys,
                                 const TimeGrid& grid, int stride) {
  if (model.total_dim() > kOracleDimLimit)
    throw DimensionTooLarge("evolve_exact: total dimension exceeds the oracle limit");
  std::vector<int> dims{int(model.H_sys.rows())};
  for (const auto& m : model.modes) dims.push_back(m.n_trunc);
  const CompositeSpace space{dims};
  const int D = space.total_dim();

  const SparseMatrix H = build_h_total(model, space);

  Vector psi = Vector::Zero(D);
  for (int i = 0; i < psi0_sys.size(); ++i) psi(i * space.stride(0)) = psi0_sys(i);

  std::vector<Matrix> out;
  out.push_back(partial_trace(psi, space, 0));

  // Gershgorin bound on the spectral radius; substep so the RK4 norm drift
  // per substep, O((E·h)⁶), stays below the 1e-8 budget over the whole run.
  Real ebound = 0.0;
  for (int c = 0; c < H.outerSize(); ++c) {
    Real col = 0.0;
    for (SparseMatrix::InnerIterator it(H, c); it; ++it) col += std::abs(it.value());
    ebound = std::max(ebound, col);
  }
  const int n_sub = std::max(1, int(std::ceil(grid.dt * ebound / 0.02)));

  Vector k1(D), k2(D), k3(D), k4(D), tmp(D);
  const Real dt = grid.dt / n_sub;
  for (int n = 0; n < grid.n_steps; ++n) {
    for (int sub = 0; sub < n_sub; ++sub) {
      k1.noalias() = -I * (H * psi);
      tmp.noalias() = psi + 0.5 * dt * k1;
      k2.noalias() = -I * (H * tmp);
      tmp.noalias() = psi + 0.5 * dt * k2;
      k3.noalias() = -I * (H * tmp);
      tmp.noalias() = psi + dt * k3;
      k4.noalias() = -I * (H * tmp);
      psi.noalias() += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if ((n + 1) % stride == 0 || n + 1 == grid.n_steps) {
      if (std::abs(psi.squaredNorm() - 1.0) > 1e-8)
        throw NumericalBlowup("evolve_exact: total norm drifted beyond 1e-8");
      check_top_fock(psi, space, model.modes);
      out.push_back(partial_trace(psi, space, 0));
    }
  }
  return out;
}

std::vector<SpectralMode> fit_exponential_modes(Real gamma, Real t_max, Real* residual) {
  // Fit e^{-x} ≈ c₀ + c₁ cos(a₁x) + c₂ cos(a₂x) on x ∈ [0, γ·t_max] by least
  // squares over a coarse-to-fine search of the two frequencies, keeping all
  // weights positive (required by the spectral noise sampler).
  const Real x_max = gamma * t_max;
  const int npts = 400;
  RealVector x(npts), target(npts);
  for (int i = 0; i < npts; ++i) {
    x(i) = x_max * i / (npts - 1);
    target(i) = std::exp(-x(i));
  }

  const auto evaluate = [&](Real a1, Real a2, Eigen::Vector3d& c) -> Real {
    Eigen::MatrixXd B(npts, 3);
    for (int i = 0; i < npts; ++i) {
      B(i, 0) = 1.0;
      B(i, 1) = std::cos(a1 * x(i));
      B(i, 2) = std::cos(a2 * x(i));
    }
    c = (B.transpose() * B).ldlt().solve(B.transpose() * target);
    if (c.minCoeff() <= 0.0) return std::numeric_limits<Real>::infinity();
    return (B * c - target).cwiseAbs().maxCoeff();
  };

  Real best_a1 = 0.5, best_a2 = 2.0, best_res = std::numeric_limits<Real>::infinity();
  Eigen::Vector3d best_c = Eigen::Vector3d::Zero();
  Real lo1 = 0.05, hi1 = 2.0, lo2 = 0.5, hi2 = 8.0;
  for (int pass = 0; pass < 3; ++pass) {
    const int steps = 40;
    for (int i = 0; i <= steps; ++i)
      for (int j = 0; j <= steps; ++j) {
        const Real a1 = lo1 + (hi1 - lo1) * i / steps;
        const Real a2 = lo2 + (hi2 - lo2) * j / steps;
        if (a2 <= a1 + 1e-3) continue;
        Eigen::Vector3d c;
        const Real res = evaluate(a1, a2, c);
        if (res < best_res) {
          best_res = res;
          best_a1 = a1;
          best_a2 = a2;
          best_c = c;
        }
      }
    const Real w1 = (hi1 - lo1) / steps, w2 = (hi2 - lo2) / steps;
    lo1 = std::max(0.01, best_a1 - 2 * w1);
    hi1 = best_a1 + 2 * w1;
    lo2 = std::max(0.1, best_a2 - 2 * w2);
    hi2 = best_a2 + 2 * w2;
  }
  if (residual) *residual = 0.5 * gamma * best_res;

  const Real scale = 0.5 * gamma;  // kernel peak α(0) = γ/2
  return {{0.0, scale * best_c(0)},
          {gamma * best_a1, 0.5 * scale * best_c(1)},
          {-gamma * best_a1, 0.5 * scale * best_c(1)},
          {gamma * best_a2, 0.5 * scale * best_c(2)},
          {-gamma * best_a2, 0.5 * scale * best_c(2)}};
}

}  // namespace nmqsd

#include "nmqsd/analytic.hpp"

#include <cmath>

namespace nmqsd {

AnalyticCurve rho_sigma_z(const Matrix& rho0, Real omega, Real lambda,
                          const CorrelationKernel& kernel, const std::vector<Real>& times) {
  AnalyticCurve curve;
  curve.times = times;
  for (const Real t : times) {
    const Complex F =
        I * omega * t + 2.0 * lambda * lambda * kernel_double_integral_sym(kernel, t);
    Matrix rho = rho0;
    rho(0, 1) = rho0(0, 1) * std::exp(-F);
    rho(1, 0) = std::conj(rho(0, 1));
    curve.values.push_back(rho);
  }
  return curve;
}

AnalyticCurve rho_dissipative(const Matrix& rho0, Real omega, Real lambda,
                              const CorrelationKernel& kernel, const TimeGrid& grid, int stride) {
  AnalyticCurve curve;
  DampedCoefficient coeff(kernel, omega, lambda);
  Complex intF = 0.0;  // ∫₀ᵗ F ds, trapezoid on the grid
  bool ground = false;

  const auto record = [&](Real t) {
    curve.times.push_back(t);
    Matrix rho(2, 2);
    if (ground) {
      rho << 0, 0, 0, 1;
    } else {
      const Real p11 = rho0(0, 0).real() * std::exp(-2.0 * lambda * intF.real());
      rho(0, 0) = p11;
      rho(1, 1) = 1.0 - p11;
      rho(0, 1) = rho0(0, 1) * std::exp(-I * omega * t - lambda * intF);
      rho(1, 0) = std::conj(rho(0, 1));
    }
    curve.values.push_back(rho);
  };

  record(0.0);
  for (int n = 0; n < grid.n_steps; ++n) {
    if (!ground) {
      const Complex Fa = coeff.F();
      coeff.step(grid.dt);
      if (coeff.diverged()) {
        ground = true;
      } else {
        intF += 0.5 * grid.dt * (Fa + coeff.F());
      }
    }
    if ((n + 1) % stride == 0 || n + 1 == grid.n_steps) record(grid.time(n + 1));
  }
  return curve;
}

Matrix master_rhs_sigma_z(const Matrix& rho, Real t, Real omega, Real lambda,
                          const CorrelationKernel& kernel) {
  Matrix sz(2, 2);
  sz << 1, 0, 0, -1;
  const Matrix comm = sz * rho - rho * sz;
  const Matrix dcomm = sz * comm - comm * sz;
  const Real coeff = 0.5 * lambda * lambda * 2.0 * kernel_integral(kernel, t).real();
  return -I * 0.5 * omega * comm - coeff * dcomm;
}

void markov_qsd_step(Vector& psi, const Matrix& H, const Matrix& L, Complex z, Real dt) {
  const Matrix LdL = L.adjoint() * L;
  const auto rhs = [&](const Vector& s) -> Vector {
    const Real n2 = s.squaredNorm();
    const Vector Ls = L * s;
    const Vector LdLs = LdL * s;
    const Complex expL = s.dot(Ls) / n2;
    const Complex expLdL = s.dot(LdLs) / n2;
    return -I * (H * s) + (z + std::conj(expL)) * (Ls - expL * s) -
           0.5 * (LdLs - expLdL * s);
  };
  const Vector k1 = rhs(psi);
  const Vector k2 = rhs(psi + dt * k1);
  psi += 0.5 * dt * (k1 + k2);
  const Real n2 = psi.squaredNorm();
  if (!std::isfinite(n2) || n2 < 1e-30 || n2 > 1e30)
    throw NumericalBlowup("markov_qsd_step: norm left [1e-30, 1e30]");
  psi /= std::sqrt(n2);
}

}  // namespace nmqsd

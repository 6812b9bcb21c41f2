#include <doctest.h>

#include "nmqsd/analytic.hpp"
#include "nmqsd/oracle.hpp"

using namespace nmqsd;

TEST_CASE("kernel_of_model collects the mode spectrum") {
  const auto b = boson_operators(4);
  MicroscopicModel model{Matrix(b.n), Matrix(b.a), {{0.5, 0.1, 4}, {-1.0, 0.2, 4}}};
  CHECK(model.total_dim() == 64);
  const CorrelationKernel k = kernel_of_model(model);
  const auto* ds = std::get_if<DiscreteSpectrumKernel>(&k);
  REQUIRE(ds != nullptr);
  REQUIRE(ds->modes.size() == 2);
  CHECK(ds->modes[0].omega == 0.5);
  CHECK(ds->modes[0].weight == doctest::Approx(0.01));
  CHECK(ds->modes[1].omega == -1.0);
  CHECK(ds->modes[1].weight == doctest::Approx(0.04));
}

TEST_CASE("decoupled environment leaves the system unitary") {
  const int d = 12;
  const auto b = boson_operators(d);
  MicroscopicModel model{Matrix(1.3 * b.n), Matrix(b.a), {{0.7, 0.0, 3}}};
  const Vector psi0 = coherent_state(0.8, d);
  const TimeGrid grid{1e-3, 1500};
  const auto rhos = evolve_exact(model, psi0, grid, 500);
  REQUIRE(rhos.size() == 4);
  for (size_t i = 0; i < rhos.size(); ++i) {
    const Real t = (i == 0) ? 0.0 : 0.5 * i;
    Vector want = psi0;
    for (int n = 0; n < d; ++n) want(n) *= std::exp(-I * 1.3 * Real(n) * t);
    CHECK((rhos[i] - want * want.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("resonant single-excitation exchange oscillates at the coupling rate") {
  // Two-level system + one resonant mode: P(excited) = cos²(χt).
  Matrix H_sys = Matrix::Zero(2, 2);
  H_sys(1, 1) = 1.0;
  Matrix low = Matrix::Zero(2, 2);
  low(0, 1) = 1.0;
  const Real chi = 0.25;
  MicroscopicModel model{H_sys, low, {{1.0, chi, 3}}};
  Vector psi0(2);
  psi0 << 0, 1;
  const TimeGrid grid{1e-3, 4000};
  const auto rhos = evolve_exact(model, psi0, grid, 400);
  for (size_t i = 0; i < rhos.size(); ++i) {
    const Real t = (i == 0) ? 0.0 : 0.4 * i;
    const Real want = std::cos(chi * t) * std::cos(chi * t);
    CHECK(std::abs(rhos[i](1, 1).real() - want) < 1e-8);
    CHECK(rhos[i].trace().real() == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("oracle agrees with the closed-form dephasing solution") {
  // σz coupling to two discrete modes: exactly solvable on both sides.
  const auto s = spin_operators();
  const Real omega = 1.0, lambda = 0.5;
  Vector psi0(2);
  psi0 << Complex(1, 2), Complex(1, 1);
  normalize(psi0);
  MicroscopicModel model{Matrix(0.5 * omega * s.sz), Matrix(lambda * s.sz),
                         {{1.0, 0.2, 10}, {-0.7, 0.17, 10}}};
  const CorrelationKernel k = kernel_of_model(model);
  const TimeGrid grid{1e-3, 2000};
  const int stride = 250;
  const auto rhos = evolve_exact(model, psi0, grid, stride);
  std::vector<Real> times{0.0};
  for (int n = 0; n < grid.n_steps; ++n)
    if ((n + 1) % stride == 0 || n + 1 == grid.n_steps) times.push_back(grid.time(n + 1));
  const AnalyticCurve closed = rho_sigma_z(psi0 * psi0.adjoint(), omega, lambda, k, times);
  REQUIRE(rhos.size() == times.size());
  for (size_t i = 0; i < times.size(); ++i)
    CHECK((rhos[i] - closed.values[i]).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("oracle guards: dimension cap and truncation overflow") {
  const auto b = boson_operators(4);
  MicroscopicModel big{Matrix(b.n), Matrix(b.a), {{1.0, 0.1, 80}, {1.0, 0.1, 80}}};
  Vector psi0 = Vector::Zero(4);
  psi0(0) = 1.0;
  CHECK_THROWS_AS(evolve_exact(big, psi0, TimeGrid{1e-3, 10}), DimensionTooLarge);

  // resonant full excitation transfer into a mode truncated at 2 levels
  Matrix H_sys = Matrix::Zero(2, 2);
  H_sys(1, 1) = 1.0;
  Matrix low = Matrix::Zero(2, 2);
  low(0, 1) = 1.0;
  MicroscopicModel tight{H_sys, low, {{1.0, 0.5, 2}}};
  Vector e(2);
  e << 0, 1;
  CHECK_THROWS_AS(evolve_exact(tight, e, TimeGrid{1e-2, 200}, 10), TruncationError);
}

TEST_CASE("five-mode fit reproduces the exponential kernel") {
  const Real gamma = 1.0, t_max = 4.0;
  Real residual = -1.0;
  const auto modes = fit_exponential_modes(gamma, t_max, &residual);
  REQUIRE(modes.size() == 5);
  CHECK(residual >= 0.0);
  // positive-weight cosine fits saturate around 20% of the peak at γt = 4
  CHECK(residual < 0.2 * 0.5 * gamma);
  Real short_res = -1.0;
  fit_exponential_modes(gamma, 1.0, &short_res);
  CHECK(short_res < residual);  // shorter horizons fit better
  // positive weights (spectral-sampler requirement) and symmetric frequencies
  for (const auto& m : modes) CHECK(m.weight > 0.0);
  CHECK(modes[0].omega == 0.0);
  CHECK(modes[1].omega == doctest::Approx(-modes[2].omega));
  CHECK(modes[3].omega == doctest::Approx(-modes[4].omega));
  // reconstruction against the target kernel on a fine grid
  const CorrelationKernel fit = DiscreteSpectrumKernel{modes};
  const CorrelationKernel target = ExponentialKernel{gamma, 0.0};
  Real worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const Real tau = t_max * i / 200.0;
    worst = std::max(worst, std::abs(kernel_eval(fit, tau, 0.0) - kernel_eval(target, tau, 0.0)));
  }
  CHECK(worst < 1.2 * residual + 1e-12);
}

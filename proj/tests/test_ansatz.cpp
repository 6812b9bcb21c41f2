#include <doctest.h>

#include "nmqsd/ansatz.hpp"

using namespace nmqsd;

namespace {

// Independent Simpson quadrature of f on [0, t].
template <typename F>
Complex simpson(F&& f, Real t, int n = 2000) {
  if (n % 2) ++n;
  const Real h = t / n;
  Complex sum = f(0.0) + f(t);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("kernel integrals against independent quadrature") {
  const std::vector<CorrelationKernel> kernels = {
      ExponentialKernel{1.7, 0.8}, SingleModeKernel{1.3},
      DiscreteSpectrumKernel{{{0.0, 0.4}, {2.0, 0.3}, {-2.0, 0.3}}}};
  for (const auto& k : kernels) {
    for (Real t : {0.3, 1.0, 2.7}) {
      const Complex i0 = simpson([&](Real s) { return kernel_eval(k, t, s); }, t);
      CHECK(std::abs(kernel_integral(k, t) - i0) < 1e-10);
      const Complex i1 = simpson([&](Real s) { return (t - s) * kernel_eval(k, t, s); }, t);
      CHECK(std::abs(kernel_first_moment(k, t) - i1) < 1e-10);
      // double integral: outer Simpson over the inner closed integral is
      // circular, so use a genuinely 2D quadrature
      const Complex i2 =
          simpson([&](Real s) { return simpson([&](Real u) { return kernel_eval(k, s, u); }, s, 400); },
                  t, 400);
      CHECK(std::abs(kernel_double_integral_sym(k, t) - 2.0 * i2.real()) < 1e-8);
    }
  }
}

TEST_CASE("kernel integrals in the white-noise limit") {
  const CorrelationKernel k = MarkovDeltaKernel{};
  CHECK(std::abs(kernel_integral(k, 2.0) - Complex(0.5)) == 0.0);
  CHECK(std::abs(kernel_first_moment(k, 2.0)) == 0.0);
  CHECK(kernel_double_integral_sym(k, 2.0) == doctest::Approx(2.0));
  // a narrow exponential kernel approaches the same limits
  const CorrelationKernel narrow = ExponentialKernel{200.0, 0.0};
  CHECK(std::abs(kernel_integral(narrow, 1.0) - Complex(0.5)) < 1e-3);
  CHECK(kernel_double_integral_sym(narrow, 1.0) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("closed tanh form of F agrees with RK4") {
  struct Case {
    Real gamma, lambda, detune;
  };
  for (const Case c : {Case{3.0, 1.0, 0.0}, Case{1.0, 1.0, 0.5}, Case{0.5, 1.0, 0.0}}) {
    const ExponentialKernel k{c.gamma, 0.0};
    const Real omega = c.detune;  // only ω - Ω enters
    const Real dt = 1e-3;
    Complex F = 0.0;
    Real t = 0.0;
    const Real t_stop = critical_time(c.gamma, c.lambda) ? 0.9 * *critical_time(c.gamma, c.lambda)
                                                         : 4.0;
    Real maxerr = 0.0;
    while (t < t_stop) {
      F = evolve_F_dissipative(F, k, omega, c.lambda, dt);
      t += dt;
      maxerr = std::max(maxerr, std::abs(F - F_dissipative_closed_form(k, omega, c.lambda, t)));
    }
    CHECK(maxerr < 1e-8);
  }
}

TEST_CASE("F at the critical damping boundary gamma = 2 lambda^2") {
  // There Ḟ = λ(F-λ)² integrates to F(t) = λ³t/(1+λ²t)
  const Real lambda = 1.3;
  const ExponentialKernel k{2.0 * lambda * lambda, 0.0};
  Complex F = 0.0;
  const Real dt = 1e-3;
  for (int n = 1; n <= 3000; ++n) {
    F = evolve_F_dissipative(F, k, 0.0, lambda, dt);
    const Real t = n * dt;
    const Real want = lambda * lambda * lambda * t / (1.0 + lambda * lambda * t);
    CHECK(std::abs(F - Complex(want)) < 1e-9);
  }
}

TEST_CASE("strong damping: F settles at the stable Riccati root") {
  const Real gamma = 50.0, lambda = 1.0;
  const ExponentialKernel k{gamma, 0.0};
  Complex F = 0.0;
  for (int n = 0; n < 2000; ++n) F = evolve_F_dissipative(F, k, 0.0, lambda, 1e-3);
  const Real root = (gamma - std::sqrt(gamma * gamma - 2.0 * lambda * lambda * gamma)) /
                    (2.0 * lambda);
  CHECK(std::abs(F - Complex(root)) < 1e-10);
  // and the root tends to λ/2 (the white-noise value) as γ → ∞
  CHECK(root == doctest::Approx(0.5 * lambda).epsilon(0.02));
}

TEST_CASE("critical time formula against observed divergence") {
  CHECK_FALSE(critical_time(2.0, 1.0).has_value());   // γ = 2λ² boundary
  CHECK_FALSE(critical_time(3.0, 1.0).has_value());
  REQUIRE(critical_time(1.0, 1.0).has_value());
  CHECK(*critical_time(1.0, 1.0) == doctest::Approx(1.5 * M_PI).epsilon(1e-14));

  for (const Real gamma : {0.5, 1.0, 1.5}) {
    const Real lambda = 1.0;
    const Real tc = *critical_time(gamma, lambda);
    const ExponentialKernel k{gamma, 0.0};
    Complex F = 0.0;
    Real t = 0.0;
    const Real dt = 1e-4;
    bool diverged = false;
    while (t < tc + 0.05) {
      try {
        F = evolve_F_dissipative(F, k, 0.0, lambda, dt);
      } catch (const FDiverged&) {
        diverged = true;
        break;
      }
      t += dt;
    }
    CHECK(diverged);
    // |F| passes any finite threshold only logarithmically close to t_c
    CHECK(t == doctest::Approx(tc).epsilon(0.01));
  }
}

TEST_CASE("recursive damped coefficient matches the direct grid evolution") {
  const CorrelationKernel k = DiscreteSpectrumKernel{{{0.0, 0.3}, {1.0, 0.2}, {-0.7, 0.1}}};
  const Real omega = 0.9, lambda = 0.8, dt = 2e-3;
  DampedCoefficient rec(k, omega, lambda);
  DampedCoefficientGrid grid(k, omega, lambda, dt);
  Real maxdev = 0.0;
  for (int n = 0; n < 1000; ++n) {
    rec.step(dt);
    grid.step();
    maxdev = std::max(maxdev, std::abs(rec.F() - grid.F()));
  }
  CHECK(maxdev < 1e-6);
}

TEST_CASE("damped coefficient reduces to the single Riccati for exponential kernels") {
  const ExponentialKernel ek{1.5, 0.3};
  const CorrelationKernel k = ek;
  const Real omega = 1.0, lambda = 0.7, dt = 1e-3;
  DampedCoefficient rec(k, omega, lambda);
  Complex F = 0.0;
  for (int n = 0; n < 2000; ++n) {
    rec.step(dt);
    F = evolve_F_dissipative(F, ek, omega, lambda, dt);
    CHECK(std::abs(rec.F() - F) < 1e-10);
  }
}

TEST_CASE("damped coefficient in the white-noise limit is lambda/2") {
  DampedCoefficient rec(MarkovDeltaKernel{}, 1.0, 0.8);
  CHECK(std::abs(rec.F() - Complex(0.4)) == 0.0);
  rec.step(0.01);
  CHECK(std::abs(rec.F() - Complex(0.4)) == 0.0);
}

TEST_CASE("QBM coefficients vanish when the coupling does") {
  QbmCoefficients c(1.0, 1.0, 0.0, 1e-3);
  for (int n = 0; n < 500; ++n) c.step();
  CHECK(std::abs(c.F()) == 0.0);
  CHECK(std::abs(c.G()) == 0.0);
  CHECK(std::abs(c.Jtilde()) == 0.0);
}

TEST_CASE("QBM F perturbative limit at omega = 0") {
  // To first order in λ: Ḟ = λγ/2 - γF, so F = (λ/2)(1 - e^{-γt})
  const Real gamma = 1.0, lambda = 1e-4, dt = 1e-3;
  QbmCoefficients c(gamma, 0.0, lambda, dt);
  for (int n = 1; n <= 2000; ++n) {
    c.step();
    const Real want = 0.5 * lambda * (1.0 - std::exp(-gamma * n * dt));
    CHECK(std::abs(c.F() - Complex(want)) < 1e-3 * lambda);
  }
}

TEST_CASE("qbm_J boundary value and consistency with Jtilde") {
  const Real gamma = 1.0, omega = 1.0, lambda = 0.3, dt = 1e-3;
  QbmCoefficients c(gamma, omega, lambda, dt);
  const int N = 2000;
  for (int n = 0; n < N; ++n) c.step();
  const Real t = N * dt;
  // J(t,t) = λ G(t)
  CHECK(std::abs(qbm_J(c, t, t) - lambda * c.G()) < 1e-12);
  // J̃(t) = ∫₀ᵗ α(t,s) J(t,s) ds with α = (γ/2)e^{-γ(t-s)}
  Complex integral = 0.0;
  for (int j = 0; j <= N; ++j) {
    const Real s = j * dt;
    const Real w = (j == 0 || j == N) ? 0.5 : 1.0;
    integral += w * dt * 0.5 * gamma * std::exp(-gamma * (t - s)) * qbm_J(c, s, t);
  }
  CHECK(std::abs(integral - c.Jtilde()) < 1e-5);
  CHECK_THROWS_AS(qbm_J(c, -dt, t), HistoryMissing);
  CHECK_THROWS_AS(qbm_J(c, 0.0, t + dt), HistoryMissing);
}

TEST_CASE("pair coefficient: zero coupling and short-time growth") {
  Complex F = 0.0;
  for (int n = 0; n < 100; ++n) F = evolve_F_cut(F, 1.0, 1.5, 0.6, 0.0, 1e-3);
  CHECK(std::abs(F) == 0.0);
  // F ≈ χt for small t
  const Real chi = 0.2, dt = 1e-4;
  F = 0.0;
  for (int n = 0; n < 100; ++n) F = evolve_F_cut(F, 1.0, 1.5, 0.6, chi, dt);
  CHECK(std::abs(F - Complex(chi * 100 * dt)) < 1e-5);
}

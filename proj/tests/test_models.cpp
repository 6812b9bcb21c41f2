#include <doctest.h>

#include "nmqsd/ansatz.hpp"
#include "nmqsd/dynamics.hpp"
#include "nmqsd/models.hpp"

using namespace nmqsd;

TEST_CASE("catalog entries are well-formed") {
  const auto models = catalog();
  CHECK(models.size() == 7);
  for (const auto& m : models) {
    CHECK(is_hermitian(m.H));
    CHECK(m.psi0.size() == m.dim());
    CHECK(m.psi0.norm() == doctest::Approx(1.0));
    CHECK(m.L.rows() == m.dim());
    if (m.absorbing_state) CHECK(m.absorbing_state->norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("model_by_name round trip and parameter overrides") {
  const ModelSpec m = model_by_name("dissipative_spin", {{"omega", 2.0}, {"lambda", 0.5}});
  CHECK(m.omega == 2.0);
  CHECK(m.lambda == 0.5);
  CHECK((m.L - 0.5 * spin_operators().sm).norm() < 1e-14);
  const auto* ek = std::get_if<ExponentialKernel>(&m.default_kernel);
  REQUIRE(ek != nullptr);
  CHECK(ek->Omega == 2.0);  // resonance follows ω
  CHECK_THROWS_AS(model_by_name("no_such_model"), ConfigError);
}

TEST_CASE("measurement model wiring") {
  const ModelSpec m = measurement_sigma_z_model(1.0, std::sqrt(2.0));
  const auto s = spin_operators();
  CHECK((m.H - 0.5 * s.sz).norm() < 1e-14);
  CHECK((m.L - std::sqrt(2.0) * s.sz).norm() < 1e-14);
  CHECK(m.ansatz == AnsatzVariant::ConstantOp);
  // initial Bloch vector of (1+2i, 1+i)/√7
  Vector want(2);
  want << Complex(1, 2), Complex(1, 1);
  want /= std::sqrt(7.0);
  CHECK((m.psi0 - want).norm() < 1e-14);
  CHECK(expectation(m.psi0, s.sz).real() == doctest::Approx(3.0 / 7.0));
}

TEST_CASE("energy measurement model guards") {
  Matrix H = Matrix::Zero(3, 3);
  H(0, 0) = 1.0;
  H(1, 2) = Complex(0, 1);
  H(2, 1) = Complex(0, -1);
  const ModelSpec m = energy_measurement_model(H);
  CHECK((m.L - m.H).norm() == 0.0);
  CHECK_THROWS_AS(energy_measurement_model(Matrix::Zero(17, 17)), DimensionTooLarge);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = 1.0;  // not Hermitian
  CHECK_THROWS(energy_measurement_model(bad));
}

TEST_CASE("coherent-state preservation in the zero-temperature oscillator") {
  // A trajectory started in |β₀⟩ stays coherent with β̇ = (-iω - F(t))β.
  const int d = 30;
  const Real omega = 1.0;
  // γ > 2λ² so F stays finite for all time
  ModelSpec m = oscillator_zero_T_model(d, omega, 1.0);
  const ExponentialKernel ek{3.0, 1.0};
  const CorrelationKernel kernel = ek;
  m.psi0 = coherent_state(1.0, d);

  const TimeGrid grid{1e-3, 3000};
  TrajectoryOptions opt;
  opt.record_states = true;
  opt.record_stride = 100;
  const TrajectoryRecord rec = run_trajectory(m, kernel, grid, 12345, opt);
  REQUIRE_FALSE(rec.absorbed);

  Complex beta = 1.0, F = 0.0;
  Real worst = 0.0;
  size_t ri = 1;
  for (int n = 0; n < grid.n_steps; ++n) {
    // Heun for β alongside the exact F recursion
    const Complex Fa = F;
    F = evolve_F_dissipative(F, ek, omega, m.lambda, grid.dt);
    const Complex db_a = (-I * omega - Fa) * beta;
    const Complex bp = beta + grid.dt * db_a;
    const Complex db_b = (-I * omega - F) * bp;
    beta += 0.5 * grid.dt * (db_a + db_b);
    if ((n + 1) % opt.record_stride == 0 || n + 1 == grid.n_steps) {
      const Vector ref = coherent_state(beta, d);
      const Real fidelity = std::norm(ref.dot(rec.states[ri]));
      worst = std::max(worst, 1.0 - fidelity);
      ++ri;
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("toy model wiring") {
  const ModelSpec m = toy_model(20, 0.7);
  const auto b = boson_operators(20);
  CHECK((m.H - b.p).norm() < 1e-14);
  CHECK((m.L - 0.7 * b.q).norm() < 1e-14);
  CHECK(m.ansatz == AnsatzVariant::ToyShift);
  CHECK(m.check_truncation);
}

TEST_CASE("qbm model hamiltonian is the harmonic oscillator") {
  const ModelSpec m = qbm_model(16, 2.0, 0.3);
  const auto b = boson_operators(16);
  // (ω/2)(p² + q²) = ω(n + ½) away from the truncation edge
  const Matrix want = 2.0 * (b.n + 0.5 * Matrix::Identity(16, 16));
  CHECK((m.H - want).topLeftCorner(15, 15).norm() < 1e-12);
  CHECK(m.ansatz == AnsatzVariant::Qbm);
}

TEST_CASE("cat model initial state and kernel") {
  const ModelSpec m = cat_model(40);
  CHECK((m.psi0 - cat_state(2.0, 40)).norm() < 1e-14);
  const auto* ds = std::get_if<DiscreteSpectrumKernel>(&m.default_kernel);
  REQUIRE(ds != nullptr);
  REQUIRE(ds->modes.size() == 1);
  CHECK(ds->modes[0].omega == 0.5);
  CHECK(ds->modes[0].weight == doctest::Approx(0.01));
}

TEST_CASE("cut pair: identities and equality of the two descriptions") {
  const CutParams p;
  const TimeGrid grid{1e-3, 4000};
  const CutPairRecord rec = run_cut_pair(p, grid, 99, 100);
  Real worst_rho = 0.0, worst_id = 0.0;
  for (const auto& s : rec.states) {
    worst_rho = std::max(worst_rho, (s.rho1() - s.rho2()).cwiseAbs().maxCoeff());
    // identities linking the two descriptions: c1 = v1, c2 = -iF v1
    worst_id = std::max(worst_id, std::abs(s.c1 - s.v1));
    worst_id = std::max(worst_id, std::abs(s.c2 + I * s.F * s.v1));
  }
  CHECK(worst_rho < 1e-6);
  CHECK(worst_id < 1e-6);
}

TEST_CASE("cut pair: no coupling decouples the oscillator") {
  CutParams p;
  p.chi = 0.0;
  const TimeGrid grid{1e-3, 2000};
  const CutPairRecord rec = run_cut_pair(p, grid, 7, 200);
  for (const auto& s : rec.states) {
    CHECK(std::abs(s.c2) == 0.0);
    CHECK(std::abs(s.F) == 0.0);
  }
}

TEST_CASE("cut pair conserves the mean norm without dissipation imbalance") {
  // M[|c0|² + |c1|² + |c2|²] = 1; a single trajectory drifts but stays O(1)
  const CutParams p;
  const TimeGrid grid{1e-3, 1000};
  const CutPairRecord rec = run_cut_pair(p, grid, 3, 1000);
  const auto& s = rec.states.back();
  const Real n2 = std::norm(s.c0) + std::norm(s.c1) + std::norm(s.c2);
  CHECK(n2 > 0.1);
  CHECK(n2 < 10.0);
}

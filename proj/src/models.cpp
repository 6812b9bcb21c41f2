#include "nmqsd/models.hpp"

#include <cmath>

#include "nmqsd/ansatz.hpp"

namespace nmqsd {

ModelSpec measurement_sigma_z_model(Real omega, Real lambda) {
  const auto s = spin_operators();
  ModelSpec m;
  m.name = "measurement_sigma_z";
  m.omega = omega;
  m.lambda = lambda;
  m.H = 0.5 * omega * s.sz;
  m.L = lambda * s.sz;
  m.ansatz = AnsatzVariant::ConstantOp;
  // Fig 1a initial state (1+2i)|↑⟩ + (1+i)|↓⟩
  m.psi0 = Vector(2);
  m.psi0 << Complex(1, 2), Complex(1, 1);
  normalize(m.psi0);
  m.default_kernel = ExponentialKernel{omega, 0.0};
  m.default_params = {{"omega", omega}, {"lambda", lambda}, {"gamma", omega}};
  return m;
}

ModelSpec dissipative_spin_model(Real omega, Real lambda) {
  const auto s = spin_operators();
  ModelSpec m;
  m.name = "dissipative_spin";
  m.omega = omega;
  m.lambda = lambda;
  m.H = 0.5 * omega * s.sz;
  m.L = lambda * s.sm;
  m.lowering = s.sm;
  m.ansatz = AnsatzVariant::ScalarTimesOp;
  Vector down(2);
  down << 0, 1;
  m.absorbing_state = down;
  // Fig 2a initial state 3|↑⟩ + |↓⟩
  m.psi0 = Vector(2);
  m.psi0 << 3, 1;
  normalize(m.psi0);
  m.default_kernel = ExponentialKernel{omega, omega};  // resonance Ω = ω
  m.default_params = {{"omega", omega}, {"lambda", lambda}, {"gamma", omega}, {"Omega", omega}};
  return m;
}

ModelSpec energy_measurement_model(const Matrix& H) {
  if (H.rows() > 16) throw DimensionTooLarge("energy_measurement_model: dim > 16");
  if (!is_hermitian(H)) throw DimensionMismatch("energy_measurement_model: H must be Hermitian");
  ModelSpec m;
  m.name = "energy_measurement";
  m.H = H;
  m.L = H;
  m.lambda = 1.0;
  m.ansatz = AnsatzVariant::ConstantOp;
  m.psi0 = Vector::Ones(H.rows());
  normalize(m.psi0);
  m.default_kernel = ExponentialKernel{1.0, 0.0};
  return m;
}

ModelSpec toy_model(int n_trunc, Real lambda) {
  const auto b = boson_operators(n_trunc);
  ModelSpec m;
  m.name = "toy";
  m.H = b.p;
  m.L = lambda * b.q;
  m.lambda = lambda;
  m.ansatz = AnsatzVariant::ToyShift;
  m.psi0 = Vector::Zero(n_trunc);
  m.psi0(0) = 1.0;
  m.check_truncation = true;
  m.default_kernel = ExponentialKernel{1.0, 0.0};
  m.default_params = {{"lambda", lambda}, {"n_trunc", Real(n_trunc)}};
  return m;
}

ModelSpec qbm_model(int n_trunc, Real omega, Real lambda) {
  const auto b = boson_operators(n_trunc);
  ModelSpec m;
  m.name = "qbm";
  m.omega = omega;
  m.lambda = lambda;
  m.H = 0.5 * omega * (b.p * b.p + b.q * b.q);
  m.L = lambda * b.q;
  m.ansatz = AnsatzVariant::Qbm;
  m.psi0 = Vector::Zero(n_trunc);
  m.psi0(0) = 1.0;
  m.check_truncation = true;
  m.default_kernel = ExponentialKernel{omega, 0.0};
  m.default_params = {{"omega", omega}, {"lambda", lambda}, {"gamma", omega}, {"n_trunc", Real(n_trunc)}};
  return m;
}

ModelSpec oscillator_zero_T_model(int n_trunc, Real omega, Real lambda) {
  const auto b = boson_operators(n_trunc);
  ModelSpec m;
  m.name = "oscillator_zero_T";
  m.omega = omega;
  m.lambda = lambda;
  m.H = omega * b.n;
  m.L = lambda * b.a;
  m.lowering = b.a;
  m.ansatz = AnsatzVariant::ScalarTimesOp;
  Vector vac = Vector::Zero(n_trunc);
  vac(0) = 1.0;
  m.absorbing_state = vac;
  m.psi0 = coherent_state(1.0, n_trunc);
  m.check_truncation = true;
  m.default_kernel = ExponentialKernel{omega, omega};
  m.default_params = {{"omega", omega}, {"lambda", lambda}, {"n_trunc", Real(n_trunc)}};
  return m;
}

ModelSpec cat_model(int n_trunc, Real omega, Real Omega, Real chi, Complex beta) {
  ModelSpec m = oscillator_zero_T_model(n_trunc, omega, 1.0);
  m.name = "cat";
  m.psi0 = cat_state(beta, n_trunc);
  // Single environment mode at Ω with coupling χ: α(t,s) = χ² e^{-iΩ(t-s)}.
  m.default_kernel = DiscreteSpectrumKernel{{{Omega, chi * chi}}};
  m.default_params = {{"omega", omega},
                      {"Omega", Omega},
                      {"chi", chi},
                      {"beta_re", beta.real()},
                      {"beta_im", beta.imag()},
                      {"n_trunc", Real(n_trunc)}};
  return m;
}

std::vector<ModelSpec> catalog() {
  Matrix H3 = Matrix::Zero(3, 3);
  H3(0, 0) = -1.0;
  H3(1, 1) = 0.3;
  H3(2, 2) = 1.1;
  return {measurement_sigma_z_model(), dissipative_spin_model(), energy_measurement_model(H3),
          toy_model(40),              qbm_model(30),            oscillator_zero_T_model(30),
          cat_model(40)};
}

namespace {

Real param_or(const std::map<std::string, Real>& params, const std::string& key, Real fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

ModelSpec model_by_name(const std::string& name, const std::map<std::string, Real>& params) {
  const Real omega = param_or(params, "omega", 1.0);
  if (name == "measurement_sigma_z")
    return measurement_sigma_z_model(omega, param_or(params, "lambda", std::sqrt(2.0 * omega)));
  if (name == "dissipative_spin")
    return dissipative_spin_model(omega, param_or(params, "lambda", std::sqrt(omega)));
  if (name == "energy_measurement") {
    Matrix H = Matrix::Zero(3, 3);
    H(0, 0) = -1.0;
    H(1, 1) = 0.3;
    H(2, 2) = 1.1;
    return energy_measurement_model(H);
  }
  if (name == "toy")
    return toy_model(int(param_or(params, "n_trunc", 40)), param_or(params, "lambda", 1.0));
  if (name == "qbm")
    return qbm_model(int(param_or(params, "n_trunc", 30)), omega, param_or(params, "lambda", 0.2));
  if (name == "oscillator_zero_T")
    return oscillator_zero_T_model(int(param_or(params, "n_trunc", 40)), omega,
                                   param_or(params, "lambda", 1.0));
  if (name == "cat")
    return cat_model(int(param_or(params, "n_trunc", 40)), omega, param_or(params, "Omega", 0.5),
                     param_or(params, "chi", 0.1),
                     Complex(param_or(params, "beta_re", 2.0), param_or(params, "beta_im", 0.0)));
  throw ConfigError("unknown model name: " + name);
}

// ----- §6 Heisenberg-cut pair -------------------------------------------------

Matrix CutPairState::rho1() const {
  Matrix rho(2, 2);
  rho(0, 0) = std::norm(c1);
  rho(0, 1) = std::conj(c0) * c1;
  rho(1, 0) = c0 * std::conj(c1);
  rho(1, 1) = std::norm(c0) + std::norm(c2);
  return rho;
}

Matrix CutPairState::rho2() const {
  // M_z[v0] = M0 and Var_z(v0) = |F v1|², so M_z[|v0|²] = |M0|² + |F v1|².
  Matrix rho(2, 2);
  rho(0, 0) = std::norm(v1);
  rho(0, 1) = std::conj(M0) * v1;
  rho(1, 0) = M0 * std::conj(v1);
  rho(1, 1) = std::norm(M0) + std::norm(F) * std::norm(v1);
  return rho;
}

CutPairState cut_pair_initial(const CutParams& p) {
  CutPairState s;
  s.c0 = p.down0;
  s.c1 = p.up0;
  s.c2 = 0.0;
  s.v1 = p.up0;
  s.M0 = p.down0;
  s.F = 0.0;
  return s;
}

void cut_pair_step(CutPairState& state, const CutParams& p, Complex xi, Real dt) {
  const Real w1 = p.omega1, w2 = p.omega2, lam = p.lambda, chi = p.chi;
  // Deterministic subsystems by RK4. (c1, c2) and (v1, F) obey the exact
  // identities c1 = v1, c2 = -iF v1 in continuous time.
  const auto det_rhs = [&](const Eigen::Vector4cd& y) {
    const Complex c1 = y(0), c2 = y(1), v1 = y(2), F = y(3);
    Eigen::Vector4cd d;
    d(0) = -(I * 0.5 * w1 + 0.5 * lam * lam) * c1 - I * chi * c2;
    d(1) = -I * ((w2 - 0.5 * w1) * c2 + chi * c1);
    d(2) = -(I * 0.5 * w1 + 0.5 * lam * lam + chi * F) * v1;
    d(3) = chi + (I * w1 - I * w2 + 0.5 * lam * lam + chi * F) * F;
    return d;
  };
  Eigen::Vector4cd y(state.c1, state.c2, state.v1, state.F);
  const Eigen::Vector4cd k1 = det_rhs(y);
  const Eigen::Vector4cd k2 = det_rhs(y + 0.5 * dt * k1);
  const Eigen::Vector4cd k3 = det_rhs(y + 0.5 * dt * k2);
  const Eigen::Vector4cd k4 = det_rhs(y + dt * k3);
  const Eigen::Vector4cd y1 = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!y1.allFinite() || y1.cwiseAbs().maxCoeff() > kCoefficientDivergenceThreshold)
    throw CoefficientDiverged("cut_pair_step: coefficient magnitude exceeded threshold");

  // Noise-driven amplitudes by Heun with ξ constant over the step. c0 and M0
  // obey the same equation (c1 = v1), so the two descriptions share increments.
  const Complex a0_1 = lam * xi * state.c1 + I * 0.5 * w1 * state.c0;
  const Complex c0_pred = state.c0 + dt * a0_1;
  const Complex a0_2 = lam * xi * y1(0) + I * 0.5 * w1 * c0_pred;
  const Complex c0_new = state.c0 + 0.5 * dt * (a0_1 + a0_2);

  const Complex b0_1 = lam * xi * state.v1 + I * 0.5 * w1 * state.M0;
  const Complex M0_pred = state.M0 + dt * b0_1;
  const Complex b0_2 = lam * xi * y1(2) + I * 0.5 * w1 * M0_pred;
  const Complex M0_new = state.M0 + 0.5 * dt * (b0_1 + b0_2);

  state.c1 = y1(0);
  state.c2 = y1(1);
  state.v1 = y1(2);
  state.F = y1(3);
  state.c0 = c0_new;
  state.M0 = M0_new;
}

CutPairRecord run_cut_pair(const CutParams& p, const TimeGrid& grid, std::uint64_t seed,
                           int record_stride) {
  NoisePath xi = markov_increments(grid, seed);
  CutPairState state = cut_pair_initial(p);
  CutPairRecord rec;
  rec.times.push_back(0.0);
  rec.states.push_back(state);
  for (int n = 0; n < grid.n_steps; ++n) {
    cut_pair_step(state, p, xi.z(n), grid.dt);
    if ((n + 1) % record_stride == 0 || n + 1 == grid.n_steps) {
      rec.times.push_back(grid.time(n + 1));
      rec.states.push_back(state);
    }
  }
  return rec;
}

}  // namespace nmqsd

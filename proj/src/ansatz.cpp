#include "nmqsd/ansatz.hpp"

#include <cmath>

namespace nmqsd {

namespace {

// RK4 step of y' = f(t, y) for a small fixed-size state.
template <typename State, typename Rhs>
State rk4_step(const State& y, Real t, Real dt, Rhs&& f) {
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1);
  const State k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2);
  const State k4 = f(t + dt, y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Complex kernel_integral(const CorrelationKernel& kernel, Real t) {
  if (is_markov(kernel)) return 0.5;
  Complex out = 0.0;
  for (const auto& term : exp_terms(kernel)) {
    if (std::abs(term.mu) < 1e-14)
      out += term.weight * t;
    else
      out += term.weight * (1.0 - std::exp(-term.mu * t)) / term.mu;
  }
  return out;
}

Complex kernel_first_moment(const CorrelationKernel& kernel, Real t) {
  if (is_markov(kernel)) return 0.0;
  Complex out = 0.0;
  for (const auto& term : exp_terms(kernel)) {
    if (std::abs(term.mu) < 1e-14)
      out += term.weight * 0.5 * t * t;
    else
      out += term.weight * (1.0 - (1.0 + term.mu * t) * std::exp(-term.mu * t)) / (term.mu * term.mu);
  }
  return out;
}

Real kernel_double_integral_sym(const CorrelationKernel& kernel, Real t) {
  if (is_markov(kernel)) return t;
  // 2 Re ∫₀ᵗ ds ∫₀ˢ du α(s-u) = 2 Re Σ_j w_j ∫₀ᵗ (1 - e^{-μ_j s})/μ_j ds
  Complex out = 0.0;
  for (const auto& term : exp_terms(kernel)) {
    if (std::abs(term.mu) < 1e-14)
      out += term.weight * 0.5 * t * t;
    else
      out += term.weight * (t - (1.0 - std::exp(-term.mu * t)) / term.mu) / term.mu;
  }
  return 2.0 * out.real();
}

Complex evolve_F_dissipative(Complex F, const ExponentialKernel& kernel, Real omega, Real lambda,
                             Real dt) {
  const Real gamma = kernel.gamma;
  const Real detune = omega - kernel.Omega;
  const Complex out = rk4_step(F, 0.0, dt, [&](Real, Complex y) {
    return -gamma * y + I * detune * y + lambda * y * y + 0.5 * lambda * gamma;
  });
  if (!std::isfinite(out.real()) || !std::isfinite(out.imag()) ||
      std::abs(out) > kCoefficientDivergenceThreshold)
    throw FDiverged("evolve_F_dissipative: |F| exceeded divergence threshold");
  return out;
}

Complex F_dissipative_closed_form(const ExponentialKernel& kernel, Real omega, Real lambda, Real t) {
  const Complex gt = Complex(kernel.gamma, -(omega - kernel.Omega));
  const Complex root = std::sqrt(gt * gt - 2.0 * lambda * lambda * kernel.gamma);
  return gt / (2.0 * lambda) -
         root / (2.0 * lambda) * std::tanh(0.5 * t * root + std::atanh(gt / root));
}

std::optional<Real> critical_time(Real gamma, Real lambda) {
  const Real disc = 2.0 * lambda * lambda * gamma - gamma * gamma;
  if (disc <= 0.0) return std::nullopt;
  const Real root = std::sqrt(disc);
  return (M_PI + 2.0 * std::atan(gamma / root)) / root;
}

DampedCoefficient::DampedCoefficient(const CorrelationKernel& kernel, Real omega, Real lambda)
    : omega_(omega), lambda_(lambda), markov_(is_markov(kernel)) {
  if (!markov_) {
    terms_ = exp_terms(kernel);
    Fk_.assign(terms_.size(), 0.0);
  }
}

Complex DampedCoefficient::F() const {
  if (markov_) return 0.5 * lambda_;
  Complex sum = 0.0;
  for (const Complex& fk : Fk_) sum += fk;
  return sum;
}

void DampedCoefficient::step(Real dt) {
  if (markov_ || diverged_) {
    t_ += dt;
    return;
  }
  using State = Eigen::VectorXcd;
  State y = Eigen::Map<const State>(Fk_.data(), Fk_.size());
  const auto rhs = [this](Real, const State& v) {
    Complex total = 0.0;
    for (int j = 0; j < v.size(); ++j) total += v(j);
    State d(v.size());
    for (int j = 0; j < v.size(); ++j)
      d(j) = lambda_ * terms_[j].weight + (I * omega_ - terms_[j].mu + lambda_ * total) * v(j);
    return d;
  };
  y = rk4_step(y, t_, dt, rhs);
  t_ += dt;
  Real mag = 0.0;
  for (int j = 0; j < y.size(); ++j) {
    Fk_[j] = y(j);
    mag += std::abs(y(j));
    if (!std::isfinite(y(j).real()) || !std::isfinite(y(j).imag())) diverged_ = true;
  }
  if (mag > kCoefficientDivergenceThreshold) diverged_ = true;
}

DampedCoefficientGrid::DampedCoefficientGrid(const CorrelationKernel& kernel, Real omega, Real lambda,
                                             Real dt)
    : kernel_(kernel), omega_(omega), lambda_(lambda), dt_(dt) {
  f_.push_back(lambda_);  // f(0,0) = λ
}

Complex DampedCoefficientGrid::compute_F(Real t, const std::vector<Complex>& f) const {
  Complex sum = 0.0;
  if (f.size() >= 2) {
    for (size_t j = 0; j < f.size(); ++j) {
      const Real w = (j == 0 || j + 1 == f.size()) ? 0.5 : 1.0;
      sum += w * kernel_eval(kernel_, t, dt_ * j) * f[j];
    }
    sum *= dt_;
  }
  // Mid-step stage times reach past the last stored node; close the integral
  // with a trapezoid over [top, t] using the diagonal value f(t,t) = λ.
  const Real top = dt_ * (f.size() - 1);
  if (t > top)
    sum += 0.5 * (t - top) *
           (kernel_eval(kernel_, t, top) * f.back() + kernel_eval(kernel_, t, t) * lambda_);
  return sum;
}

void DampedCoefficientGrid::step() {
  // RK4 on the whole f(t, ·) vector; F recomputed from the stage values.
  const Real t = dt_ * n_;
  const auto rhs = [this](Real tt, const std::vector<Complex>& f) {
    const Complex coeff = I * omega_ + lambda_ * compute_F(tt, f);
    std::vector<Complex> d(f.size());
    for (size_t j = 0; j < f.size(); ++j) d[j] = coeff * f[j];
    return d;
  };
  const auto axpy = [](const std::vector<Complex>& a, Real h, const std::vector<Complex>& b) {
    std::vector<Complex> out(a.size());
    for (size_t j = 0; j < a.size(); ++j) out[j] = a[j] + h * b[j];
    return out;
  };
  const auto k1 = rhs(t, f_);
  const auto k2 = rhs(t + 0.5 * dt_, axpy(f_, 0.5 * dt_, k1));
  const auto k3 = rhs(t + 0.5 * dt_, axpy(f_, 0.5 * dt_, k2));
  const auto k4 = rhs(t + dt_, axpy(f_, dt_, k3));
  for (size_t j = 0; j < f_.size(); ++j)
    f_[j] += (dt_ / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  ++n_;
  f_.push_back(lambda_);  // new diagonal node f(t+dt, t+dt) = λ
  F_ = compute_F(dt_ * n_, f_);
}

QbmCoefficients::QbmCoefficients(Real gamma, Real omega, Real lambda, Real dt)
    : gamma_(gamma), omega_(omega), lambda_(lambda), dt_(dt) {
  G_hist_.push_back(0.0);
}

void QbmCoefficients::step() {
  using State = Eigen::Vector3cd;
  State y(F_, G_, Jt_);
  const auto rhs = [this](Real, const State& v) {
    const Complex F = v(0), G = v(1), J = v(2);
    State d;
    d(0) = 0.5 * lambda_ * gamma_ - gamma_ * F + omega_ * G - I * lambda_ * F * G - I * lambda_ * J;
    d(1) = -gamma_ * G - omega_ * F - I * lambda_ * G * G;
    d(2) = 0.5 * lambda_ * gamma_ * G - 2.0 * gamma_ * J - I * lambda_ * G * J;
    return d;
  };
  y = rk4_step(y, t(), dt_, rhs);
  if (!y.allFinite() || y.cwiseAbs().maxCoeff() > kCoefficientDivergenceThreshold)
    throw CoefficientDiverged("QbmCoefficients: coefficient magnitude exceeded threshold");
  F_ = y(0);
  G_ = y(1);
  Jt_ = y(2);
  ++n_;
  G_hist_.push_back(G_);
}

Complex qbm_J(const QbmCoefficients& coeffs, Real s, Real t) {
  const Real dt = coeffs.dt();
  const auto& G = coeffs.G_history();
  const int is = int(std::lround(s / dt));
  const int it = int(std::lround(t / dt));
  if (is < 0 || it >= int(G.size()) || is > it)
    throw HistoryMissing("qbm_J: G history does not cover [s, t]");
  // exponent ∫_s^t (γ + iλG(s')) ds', trapezoidal
  Complex expo = 0.0;
  for (int j = is; j < it; ++j) {
    const Complex ga = coeffs.gamma() + I * coeffs.lambda() * G[j];
    const Complex gb = coeffs.gamma() + I * coeffs.lambda() * G[j + 1];
    expo += 0.5 * dt * (ga + gb);
  }
  return coeffs.lambda() * G[is] * std::exp(-expo);
}

Complex evolve_F_cut(Complex F, Real omega1, Real omega2, Real lambda, Real chi, Real dt) {
  const Complex out = rk4_step(F, 0.0, dt, [&](Real, Complex y) {
    return chi + (I * omega1 - I * omega2 + 0.5 * lambda * lambda + chi * y) * y;
  });
  if (!std::isfinite(out.real()) || !std::isfinite(out.imag()) ||
      std::abs(out) > kCoefficientDivergenceThreshold)
    throw CoefficientDiverged("evolve_F_cut: |F| exceeded divergence threshold");
  return out;
}

}  // namespace nmqsd

#include "nmqsd/dynamics.hpp"

#include <cmath>

#include "nmqsd/hilbert.hpp"

namespace nmqsd {

ShiftAccumulator::ShiftAccumulator(const CorrelationKernel& kernel) : markov_(is_markov(kernel)) {
  if (!markov_) {
    terms_ = exp_terms(kernel);
    S_.assign(terms_.size(), 0.0);
  }
}

Complex ShiftAccumulator::shift() const {
  if (markov_) return markov_shift_;
  Complex out = 0.0;
  for (const Complex& s : S_) out += s;
  return out;
}

Complex ShiftAccumulator::advanced(Real h, Complex ldag_a, Complex ldag_b) const {
  if (markov_) return 0.5 * ldag_b;
  // S_j(t) = w_j* ∫₀ᵗ e^{-μ_j*(t-s)} ⟨L†⟩_s ds; trapezoid over the new slice.
  Complex out = 0.0;
  for (size_t j = 0; j < terms_.size(); ++j) {
    const Complex w = std::conj(terms_[j].weight);
    const Complex decay = std::exp(-std::conj(terms_[j].mu) * h);
    out += decay * (S_[j] + 0.5 * h * w * ldag_a) + 0.5 * h * w * ldag_b;
  }
  return out;
}

void ShiftAccumulator::commit(Real h, Complex ldag_a, Complex ldag_b) {
  if (markov_) {
    markov_shift_ = 0.5 * ldag_b;
    return;
  }
  for (size_t j = 0; j < terms_.size(); ++j) {
    const Complex w = std::conj(terms_[j].weight);
    const Complex decay = std::exp(-std::conj(terms_[j].mu) * h);
    S_[j] = decay * (S_[j] + 0.5 * h * w * ldag_a) + 0.5 * h * w * ldag_b;
  }
}

namespace {

// Ô = L constant in (t,s): Obar(t) = (∫₀ᵗ α ds)·L.
class ConstantOpEngine final : public MemoryEngine {
 public:
  ConstantOpEngine(const ModelSpec& model, const CorrelationKernel& kernel)
      : L_(model.L), kernel_(kernel) {}

  void apply_obar(const Vector& psi, Vector& out) const override {
    out.noalias() = kernel_integral(kernel_, t_) * (L_ * psi);
  }
  void advance(Real h, Complex, Complex) override { t_ += h; }

 private:
  Matrix L_;
  CorrelationKernel kernel_;
  Real t_ = 0.0;
};

// Ô(t,s) = f(t,s)·(lowering op): Obar(t) = F(t)·op with F from the Riccati set.
class ScalarTimesOpEngine final : public MemoryEngine {
 public:
  ScalarTimesOpEngine(const ModelSpec& model, const CorrelationKernel& kernel)
      : coeff_(kernel, model.omega, model.lambda), op_(model.lowering), lambda_(model.lambda) {}

  void apply_obar(const Vector& psi, Vector& out) const override {
    out.noalias() = coeff_.F() * (op_ * psi);
  }
  void advance(Real h, Complex, Complex) override { coeff_.step(h); }
  bool diverged() const override { return coeff_.diverged(); }
  Real stiffness() const override {
    return coeff_.diverged() ? 0.0 : lambda_ * std::abs(coeff_.F());
  }

 private:
  DampedCoefficient coeff_;
  Matrix op_;
  Real lambda_;
};

// Toy model Ô(t,s) = λ(q - (t-s)): Obar = I₀(t)·L - λI₁(t)·Id, with
// I₀ = ∫α ds and I₁ = ∫(t-s)α ds. The I₁ line is the extra drift term.
class ToyEngine final : public MemoryEngine {
 public:
  ToyEngine(const ModelSpec& model, const CorrelationKernel& kernel)
      : L_(model.L), kernel_(kernel), lambda_(model.lambda), drift_(model.toy_drift_enabled) {}

  void apply_obar(const Vector& psi, Vector& out) const override {
    out.noalias() = kernel_integral(kernel_, t_) * (L_ * psi);
    if (drift_) out.noalias() -= lambda_ * kernel_first_moment(kernel_, t_) * psi;
  }
  void advance(Real h, Complex, Complex) override { t_ += h; }

 private:
  Matrix L_;
  CorrelationKernel kernel_;
  Real lambda_;
  bool drift_;
  Real t_ = 0.0;
};

// Quantum Brownian motion: Obar = F(t)q + G(t)p + iK(t) with the closed F/G/J̃
// set and the noise kick K(t) = ∫₀ᵗ J(t,s) z̃_s ds evolved by
// K̇ = λG(t)z̃_t - (γ + iλG(t))K.
class QbmEngine final : public MemoryEngine {
 public:
  QbmEngine(const ModelSpec& model, const CorrelationKernel& kernel, Real dt)
      : markov_(is_markov(kernel)), lambda_(model.lambda) {
    const auto b = boson_operators(model.dim());
    q_ = b.q;
    p_ = b.p;
    if (!markov_) {
      const auto* exp = std::get_if<ExponentialKernel>(&kernel);
      if (!exp || std::abs(exp->Omega) > 1e-14)
        throw ConfigError("qbm model requires an Exponential kernel with Omega = 0");
      gamma_ = exp->gamma;
      coeffs_.emplace(gamma_, model.omega, model.lambda, dt);
    }
  }

  void apply_obar(const Vector& psi, Vector& out) const override {
    if (markov_) {
      out.noalias() = 0.5 * lambda_ * (q_ * psi);
      return;
    }
    out.noalias() = coeffs_->F() * (q_ * psi);
    out.noalias() += coeffs_->G() * (p_ * psi);
    out.noalias() += (I * K_) * psi;
  }

  void advance(Real h, Complex ztilde_a, Complex ztilde_b) override {
    if (markov_) return;
    const Complex G_a = coeffs_->G();
    coeffs_->step();  // internal dt equals the trajectory dt
    const Complex G_b = coeffs_->G();
    const Complex k1 = lambda_ * G_a * ztilde_a - (gamma_ + I * lambda_ * G_a) * K_;
    const Complex Kp = K_ + h * k1;
    const Complex k2 = lambda_ * G_b * ztilde_b - (gamma_ + I * lambda_ * G_b) * Kp;
    K_ += 0.5 * h * (k1 + k2);
  }

 private:
  bool markov_;
  Real lambda_, gamma_ = 0.0;
  Matrix q_, p_;
  std::optional<QbmCoefficients> coeffs_;
  Complex K_ = 0.0;
};

}  // namespace

std::unique_ptr<MemoryEngine> make_memory_engine(const ModelSpec& model,
                                                 const CorrelationKernel& kernel, Real dt) {
  switch (model.ansatz) {
    case AnsatzVariant::ConstantOp:
      return std::make_unique<ConstantOpEngine>(model, kernel);
    case AnsatzVariant::ScalarTimesOp:
      return std::make_unique<ScalarTimesOpEngine>(model, kernel);
    case AnsatzVariant::ToyShift:
      return std::make_unique<ToyEngine>(model, kernel);
    case AnsatzVariant::Qbm:
      return std::make_unique<QbmEngine>(model, kernel, dt);
  }
  throw ConfigError("unknown ansatz variant");
}

namespace {

constexpr Real kStiffnessCap = 0.2;   // max h·stiffness per substep
constexpr int kMaxSubsteps = 10000;   // safety valve; exceeding it means divergence
constexpr Real kNormFloor = 1e-30;
constexpr Real kNormCeil = 1e30;

struct Stepper {
  const ModelSpec& model;
  const CorrelationKernel& kernel;
  NoisePath& noise;
  const TrajectoryOptions& opt;

  std::unique_ptr<MemoryEngine> engine;
  ShiftAccumulator shift_acc;
  Matrix Ldag;
  Matrix Hbasis;       // eigenvectors of H; free evolution applied exactly
  RealVector Hevals;
  Vector psi;
  Vector obar_psi, v, k1, k2, psi_p, basis_tmp;  // step workspaces
  bool absorbed = false;
  bool trunc_suspect = false;
  Real weight = 1.0;  // linear-mode ‖ψ‖² relative to the start

  // post-hoc pass 2: shift values at grid nodes, frozen
  const std::vector<Complex>* frozen_shift = nullptr;
  bool apply_shift = true;  // false in post-hoc pass 1 and in linear mode

  std::vector<Complex> ldag_nodes;

  Stepper(const ModelSpec& m, const CorrelationKernel& k, NoisePath& n,
          const TrajectoryOptions& o)
      : model(m), kernel(k), noise(n), opt(o),
        engine(make_memory_engine(m, k, n.grid.dt)), shift_acc(k), Ldag(m.L.adjoint()) {
    psi = opt.psi0 ? *opt.psi0 : model.psi0;
    if (psi.size() != model.dim()) throw DimensionMismatch("psi0 dimension mismatch");
    const int d = model.dim();
    obar_psi.resize(d);
    v.resize(d);
    k1.resize(d);
    k2.resize(d);
    psi_p.resize(d);
    basis_tmp.resize(d);
    Eigen::SelfAdjointEigenSolver<Matrix> es(model.H);
    Hbasis = es.eigenvectors();
    Hevals = es.eigenvalues();
  }

  // x ← e^{-iHh} x, exact through the eigendecomposition.
  void free_propagate(Real h, Vector& x) {
    basis_tmp.noalias() = Hbasis.adjoint() * x;
    for (int i = 0; i < basis_tmp.size(); ++i)
      basis_tmp(i) *= std::exp(Complex(0.0, -Hevals(i) * h));
    x.noalias() = Hbasis * basis_tmp;
  }

  Complex ldag_of(const Vector& s) const {
    const Real n2 = s.squaredNorm();
    if (n2 < kNormFloor) throw ZeroNormError("trajectory state norm vanished");
    return std::conj(s.dot(model.L * s) / n2);
  }

  // Interaction-picture right-hand side: everything except -iHψ, which the
  // stepper applies exactly via free_propagate (Lawson scheme). This keeps the
  // fast free phases out of the Heun truncation error.
  void rhs(const Vector& s, Complex ztilde, Vector& out) {
    engine->apply_obar(s, obar_psi);
    out.setZero();
    if (opt.mode == Mode::Nonlinear) {
      const Real n2 = s.squaredNorm();
      const Vector Ls = model.L * s;
      const Complex expL = s.dot(Ls) / n2;
      const Complex expLd = std::conj(expL);
      v.noalias() = Ldag * obar_psi;
      v.noalias() -= expLd * obar_psi;
      const Complex meanv = s.dot(v) / n2;
      out.noalias() += ztilde * (Ls - expL * s);
      out.noalias() -= v;
      out.noalias() += meanv * s;
    } else {
      out.noalias() += ztilde * (model.L * s);
      out.noalias() -= Ldag * obar_psi;
    }
  }

  void absorb() {
    if (!model.absorbing_state)
      throw FDiverged("memory coefficient diverged and the model has no absorbing state");
    psi = *model.absorbing_state;
    absorbed = true;
  }

  // One grid step [t_n, t_n+dt], with adaptive substepping against coefficient
  // stiffness. Noise is interpolated linearly inside the step (white noise is
  // held at its per-step value).
  void step_node(int n) {
    const Real dt = noise.grid.dt;
    const Complex z_a = noise.z(n);
    const Complex z_b = noise.white ? z_a : noise.z(n + 1);
    Real done = 0.0;
    int substeps = 0;
    while (done < dt - 1e-15 * dt) {
      if (absorbed) return;
      if (++substeps > kMaxSubsteps || engine->diverged()) {
        absorb();
        return;
      }
      Real h = dt - done;
      const Real stiff = engine->stiffness();
      if (stiff > 0.0 && h * stiff > kStiffnessCap) h = kStiffnessCap / stiff;
      const Real fa = done / dt;
      const Real fb = (done + h) / dt;
      const Complex za = z_a + fa * (z_b - z_a);
      const Complex zb = z_a + fb * (z_b - z_a);

      Complex shift_a = 0.0, shift_b = 0.0;
      Complex ldag_a = 0.0, ldag_p = 0.0;
      const bool nonlinear = opt.mode == Mode::Nonlinear;
      if (nonlinear) ldag_a = ldag_of(psi);
      if (nonlinear && apply_shift) {
        if (frozen_shift) {
          const Complex sa = (*frozen_shift)[n], sb = (*frozen_shift)[n + 1];
          shift_a = sa + fa * (sb - sa);
          shift_b = sa + fb * (sb - sa);
        } else {
          shift_a = shift_acc.shift();
        }
      }

      rhs(psi, za + shift_a, k1);
      psi_p.noalias() = psi + h * k1;
      free_propagate(h, psi_p);
      if (nonlinear) ldag_p = ldag_of(psi_p);
      if (nonlinear && apply_shift && !frozen_shift)
        shift_b = shift_acc.advanced(h, ldag_a, ldag_p);

      engine->advance(h, za + shift_a, zb + shift_b);
      if (engine->diverged()) {
        absorb();
        return;
      }
      rhs(psi_p, zb + shift_b, k2);
      psi.noalias() += 0.5 * h * k1;
      free_propagate(h, psi);
      psi.noalias() += 0.5 * h * k2;

      const Real n2 = psi.squaredNorm();
      if (!std::isfinite(n2) || n2 < kNormFloor || n2 > kNormCeil)
        throw NumericalBlowup("trajectory norm left [1e-30, 1e30]");
      if (nonlinear) {
        psi /= std::sqrt(n2);
        if (!frozen_shift) shift_acc.commit(h, ldag_a, ldag_of(psi));
      } else {
        weight = n2;
      }
      done += h;
    }
  }

  void check_truncation() {
    if (!model.check_truncation || absorbed) return;
    const int d = model.dim();
    if (d < 4) return;
    const Real tail = (std::norm(psi(d - 1)) + std::norm(psi(d - 2))) / psi.squaredNorm();
    if (tail > 1e-6) trunc_suspect = true;
  }
};

void record_node(const Stepper& st, Real t, const TrajectoryOptions& opt, TrajectoryRecord& rec) {
  rec.times.push_back(t);
  std::vector<Complex> obs;
  obs.reserve(opt.observables.size());
  for (const Matrix& A : opt.observables) obs.push_back(expectation(st.psi, A));
  rec.observables.push_back(std::move(obs));
  rec.norm_sq.push_back(opt.mode == Mode::Linear ? st.weight : 1.0);
  if (opt.record_states) rec.states.push_back(st.psi);
}

TrajectoryRecord run_pass(const ModelSpec& model, const CorrelationKernel& kernel, NoisePath& noise,
                          const TrajectoryOptions& opt, const std::vector<Complex>* frozen_shift,
                          bool apply_shift, std::vector<Complex>* ldag_out) {
  Stepper st(model, kernel, noise, opt);
  st.frozen_shift = frozen_shift;
  st.apply_shift = apply_shift && opt.mode == Mode::Nonlinear;

  TrajectoryRecord rec;
  record_node(st, 0.0, opt, rec);
  if (ldag_out) ldag_out->push_back(st.ldag_of(st.psi));
  noise.shift.setZero(noise.grid.n_points());
  for (int n = 0; n < noise.grid.n_steps; ++n) {
    st.step_node(n);
    st.check_truncation();
    if (ldag_out) ldag_out->push_back(st.absorbed ? Complex(0.0) : st.ldag_of(st.psi));
    if (st.apply_shift && !frozen_shift) noise.shift(n + 1) = st.shift_acc.shift();
    else if (frozen_shift) noise.shift(n + 1) = (*frozen_shift)[n + 1];
    if ((n + 1) % opt.record_stride == 0 || n + 1 == noise.grid.n_steps)
      record_node(st, noise.grid.time(n + 1), opt, rec);
  }
  rec.final_state = st.psi;
  rec.final_norm_sq = opt.mode == Mode::Linear ? st.weight : 1.0;
  rec.truncation_suspect = st.trunc_suspect;
  rec.absorbed = st.absorbed;
  return rec;
}

}  // namespace

TrajectoryRecord run_trajectory_with_noise(const ModelSpec& model, const CorrelationKernel& kernel,
                                           NoisePath& noise, const TrajectoryOptions& opt) {
  if (opt.record_stride < 1) throw ConfigError("record_stride must be >= 1");
  const bool posthoc = opt.mode == Mode::Nonlinear &&
                       opt.shift_convention == ShiftConvention::PostHoc && !is_markov(kernel);
  if (!posthoc) return run_pass(model, kernel, noise, opt, nullptr, true, nullptr);

  // Post-hoc convention: evolve once with the raw noise to obtain the ⟨L†⟩
  // history, build the shift from it, then re-run with the frozen shift.
  std::vector<Complex> ldag;
  ldag.reserve(noise.grid.n_points());
  run_pass(model, kernel, noise, opt, nullptr, false, &ldag);
  ShiftAccumulator acc(kernel);
  std::vector<Complex> shift(noise.grid.n_points(), 0.0);
  for (int n = 0; n < noise.grid.n_steps; ++n) {
    acc.commit(noise.grid.dt, ldag[n], ldag[n + 1]);
    shift[n + 1] = acc.shift();
  }
  return run_pass(model, kernel, noise, opt, &shift, true, nullptr);
}

TrajectoryRecord run_trajectory(const ModelSpec& model, const CorrelationKernel& kernel,
                                const TimeGrid& grid, std::uint64_t seed,
                                const TrajectoryOptions& opt) {
  NoisePath noise = sample_noise(kernel, grid, seed, opt.sampler);
  return run_trajectory_with_noise(model, kernel, noise, opt);
}

}  // namespace nmqsd

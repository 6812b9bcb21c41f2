#include "nmqsd/hilbert.hpp"

#include <cmath>
#include <numeric>

namespace nmqsd {

SpinOps spin_operators() {
  SpinOps s;
  s.sx = Matrix::Zero(2, 2);
  s.sy = Matrix::Zero(2, 2);
  s.sz = Matrix::Zero(2, 2);
  // Basis ordering: index 0 = |↑⟩, index 1 = |↓⟩.
  s.sx << 0, 1, 1, 0;
  s.sy << 0, -I, I, 0;
  s.sz << 1, 0, 0, -1;
  s.sm = 0.5 * (s.sx - I * s.sy);
  s.sp = 0.5 * (s.sx + I * s.sy);
  return s;
}

BosonOps boson_operators(int n_trunc) {
  if (n_trunc < 2) throw DimensionMismatch("boson_operators: n_trunc must be >= 2");
  BosonOps b;
  b.a = Matrix::Zero(n_trunc, n_trunc);
  for (int n = 1; n < n_trunc; ++n) b.a(n - 1, n) = std::sqrt(Real(n));
  b.adag = b.a.adjoint();
  const Real s = 1.0 / std::sqrt(2.0);
  b.q = s * (b.a + b.adag);
  b.p = (b.a - b.adag) / (I * std::sqrt(2.0));
  b.n = b.adag * b.a;
  return b;
}

Vector coherent_state(Complex beta, int n_trunc) {
  const Real b2 = std::norm(beta);
  // Tail mass Σ_{n>=n_trunc} |β|^{2n} e^{-|β|²}/n!
  Real head = 0.0, term = std::exp(-b2);
  for (int n = 0; n < n_trunc; ++n) {
    head += term;
    term *= b2 / Real(n + 1);
  }
  if (1.0 - head > 1e-8)
    throw TruncationError("coherent_state: tail mass " + std::to_string(1.0 - head) +
                          " exceeds 1e-8 at n_trunc=" + std::to_string(n_trunc));
  Vector psi(n_trunc);
  Complex amp = std::exp(-0.5 * b2);
  for (int n = 0; n < n_trunc; ++n) {
    psi(n) = amp;
    amp *= beta / std::sqrt(Real(n + 1));
  }
  normalize(psi);
  return psi;
}

Vector cat_state(Complex beta, int n_trunc) {
  Vector psi = coherent_state(beta, n_trunc) + coherent_state(-beta, n_trunc);
  normalize(psi);
  return psi;
}

Real cat_norm_before_normalization(Complex beta) {
  return std::sqrt(2.0 + 2.0 * std::exp(-2.0 * std::norm(beta)));
}

RealMatrix q_function(const Vector& psi, const PhaseSpaceGrid& grid) {
  const int dim = int(psi.size());
  RealMatrix Q(grid.n_re, grid.n_im);
  // ⟨β|ψ⟩ = e^{-|β|²/2} Σ_n (β*)^n/√(n!) ψ_n; for ψ supported on n < dim the
  // sum is exact whatever the probe's own tail looks like, so the only thing
  // worth guarding is whether ψ itself has been clipped by the truncation.
  const Real n2 = psi.squaredNorm();
  if (n2 > 1e-30 && std::norm(psi(dim - 1)) / n2 > 1e-6)
    throw TruncationError("q_function: top Fock level holds more than 1e-6 of the state");
  std::vector<Real> inv_sqrt_fact(dim);
  Real f = 1.0;
  for (int n = 0; n < dim; ++n) {
    inv_sqrt_fact[n] = 1.0 / std::sqrt(f);
    f *= Real(n + 1);
  }
  for (int i = 0; i < grid.n_re; ++i) {
    for (int j = 0; j < grid.n_im; ++j) {
      const Complex beta(grid.re(i), grid.im(j));
      const Complex bc = std::conj(beta);
      Complex overlap = 0.0, pw = 1.0;
      for (int n = 0; n < dim; ++n) {
        overlap += pw * inv_sqrt_fact[n] * psi(n);
        pw *= bc;
      }
      Q(i, j) = std::exp(-std::norm(beta)) * std::norm(overlap) / M_PI;
    }
  }
  return Q;
}

Complex expectation(const Vector& psi, const Matrix& A) {
  if (A.rows() != psi.size() || A.cols() != psi.size())
    throw DimensionMismatch("expectation: operator/state dimension mismatch");
  const Real n2 = psi.squaredNorm();
  if (n2 < 1e-30) throw ZeroNormError("expectation: state norm below 1e-15");
  return psi.dot(A * psi) / n2;
}

void normalize(Vector& psi) {
  const Real n = psi.norm();
  if (n < 1e-15) throw ZeroNormError("normalize: state norm below 1e-15");
  psi /= n;
}

bool is_hermitian(const Matrix& A, Real tol) {
  return (A - A.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

int CompositeSpace::total_dim() const {
  int d = 1;
  for (int f : factor_dims) d *= f;
  return d;
}

int CompositeSpace::stride(int factor) const {
  int s = 1;
  for (size_t k = factor + 1; k < factor_dims.size(); ++k) s *= factor_dims[k];
  return s;
}

int CompositeSpace::flatten(const std::vector<int>& idx) const {
  if (idx.size() != factor_dims.size())
    throw DimensionMismatch("CompositeSpace::flatten: wrong index count");
  int out = 0;
  for (size_t k = 0; k < idx.size(); ++k) out = out * factor_dims[k] + idx[k];
  return out;
}

std::vector<int> CompositeSpace::unflatten(int index) const {
  std::vector<int> idx(factor_dims.size());
  for (int k = int(factor_dims.size()) - 1; k >= 0; --k) {
    idx[k] = index % factor_dims[k];
    index /= factor_dims[k];
  }
  return idx;
}

namespace {

struct TraceDims {
  int before, kept, after;
};

TraceDims trace_dims(const CompositeSpace& space, int keep) {
  if (keep < 0 || keep >= int(space.factor_dims.size()))
    throw DimensionMismatch("partial_trace: keep index out of range");
  TraceDims d{1, space.factor_dims[keep], 1};
  for (int k = 0; k < keep; ++k) d.before *= space.factor_dims[k];
  for (size_t k = keep + 1; k < space.factor_dims.size(); ++k) d.after *= space.factor_dims[k];
  return d;
}

}  // namespace

Matrix partial_trace(const Matrix& rho, const CompositeSpace& space, int keep) {
  const auto d = trace_dims(space, keep);
  if (rho.rows() != space.total_dim() || rho.cols() != space.total_dim())
    throw DimensionMismatch("partial_trace: density matrix does not match composite space");
  Matrix out = Matrix::Zero(d.kept, d.kept);
  for (int i = 0; i < d.kept; ++i)
    for (int j = 0; j < d.kept; ++j)
      for (int b = 0; b < d.before; ++b)
        for (int a = 0; a < d.after; ++a)
          out(i, j) += rho((b * d.kept + i) * d.after + a, (b * d.kept + j) * d.after + a);
  return out;
}

Matrix partial_trace(const Vector& psi, const CompositeSpace& space, int keep) {
  const auto d = trace_dims(space, keep);
  if (psi.size() != space.total_dim())
    throw DimensionMismatch("partial_trace: state does not match composite space");
  Matrix out = Matrix::Zero(d.kept, d.kept);
  for (int b = 0; b < d.before; ++b)
    for (int a = 0; a < d.after; ++a)
      for (int i = 0; i < d.kept; ++i) {
        const Complex vi = psi((b * d.kept + i) * d.after + a);
        if (vi == Complex(0.0)) continue;
        for (int j = 0; j < d.kept; ++j)
          out(i, j) += vi * std::conj(psi((b * d.kept + j) * d.after + a));
      }
  return out;
}

Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j) out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (int i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

}  // namespace nmqsd

#pragma once

#include <vector>

#include "nmqsd/types.hpp"

namespace nmqsd {

// Dense complex linear algebra on small truncated Hilbert spaces.

struct SpinOps {
  Matrix sx, sy, sz, sm, sp;  // sm = (sx - i sy)/2
};

SpinOps spin_operators();

struct BosonOps {
  Matrix a, adag, q, p, n;  // q = (a+a†)/√2, p = (a-a†)/(i√2)
};

BosonOps boson_operators(int n_trunc);

// |β⟩ in the truncated Fock basis, renormalized on the truncated space.
// Throws TruncationError if the tail mass beyond n_trunc exceeds 1e-8.
Vector coherent_state(Complex beta, int n_trunc);

// Normalized |β⟩ + |-β⟩.
Vector cat_state(Complex beta, int n_trunc);

// Squared norm of |β⟩ + |-β⟩ before normalization: 2 + 2 e^{-2|β|²}.
Real cat_norm_before_normalization(Complex beta);

struct PhaseSpaceGrid {
  Real re_min = -4.5, re_max = 4.5;
  Real im_min = -4.5, im_max = 4.5;
  int n_re = 121, n_im = 121;

  Real re(int i) const { return re_min + (re_max - re_min) * i / (n_re - 1); }
  Real im(int j) const { return im_min + (im_max - im_min) * j / (n_im - 1); }
};

// Husimi Q(β) = |⟨β|ψ⟩|²/π sampled on the grid; entry (i,j) is (Re β_i, Im β_j).
RealMatrix q_function(const Vector& psi, const PhaseSpaceGrid& grid);

// ⟨ψ|A|ψ⟩ / ⟨ψ|ψ⟩; throws ZeroNormError when ‖ψ‖² < 1e-30.
Complex expectation(const Vector& psi, const Matrix& A);

void normalize(Vector& psi);

bool is_hermitian(const Matrix& A, Real tol = 1e-12);

// Tensor-product index bookkeeping for system⊗environment spaces.
struct CompositeSpace {
  std::vector<int> factor_dims;

  int total_dim() const;
  // Strides: index = Σ_k i_k * stride(k), factor 0 slowest.
  int stride(int factor) const;
  int flatten(const std::vector<int>& idx) const;
  std::vector<int> unflatten(int index) const;
};

// Reduced density matrix of the kept factor; trace preserved.
Matrix partial_trace(const Matrix& rho, const CompositeSpace& space, int keep);
Matrix partial_trace(const Vector& psi, const CompositeSpace& space, int keep);

// Kronecker product A ⊗ B.
Matrix kron(const Matrix& A, const Matrix& B);
Vector kron(const Vector& a, const Vector& b);

}  // namespace nmqsd

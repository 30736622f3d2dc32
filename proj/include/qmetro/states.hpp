#pragma once

#include "qmetro/qtensor.hpp"

namespace qmetro {

// Coefficient matrix of a diagonal-subspace state: Hermitian, PSD, unit
// trace, exactly as a d-dimensional density matrix.
class CoefficientMatrix {
 public:
  explicit CoefficientMatrix(Matrix c) : c_(std::move(c)) {}
  Index d() const { return c_.dim(); }
  const Matrix& mat() const { return c_.mat(); }
  const DensityMatrix& as_density() const { return c_; }

 private:
  DensityMatrix c_;
};

// Normalized coefficient vector for N-fold Schmidt-diagonal superpositions.
class SchmidtVector {
 public:
  explicit SchmidtVector(Vector sigma);
  Index d() const { return sigma_.size(); }
  const Vector& vec() const { return sigma_; }

 private:
  Vector sigma_;
};

struct StateWithLayout {
  DensityMatrix rho;
  PartitionLayout layout;
};

// rho = sum_{kl} c_{kl} (|k><l|)^{tensor N} on d^N dimensions.  The nonzero
// spectrum equals the spectrum of c itself for every N.
StateWithLayout diagonal_subspace_state(const CoefficientMatrix& c, int N);

// Pure projector onto sum_k sigma_k |k>^{tensor N}.
StateWithLayout schmidt_state(const SchmidtVector& sigma, int N);

// |GHZ> = (|0..0> + |1..1>)/sqrt(2).
StateWithLayout ghz_state(int N);

// p * GHZ + (1-p) * (|0..0><0..0| + |1..1><1..1|)/2; the off-diagonal
// coefficient is p/2.
StateWithLayout ghz_diag_noise(double p, int N);

// p * GHZ + (1-p) * I/2^N.
StateWithLayout noisy_ghz_white(double p, int N);

// p * |Phi+><Phi+| + (1-p) * I/4 with |Phi+> = (|00> + |11>)/sqrt(2).
StateWithLayout isotropic_two_qubit(double p);

// Graph state on the N-cycle: controlled-Z on every ring edge applied to
// |+>^{tensor N}.  Stabilized by K_n = X_n Z_{n-1} Z_{n+1}.
StateWithLayout ring_cluster_state(int N);

// |W> = sum over single-excitation basis states / sqrt(N); |Wbar> is its
// bit flip; and the mixture p |W><W| + (1-p) |Wbar><Wbar|.
StateWithLayout w_state(int N);
StateWithLayout wbar_state(int N);
StateWithLayout w_wbar_mixture(double p, int N);

// p (|Psi+><Psi+|)^{tensor 2} + (1-p) (|Phi+><Phi+|)^{tensor 2} on 16
// dimensions, laid out as N=2 parties, M=2 copies of qubits.
StateWithLayout two_copy_bell_mixture(double p);

// Basis index of |k k ... k> (N repetitions) for local dimension d.
Index repeated_basis_index(Index k, int N, Index d);

} // namespace qmetro

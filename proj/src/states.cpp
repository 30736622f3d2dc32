#include "qmetro/states.hpp"

#include <cmath>
#include <stdexcept>

namespace qmetro {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument(std::string(what) + ": p must lie in [0, 1]");
}

StateWithLayout pure_state(Vector psi, PartitionLayout layout) {
  Matrix rho = psi * psi.adjoint();
  return {DensityMatrix(std::move(rho)), layout};
}

} // namespace

SchmidtVector::SchmidtVector(Vector sigma) : sigma_(std::move(sigma)) {
  if (sigma_.size() < 2) throw std::invalid_argument("SchmidtVector: need length >= 2");
  const double norm2 = sigma_.squaredNorm();
  if (std::abs(norm2 - 1.0) > 1e-10)
    throw std::invalid_argument("SchmidtVector: squared norm deviates from 1 by " +
                                std::to_string(std::abs(norm2 - 1.0)));
  if (norm2 == 0.0) throw std::invalid_argument("SchmidtVector: zero vector");
}

Index repeated_basis_index(Index k, int N, Index d) {
  Index idx = 0;
  for (int i = 0; i < N; ++i) idx = idx * d + k;
  return idx;
}

StateWithLayout diagonal_subspace_state(const CoefficientMatrix& c, int N) {
  if (N < 1) throw std::invalid_argument("diagonal_subspace_state: N must be >= 1");
  const Index d = c.d();
  PartitionLayout layout{N, 1, static_cast<int>(d)};
  const Index dim = layout.global_dim();
  Matrix rho = Matrix::Zero(dim, dim);
  for (Index k = 0; k < d; ++k)
    for (Index l = 0; l < d; ++l)
      rho(repeated_basis_index(k, N, d), repeated_basis_index(l, N, d)) = c.mat()(k, l);
  return {DensityMatrix(std::move(rho)), layout};
}

StateWithLayout schmidt_state(const SchmidtVector& sigma, int N) {
  if (N < 1) throw std::invalid_argument("schmidt_state: N must be >= 1");
  const Index d = sigma.d();
  PartitionLayout layout{N, 1, static_cast<int>(d)};
  Vector psi = Vector::Zero(layout.global_dim());
  for (Index k = 0; k < d; ++k) psi(repeated_basis_index(k, N, d)) = sigma.vec()(k);
  return pure_state(std::move(psi), layout);
}

StateWithLayout ghz_state(int N) {
  Vector sigma(2);
  sigma << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return schmidt_state(SchmidtVector(sigma), N);
}

StateWithLayout ghz_diag_noise(double p, int N) {
  check_probability(p, "ghz_diag_noise");
  Matrix c(2, 2);
  c << 0.5, p / 2.0, p / 2.0, 0.5;
  return diagonal_subspace_state(CoefficientMatrix(std::move(c)), N);
}

StateWithLayout noisy_ghz_white(double p, int N) {
  check_probability(p, "noisy_ghz_white");
  StateWithLayout ghz = ghz_state(N);
  const Index dim = ghz.rho.dim();
  Matrix rho = p * ghz.rho.mat() + (1.0 - p) / static_cast<double>(dim) * Matrix::Identity(dim, dim);
  return {DensityMatrix(std::move(rho)), ghz.layout};
}

StateWithLayout isotropic_two_qubit(double p) {
  check_probability(p, "isotropic_two_qubit");
  Vector phi = Vector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  Matrix rho = p * (phi * phi.adjoint()) + (1.0 - p) / 4.0 * Matrix::Identity(4, 4);
  return {DensityMatrix(std::move(rho)), PartitionLayout{2, 1, 2}};
}

StateWithLayout ring_cluster_state(int N) {
  if (N < 3) throw std::invalid_argument("ring_cluster_state: N must be >= 3");
  PartitionLayout layout{N, 1, 2};
  const Index dim = layout.global_dim();
  Vector psi = Vector::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  // CZ on edge (n, n+1 mod N) flips the sign of components with both qubits 1.
  for (int n = 0; n < N; ++n) {
    const int a = n, b = (n + 1) % N;
    const Index bit_a = Index(1) << (N - 1 - a);
    const Index bit_b = Index(1) << (N - 1 - b);
    for (Index g = 0; g < dim; ++g)
      if ((g & bit_a) && (g & bit_b)) psi(g) = -psi(g);
  }
  return pure_state(std::move(psi), layout);
}

StateWithLayout w_state(int N) {
  if (N < 2) throw std::invalid_argument("w_state: N must be >= 2");
  PartitionLayout layout{N, 1, 2};
  Vector psi = Vector::Zero(layout.global_dim());
  const double amp = 1.0 / std::sqrt(static_cast<double>(N));
  for (int n = 0; n < N; ++n) psi(Index(1) << (N - 1 - n)) = amp;
  return pure_state(std::move(psi), layout);
}

StateWithLayout wbar_state(int N) {
  if (N < 2) throw std::invalid_argument("wbar_state: N must be >= 2");
  PartitionLayout layout{N, 1, 2};
  const Index dim = layout.global_dim();
  Vector psi = Vector::Zero(dim);
  const double amp = 1.0 / std::sqrt(static_cast<double>(N));
  for (int n = 0; n < N; ++n) psi((dim - 1) - (Index(1) << (N - 1 - n))) = amp;
  return pure_state(std::move(psi), layout);
}

StateWithLayout w_wbar_mixture(double p, int N) {
  check_probability(p, "w_wbar_mixture");
  StateWithLayout w = w_state(N);
  StateWithLayout wbar = wbar_state(N);
  Matrix rho = p * w.rho.mat() + (1.0 - p) * wbar.rho.mat();
  return {DensityMatrix(std::move(rho)), w.layout};
}

StateWithLayout two_copy_bell_mixture(double p) {
  check_probability(p, "two_copy_bell_mixture");
  Vector psi_plus = Vector::Zero(4), phi_plus = Vector::Zero(4);
  psi_plus(1) = psi_plus(2) = 1.0 / std::sqrt(2.0); // (|01> + |10>)/sqrt(2)
  phi_plus(0) = phi_plus(3) = 1.0 / std::sqrt(2.0); // (|00> + |11>)/sqrt(2)
  Matrix psi2 = kron(psi_plus * psi_plus.adjoint(), psi_plus * psi_plus.adjoint());
  Matrix phi2 = kron(phi_plus * phi_plus.adjoint(), phi_plus * phi_plus.adjoint());
  Matrix rho = p * psi2 + (1.0 - p) * phi2;
  return {DensityMatrix(std::move(rho)), PartitionLayout{2, 2, 2}};
}

} // namespace qmetro

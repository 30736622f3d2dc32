#include "qmetro/metrology.hpp"

#include "qmetro/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qmetro {

namespace {

void check_dims(Index a, Index b, const char* what) {
  if (a != b)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
}

// Tr(A B) for dense matrices without forming the product.
Complex trace_prod(const Matrix& a, const Matrix& b) {
  return a.transpose().cwiseProduct(b).sum();
}

bool is_diagonal(const Matrix& m) {
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (i != j && std::abs(m(i, j)) > 1e-14 * scale) return false;
  return true;
}

double skew_with_root(const Matrix& rho, const Matrix& H, const Matrix& S) {
  if (is_diagonal(H)) {
    const RealVector h = H.diagonal().real();
    double t1 = 0.0;
    for (Index i = 0; i < rho.rows(); ++i) t1 += rho(i, i).real() * h(i) * h(i);
    double t2 = 0.0;
    for (Index j = 0; j < S.cols(); ++j) {
      double col = 0.0;
      for (Index i = 0; i < S.rows(); ++i) col += h(i) * std::norm(S(i, j));
      t2 += h(j) * col;
    }
    return t1 - t2;
  }
  const Matrix A = rho * H;
  const double t1 = trace_prod(A, H).real();
  const Matrix B = S * H;
  const double t2 = trace_prod(B, B).real();
  return t1 - t2;
}

} // namespace

double qfi(const Eigensystem& es, const Matrix& H) {
  check_dims(es.vectors.rows(), H.rows(), "qfi");
  const Matrix T = es.vectors.adjoint() * H * es.vectors;
  return kernels::qfi_pair_sum(es.values, T);
}

double qfi(const DensityMatrix& rho, const HermitianOperator& H) {
  check_dims(rho.dim(), H.dim(), "qfi");
  return qfi(density_eigensystem(rho), H.mat());
}

double qfi_rank_reduced(const Eigensystem& es, const Matrix& H) {
  check_dims(es.vectors.rows(), H.rows(), "qfi_rank_reduced");
  const Matrix T = es.vectors.adjoint() * H * es.vectors;
  // Tr(rho H^2) in the eigenbasis; T is Hermitian so row norms suffice.
  double h2 = 0.0;
  for (Index k = 0; k < T.rows(); ++k) {
    double row = 0.0;
    for (Index l = 0; l < T.cols(); ++l) row += std::norm(T(k, l));
    h2 += es.values(k) * row;
  }
  return 4.0 * h2 - 8.0 * kernels::support_pair_correction(es.values, T);
}

double qfi_rank_reduced(const DensityMatrix& rho, const HermitianOperator& H) {
  check_dims(rho.dim(), H.dim(), "qfi_rank_reduced");
  return qfi_rank_reduced(density_eigensystem(rho), H.mat());
}

double skew_information(const DensityMatrix& rho, const HermitianOperator& H) {
  check_dims(rho.dim(), H.dim(), "skew_information");
  return skew_with_root(rho.mat(), H.mat(), sqrt_psd(density_eigensystem(rho)));
}

double skew_information(const DensityMatrix& rho, const HermitianOperator& H,
                        const Matrix& sqrt_rho) {
  check_dims(rho.dim(), H.dim(), "skew_information");
  check_dims(rho.dim(), sqrt_rho.rows(), "skew_information (root)");
  return skew_with_root(rho.mat(), H.mat(), sqrt_rho);
}

double variance_bound(const DensityMatrix& rho, const HermitianOperator& H) {
  check_dims(rho.dim(), H.dim(), "variance_bound");
  const Matrix A = rho.mat() * H.mat();
  const double mean = A.trace().real();
  const double h2 = trace_prod(A, H.mat()).real();
  return 4.0 * (h2 - mean * mean);
}

double separable_bound(const std::vector<HermitianOperator>& local_terms) {
  if (local_terms.empty()) throw std::invalid_argument("separable_bound: empty term list");
  double acc = 0.0;
  for (const auto& h : local_terms) {
    const Eigensystem es = eigh(h);
    const double spread = es.values(es.values.size() - 1) - es.values(0);
    acc += spread * spread;
  }
  return acc;
}

GainReport gain_for(const DensityMatrix& rho, const std::vector<HermitianOperator>& local_terms,
                    const PartitionLayout& layout) {
  layout.validate();
  if (static_cast<int>(local_terms.size()) != layout.parties)
    throw std::invalid_argument("gain_for: need one local term per party");
  check_dims(rho.dim(), layout.global_dim(), "gain_for (state vs layout)");
  const Index pd = layout.party_dim();
  double scale = 0.0;
  for (const auto& h : local_terms) {
    check_dims(h.dim(), pd, "gain_for (local term vs party dim)");
    scale = std::max(scale, h.mat().cwiseAbs().maxCoeff());
  }
  Matrix H = Matrix::Zero(rho.dim(), rho.dim());
  for (int n = 0; n < layout.parties; ++n)
    H += embed_on_sites(local_terms[n].mat(), layout.party_sites(n), layout);

  const double fq_sep = separable_bound(local_terms);
  if (fq_sep <= 1e-14 * std::max(1.0, scale * scale))
    throw std::invalid_argument(
        "gain_for: separable bound is zero (all local terms proportional to the identity), "
        "the gain is undefined for such probes");

  HermitianOperator hamiltonian(std::move(H));
  const double fq = qfi(rho, hamiltonian);
  return GainReport{fq, fq_sep, fq / fq_sep, std::move(hamiltonian), local_terms};
}

UsefulnessReport ghz_like_usefulness(const SchmidtVector& sigma, int N) {
  if (sigma.d() != 2)
    throw std::invalid_argument("ghz_like_usefulness: defined for two-component vectors only");
  if (N < 2) throw std::invalid_argument("ghz_like_usefulness: N must be >= 2");
  UsefulnessReport r;
  r.entanglement_measure = 4.0 * std::norm(sigma.vec()(0)) * std::norm(sigma.vec()(1));
  r.threshold = 1.0 / static_cast<double>(N);
  r.useful = r.entanglement_measure > r.threshold;
  return r;
}

namespace {

double spectrum_split_qfi(double s, int N) {
  const double n = static_cast<double>(N);
  return 4.0 * n + 4.0 * n * s * (n * (1.0 - s) - 1.0);
}

void check_obs2_args(const SchmidtVector& sigma, int N, bool odd) {
  const Index d = sigma.d();
  if (odd && (d < 3 || d % 2 == 0))
    throw std::invalid_argument("obs2_qfi_odd: requires odd local dimension >= 3");
  if (!odd && (d < 4 || d % 2 == 1))
    throw std::invalid_argument("obs2_qfi_even: requires even local dimension >= 4");
  if (N < 3)
    throw std::invalid_argument(
        "obs2 closed forms hold for N >= 3 (swapped-coefficient cross terms enter at N = 2)");
}

// Antidiagonal pairing of `rest` written into H.
void pair_antidiagonal(Matrix& H, const std::vector<Index>& rest) {
  const std::size_t m = rest.size();
  for (std::size_t i = 0; i < m; ++i) H(rest[i], rest[m - 1 - i]) = 1.0;
}

} // namespace

double obs2_qfi_odd_slot(const SchmidtVector& sigma, int N, Index slot) {
  check_obs2_args(sigma, N, true);
  if (slot < 0 || slot >= sigma.d()) throw std::invalid_argument("obs2: slot out of range");
  return spectrum_split_qfi(std::norm(sigma.vec()(slot)), N);
}

double obs2_qfi_odd(const SchmidtVector& sigma, int N) { return obs2_qfi_odd_slot(sigma, N, 0); }

double obs2_qfi_even_slots(const SchmidtVector& sigma, int N, Index slot_a, Index slot_b) {
  check_obs2_args(sigma, N, false);
  const Index d = sigma.d();
  if (slot_a < 0 || slot_a >= d || slot_b < 0 || slot_b >= d || slot_a == slot_b)
    throw std::invalid_argument("obs2: need two distinct in-range slots");
  return spectrum_split_qfi(std::norm(sigma.vec()(slot_a)) + std::norm(sigma.vec()(slot_b)), N);
}

double obs2_qfi_even(const SchmidtVector& sigma, int N) {
  return obs2_qfi_even_slots(sigma, N, 0, 1);
}

HermitianOperator obs2_hamiltonian_odd(Index d, Index slot) {
  if (d < 3 || d % 2 == 0)
    throw std::invalid_argument("obs2_hamiltonian_odd: requires odd dimension >= 3");
  if (slot < 0 || slot >= d) throw std::invalid_argument("obs2: slot out of range");
  Matrix H = Matrix::Zero(d, d);
  H(slot, slot) = 1.0;
  std::vector<Index> rest;
  for (Index i = 0; i < d; ++i)
    if (i != slot) rest.push_back(i);
  pair_antidiagonal(H, rest);
  return HermitianOperator(std::move(H));
}

HermitianOperator obs2_hamiltonian_even(Index d, Index slot_a, Index slot_b) {
  if (d < 4 || d % 2 == 1)
    throw std::invalid_argument("obs2_hamiltonian_even: requires even dimension >= 4");
  if (slot_a < 0 || slot_a >= d || slot_b < 0 || slot_b >= d || slot_a == slot_b)
    throw std::invalid_argument("obs2: need two distinct in-range slots");
  Matrix H = Matrix::Zero(d, d);
  H(slot_a, slot_a) = 1.0;
  H(slot_b, slot_b) = 1.0;
  std::vector<Index> rest;
  for (Index i = 0; i < d; ++i)
    if (i != slot_a && i != slot_b) rest.push_back(i);
  pair_antidiagonal(H, rest);
  return HermitianOperator(std::move(H));
}

Obs2Search obs2_usefulness_search(const SchmidtVector& sigma, int N) {
  const Index d = sigma.d();
  if (d > 6)
    throw std::invalid_argument("obs2_usefulness_search: explicit enumeration intended for d <= 6");
  Obs2Search best;
  best.best_qfi = -1.0;
  if (d % 2 == 1) {
    for (Index k = 0; k < d; ++k) {
      const double f = obs2_qfi_odd_slot(sigma, N, k);
      if (f > best.best_qfi) {
        best.best_qfi = f;
        best.slot_a = k;
        best.slot_b = -1;
      }
    }
  } else {
    for (Index a = 0; a < d; ++a)
      for (Index b = a + 1; b < d; ++b) {
        const double f = obs2_qfi_even_slots(sigma, N, a, b);
        if (f > best.best_qfi) {
          best.best_qfi = f;
          best.slot_a = a;
          best.slot_b = b;
        }
      }
  }
  best.best_gain = best.best_qfi / (4.0 * static_cast<double>(N));
  best.useful = best.best_gain > 1.0;
  return best;
}

double expectation(const DensityMatrix& rho, const Matrix& A) {
  check_dims(rho.dim(), A.rows(), "expectation");
  return trace_prod(rho.mat(), A).real();
}

} // namespace qmetro

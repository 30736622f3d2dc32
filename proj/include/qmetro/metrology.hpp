#pragma once

#include "qmetro/qtensor.hpp"
#include "qmetro/states.hpp"

#include <vector>

namespace qmetro {

// Quantum Fisher information
//   F_Q = 2 sum_{k,l} (lambda_k - lambda_l)^2 / (lambda_k + lambda_l) |<k|H|l>|^2
// over the eigendecomposition of rho; pairs with lambda_k + lambda_l <= 1e-12
// are skipped (the expression's limit there is 0).
double qfi(const DensityMatrix& rho, const HermitianOperator& H);
// Same, reusing a clamped eigendecomposition of the state.
double qfi(const Eigensystem& es, const Matrix& H);

// Equivalent rank-reduced form: F_Q = 4<H^2> - 8 sum over support pairs of
// lambda_k lambda_l / (lambda_k + lambda_l) |<k|H|l>|^2.  Cheaper when the
// rank is small; agrees with qfi to numerical precision.
double qfi_rank_reduced(const DensityMatrix& rho, const HermitianOperator& H);
double qfi_rank_reduced(const Eigensystem& es, const Matrix& H);

// Wigner-Yanase skew information I = Tr(rho H^2) - Tr(sqrt(rho) H sqrt(rho) H).
// The square root is taken by eigenvalue rooting with negatives clamped to 0.
// The three-argument overload accepts a caller-supplied root for states whose
// square root is known structurally (e.g. tensor powers, where
// sqrt(A tensor B) = sqrt(A) tensor sqrt(B)); diagonal H is detected and the
// traces then evaluated without matrix products.
double skew_information(const DensityMatrix& rho, const HermitianOperator& H);
double skew_information(const DensityMatrix& rho, const HermitianOperator& H,
                        const Matrix& sqrt_rho);

// 4 (<H^2> - <H>^2): the pure-state value of the QFI and an upper bound on it
// for every state.
double variance_bound(const DensityMatrix& rho, const HermitianOperator& H);

// Largest QFI reachable with separable states for H = sum_n h_n:
// sum_n (lambda_max(h_n) - lambda_min(h_n))^2.
double separable_bound(const std::vector<HermitianOperator>& local_terms);

struct GainReport {
  double fq = 0.0;
  double fq_sep = 0.0;
  double gain = 0.0;
  HermitianOperator hamiltonian;
  std::vector<HermitianOperator> local_terms;
};

// Assembles H = sum_n h_n with h_n acting on all copies of party n (each term
// has dimension d^M), evaluates F_Q and the separable bound, and reports the
// ratio.  Local terms proportional to the identity on every party (separable
// bound 0) are rejected: the gain is undefined there.
GainReport gain_for(const DensityMatrix& rho, const std::vector<HermitianOperator>& local_terms,
                    const PartitionLayout& layout);

// Usefulness of the d=2 Schmidt-diagonal family: the state beats every
// separable probe iff E = 4 |sigma_0 sigma_1|^2 exceeds 1/N.
struct UsefulnessReport {
  double entanglement_measure = 0.0; // E
  double threshold = 0.0;            // 1/N
  bool useful = false;
};
UsefulnessReport ghz_like_usefulness(const SchmidtVector& sigma, int N);

// Closed-form QFI for Schmidt-diagonal qudit states probed with the
// spectrum-split Hamiltonians below (d odd resp. even):
//   F = 4N + 4N s [N(1 - s) - 1]
// with s = |sigma_0|^2 (odd) or |sigma_0|^2 + |sigma_1|^2 (even), i.e. the
// weight on the +1 diagonal block of the Hamiltonian.  Valid for N >= 3
// (at N = 2 cross terms between swapped coefficients enter, which these
// formulas do not include).  The slot variants place the diagonal block on
// arbitrary indices; the search enumerates all placements (meant for d <= 6).
double obs2_qfi_odd(const SchmidtVector& sigma, int N);
double obs2_qfi_even(const SchmidtVector& sigma, int N);
double obs2_qfi_odd_slot(const SchmidtVector& sigma, int N, Index slot);
double obs2_qfi_even_slots(const SchmidtVector& sigma, int N, Index slot_a, Index slot_b);

// The matching Hamiltonians: diag(1, X_{d-1}) resp. diag(1, 1, X_{d-2}) up to
// the slot placement, where X is the antidiagonal pairing of the remaining
// indices.  Both square to the identity.
HermitianOperator obs2_hamiltonian_odd(Index d, Index slot = 0);
HermitianOperator obs2_hamiltonian_even(Index d, Index slot_a = 0, Index slot_b = 1);

struct Obs2Search {
  double best_qfi = 0.0;
  double best_gain = 0.0;
  Index slot_a = 0;
  Index slot_b = -1; // -1 for odd d
  bool useful = false;
};
Obs2Search obs2_usefulness_search(const SchmidtVector& sigma, int N);

// Re(Tr(rho A)).
double expectation(const DensityMatrix& rho, const Matrix& A);

} // namespace qmetro

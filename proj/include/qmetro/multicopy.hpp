#pragma once

#include "qmetro/metrology.hpp"

#include <cstdint>
#include <vector>

namespace qmetro {

// ---------------------------------------------------------------------------
// Diagonal-subspace machinery.
//
// States of the form rho = sum_{kl} c_{kl} (|k><l|)^{tensor N} admit a
// dimension reduction: QFI questions about M copies of the d^N-dimensional
// state probed with collective alternating-sign Hamiltonians reduce to the
// d-dimensional pair (rho_tilde = sum c_{kl} |k><l|, H_tilde = N D^{tensor M})
// with D = diag(+1, -1, +1, ...).  The reduction is exact: the subspace is
// invariant under the Hamiltonian and the map is an isometry on it.
// ---------------------------------------------------------------------------

// D = diag(+1, -1, +1, ...): strictly alternating starting at +1, so it ends
// at +1 for odd d and at -1 for even d.
Matrix alternating_sign_diag(Index d);

struct DiagMappedPair {
  DensityMatrix rho_tilde;   // d-dimensional image of the coefficient matrix
  HermitianOperator h_tilde; // N * D^{tensor M} on d^M dimensions
  PartitionLayout layout;    // one party, M copies, local dimension d
};

DiagMappedPair diag_map(const CoefficientMatrix& c, int N, int M);

// Skew information of M copies of the mapped state against H_tilde,
//   I = N^2 [1 - Tr(sqrt(rho_tilde) D sqrt(rho_tilde) D)^M],
// evaluated entirely in d dimensions.
double skew_closed_form(const CoefficientMatrix& c, int N, int M);

// Specialization to c_00 = c_11 = 1/2: I = N^2 [1 - (1 - 4 |c01|^2)^{M/2}].
double ghz_family_skew(double c01_abs, int N, int M);

// Fully explicit d=2 radical form (c real, c11 = 1 - c00); identically 0 for
// c01 = 0.
double qubit_skew_closed_form(double c00, double c01, int N, int M);

// ---------------------------------------------------------------------------
// M-copy QFI evaluators.  All three agree where their domains overlap; they
// trade generality for reach:
//   direct     - builds rho^{tensor M} and H explicitly; arbitrary per-party
//                terms h_n on the d^M party space; capped at kDenseDimCap.
//   symmetric  - identical per-copy d x d terms a_n; exploits permutation
//                invariance of the tensor-power spectrum, reaching M far past
//                the dense cap for low-rank states.
//   sampled    - Monte Carlo version of the symmetric correction sum with a
//                reported standard error; reproducible under a fixed seed.
// ---------------------------------------------------------------------------

double multicopy_qfi_direct(const DensityMatrix& rho,
                            const std::vector<HermitianOperator>& local_terms,
                            const PartitionLayout& layout);

enum class SymmetricPath {
  automatic,  // pick by estimated cost
  kbar_full,  // symmetrized left index, full sum over right index vectors
  pair_class, // multisets over (k,l) index pairs; needed for large M
};

double multicopy_qfi_symmetric(const DensityMatrix& rho,
                               const std::vector<HermitianOperator>& per_copy_terms,
                               const PartitionLayout& layout,
                               SymmetricPath path = SymmetricPath::automatic);

struct SampledQfi {
  double estimate = 0.0;
  double stderr_estimate = 0.0;
  long long samples = 0;
};

// Monte Carlo estimate of the same quantity.  Eigenvalue pairs are drawn from
// the spectrum of rho, so stderr_estimate is trustworthy only when that
// proposal overlaps the rotated observable: for nearly pure states most draws
// contribute zero and the reported error can collapse to 0 while the estimate
// is still biased toward the variance term.  Deterministic for a fixed seed.
SampledQfi multicopy_qfi_sampled(const DensityMatrix& rho,
                                 const std::vector<HermitianOperator>& per_copy_terms,
                                 const PartitionLayout& layout, long long samples,
                                 std::uint64_t seed);

// Exact factored companions for identical per-copy terms (trace products over
// one copy raised to the M-th power): 4(<H^2> - <H>^2) and the skew
// information of the tensor power.  Used for the variance and skew curves at
// copy counts where dense matrices are out of reach.
double multicopy_variance_bound(const DensityMatrix& rho,
                                const std::vector<HermitianOperator>& per_copy_terms,
                                const PartitionLayout& layout);
double multicopy_skew(const DensityMatrix& rho,
                      const std::vector<HermitianOperator>& per_copy_terms,
                      const PartitionLayout& layout);

// ---------------------------------------------------------------------------
// Closed forms and bounds.
// ---------------------------------------------------------------------------

// Gain of M copies of the maximally entangled pair family in the
// infinite-dimension reduction: g = N [1 - (1 - 1/N)^M].
double scaling_gain(double N, double M);

// Upper bound for full-rank states probed with per-copy terms whose squares
// are multiples of the identity (a_n^2 = w_n^2 I, checked):
//   F_Q <= 4 sum_n w_n^{2M} + 4 sum_{n != n'} Tr(rho a^(n) a^(n'))^M.
double full_rank_upper_bound(const DensityMatrix& rho,
                             const std::vector<HermitianOperator>& per_copy_terms,
                             const PartitionLayout& layout);

// Gain bound for two-body-coupling probes of many copies of a singlet-like
// pair: (48M^2 - 32M)/M^4 for even M, (48M^2 - 32M)/(M^2-1)^2 for odd M.
// Below 1 from M = 7 on.
double two_body_coupling_bound(int M);

// QFI of M copies of a ring cluster state (N >= 5) with traceless per-party
// terms on the 2^M party space: every at-most-two-body reduced state is
// maximally mixed, so the variance collapses to 4 sum_n Tr(h_n^2)/2^M.
double cluster_multicopy_qfi(int N, int M, const std::vector<HermitianOperator>& local_terms);

// ---------------------------------------------------------------------------
// Internals exposed for tests and benchmarks: the correction sums behind the
// symmetric evaluator, with the OpenMP versions in qmetro::detail and serial
// references in qmetro::ref.
// ---------------------------------------------------------------------------

namespace detail {

struct SymmetricProblem {
  RealVector lambda;               // support eigenvalues (> 0)
  std::vector<Matrix> a_support;   // per party: <v_i| a^(n) |v_j> on the support
  int copies = 1;
};

double symmetric_correction_kbar(const SymmetricProblem& p);
double symmetric_correction_pairclass(const SymmetricProblem& p);

// Number of multisets of size M over an alphabet of `size` letters, as a
// double (used for dispatch cost estimates).
double multiset_count(int size, int M);

} // namespace detail

namespace ref {
double symmetric_correction_kbar(const detail::SymmetricProblem& p);
}

} // namespace qmetro

#pragma once

#include "qmetro/types.hpp"

namespace qmetro {

// Hot loops shared by the metrology and multicopy evaluators.  Each kernel
// has an OpenMP-parallel implementation in qmetro::kernels and a plain serial
// reference in qmetro::ref used for testing and benchmarking.  The parallel
// versions accumulate per-row partial sums that are reduced in fixed index
// order, so results are independent of the thread count.
//
// Both kernels take the eigenvalues lambda of a state (clamped, ascending or
// not) and T = V^dag H V, the observable rotated into the eigenbasis.

namespace kernels {

// sum_{k,l} 2 (lambda_k - lambda_l)^2 / (lambda_k + lambda_l) |T_kl|^2,
// pairs with lambda_k + lambda_l <= 1e-12 contribute 0.
double qfi_pair_sum(const RealVector& lambda, const Matrix& T);

// sum over pairs with lambda_k, lambda_l > 0 of
// lambda_k lambda_l / (lambda_k + lambda_l) |T_kl|^2.
double support_pair_correction(const RealVector& lambda, const Matrix& T);

} // namespace kernels

namespace ref {

double qfi_pair_sum(const RealVector& lambda, const Matrix& T);
double support_pair_correction(const RealVector& lambda, const Matrix& T);

} // namespace ref

} // namespace qmetro

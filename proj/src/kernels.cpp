#include "qmetro/kernels.hpp"

#include <cmath>
#include <vector>

namespace qmetro {

namespace {

inline double qfi_weight(double lk, double ll) {
  const double s = lk + ll;
  if (s <= 1e-12) return 0.0;
  const double d = lk - ll;
  return 2.0 * d * d / s;
}

inline double support_weight(double lk, double ll) {
  if (lk <= 0.0 || ll <= 0.0) return 0.0;
  return lk * ll / (lk + ll);
}

} // namespace

namespace ref {

double qfi_pair_sum(const RealVector& lambda, const Matrix& T) {
  const Index n = lambda.size();
  double acc = 0.0;
  for (Index k = 0; k < n; ++k)
    for (Index l = 0; l < n; ++l) acc += qfi_weight(lambda(k), lambda(l)) * std::norm(T(k, l));
  return acc;
}

double support_pair_correction(const RealVector& lambda, const Matrix& T) {
  const Index n = lambda.size();
  double acc = 0.0;
  for (Index k = 0; k < n; ++k)
    for (Index l = 0; l < n; ++l) acc += support_weight(lambda(k), lambda(l)) * std::norm(T(k, l));
  return acc;
}

} // namespace ref

namespace kernels {

// Per-row partials reduced in index order keep the result independent of the
// thread count.

double qfi_pair_sum(const RealVector& lambda, const Matrix& T) {
  const Index n = lambda.size();
  std::vector<double> row(n, 0.0);
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < n; ++k) {
    double acc = 0.0;
    for (Index l = 0; l < n; ++l) acc += qfi_weight(lambda(k), lambda(l)) * std::norm(T(k, l));
    row[k] = acc;
  }
  double total = 0.0;
  for (Index k = 0; k < n; ++k) total += row[k];
  return total;
}

double support_pair_correction(const RealVector& lambda, const Matrix& T) {
  const Index n = lambda.size();
  std::vector<double> row(n, 0.0);
#pragma omp parallel for schedule(static)
  for (Index k = 0; k < n; ++k) {
    double acc = 0.0;
    for (Index l = 0; l < n; ++l) acc += support_weight(lambda(k), lambda(l)) * std::norm(T(k, l));
    row[k] = acc;
  }
  double total = 0.0;
  for (Index k = 0; k < n; ++k) total += row[k];
  return total;
}

} // namespace kernels

} // namespace qmetro

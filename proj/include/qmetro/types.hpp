#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

namespace qmetro {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Checked integer power for dimension arithmetic; throws on overflow.
Index ipow(Index base, int exp);

// Site layout for M copies of an N-partite system with uniform local
// dimension d.  Copy-major ordering: the global space factors as
//   (copy 0: party 0..N-1) x (copy 1: party 0..N-1) x ...
// so the site holding party n of copy m has flat index m*N + n, and the
// M-fold tensor power of a single-copy state is a plain repeated Kronecker
// product with no permutation needed.  A collective operator acting on one
// party across all copies lives on sites {n, N+n, 2N+n, ...}.
struct PartitionLayout {
  int parties = 1;   // N
  int copies = 1;    // M
  int local_dim = 2; // d

  int sites() const { return parties * copies; }
  int site_index(int party, int copy) const { return copy * parties + party; }
  std::vector<int> party_sites(int party) const;
  Index party_dim() const;   // d^M
  Index single_copy_dim() const; // d^N
  Index global_dim() const;  // d^(N*M)
  void validate() const;

  PartitionLayout single_copy() const { return {parties, 1, local_dim}; }
  PartitionLayout with_local_dim(int d) const { return {parties, copies, d}; }
};

} // namespace qmetro

#pragma once

#include "qmetro/types.hpp"

namespace qmetro {

// Tolerances shared across the library.
inline constexpr double kHermTol = 1e-12;      // relative Hermiticity slack
inline constexpr double kTraceTol = 1e-10;     // |tr(rho) - 1|
inline constexpr double kPsdTol = 1e-10;       // allowed eigenvalue negativity
inline constexpr double kEigClampTol = 1e-12;  // density eigenvalues below this -> 0

// Largest global dimension the dense paths will allocate.  A complex matrix
// at this size is 268 MB and a full eigendecomposition takes about two
// minutes on one core; anything bigger must go through the structured
// evaluators instead.
inline constexpr Index kDenseDimCap = 4096;

// Validating wrapper for Hermitian matrices (Hamiltonians, local terms,
// observables).  Accepts anything with |A - A^dag|_max <= kHermTol * (1 + |A|_max).
class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix m);
  Index dim() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }

 private:
  Matrix m_;
};

// Validating wrapper for density matrices.  Hermiticity and unit trace are
// always checked; positivity is checked spectrally up to kPsdSpectralCheckDim
// (above that only the necessary diagonal condition is tested, since a full
// eigendecomposition at every construction would dominate runtimes).  The
// trusted() factory skips the spectral check for matrices that are PSD by
// construction (tensor powers and convex mixtures of validated states).
class DensityMatrix {
 public:
  static constexpr Index kPsdSpectralCheckDim = 512;

  explicit DensityMatrix(Matrix m);
  static DensityMatrix trusted(Matrix m);

  Index dim() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }

 private:
  struct trusted_tag {};
  DensityMatrix(Matrix m, trusted_tag);
  Matrix m_;
};

// Eigendecomposition result: ascending real eigenvalues, orthonormal columns.
struct Eigensystem {
  RealVector values;
  Matrix vectors;
};

// Hermitian eigendecomposition (ascending).  Large problems go through
// LAPACK zheevd when available, small ones through Eigen.
Eigensystem eigh(const Matrix& a);
Eigensystem eigh(const HermitianOperator& a);

// Decomposition of a state with the density-matrix clamp applied:
// eigenvalues in [-kEigClampTol, kEigClampTol] are set to 0 and negatives
// beyond that rejected upstream.  Keeps 0/0 out of the QFI weights.
Eigensystem density_eigensystem(const DensityMatrix& rho);

// sqrt(rho) from a clamped decomposition (negatives -> 0 before rooting).
Matrix sqrt_psd(const Eigensystem& es);

Matrix kron(const Matrix& a, const Matrix& b);
Matrix kron_power(const Matrix& a, int m);

// Kronecker product in list order; dimension is the product of dimensions.
HermitianOperator tensor_product(const std::vector<HermitianOperator>& ops);

// Operator acting as `op` on the listed sites (in listed order) and as the
// identity elsewhere, under the copy-major layout.
Matrix embed_on_sites(const Matrix& op, const std::vector<int>& sites,
                      const PartitionLayout& layout);
HermitianOperator embed_on_sites(const HermitianOperator& op,
                                 const std::vector<int>& sites,
                                 const PartitionLayout& layout);

// Flat-index decomposition for a group of sites: a global basis index splits
// as group[a] + rest[t], where a runs over the group's digit patterns (listed
// order, first listed site most significant) and t over the complementary
// sites'.  This is the addressing scheme behind embed_on_sites and
// partial_trace, exposed for callers that apply small per-party operators
// without materializing the dense embedding.
struct SiteGroupOffsets {
  std::vector<Index> group;
  std::vector<Index> rest;
};
SiteGroupOffsets site_group_offsets(const std::vector<int>& sites,
                                    const PartitionLayout& layout);

// Reduced state on the kept sites (in ascending site order).
Matrix partial_trace(const Matrix& rho, const std::vector<int>& keep,
                     const PartitionLayout& layout);
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep,
                            const PartitionLayout& layout);

// Enlarge every site's local dimension by appending zero-amplitude basis
// vectors; entries on the original subspace are preserved exactly.
DensityMatrix embed_local_dim(const DensityMatrix& rho, const PartitionLayout& layout,
                              int new_dim);

// Small fixed operators used throughout.
Matrix identity(Index n);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

} // namespace qmetro

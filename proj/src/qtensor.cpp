#include "qmetro/qtensor.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

#ifdef QMETRO_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace qmetro {

namespace {

std::string dim_str(Index n) { return std::to_string(static_cast<long long>(n)); }

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

void check_square(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw std::invalid_argument(std::string(what) + ": expected a nonempty square matrix, got " +
                                dim_str(m.rows()) + "x" + dim_str(m.cols()));
}

void check_hermitian(const Matrix& m, const char* what) {
  const double dev = max_abs(m - m.adjoint());
  const double tol = kHermTol * (1.0 + max_abs(m));
  if (dev > tol)
    throw std::invalid_argument(std::string(what) + ": not Hermitian (max |A - A^dag| = " +
                                std::to_string(dev) + ")");
}

// Mixed-radix helpers for site-indexed operators.  Site 0 is the most
// significant digit, matching Kronecker-product composition order.
std::vector<Index> site_strides(int sites, Index d) {
  std::vector<Index> s(sites);
  Index acc = 1;
  for (int i = sites - 1; i >= 0; --i) {
    s[i] = acc;
    acc *= d;
  }
  return s;
}

// Flat offsets contributed by one group of sites as their digits count up.
std::vector<Index> group_offsets(const std::vector<Index>& strides, Index d) {
  const int k = static_cast<int>(strides.size());
  Index count = 1;
  for (int i = 0; i < k; ++i) count *= d;
  std::vector<Index> offs(count, 0);
  std::vector<int> digit(k, 0);
  for (Index t = 0; t < count; ++t) {
    Index o = 0;
    for (int i = 0; i < k; ++i) o += digit[i] * strides[i];
    offs[t] = o;
    for (int i = k - 1; i >= 0; --i) {
      if (++digit[i] < d) break;
      digit[i] = 0;
    }
  }
  return offs;
}

} // namespace

Index ipow(Index base, int exp) {
  if (base < 1 || exp < 0) throw std::invalid_argument("ipow: base >= 1 and exp >= 0 required");
  Index r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<Index>::max() / base)
      throw std::overflow_error("ipow: dimension overflow");
    r *= base;
  }
  return r;
}

std::vector<int> PartitionLayout::party_sites(int party) const {
  if (party < 0 || party >= parties)
    throw std::invalid_argument("party_sites: party index out of range");
  std::vector<int> s(copies);
  for (int m = 0; m < copies; ++m) s[m] = site_index(party, m);
  return s;
}

Index PartitionLayout::party_dim() const { return ipow(local_dim, copies); }
Index PartitionLayout::single_copy_dim() const { return ipow(local_dim, parties); }
Index PartitionLayout::global_dim() const { return ipow(local_dim, parties * copies); }

void PartitionLayout::validate() const {
  if (parties < 1 || copies < 1 || local_dim < 2)
    throw std::invalid_argument("PartitionLayout: need parties >= 1, copies >= 1, local_dim >= 2");
  (void)global_dim(); // overflow check
}

HermitianOperator::HermitianOperator(Matrix m) : m_(std::move(m)) {
  check_square(m_, "HermitianOperator");
  check_hermitian(m_, "HermitianOperator");
}

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
  check_square(m_, "DensityMatrix");
  check_hermitian(m_, "DensityMatrix");
  const double tr_dev = std::abs(m_.trace() - Complex(1.0, 0.0));
  if (tr_dev > kTraceTol)
    throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " + std::to_string(tr_dev));
  if (dim() <= kPsdSpectralCheckDim) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPsdTol)
      throw std::invalid_argument("DensityMatrix: negative eigenvalue " +
                                  std::to_string(es.eigenvalues().minCoeff()));
  } else {
    // Necessary condition only; full spectra at this size are too costly to
    // demand at every construction.
    if (m_.diagonal().real().minCoeff() < -kPsdTol)
      throw std::invalid_argument("DensityMatrix: negative diagonal entry");
  }
}

DensityMatrix::DensityMatrix(Matrix m, trusted_tag) : m_(std::move(m)) {
  check_square(m_, "DensityMatrix");
  check_hermitian(m_, "DensityMatrix");
  const double tr_dev = std::abs(m_.trace() - Complex(1.0, 0.0));
  if (tr_dev > kTraceTol)
    throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " + std::to_string(tr_dev));
}

DensityMatrix DensityMatrix::trusted(Matrix m) { return DensityMatrix(std::move(m), trusted_tag{}); }

Eigensystem eigh(const Matrix& a) {
  check_square(a, "eigh");
  check_hermitian(a, "eigh");
  const Index n = a.rows();
#ifdef QMETRO_HAVE_LAPACKE
  if (n >= 128) {
    Eigensystem es;
    es.values.resize(n);
    es.vectors = a;
    const int info = LAPACKE_zheevd(
        LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
        reinterpret_cast<lapack_complex_double*>(es.vectors.data()),
        static_cast<lapack_int>(n), es.values.data());
    if (info != 0) throw std::runtime_error("eigh: zheevd failed with info " + std::to_string(info));
    return es;
  }
#endif
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigh: eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigensystem eigh(const HermitianOperator& a) { return eigh(a.mat()); }

Eigensystem density_eigensystem(const DensityMatrix& rho) {
  Eigensystem es = eigh(rho.mat());
  for (Index i = 0; i < es.values.size(); ++i) {
    if (es.values(i) < -kPsdTol)
      throw std::invalid_argument("density_eigensystem: eigenvalue " + std::to_string(es.values(i)) +
                                  " below the PSD tolerance");
    if (es.values(i) < kEigClampTol) es.values(i) = 0.0;
  }
  return es;
}

Matrix sqrt_psd(const Eigensystem& es) {
  RealVector root = es.values.cwiseMax(0.0).cwiseSqrt();
  return es.vectors * root.asDiagonal() * es.vectors.adjoint();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix kron_power(const Matrix& a, int m) {
  if (m < 1) throw std::invalid_argument("kron_power: exponent must be >= 1");
  Matrix out = a;
  for (int i = 1; i < m; ++i) out = kron(out, a);
  return out;
}

HermitianOperator tensor_product(const std::vector<HermitianOperator>& ops) {
  if (ops.empty()) throw std::invalid_argument("tensor_product: empty operator list");
  Matrix out = ops.front().mat();
  for (std::size_t i = 1; i < ops.size(); ++i) out = kron(out, ops[i].mat());
  return HermitianOperator(std::move(out));
}

Matrix embed_on_sites(const Matrix& op, const std::vector<int>& sites,
                      const PartitionLayout& layout) {
  layout.validate();
  check_square(op, "embed_on_sites");
  const int S = layout.sites();
  const Index d = layout.local_dim;
  const int k = static_cast<int>(sites.size());
  if (k == 0) throw std::invalid_argument("embed_on_sites: empty site list");
  if (op.rows() != ipow(d, k))
    throw std::invalid_argument("embed_on_sites: operator dim " + dim_str(op.rows()) +
                                " does not match d^|sites| = " + dim_str(ipow(d, k)));
  std::vector<char> seen(S, 0);
  for (int s : sites) {
    if (s < 0 || s >= S) throw std::invalid_argument("embed_on_sites: site index out of range");
    if (seen[s]++) throw std::invalid_argument("embed_on_sites: repeated site index");
  }
  const Index dim = layout.global_dim();
  if (dim > kDenseDimCap)
    throw std::invalid_argument("embed_on_sites: global dimension " + dim_str(dim) +
                                " exceeds the dense cap " + dim_str(kDenseDimCap));

  const auto strides = site_strides(S, d);
  std::vector<Index> listed_strides(k);
  for (int j = 0; j < k; ++j) listed_strides[j] = strides[sites[j]];
  std::vector<Index> rest_strides;
  for (int s = 0; s < S; ++s)
    if (!seen[s]) rest_strides.push_back(strides[s]);

  const auto op_offsets = group_offsets(listed_strides, d);
  const auto rest_offsets = group_offsets(rest_strides, d);

  Matrix out = Matrix::Zero(dim, dim);
  const Index od = op.rows();
  for (Index a = 0; a < od; ++a)
    for (Index b = 0; b < od; ++b) {
      const Complex v = op(a, b);
      if (v == Complex(0.0, 0.0)) continue;
      for (const Index o : rest_offsets) out(op_offsets[a] + o, op_offsets[b] + o) += v;
    }
  return out;
}

HermitianOperator embed_on_sites(const HermitianOperator& op, const std::vector<int>& sites,
                                 const PartitionLayout& layout) {
  return HermitianOperator(embed_on_sites(op.mat(), sites, layout));
}

SiteGroupOffsets site_group_offsets(const std::vector<int>& sites,
                                    const PartitionLayout& layout) {
  layout.validate();
  const int S = layout.sites();
  const Index d = layout.local_dim;
  if (sites.empty()) throw std::invalid_argument("site_group_offsets: empty site list");
  std::vector<char> seen(S, 0);
  for (int s : sites) {
    if (s < 0 || s >= S) throw std::invalid_argument("site_group_offsets: site out of range");
    if (seen[s]++) throw std::invalid_argument("site_group_offsets: repeated site index");
  }
  const auto strides = site_strides(S, d);
  std::vector<Index> listed, rest;
  for (int s : sites) listed.push_back(strides[s]);
  for (int s = 0; s < S; ++s)
    if (!seen[s]) rest.push_back(strides[s]);
  SiteGroupOffsets out;
  out.group = group_offsets(listed, d);
  out.rest = group_offsets(rest, d);
  return out;
}

Matrix partial_trace(const Matrix& rho, const std::vector<int>& keep,
                     const PartitionLayout& layout) {
  layout.validate();
  check_square(rho, "partial_trace");
  if (rho.rows() != layout.global_dim())
    throw std::invalid_argument("partial_trace: state dim does not match layout");
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  const int S = layout.sites();
  const Index d = layout.local_dim;
  std::vector<int> kept(keep);
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.size() != keep.size())
    throw std::invalid_argument("partial_trace: repeated site index in keep set");
  if (kept.front() < 0 || kept.back() >= S)
    throw std::invalid_argument("partial_trace: keep site out of range");

  const auto strides = site_strides(S, d);
  std::vector<Index> keep_strides, rest_strides;
  std::vector<char> is_kept(S, 0);
  for (int s : kept) is_kept[s] = 1;
  for (int s = 0; s < S; ++s) (is_kept[s] ? keep_strides : rest_strides).push_back(strides[s]);

  const auto keep_offsets = group_offsets(keep_strides, d);
  const auto rest_offsets = group_offsets(rest_strides, d);

  const Index kd = static_cast<Index>(keep_offsets.size());
  Matrix out = Matrix::Zero(kd, kd);
  for (Index i = 0; i < kd; ++i)
    for (Index j = 0; j < kd; ++j) {
      Complex acc(0.0, 0.0);
      for (const Index o : rest_offsets) acc += rho(keep_offsets[i] + o, keep_offsets[j] + o);
      out(i, j) = acc;
    }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep,
                            const PartitionLayout& layout) {
  return DensityMatrix::trusted(partial_trace(rho.mat(), keep, layout));
}

DensityMatrix embed_local_dim(const DensityMatrix& rho, const PartitionLayout& layout,
                              int new_dim) {
  layout.validate();
  if (new_dim <= layout.local_dim)
    throw std::invalid_argument("embed_local_dim: new_dim must exceed the current local dimension");
  if (rho.dim() != layout.global_dim())
    throw std::invalid_argument("embed_local_dim: state dim does not match layout");
  const int S = layout.sites();
  const Index d = layout.local_dim;
  const Index D = new_dim;
  const Index out_dim = ipow(D, S);
  if (out_dim > kDenseDimCap)
    throw std::invalid_argument("embed_local_dim: target dimension exceeds the dense cap");

  // Each old basis index maps to the new index with the same per-site digits.
  const Index in_dim = rho.dim();
  std::vector<Index> map(in_dim);
  for (Index g = 0; g < in_dim; ++g) {
    Index rem = g, out = 0;
    for (int s = 0; s < S; ++s) {
      const Index digit = (rem / ipow(d, S - 1 - s)) % d;
      out = out * D + digit;
    }
    map[g] = out;
    (void)rem;
  }
  Matrix out = Matrix::Zero(out_dim, out_dim);
  for (Index i = 0; i < in_dim; ++i)
    for (Index j = 0; j < in_dim; ++j) out(map[i], map[j]) = rho.mat()(i, j);
  return DensityMatrix::trusted(std::move(out));
}

Matrix identity(Index n) { return Matrix::Identity(n, n); }

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

} // namespace qmetro

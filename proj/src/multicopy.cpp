#include "qmetro/multicopy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qmetro {

namespace {

// Cost ceiling (rough flop count) for either symmetric-evaluator strategy.
constexpr double kSymmetricBudget = 4e9;

void check_copy_layout(const DensityMatrix& rho,
                       const std::vector<HermitianOperator>& terms,
                       const PartitionLayout& layout, Index term_dim,
                       const char* where) {
  layout.validate();
  if (static_cast<int>(terms.size()) != layout.parties)
    throw std::invalid_argument(std::string(where) + ": need one term per party");
  for (const auto& t : terms)
    if (t.dim() != term_dim)
      throw std::invalid_argument(std::string(where) + ": term dimension mismatch");
  if (rho.dim() != layout.single_copy_dim())
    throw std::invalid_argument(std::string(where) +
                                ": state dimension does not match one copy of the layout");
}

// Per-party operators embedded on the single-copy space, plus the correlator
// matrix G(n,n') = Tr(rho a^(n) a^(n')) (real: the factors act on disjoint
// parties).  Everything the factored M-copy formulas need.
struct OneCopySetup {
  std::vector<Matrix> a_full;
  Eigen::MatrixXd gram;
};

OneCopySetup one_copy_correlators(const DensityMatrix& rho,
                                  const std::vector<HermitianOperator>& terms,
                                  const PartitionLayout& layout) {
  const int N = layout.parties;
  const PartitionLayout one = layout.single_copy();
  OneCopySetup s;
  s.a_full.reserve(N);
  for (int n = 0; n < N; ++n)
    s.a_full.push_back(embed_on_sites(terms[n].mat(), {n}, one));
  s.gram.resize(N, N);
  for (int n = 0; n < N; ++n) {
    const Matrix ra = rho.mat() * s.a_full[n];
    for (int m = n; m < N; ++m) {
      const double g = (ra * s.a_full[m]).trace().real();
      s.gram(n, m) = g;
      s.gram(m, n) = g;
    }
  }
  return s;
}

// Support (eigenvalue > 0 after clamping) data of the single-copy state, with
// each per-party operator restricted to the support basis.
struct SupportData {
  RealVector lambda;
  std::vector<Matrix> a_support;
};

SupportData support_restrict(const DensityMatrix& rho, const std::vector<Matrix>& a_full) {
  const Eigensystem es = density_eigensystem(rho);
  std::vector<Index> idx;
  for (Index i = 0; i < es.values.size(); ++i)
    if (es.values[i] > 0.0) idx.push_back(i);
  const Index r = static_cast<Index>(idx.size());
  SupportData s;
  s.lambda.resize(r);
  Matrix vs(es.vectors.rows(), r);
  for (Index j = 0; j < r; ++j) {
    s.lambda[j] = es.values[idx[j]];
    vs.col(j) = es.vectors.col(idx[j]);
  }
  s.a_support.reserve(a_full.size());
  for (const Matrix& a : a_full) s.a_support.push_back(vs.adjoint() * a * vs);
  return s;
}

// All multisets of size M over an alphabet of `size` letters, flattened as
// multiplicity vectors (row-major, `size` entries per class) in a fixed
// lexicographic order.  The order matters: parallel evaluations are reduced
// class by class in this order, so totals do not depend on the thread count.
std::vector<int> enumerate_multisets(int size, int M, std::size_t& classes) {
  std::vector<int> flat;
  std::vector<int> cur(size, 0);
  std::size_t count = 0;
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == size - 1) {
      cur[pos] = remaining;
      flat.insert(flat.end(), cur.begin(), cur.end());
      ++count;
      return;
    }
    for (int c = remaining; c >= 0; --c) {
      cur[pos] = c;
      self(self, pos + 1, remaining - c);
    }
  };
  rec(rec, 0, M);
  classes = count;
  return flat;
}

double log_add_exp(double a, double b) {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// Depth-first sum over all right index vectors for one symmetrized left
// class.  Partial per-party amplitude products and the eigenvalue product are
// carried down the recursion, so a leaf costs O(N).
struct RightIndexSum {
  const detail::SymmetricProblem& p;
  const std::vector<int>& kseq; // sorted left indices, length M
  double lam_k;
  int N;
  Index r;
  std::vector<Complex> amp;  // (M+1) x N partial products
  std::vector<double> lam_l; // M+1 partial eigenvalue products
  double acc = 0.0;

  RightIndexSum(const detail::SymmetricProblem& prob, const std::vector<int>& k, double lk)
      : p(prob), kseq(k), lam_k(lk), N(static_cast<int>(prob.a_support.size())),
        r(prob.lambda.size()), amp(static_cast<std::size_t>(prob.copies + 1) * N),
        lam_l(prob.copies + 1) {
    for (int n = 0; n < N; ++n) amp[n] = Complex(1.0, 0.0);
    lam_l[0] = 1.0;
  }

  void run(int m) {
    if (m == p.copies) {
      Complex s(0.0, 0.0);
      const Complex* a = amp.data() + static_cast<std::size_t>(m) * N;
      for (int n = 0; n < N; ++n) s += a[n];
      const double ll = lam_l[m];
      acc += lam_k * ll / (lam_k + ll) * std::norm(s);
      return;
    }
    const Complex* cur = amp.data() + static_cast<std::size_t>(m) * N;
    Complex* next = amp.data() + static_cast<std::size_t>(m + 1) * N;
    for (Index l = 0; l < r; ++l) {
      for (int n = 0; n < N; ++n) next[n] = cur[n] * p.a_support[n](kseq[m], l);
      lam_l[m + 1] = lam_l[m] * p.lambda[l];
      run(m + 1);
    }
  }
};

double kbar_class_value(const detail::SymmetricProblem& p, const int* mult) {
  const Index r = p.lambda.size();
  const int M = p.copies;
  double log_w = std::lgamma(M + 1.0);
  for (Index i = 0; i < r; ++i) log_w -= std::lgamma(mult[i] + 1.0);
  const double weight = std::exp(log_w);

  std::vector<int> kseq;
  kseq.reserve(M);
  double lam_k = 1.0;
  for (Index i = 0; i < r; ++i)
    for (int c = 0; c < mult[i]; ++c) {
      kseq.push_back(static_cast<int>(i));
      lam_k *= p.lambda[i];
    }

  RightIndexSum sum(p, kseq, lam_k);
  sum.run(0);
  return weight * sum.acc;
}

// One multiset over (k,l) index pairs.  Multinomial weights and eigenvalue
// products are kept in log space and per-party amplitude products in
// log-magnitude/phase form, so the class stays finite for copy counts in the
// hundreds where the raw products over- or underflow.
double pair_class_value(const detail::SymmetricProblem& p, const int* mult) {
  const Index r = p.lambda.size();
  const int M = p.copies;
  const int N = static_cast<int>(p.a_support.size());
  const int alphabet = static_cast<int>(r * r);

  double log_w = std::lgamma(M + 1.0);
  double log_lk = 0.0;
  double log_ll = 0.0;
  for (int q = 0; q < alphabet; ++q) {
    if (mult[q] == 0) continue;
    log_w -= std::lgamma(mult[q] + 1.0);
    const Index k = q / r;
    const Index l = q % r;
    log_lk += mult[q] * std::log(p.lambda[k]);
    log_ll += mult[q] * std::log(p.lambda[l]);
  }

  std::vector<double> log_mag(N, 0.0);
  std::vector<double> phase(N, 0.0);
  std::vector<bool> vanished(N, false);
  for (int q = 0; q < alphabet; ++q) {
    if (mult[q] == 0) continue;
    const Index k = q / r;
    const Index l = q % r;
    for (int n = 0; n < N; ++n) {
      if (vanished[n]) continue;
      const Complex a = p.a_support[n](k, l);
      const double mag = std::abs(a);
      if (mag == 0.0) {
        vanished[n] = true;
        continue;
      }
      log_mag[n] += mult[q] * std::log(mag);
      phase[n] += mult[q] * std::arg(a);
    }
  }

  double top = -std::numeric_limits<double>::infinity();
  for (int n = 0; n < N; ++n)
    if (!vanished[n]) top = std::max(top, log_mag[n]);
  if (!std::isfinite(top)) return 0.0;

  Complex s(0.0, 0.0);
  for (int n = 0; n < N; ++n)
    if (!vanished[n]) s += std::polar(std::exp(log_mag[n] - top), phase[n]);

  const double log_pre = log_w + log_lk + log_ll - log_add_exp(log_lk, log_ll);
  return std::exp(log_pre + 2.0 * top) * std::norm(s);
}

template <typename ClassValue>
double sum_over_classes_parallel(const std::vector<int>& flat, std::size_t classes,
                                 int stride, ClassValue&& value) {
  std::vector<double> slot(classes);
  const std::int64_t count = static_cast<std::int64_t>(classes);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < count; ++i)
    slot[static_cast<std::size_t>(i)] = value(flat.data() + i * stride);
  double total = 0.0;
  for (std::size_t i = 0; i < classes; ++i) total += slot[i];
  return total;
}

detail::SymmetricProblem make_problem(const DensityMatrix& rho,
                                      const std::vector<HermitianOperator>& terms,
                                      const PartitionLayout& layout,
                                      OneCopySetup& setup_out) {
  check_copy_layout(rho, terms, layout, layout.local_dim, "multicopy symmetric evaluator");
  setup_out = one_copy_correlators(rho, terms, layout);
  SupportData sup = support_restrict(rho, setup_out.a_full);
  return detail::SymmetricProblem{std::move(sup.lambda), std::move(sup.a_support),
                                  layout.copies};
}

double second_moment_power_sum(const Eigen::MatrixXd& gram, int M) {
  double h2 = 0.0;
  for (Eigen::Index n = 0; n < gram.rows(); ++n)
    for (Eigen::Index m = 0; m < gram.cols(); ++m) h2 += std::pow(gram(n, m), M);
  return h2;
}

std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t v) { return static_cast<double>(v >> 11) * 0x1.0p-53; }

} // namespace

namespace detail {

double multiset_count(int size, int M) {
  // C(M + size - 1, size - 1) as a double; overflow to inf is fine, the
  // caller only compares against a budget.
  double c = 1.0;
  for (int i = 1; i < size; ++i) c *= static_cast<double>(M + i) / i;
  return c;
}

double symmetric_correction_kbar(const SymmetricProblem& p) {
  const int r = static_cast<int>(p.lambda.size());
  std::size_t classes = 0;
  const std::vector<int> flat = enumerate_multisets(r, p.copies, classes);
  return sum_over_classes_parallel(flat, classes, r,
                                   [&](const int* mult) { return kbar_class_value(p, mult); });
}

double symmetric_correction_pairclass(const SymmetricProblem& p) {
  const int r = static_cast<int>(p.lambda.size());
  std::size_t classes = 0;
  const std::vector<int> flat = enumerate_multisets(r * r, p.copies, classes);
  return sum_over_classes_parallel(flat, classes, r * r,
                                   [&](const int* mult) { return pair_class_value(p, mult); });
}

} // namespace detail

namespace ref {

double symmetric_correction_kbar(const detail::SymmetricProblem& p) {
  const int r = static_cast<int>(p.lambda.size());
  std::size_t classes = 0;
  const std::vector<int> flat = enumerate_multisets(r, p.copies, classes);
  double total = 0.0;
  for (std::size_t i = 0; i < classes; ++i)
    total += kbar_class_value(p, flat.data() + i * r);
  return total;
}

} // namespace ref

Matrix alternating_sign_diag(Index d) {
  if (d < 2) throw std::invalid_argument("alternating_sign_diag: need dimension >= 2");
  Matrix m = Matrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) m(i, i) = (i % 2 == 0) ? 1.0 : -1.0;
  return m;
}

DiagMappedPair diag_map(const CoefficientMatrix& c, int N, int M) {
  if (N < 1 || M < 1) throw std::invalid_argument("diag_map: N and M must be positive");
  const Index d = c.d();
  const Index dim = ipow(d, M);
  if (dim > kDenseDimCap)
    throw std::invalid_argument("diag_map: mapped dimension d^M exceeds the dense cap");
  PartitionLayout layout;
  layout.parties = 1;
  layout.copies = M;
  layout.local_dim = static_cast<int>(d);
  layout.validate();
  Matrix h = kron_power(alternating_sign_diag(d), M) * static_cast<double>(N);
  return DiagMappedPair{c.as_density(), HermitianOperator(std::move(h)), layout};
}

double skew_closed_form(const CoefficientMatrix& c, int N, int M) {
  if (N < 1 || M < 1)
    throw std::invalid_argument("skew_closed_form: N and M must be positive");
  const Matrix s = sqrt_psd(density_eigensystem(c.as_density()));
  const Matrix d = alternating_sign_diag(c.d());
  double t = (s * d * s * d).trace().real();
  // Exactly within [0, 1] (it is a sum over sqrt(lambda_i lambda_j)
  // |<i|D|j>|^2 terms, Cauchy-Schwarz-bounded by Tr(rho D^2) = 1); clamp
  // roundoff before raising to the M-th power.
  t = std::clamp(t, 0.0, 1.0);
  return static_cast<double>(N) * N * (1.0 - std::pow(t, M));
}

double ghz_family_skew(double c01_abs, int N, int M) {
  if (N < 1 || M < 1)
    throw std::invalid_argument("ghz_family_skew: N and M must be positive");
  c01_abs = std::abs(c01_abs);
  if (c01_abs > 0.5 + 1e-12)
    throw std::invalid_argument("ghz_family_skew: |c01| <= 1/2 required for a valid state");
  const double base = std::max(0.0, 1.0 - 4.0 * c01_abs * c01_abs);
  return static_cast<double>(N) * N * (1.0 - std::pow(base, 0.5 * M));
}

double qubit_skew_closed_form(double c00, double c01, int N, int M) {
  if (N < 1 || M < 1)
    throw std::invalid_argument("qubit_skew_closed_form: N and M must be positive");
  if (c00 < -1e-12 || c00 > 1.0 + 1e-12)
    throw std::invalid_argument("qubit_skew_closed_form: c00 must lie in [0, 1]");
  const double off2 = c01 * c01;
  const double radicand = c00 - c00 * c00 - off2;
  if (radicand < -1e-12)
    throw std::invalid_argument(
        "qubit_skew_closed_form: |c01|^2 <= c00 (1 - c00) required for a valid state");
  if (c01 == 0.0) return 0.0;
  const double num = 8.0 * off2 * std::sqrt(std::max(0.0, radicand)) +
                     4.0 * (c00 - 1.0) * c00 + 1.0;
  const double den = (1.0 - 2.0 * c00) * (1.0 - 2.0 * c00) + 4.0 * off2;
  const double base = std::clamp(num / den, 0.0, 1.0);
  return static_cast<double>(N) * N * (1.0 - std::pow(base, M));
}

double multicopy_qfi_direct(const DensityMatrix& rho,
                            const std::vector<HermitianOperator>& local_terms,
                            const PartitionLayout& layout) {
  check_copy_layout(rho, local_terms, layout, layout.party_dim(), "multicopy_qfi_direct");
  if (layout.global_dim() > kDenseDimCap)
    throw std::invalid_argument(
        "multicopy_qfi_direct: global dimension exceeds the dense cap; use the "
        "symmetric evaluator");
  const DensityMatrix big = DensityMatrix::trusted(kron_power(rho.mat(), layout.copies));
  Matrix h = Matrix::Zero(layout.global_dim(), layout.global_dim());
  for (int n = 0; n < layout.parties; ++n)
    h += embed_on_sites(local_terms[n].mat(), layout.party_sites(n), layout);
  // Deliberately the plain eigengap sum, not the rank-reduced identity the
  // symmetric evaluator is built on, so agreement between the two is a real
  // cross-check.
  return qfi(big, HermitianOperator(std::move(h)));
}

double multicopy_qfi_symmetric(const DensityMatrix& rho,
                               const std::vector<HermitianOperator>& per_copy_terms,
                               const PartitionLayout& layout, SymmetricPath path) {
  OneCopySetup setup;
  const detail::SymmetricProblem prob = make_problem(rho, per_copy_terms, layout, setup);
  const double h2 = second_moment_power_sum(setup.gram, layout.copies);

  const int r = static_cast<int>(prob.lambda.size());
  const int N = layout.parties;
  const int M = layout.copies;
  const double right_sweep = std::pow(static_cast<double>(r), M);
  const double kbar_cost =
      detail::multiset_count(r, M) * right_sweep * (N + 1.0) * M;
  const double pair_cost =
      detail::multiset_count(r * r, M) * (r * r + 2.0 * N) * 4.0;

  if (path == SymmetricPath::automatic) {
    const bool kbar_ok = kbar_cost <= kSymmetricBudget;
    const bool pair_ok = pair_cost <= kSymmetricBudget;
    if (!kbar_ok && !pair_ok)
      throw std::invalid_argument(
          "multicopy_qfi_symmetric: rank/copy combination exceeds the cost budget "
          "of both strategies; use the sampled evaluator");
    path = (kbar_ok && (!pair_ok || kbar_cost <= pair_cost)) ? SymmetricPath::kbar_full
                                                             : SymmetricPath::pair_class;
  } else {
    const double cost = (path == SymmetricPath::kbar_full) ? kbar_cost : pair_cost;
    if (cost > kSymmetricBudget)
      throw std::invalid_argument(
          "multicopy_qfi_symmetric: requested strategy exceeds the cost budget");
  }

  const double corr = (path == SymmetricPath::kbar_full)
                          ? detail::symmetric_correction_kbar(prob)
                          : detail::symmetric_correction_pairclass(prob);
  return 4.0 * h2 - 8.0 * corr;
}

SampledQfi multicopy_qfi_sampled(const DensityMatrix& rho,
                                 const std::vector<HermitianOperator>& per_copy_terms,
                                 const PartitionLayout& layout, long long samples,
                                 std::uint64_t seed) {
  if (samples < 1)
    throw std::invalid_argument("multicopy_qfi_sampled: need at least one sample");
  OneCopySetup setup;
  const detail::SymmetricProblem prob = make_problem(rho, per_copy_terms, layout, setup);
  const int M = layout.copies;
  const double h2 = second_moment_power_sum(setup.gram, M);

  const Index r = prob.lambda.size();
  const int N = static_cast<int>(prob.a_support.size());
  std::vector<double> cum(r);
  double run = 0.0;
  for (Index i = 0; i < r; ++i) {
    run += prob.lambda[i];
    cum[i] = run;
  }
  const double mass = run; // 1 minus whatever the clamp removed

  std::vector<double> x(static_cast<std::size_t>(samples));
#pragma omp parallel for schedule(static)
  for (long long s = 0; s < samples; ++s) {
    std::uint64_t state = seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(s + 1));
    auto draw = [&]() {
      const double u = uniform01(splitmix64_next(state)) * mass;
      Index i = 0;
      while (i < r - 1 && u >= cum[i]) ++i;
      return i;
    };
    std::vector<Complex> amp(N, Complex(1.0, 0.0));
    double lam_k = 1.0;
    double lam_l = 1.0;
    for (int m = 0; m < M; ++m) {
      const Index k = draw();
      const Index l = draw();
      lam_k *= prob.lambda[k];
      lam_l *= prob.lambda[l];
      for (int n = 0; n < N; ++n) amp[n] *= prob.a_support[n](k, l);
    }
    Complex total(0.0, 0.0);
    for (int n = 0; n < N; ++n) total += amp[n];
    const double den = lam_k + lam_l;
    x[static_cast<std::size_t>(s)] = (den > 0.0) ? std::norm(total) / den : 0.0;
  }

  double mean = 0.0;
  for (long long s = 0; s < samples; ++s) mean += x[static_cast<std::size_t>(s)];
  mean /= static_cast<double>(samples);
  double var = 0.0;
  if (samples > 1) {
    for (long long s = 0; s < samples; ++s) {
      const double d = x[static_cast<std::size_t>(s)] - mean;
      var += d * d;
    }
    var /= static_cast<double>(samples - 1);
  }
  const double scale = std::pow(mass, 2.0 * M);
  SampledQfi out;
  out.estimate = 4.0 * h2 - 8.0 * scale * mean;
  out.stderr_estimate = 8.0 * scale * std::sqrt(var / static_cast<double>(samples));
  out.samples = samples;
  return out;
}

double multicopy_variance_bound(const DensityMatrix& rho,
                                const std::vector<HermitianOperator>& per_copy_terms,
                                const PartitionLayout& layout) {
  check_copy_layout(rho, per_copy_terms, layout, layout.local_dim,
                    "multicopy_variance_bound");
  const OneCopySetup setup = one_copy_correlators(rho, per_copy_terms, layout);
  const int M = layout.copies;
  const double h2 = second_moment_power_sum(setup.gram, M);
  double first = 0.0;
  for (const Matrix& a : setup.a_full)
    first += std::pow((rho.mat() * a).trace().real(), M);
  return 4.0 * (h2 - first * first);
}

double multicopy_skew(const DensityMatrix& rho,
                      const std::vector<HermitianOperator>& per_copy_terms,
                      const PartitionLayout& layout) {
  check_copy_layout(rho, per_copy_terms, layout, layout.local_dim, "multicopy_skew");
  const OneCopySetup setup = one_copy_correlators(rho, per_copy_terms, layout);
  const int N = layout.parties;
  const int M = layout.copies;
  const Matrix root = sqrt_psd(density_eigensystem(rho));
  double total = 0.0;
  for (int n = 0; n < N; ++n) {
    const Matrix sa = root * setup.a_full[n] * root;
    for (int m = 0; m < N; ++m) {
      const double k = (sa * setup.a_full[m]).trace().real();
      total += std::pow(setup.gram(n, m), M) - std::pow(k, M);
    }
  }
  return total;
}

double scaling_gain(double N, double M) {
  if (!(N >= 2.0) || !(M >= 1.0))
    throw std::invalid_argument("scaling_gain: need N >= 2 and M >= 1");
  // N (1 - (1 - 1/N)^M), written to stay accurate when (1-1/N)^M is close
  // to 1 (N huge) or close to 0 (M huge).
  return N * (-std::expm1(M * std::log1p(-1.0 / N)));
}

double full_rank_upper_bound(const DensityMatrix& rho,
                             const std::vector<HermitianOperator>& per_copy_terms,
                             const PartitionLayout& layout) {
  check_copy_layout(rho, per_copy_terms, layout, layout.local_dim, "full_rank_upper_bound");
  const Index d = layout.local_dim;
  const Matrix id = identity(d);
  for (const auto& t : per_copy_terms) {
    const Matrix sq = t.mat() * t.mat();
    const double w2 = sq.trace().real() / static_cast<double>(d);
    if ((sq - w2 * id).cwiseAbs().maxCoeff() > kPsdTol * (1.0 + std::abs(w2)))
      throw std::invalid_argument(
          "full_rank_upper_bound: each per-copy term must square to a multiple of "
          "the identity");
  }
  const OneCopySetup setup = one_copy_correlators(rho, per_copy_terms, layout);
  // With a_n^2 = w_n^2 I the diagonal correlator is exactly w_n^2, so the
  // bound is the plain power sum of the one-copy correlator matrix.
  return 4.0 * second_moment_power_sum(setup.gram, layout.copies);
}

double two_body_coupling_bound(int M) {
  if (M < 2) throw std::invalid_argument("two_body_coupling_bound: M must be >= 2");
  const double m = static_cast<double>(M);
  const double num = 48.0 * m * m - 32.0 * m;
  const double den = (M % 2 == 0) ? m * m * m * m : (m * m - 1.0) * (m * m - 1.0);
  return num / den;
}

double cluster_multicopy_qfi(int N, int M,
                             const std::vector<HermitianOperator>& local_terms) {
  if (N < 5)
    throw std::invalid_argument(
        "cluster_multicopy_qfi: the collapse to a pure second moment needs all "
        "one- and two-party reductions maximally mixed, which holds from N = 5 on");
  if (M < 1) throw std::invalid_argument("cluster_multicopy_qfi: M must be >= 1");
  if (static_cast<int>(local_terms.size()) != N)
    throw std::invalid_argument("cluster_multicopy_qfi: need one term per party");
  const Index dim = ipow(2, M);
  double sum = 0.0;
  for (const auto& t : local_terms) {
    if (t.dim() != dim)
      throw std::invalid_argument("cluster_multicopy_qfi: terms must act on 2^M dimensions");
    const double scale = t.mat().cwiseAbs().maxCoeff();
    if (std::abs(t.mat().trace().real()) > kTraceTol * (1.0 + scale))
      throw std::invalid_argument("cluster_multicopy_qfi: terms must be traceless");
    sum += t.mat().squaredNorm();
  }
  return 4.0 * sum / static_cast<double>(dim);
}

} // namespace qmetro

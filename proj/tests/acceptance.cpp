// Release gate: every criterion below runs at a pinned tolerance and prints
// exactly one [PASS]/[FAIL] line.  Run all with no arguments or a single one
// with --criterion N.  Exit status is nonzero if any executed criterion fails.

#include "qmetro/experiments.hpp"
#include "qmetro/metrology.hpp"
#include "qmetro/multicopy.hpp"
#include "qmetro/optimizer.hpp"
#include "qmetro/qtensor.hpp"
#include "qmetro/serialize.hpp"
#include "qmetro/states.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace qmetro;
namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::abs(b));
}

Matrix random_psd_unit_trace(Index d, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  Matrix c = a * a.adjoint();
  c /= c.trace().real();
  return (c + Matrix(c.adjoint())) / 2.0;
}

Matrix random_traceless_hermitian(Index d, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
  Matrix h = (a + Matrix(a.adjoint())) / 2.0;
  h -= (h.trace() / static_cast<double>(d)) * identity(d);
  return h;
}

// Collective Hamiltonian: the same party-space term embedded on every party.
Matrix collective(const Matrix& party_term, const PartitionLayout& layout) {
  Matrix h = Matrix::Zero(layout.global_dim(), layout.global_dim());
  for (int n = 0; n < layout.parties; ++n)
    h += embed_on_sites(party_term, layout.party_sites(n), layout);
  return h;
}

// Scratch directory that cleans up after itself.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("qmetro_accept_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// --- criterion 1: closed-form skew information of the GHZ-like family ------
// I(c01, N, M) from ghz_family_skew must match skew_information evaluated on
// the explicit M-fold tensor power with the collective alternating-sign
// Hamiltonian.  The root of the power is the power of the root, so the
// three-argument overload avoids rooting a 4096-dim matrix spectrally.

bool crit1(std::ostringstream& why) {
  const Matrix d2 = alternating_sign_diag(2);
  for (int N : {2, 3})
    for (int M = 1; M <= 4; ++M)
      for (double c01 : {0.1, 0.3, 0.5}) {
        Matrix c(2, 2);
        c << 0.5, c01, c01, 0.5;
        const auto st = diagonal_subspace_state(CoefficientMatrix(c), N);
        const Matrix root1 = sqrt_psd(density_eigensystem(st.rho));
        const DensityMatrix big = DensityMatrix::trusted(kron_power(st.rho.mat(), M));
        const Matrix root = kron_power(root1, M);
        const PartitionLayout lay{N, M, 2};
        const Matrix h = collective(kron_power(d2, M), lay);
        const double direct = skew_information(big, HermitianOperator(h), root);
        const double closed = ghz_family_skew(c01, N, M);
        if (!close_rel(direct, closed, 1e-8)) {
          why << "N=" << N << " M=" << M << " c01=" << c01 << ": closed form "
              << fmt(closed) << " vs direct " << fmt(direct);
          return false;
        }
      }
  return true;
}

// --- criterion 2: the diagonal-subspace reduction preserves the QFI --------
// For random PSD coefficient matrices c, the QFI of the N-party state on
// d^(NM) dimensions equals the QFI of the mapped pair on d^M dimensions.

bool crit2(std::ostringstream& why) {
  for (int d : {2, 3})
    for (int N : {2, 3})
      for (int M = 1; M <= 3; ++M) {
        const PartitionLayout lay{N, M, d};
        const Matrix dd = alternating_sign_diag(d);
        const bool dense_ok = lay.global_dim() <= kDenseDimCap;
        for (int i = 0; i < 20; ++i) {
          const unsigned seed = ((static_cast<unsigned>(d) * 10 + N) * 10 + M) * 100 + i;
          const CoefficientMatrix c(random_psd_unit_trace(d, seed));
          const auto st = diagonal_subspace_state(c, N);
          double lhs;
          if (dense_ok) {
            const std::vector<HermitianOperator> terms(
                static_cast<std::size_t>(N), HermitianOperator(kron_power(dd, M)));
            lhs = multicopy_qfi_direct(st.rho, terms, lay);
          } else {
            const std::vector<HermitianOperator> per_copy(
                static_cast<std::size_t>(N), HermitianOperator(dd));
            lhs = multicopy_qfi_symmetric(st.rho, per_copy, lay);
          }
          const auto mp = diag_map(c, N, M);
          const double rhs =
              qfi(DensityMatrix::trusted(kron_power(mp.rho_tilde.mat(), M)), mp.h_tilde);
          if (!close_rel(lhs, rhs, 1e-8)) {
            why << "d=" << d << " N=" << N << " M=" << M << " sample " << i
                << ": full " << fmt(lhs) << " vs mapped " << fmt(rhs);
            return false;
          }
        }
      }
  return true;
}

// --- criterion 3: spectrum-split probes on uniform superpositions ----------
// The closed forms and a dense evaluation must both give F = 16 (gain 4/3)
// for N = 3 with d = 3 (one singled-out slot) and d = 4 (slot pair).

bool crit3(std::ostringstream& why) {
  {
    Vector s(3);
    s.setConstant(1.0 / std::sqrt(3.0));
    const SchmidtVector sv(s);
    const double closed = obs2_qfi_odd(sv, 3);
    const auto st = schmidt_state(sv, 3);
    const HermitianOperator h = obs2_hamiltonian_odd(3);
    const auto rep = gain_for(st.rho, {h, h, h}, st.layout);
    if (std::abs(closed - 16.0) > 1e-8 || std::abs(rep.fq - 16.0) > 1e-8 ||
        std::abs(rep.gain - 4.0 / 3.0) > 1e-8) {
      why << "d=3: closed " << fmt(closed) << ", dense " << fmt(rep.fq)
          << ", gain " << fmt(rep.gain);
      return false;
    }
  }
  {
    Vector s(4);
    const double r6 = 1.0 / std::sqrt(6.0);
    s << r6, r6, r6, 1.0 / std::sqrt(2.0);
    const SchmidtVector sv(s);
    const double closed = obs2_qfi_even(sv, 3);
    const auto st = schmidt_state(sv, 3);
    const HermitianOperator h = obs2_hamiltonian_even(4);
    const auto rep = gain_for(st.rho, {h, h, h}, st.layout);
    if (std::abs(closed - 16.0) > 1e-8 || std::abs(rep.fq - 16.0) > 1e-8) {
      why << "d=4: closed " << fmt(closed) << ", dense " << fmt(rep.fq);
      return false;
    }
  }
  return true;
}

// --- criterion 4: usefulness boundary of two-component superpositions ------
// With pair entanglement E straddling 1/N by 1e-3, the optimized gain must
// straddle 1 by at least 1e-4 on the correct sides.

bool crit4(std::ostringstream& why) {
  const OptimizerConfig opt;
  for (int N : {3, 4, 5})
    for (int sgn : {-1, +1}) {
      const double e = 1.0 / N + sgn * 1e-3;
      const double s0sq = (1.0 - std::sqrt(1.0 - e)) / 2.0;
      Vector s(2);
      s << std::sqrt(s0sq), std::sqrt(1.0 - s0sq);
      const auto st = schmidt_state(SchmidtVector(s), N);
      const GainReport rep = optimize_gain(st.rho, st.layout, opt);
      if (sgn < 0 && rep.gain > 1.0 + 1e-4) {
        why << "N=" << N << " below threshold: gain " << fmt(rep.gain);
        return false;
      }
      if (sgn > 0 && rep.gain < 1.0 + 1e-4) {
        why << "N=" << N << " above threshold: gain " << fmt(rep.gain);
        return false;
      }
    }
  return true;
}

// --- criterion 5: shape of the isotropic multicopy gain curve --------------
// Collective z probes, F_sep = 8 at every M.  Strong noise (p = 0.52) keeps
// F below 8 while still increasing with M; weak noise (p = 0.9) is useful up
// to M = 3 and decays beyond M = 4.  The full-rank envelope 8 + 8 p^M caps
// both curves.

bool crit5(std::ostringstream& why) {
  const HermitianOperator z{pauli_z()};
  const std::vector<HermitianOperator> zz{z, z};
  for (double p : {0.9, 0.52}) {
    const auto st = isotropic_two_qubit(p);
    std::vector<double> f;
    for (int M = 1; M <= 7; ++M)
      f.push_back(multicopy_qfi_symmetric(st.rho, zz, {2, M, 2}));
    for (int M = 1; M <= 7; ++M)
      if (f[M - 1] > 8.0 + 8.0 * std::pow(p, M) + 1e-9) {
        why << "p=" << p << " M=" << M << ": F " << fmt(f[M - 1])
            << " above envelope " << fmt(8.0 + 8.0 * std::pow(p, M));
        return false;
      }
    if (p > 0.8) {
      for (int M : {1, 2, 3})
        if (f[M - 1] <= 8.0) {
          why << "p=" << p << " M=" << M << ": F " << fmt(f[M - 1]) << " not above 8";
          return false;
        }
      for (int M = 4; M < 7; ++M)
        if (f[M - 1] <= f[M]) {
          why << "p=" << p << ": F not strictly decreasing at M=" << M + 1;
          return false;
        }
    } else {
      for (int M = 1; M <= 7; ++M)
        if (f[M - 1] >= 8.0) {
          why << "p=" << p << " M=" << M << ": F " << fmt(f[M - 1]) << " reaches 8";
          return false;
        }
      for (int M = 1; M < 7; ++M)
        if (f[M - 1] >= f[M]) {
          why << "p=" << p << ": F not increasing at M=" << M + 1;
          return false;
        }
    }
  }
  return true;
}

// --- criterion 6: gain of the maximally entangled pair family --------------
// g(N, M) = N (1 - (1 - 1/N)^M).  The middle check asks for g(1e6, 2000)
// within 1 of 2000, but the closed form expands as M - M^2/(2N) + ..., which
// is 1998.002 here; the gap of 1.998 exceeds the window, so that check is
// expected to fail and reports the measured value.

bool crit6(std::ostringstream& why) {
  bool ok = true;
  const double g1 = scaling_gain(10.0, 2000.0);
  if (std::abs(g1 - 10.0) > 1e-3) {
    why << "g(10, 2000) = " << fmt(g1) << "; ";
    ok = false;
  }
  const double g2 = scaling_gain(1e6, 2000.0);
  if (std::abs(g2 - 2000.0) > 1.0) {
    why << "g(1e6, 2000) = " << fmt(g2) << ", off 2000 by " << fmt(std::abs(g2 - 2000.0))
        << " > 1; ";
    ok = false;
  }
  const double g3 = scaling_gain(3000.0, 3000.0) / 3000.0;
  if (std::abs(g3 - (1.0 - std::exp(-1.0))) > 1e-4) {
    why << "g(3000, 3000)/3000 = " << fmt(g3) << "; ";
    ok = false;
  }
  return ok;
}

// --- criterion 7: ring cluster states carry no metrological gain -----------
// Every two-site reduction of the five-site ring is maximally mixed, the
// trace-product closed form agrees with 4 Var on the explicit copies, and the
// optimizer cannot push the gain above 1.

bool crit7(std::ostringstream& why) {
  const auto ring = ring_cluster_state(5);
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) {
      const Matrix red = partial_trace(ring.rho.mat(), {i, j}, ring.layout);
      const double dev = (red - identity(4) / 4.0).cwiseAbs().maxCoeff();
      if (dev > 1e-10) {
        why << "reduction {" << i << "," << j << "} deviates by " << fmt(dev);
        return false;
      }
    }
  const OptimizerConfig opt;
  for (int M : {1, 2}) {
    const PartitionLayout lay{5, M, 2};
    std::vector<HermitianOperator> terms;
    for (int n = 0; n < 5; ++n)
      terms.emplace_back(random_traceless_hermitian(Index(1) << M, 700u + 10u * M + n));
    const double closed = cluster_multicopy_qfi(5, M, terms);
    const DensityMatrix big = DensityMatrix::trusted(kron_power(ring.rho.mat(), M));
    Matrix h = Matrix::Zero(lay.global_dim(), lay.global_dim());
    for (int n = 0; n < 5; ++n)
      h += embed_on_sites(terms[n].mat(), lay.party_sites(n), lay);
    const double v4 = variance_bound(big, HermitianOperator(h));
    if (!close_rel(closed, v4, 1e-8)) {
      why << "M=" << M << ": closed " << fmt(closed) << " vs 4 Var " << fmt(v4);
      return false;
    }
    const GainReport rep = optimize_gain(big, lay, opt);
    if (rep.gain > 1.0 + 1e-4) {
      why << "M=" << M << ": optimized gain " << fmt(rep.gain);
      return false;
    }
  }
  return true;
}

// --- criterion 8: two-copy Bell mixtures hold gain 2 exactly ---------------

bool crit8(std::ostringstream& why) {
  const HermitianOperator zz{kron(pauli_z(), pauli_z())};
  for (double p : {0.0, 0.3, 0.5, 1.0}) {
    const auto st = two_copy_bell_mixture(p);
    const auto rep = gain_for(st.rho, {zz, zz}, st.layout);
    if (std::abs(rep.gain - 2.0) > 1e-10) {
      why << "p=" << p << ": gain " << fmt(rep.gain);
      return false;
    }
  }
  return true;
}

// --- criterion 9: pairwise-coupling gain bound table ------------------------

bool crit9(std::ostringstream& why) {
  const double b2 = two_body_coupling_bound(2);
  const double b7 = two_body_coupling_bound(7);
  const double b8 = two_body_coupling_bound(8);
  if (std::abs(b2 - 8.0) > 1e-12 || std::abs(b7 - 2128.0 / 2304.0) > 1e-12 ||
      std::abs(b8 - 0.6875) > 1e-12) {
    why << "b(2)=" << fmt(b2) << " b(7)=" << fmt(b7) << " b(8)=" << fmt(b8);
    return false;
  }
  for (int M = 7; M <= 200; ++M)
    if (two_body_coupling_bound(M) >= 1.0) {
      why << "b(" << M << ") = " << fmt(two_body_coupling_bound(M)) << " not below 1";
      return false;
    }
  return true;
}

// --- criterion 10: symmetric evaluator against the dense path ---------------
// Identical collective z probes on isotropic states; the structured evaluator
// must agree with the dense one, and the sampled estimator must land within
// three standard errors at 1e5 samples.

bool crit10(std::ostringstream& why) {
  const HermitianOperator z{pauli_z()};
  const std::vector<HermitianOperator> zz{z, z};
  double sym_ref = 0.0;
  for (double p : {0.52, 0.9}) {
    const auto st = isotropic_two_qubit(p);
    for (int M = 2; M <= 6; ++M) {
      const PartitionLayout lay{2, M, 2};
      const std::vector<HermitianOperator> lifted(
          2, HermitianOperator(kron_power(pauli_z(), M)));
      const double direct = multicopy_qfi_direct(st.rho, lifted, lay);
      const double sym = multicopy_qfi_symmetric(st.rho, zz, lay);
      if (!close_rel(sym, direct, 1e-7)) {
        why << "p=" << p << " M=" << M << ": symmetric " << fmt(sym)
            << " vs direct " << fmt(direct);
        return false;
      }
      if (p < 0.8 && M == 3) sym_ref = sym;
    }
  }
  // The sampling proposal follows the state spectrum, so the statistical
  // check runs where that proposal covers the rotated observable: the nearly
  // pure p = 0.9 state would need far more than 1e5 samples per hit.
  const auto st = isotropic_two_qubit(0.52);
  const SampledQfi s = multicopy_qfi_sampled(st.rho, zz, {2, 3, 2}, 100000, 2026);
  if (s.stderr_estimate <= 0.0 || std::abs(s.estimate - sym_ref) > 3.0 * s.stderr_estimate) {
    why << "sampled " << fmt(s.estimate) << " vs exact " << fmt(sym_ref)
        << " (stderr " << fmt(s.stderr_estimate) << ")";
    return false;
  }
  return true;
}

// --- criterion 11: usefulness onset of the embedded white-noise GHZ family --
// The scan driver must locate the gain-1 crossing of the d = 3 embedding at
// p = 0.4396 within 2e-3, and embedding must never lose gain against the
// plain qubit family.

bool crit11(std::ostringstream& why) {
  const TempDir tmp("figs1");
  ExperimentConfig cfg;
  cfg.outdir = tmp.path.string();
  const auto res = run_figs1({3}, {0.40, 0.42, 0.44, 0.46, 0.48}, cfg);
  if (!res.ok) {
    why << "scan reported errors: " << res.summary;
    return false;
  }
  Json j;
  std::ifstream in(tmp.path / "figS1.json");
  in >> j;
  const Json& th = j["thresholds"]["g_d3"];
  if (th.is_null()) {
    why << "no gain-1 crossing found in [0.40, 0.48]";
    return false;
  }
  const double onset = th.get<double>();
  if (std::abs(onset - 0.4396) > 2e-3) {
    why << "onset " << fmt(onset) << " not within 2e-3 of 0.4396";
    return false;
  }
  const OptimizerConfig opt;
  const PartitionLayout lq{3, 1, 2};
  for (double p : {0.5, 0.6}) {
    const auto qubit = noisy_ghz_white(p, 3);
    const double orig = optimize_gain(qubit.rho, lq, opt).gain;
    const double emb =
        optimize_gain(embed_local_dim(qubit.rho, lq, 3), lq.with_local_dim(3), opt).gain;
    if (emb < orig - 1e-6) {
      why << "p=" << p << ": embedded gain " << fmt(emb) << " below qubit gain "
          << fmt(orig);
      return false;
    }
  }
  return true;
}

// --- criterion 12: one- vs two-copy gain of the W / flipped-W mixture ------
// Both optimized curves dip at p = 1/2, the two-copy curve dominates the
// single-copy curve on the whole grid, and the pure endpoints gain nothing
// from the second copy.

bool crit12(std::ostringstream& why) {
  const TempDir tmp("figs2");
  ExperimentConfig cfg;
  cfg.outdir = tmp.path.string();
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
  const auto res = run_figs2(grid, cfg);
  if (!res.ok) {
    why << "driver reported errors: " << res.summary;
    return false;
  }
  const CsvTable t = read_csv((tmp.path / "figS2.csv").string());
  if (t.columns != std::vector<std::string>{"p", "g_M1", "g_M2"} || t.rows.size() != 21) {
    why << "unexpected table shape";
    return false;
  }
  for (std::size_t col : {1u, 2u})
    for (std::size_t i = 0; i < 21; ++i)
      if (t.rows[10][col] > t.rows[i][col] + 1e-9) {
        why << "column " << t.columns[col] << " not minimal at p=0.5 (row " << i << ")";
        return false;
      }
  for (std::size_t i = 0; i < 21; ++i)
    if (t.rows[i][2] < t.rows[i][1] - 1e-9) {
      why << "two-copy gain below single-copy at p=" << fmt(t.rows[i][0]);
      return false;
    }
  for (std::size_t i : {0u, 20u})
    if (std::abs(t.rows[i][2] - t.rows[i][1]) > 1e-3) {
      why << "endpoint p=" << fmt(t.rows[i][0]) << ": one copy " << fmt(t.rows[i][1])
          << " vs two copies " << fmt(t.rows[i][2]);
      return false;
    }
  return true;
}

struct Criterion {
  int id;
  const char* what;
  bool (*run)(std::ostringstream&);
};

const Criterion kCriteria[] = {
    {1, "tensor-power skew information matches the closed form", crit1},
    {2, "diagonal-subspace reduction preserves the QFI", crit2},
    {3, "spectrum-split probes reach F = 16 at N = 3", crit3},
    {4, "pair-entanglement boundary straddles gain 1", crit4},
    {5, "isotropic multicopy gain curve has the expected shape", crit5},
    {6, "entangled-pair family gain asymptotics", crit6},
    {7, "ring cluster states yield no gain", crit7},
    {8, "two-copy Bell mixtures hold gain 2", crit8},
    {9, "pairwise-coupling bound table", crit9},
    {10, "symmetric evaluator matches dense and sampled paths", crit10},
    {11, "embedded white-noise GHZ onset located", crit11},
    {12, "W mixture: two copies dominate one copy", crit12},
};

} // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  int failures = 0;
  int ran = 0;
  for (const Criterion& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    ++ran;
    std::ostringstream why;
    bool ok = false;
    try {
      ok = c.run(why);
    } catch (const std::exception& e) {
      why << "exception: " << e.what();
    }
    if (ok) {
      std::printf("[PASS] criterion %d: %s\n", c.id, c.what);
    } else {
      std::printf("[FAIL] criterion %d: %s (%s)\n", c.id, c.what, why.str().c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion %d\n", only);
    return 2;
  }
  return failures == 0 ? 0 : 1;
}

#include "doctest.h"

#include "qmetro/metrology.hpp"
#include "qmetro/qtensor.hpp"
#include "qmetro/states.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace qmetro;

namespace {

Matrix random_hermitian(Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = Complex(dist(gen), dist(gen));
  return Matrix((a + a.adjoint()).eval() / 2.0);
}

DensityMatrix random_density(Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = Complex(dist(gen), dist(gen));
  Matrix rho = a * a.adjoint();
  rho /= rho.trace();
  return DensityMatrix(rho);
}

// H = sum_n z acting on party n of a one-copy qubit layout
HermitianOperator collective_z(int N) {
  const PartitionLayout layout{N, 1, 2};
  Matrix H = Matrix::Zero(layout.global_dim(), layout.global_dim());
  for (int n = 0; n < N; ++n) H += embed_on_sites(pauli_z(), {n}, layout);
  return HermitianOperator(std::move(H));
}

Vector real_vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = Complex(x, 0.0);
  return v;
}

} // namespace

TEST_CASE("qfi: collective rotation on pure GHZ") {
  const auto ghz = ghz_state(3);
  const HermitianOperator H = collective_z(3);
  CHECK(qfi(ghz.rho, H) == doctest::Approx(36.0).epsilon(1e-10));
  // pure state saturates the variance bound
  CHECK(variance_bound(ghz.rho, H) == doctest::Approx(36.0).epsilon(1e-10));
  // the eigensystem overload sees the same state
  const Eigensystem es = density_eigensystem(ghz.rho);
  CHECK(qfi(es, H.mat()) == doctest::Approx(36.0).epsilon(1e-10));
}

TEST_CASE("qfi: product eigenstate carries no phase information") {
  Matrix rho = Matrix::Zero(4, 4);
  rho(0, 0) = 1.0; // |00><00|
  const PartitionLayout layout{2, 1, 2};
  Matrix H = embed_on_sites(pauli_z(), {0}, layout) + embed_on_sites(pauli_z(), {1}, layout);
  CHECK(qfi(DensityMatrix(rho), HermitianOperator(std::move(H))) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("qfi: isotropic two-qubit closed form 32 p^2 / (1+p)") {
  const PartitionLayout layout{2, 1, 2};
  for (double p : {0.9, 0.3}) {
    const auto st = isotropic_two_qubit(p);
    Matrix H = embed_on_sites(pauli_z(), {0}, layout) + embed_on_sites(pauli_z(), {1}, layout);
    const HermitianOperator Hop(std::move(H));
    const double expected = 32.0 * p * p / (1.0 + p);
    CHECK(qfi(st.rho, Hop) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(qfi_rank_reduced(st.rho, Hop) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("qfi agrees with the rank-reduced form") {
  SUBCASE("rank-2 dephased GHZ") {
    const auto st = ghz_diag_noise(0.6, 3);
    const HermitianOperator H = collective_z(3);
    const double a = qfi(st.rho, H);
    const double b = qfi_rank_reduced(st.rho, H);
    CHECK(std::abs(a - b) <= 1e-10 * (1.0 + std::abs(a)));
  }
  SUBCASE("pure state") {
    const auto ghz = ghz_state(3);
    CHECK(qfi_rank_reduced(ghz.rho, collective_z(3)) == doctest::Approx(36.0).epsilon(1e-10));
  }
  SUBCASE("maximally mixed state has zero QFI") {
    const DensityMatrix mixed(Matrix(Matrix::Identity(4, 4) / 4.0));
    const Matrix H = random_hermitian(4, 11);
    CHECK(std::abs(qfi(mixed, HermitianOperator(H))) <= 1e-10);
    CHECK(std::abs(qfi_rank_reduced(mixed, HermitianOperator(H))) <= 1e-10);
  }
}

TEST_CASE("skew information") {
  SUBCASE("pure state gives the variance") {
    const auto ghz = ghz_state(3);
    const HermitianOperator H = collective_z(3);
    CHECK(skew_information(ghz.rho, H) == doctest::Approx(9.0).epsilon(1e-10));
  }
  SUBCASE("commuting diagonal pair gives zero") {
    Matrix rho = Matrix::Zero(2, 2);
    rho(0, 0) = rho(1, 1) = 0.5;
    Matrix H = 2.0 * pauli_z();
    CHECK(std::abs(skew_information(DensityMatrix(rho), HermitianOperator(std::move(H)))) <= 1e-12);
  }
  SUBCASE("frozen two-level value") {
    // rho = [[1/2, 0.3], [0.3, 1/2]], H = 2 diag(1,-1):
    // Tr(rho H^2) = 4, Tr(sqrt H sqrt H) = 2 sqrt(0.8*0.2) * 4 = 3.2, I = 0.8
    Matrix c(2, 2);
    c << 0.5, 0.3, 0.3, 0.5;
    const DensityMatrix rho(c);
    const HermitianOperator H(Matrix(2.0 * pauli_z()));
    CHECK(skew_information(rho, H) == doctest::Approx(0.8).epsilon(1e-10));
    // caller-supplied root matches
    const Matrix S = sqrt_psd(density_eigensystem(rho));
    CHECK(skew_information(rho, H, S) == doctest::Approx(0.8).epsilon(1e-10));
  }
  SUBCASE("caller-supplied root, dense and diagonal probes") {
    const DensityMatrix rho = random_density(6, 21);
    const Matrix S = sqrt_psd(density_eigensystem(rho));
    RealVector d(6);
    d << 1.0, -0.5, 0.25, 2.0, -1.5, 0.75;
    const HermitianOperator Hdiag(Matrix(d.cast<Complex>().asDiagonal()));
    CHECK(skew_information(rho, Hdiag, S) ==
          doctest::Approx(skew_information(rho, Hdiag)).epsilon(1e-10));
    const HermitianOperator Hfull(random_hermitian(6, 22));
    CHECK(skew_information(rho, Hfull, S) ==
          doctest::Approx(skew_information(rho, Hfull)).epsilon(1e-10));
  }
}

TEST_CASE("variance bound values") {
  CHECK(variance_bound(ghz_state(2).rho, collective_z(2)) == doctest::Approx(16.0).epsilon(1e-12));
  const DensityMatrix mixed(Matrix(Matrix::Identity(2, 2) / 2.0));
  CHECK(variance_bound(mixed, HermitianOperator(pauli_z())) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("separable bound values") {
  const HermitianOperator z(pauli_z());
  CHECK(separable_bound({z, z, z}) == doctest::Approx(12.0).epsilon(1e-12));
  Matrix d31 = Matrix::Zero(2, 2);
  d31(0, 0) = 3.0;
  d31(1, 1) = 1.0;
  CHECK(separable_bound({HermitianOperator(std::move(d31))}) == doctest::Approx(4.0).epsilon(1e-12));
  const HermitianOperator zz(kron(pauli_z(), pauli_z()));
  CHECK(separable_bound({zz, zz}) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK_THROWS_AS(separable_bound({}), std::invalid_argument);
}

TEST_CASE("skew / QFI / variance chain on random pairs") {
  for (Index n : {2, 3, 4, 5, 6}) {
    for (unsigned s = 0; s < 12; ++s) {
      const DensityMatrix rho = random_density(n, 100 * static_cast<unsigned>(n) + s);
      const HermitianOperator H(random_hermitian(n, 900 + 100 * static_cast<unsigned>(n) + s));
      const double f = qfi(rho, H);
      const double fr = qfi_rank_reduced(rho, H);
      const double skew4 = 4.0 * skew_information(rho, H);
      const double var4 = variance_bound(rho, H);
      CAPTURE(n);
      CAPTURE(s);
      CHECK(f >= -1e-12);
      CHECK(std::abs(f - fr) <= 1e-9 * (1.0 + std::abs(f)));
      CHECK(skew4 <= f + 1e-8);
      CHECK(f <= var4 + 1e-8);
    }
  }
}

TEST_CASE("gain_for") {
  SUBCASE("GHZ beats separable probes N-fold") {
    const auto ghz = ghz_state(3);
    const HermitianOperator z(pauli_z());
    const GainReport r = gain_for(ghz.rho, {z, z, z}, ghz.layout);
    CHECK(r.fq == doctest::Approx(36.0).epsilon(1e-10));
    CHECK(r.fq_sep == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(r.gain == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(r.hamiltonian.dim() == 8);
    CHECK(r.local_terms.size() == 3);
  }
  SUBCASE("two-copy Bell mixture holds gain 2 at every mixing weight") {
    const HermitianOperator zz(kron(pauli_z(), pauli_z()));
    for (double p : {0.0, 0.3, 1.0}) {
      const auto st = two_copy_bell_mixture(p);
      const GainReport r = gain_for(st.rho, {zz, zz}, st.layout);
      CHECK(std::abs(r.gain - 2.0) <= 1e-10);
    }
  }
  SUBCASE("product state never beats the separable bound") {
    Vector plus(2);
    plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    Matrix v = plus;
    for (int n = 1; n < 3; ++n) v = kron(v, plus);
    const DensityMatrix rho(Matrix(v * v.adjoint()));
    const HermitianOperator z(pauli_z());
    const GainReport r = gain_for(rho, {z, z, z}, PartitionLayout{3, 1, 2});
    CHECK(r.gain <= 1.0 + 1e-8);
    CHECK(r.gain == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("argument validation") {
    const auto ghz = ghz_state(3);
    const HermitianOperator z(pauli_z());
    CHECK_THROWS_AS(gain_for(ghz.rho, {z, z}, ghz.layout), std::invalid_argument);
    const HermitianOperator big(Matrix(Matrix::Identity(4, 4)));
    CHECK_THROWS_AS(gain_for(ghz.rho, {big, big, big}, ghz.layout), std::invalid_argument);
    const HermitianOperator id(Matrix(Matrix::Identity(2, 2)));
    CHECK_THROWS_AS(gain_for(ghz.rho, {id, id, id}, ghz.layout), std::invalid_argument);
  }
}

TEST_CASE("ghz_like_usefulness thresholds") {
  const double r2 = 1.0 / std::sqrt(2.0);
  auto balanced = ghz_like_usefulness(SchmidtVector(real_vec({r2, r2})), 3);
  CHECK(balanced.entanglement_measure == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(balanced.threshold == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(balanced.useful);

  // sigma_1^2 = 1/12: E = 11/36, just under the N = 3 threshold of 1/3
  auto lopsided = ghz_like_usefulness(
      SchmidtVector(real_vec({std::sqrt(11.0 / 12.0), std::sqrt(1.0 / 12.0)})), 3);
  CHECK(lopsided.entanglement_measure == doctest::Approx(11.0 / 36.0).epsilon(1e-12));
  CHECK_FALSE(lopsided.useful);

  auto product = ghz_like_usefulness(SchmidtVector(real_vec({1.0, 0.0})), 3);
  CHECK(product.entanglement_measure == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_FALSE(product.useful);

  CHECK_THROWS_AS(ghz_like_usefulness(SchmidtVector(real_vec({r2, r2})), 1), std::invalid_argument);
  CHECK_THROWS_AS(ghz_like_usefulness(SchmidtVector(real_vec({0.6, 0.6, std::sqrt(0.28)})), 3),
                  std::invalid_argument);
}

TEST_CASE("spectrum-split probe closed forms") {
  const double r3 = 1.0 / std::sqrt(3.0);
  const SchmidtVector uniform3(real_vec({r3, r3, r3}));

  SUBCASE("odd d = 3 uniform: F = 16, gain 4/3") {
    CHECK(obs2_qfi_odd(uniform3, 3) == doctest::Approx(16.0).epsilon(1e-12));
    const auto st = schmidt_state(uniform3, 3);
    const HermitianOperator h = obs2_hamiltonian_odd(3);
    const GainReport r = gain_for(st.rho, {h, h, h}, st.layout);
    CHECK(r.fq == doctest::Approx(16.0).epsilon(1e-8));
    CHECK(r.fq_sep == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(r.gain == doctest::Approx(4.0 / 3.0).epsilon(1e-8));
  }
  SUBCASE("no weight on the +1 slot: F = 4N") {
    const double r2 = 1.0 / std::sqrt(2.0);
    CHECK(obs2_qfi_odd(SchmidtVector(real_vec({0.0, r2, r2})), 3) ==
          doctest::Approx(12.0).epsilon(1e-12));
    CHECK(obs2_qfi_even(SchmidtVector(real_vec({0.0, 0.0, r2, r2})), 3) ==
          doctest::Approx(12.0).epsilon(1e-12));
  }
  SUBCASE("even d = 4 instance with block weight 1/3: F = 16") {
    const double r6 = 1.0 / std::sqrt(6.0);
    const SchmidtVector sig(real_vec({r6, r6, r6, 1.0 / std::sqrt(2.0)}));
    CHECK(obs2_qfi_even(sig, 3) == doctest::Approx(16.0).epsilon(1e-12));
    const auto st = schmidt_state(sig, 3);
    const HermitianOperator h = obs2_hamiltonian_even(4);
    const GainReport r = gain_for(st.rho, {h, h, h}, st.layout);
    CHECK(r.fq == doctest::Approx(16.0).epsilon(1e-8));
  }
  SUBCASE("closed form matches the dense QFI near a product state") {
    const double eps = 0.1;
    const SchmidtVector sig(real_vec({std::sqrt(1.0 - 2.0 * eps * eps), eps, eps}));
    const auto st = schmidt_state(sig, 3);
    const HermitianOperator h = obs2_hamiltonian_odd(3);
    const GainReport r = gain_for(st.rho, {h, h, h}, st.layout);
    CHECK(r.fq == doctest::Approx(obs2_qfi_odd(sig, 3)).epsilon(1e-8));
  }
  SUBCASE("slot variants permute the weight") {
    const SchmidtVector sig(real_vec({0.2, std::sqrt(0.6), std::sqrt(0.4 - 0.04)}));
    const SchmidtVector swapped(real_vec({std::sqrt(0.6), 0.2, std::sqrt(0.4 - 0.04)}));
    CHECK(obs2_qfi_odd_slot(sig, 3, 1) == doctest::Approx(obs2_qfi_odd(swapped, 3)).epsilon(1e-12));
    // slot-1 Hamiltonian: +1 on index 1, antidiagonal pairing on {0, 2}
    const Matrix h1 = obs2_hamiltonian_odd(3, 1).mat();
    CHECK(h1(1, 1).real() == doctest::Approx(1.0));
    CHECK(h1(0, 2).real() == doctest::Approx(1.0));
    CHECK((h1 * h1 - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
    const Matrix h2 = obs2_hamiltonian_even(4).mat();
    CHECK((h2 * h2 - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("search picks the best placement") {
    const Obs2Search s = obs2_usefulness_search(uniform3, 3);
    CHECK(s.best_qfi >= 16.0 - 1e-9);
    CHECK(s.best_gain >= 4.0 / 3.0 - 1e-9);
    CHECK(s.slot_b == -1);
    CHECK(s.useful);
  }
  SUBCASE("argument validation") {
    const double half = 0.5;
    const SchmidtVector even4(real_vec({half, half, half, half}));
    CHECK_THROWS_AS(obs2_qfi_odd(even4, 3), std::invalid_argument);
    CHECK_THROWS_AS(obs2_qfi_even(uniform3, 3), std::invalid_argument);
    CHECK_THROWS_AS(obs2_qfi_odd(uniform3, 2), std::invalid_argument);
    CHECK_THROWS_AS(obs2_hamiltonian_odd(4), std::invalid_argument);
    CHECK_THROWS_AS(obs2_hamiltonian_even(3, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(obs2_qfi_odd_slot(uniform3, 3, 5), std::invalid_argument);
    CHECK_THROWS_AS(obs2_qfi_even_slots(even4, 3, 1, 1), std::invalid_argument);
  }
}

TEST_CASE("expectation values") {
  Matrix rho0 = Matrix::Zero(2, 2);
  rho0(0, 0) = 1.0;
  CHECK(expectation(DensityMatrix(rho0), pauli_z()) == doctest::Approx(1.0).epsilon(1e-14));
  const DensityMatrix mixed(Matrix(Matrix::Identity(2, 2) / 2.0));
  CHECK(expectation(mixed, pauli_z()) == doctest::Approx(0.0).epsilon(1e-14));
}

#pragma once

#include "qmetro/metrology.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qmetro {

// How the per-party probe terms are parametrized during the search.
//   qubit_ball     - h_n = c_n . sigma with |c_n| <= 1; parties must be qubits.
//   pinned_full    - h_n = w_n U_n diag(+1...,-1...) U_n^dag on the whole
//                    party space, U_n = exp(i G_n) with a Hermitian generator.
//                    Binary spectra lose no gain: the QFI is convex in H, so
//                    its maximum over spread-constrained terms sits at
//                    extreme points, which have two-point spectra.
//   pinned_product - same binary construction on one copy, used identically
//                    across copies (h_n = a_n^{tensor M}).
// automatic picks qubit_ball for two-dimensional party spaces and pinned_full
// otherwise.
enum class AnsatzMode { automatic, qubit_ball, pinned_full, pinned_product };

struct OptimizerConfig {
  int restarts = 32;
  int max_iters = 300;
  std::vector<double> step_schedule = {0.5, 0.2, 0.08, 0.03, 0.01};
  double tol = 1e-9; // convergence tolerance on the gain
  std::uint64_t seed = 0;
  AnsatzMode mode = AnsatzMode::automatic;

  void validate() const;
};

// Multi-start projected gradient ascent over local probe terms, maximizing
// gain = F_Q / F_sep.  Gradients are central differences (step 1e-5) of the
// exact quadratic-form objective below; every restart's endpoint is certified
// by an independent gain_for evaluation and the best certified report is
// returned (ties broken toward the smallest parameter norm).  Non-finite
// values abort the offending restart only.
GainReport optimize_gain(const DensityMatrix& rho, const PartitionLayout& layout,
                         const OptimizerConfig& config);

struct ScanPoint {
  double parameter = 0.0;
  std::optional<GainReport> report; // empty if this point failed
  std::string error;
};

using StateFamily = std::function<DensityMatrix(double)>;

// Per-point optimization along a one-parameter state family.  Interior points
// warm-start from their left neighbor's winner; the endpoints p = 0 and p = 1
// are optimized from scratch so a degenerate endpoint cannot drag its basin
// across the rest of the curve.  Failures are recorded per point.
std::vector<ScanPoint> optimize_gain_scan(const StateFamily& family,
                                          const PartitionLayout& layout,
                                          const std::vector<double>& grid,
                                          const OptimizerConfig& config);

// Real coordinates of a Hermitian matrix: the diagonal, then (Re, Im) of each
// strict upper-triangle entry in row-major order.  The inverse rebuilds the
// matrix.  This fixes the basis ordering used by QfiQuadraticForm.
Eigen::VectorXd hermitian_coords(const Matrix& h);
Matrix hermitian_from_coords(const Eigen::VectorXd& x, Index dim);

// The QFI of H = sum_n h_n as an explicit quadratic form over the per-party
// Hermitian coordinates: F = x^T B x, with B assembled once per state from
// its eigendecomposition.  This is what makes the optimizer's inner loop
// cheap; it never re-diagonalizes the state.
class QfiQuadraticForm {
 public:
  QfiQuadraticForm(const DensityMatrix& rho, const PartitionLayout& layout);

  Index party_dim() const { return pd_; }
  int parties() const { return layout_.parties; }
  const Eigen::MatrixXd& form() const { return b_; }

  double qfi_coords(const Eigen::VectorXd& x) const;
  // Convenience: h_n given as matrices on the party space.
  double qfi_of(const std::vector<Matrix>& party_terms) const;

 private:
  PartitionLayout layout_;
  Index pd_ = 0;
  Eigen::MatrixXd b_;
};

namespace detail {

// A concrete start/end point of one ascent: the flat parameter vector plus
// the per-party rank split (empty in qubit mode).
struct StartPoint {
  Eigen::VectorXd params;
  std::vector<int> ranks;
};

struct OptimizeResult {
  GainReport report;
  StartPoint winner;
};

OptimizeResult optimize_gain_impl(const DensityMatrix& rho, const PartitionLayout& layout,
                                  const OptimizerConfig& config,
                                  const std::vector<StartPoint>& warm_starts);

// Converts explicit per-party terms into ansatz parameters (for warm starts
// seeded from a previous winner or a known-good probe).  Terms must have the
// two-point spectrum the pinned modes generate.
StartPoint start_from_terms(const PartitionLayout& layout, const OptimizerConfig& config,
                            const std::vector<HermitianOperator>& terms);

} // namespace detail

} // namespace qmetro

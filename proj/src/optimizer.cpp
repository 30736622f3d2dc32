#include "qmetro/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>

namespace qmetro {

namespace {

constexpr double kFdStep = 1e-5;      // central-difference probe step
constexpr double kPolishFloor = 1e-7; // polish terminates below this step
constexpr double kTieTol = 1e-9;      // gains closer than this are "equal"

enum class Mode { qubit, full, product };

Mode resolve_mode(AnsatzMode m, const PartitionLayout& layout) {
  switch (m) {
    case AnsatzMode::automatic:
      return layout.party_dim() == 2 ? Mode::qubit : Mode::full;
    case AnsatzMode::qubit_ball:
      if (layout.party_dim() != 2)
        throw std::invalid_argument(
            "optimize_gain: the qubit ansatz requires two-dimensional party spaces");
      return Mode::qubit;
    case AnsatzMode::pinned_full:
      return Mode::full;
    case AnsatzMode::pinned_product:
      return Mode::product;
  }
  throw std::logic_error("optimize_gain: unknown ansatz mode");
}

// Static description of the parameter vector.  Per party:
//   qubit   - 3 Bloch coefficients
//   full    - pd^2 generator coordinates plus one weight
//   product - gd^2 generator coordinates plus one weight (gd = one-copy dim)
struct Ansatz {
  Mode mode = Mode::qubit;
  int parties = 1;
  int copies = 1;
  Index pd = 2; // party-space dimension
  Index gd = 2; // dimension the generator acts on

  int per_party() const {
    if (mode == Mode::qubit) return 3;
    return static_cast<int>(gd * gd) + 1;
  }
  int total() const { return parties * per_party(); }
  bool uses_ranks() const { return mode != Mode::qubit; }
};

Ansatz make_ansatz(Mode mode, const PartitionLayout& layout) {
  Ansatz a;
  a.mode = mode;
  a.parties = layout.parties;
  a.copies = layout.copies;
  a.pd = layout.party_dim();
  a.gd = (mode == Mode::product) ? layout.local_dim : a.pd;
  return a;
}

// h = w U diag(+1 x rank, -1 x rest) U^dag with U = exp(i G).
Matrix pinned_term(const Eigen::VectorXd& seg, Index gd, int rank) {
  const Index ng = gd * gd;
  const Matrix gen = hermitian_from_coords(seg.head(ng), gd);
  const double w = seg[ng];
  const Eigensystem es = eigh(gen);
  Vector phases(gd);
  for (Index i = 0; i < gd; ++i) phases[i] = std::polar(1.0, es.values[i]);
  const Matrix u = es.vectors * phases.asDiagonal() * es.vectors.adjoint();
  RealVector d(gd);
  for (Index i = 0; i < gd; ++i) d[i] = (i < rank) ? 1.0 : -1.0;
  Matrix h = w * (u * d.asDiagonal() * u.adjoint());
  return 0.5 * (h + Matrix(h.adjoint()));
}

std::vector<Matrix> terms_from(const Ansatz& a, const detail::StartPoint& sp) {
  const int pp = a.per_party();
  std::vector<Matrix> terms;
  terms.reserve(a.parties);
  for (int n = 0; n < a.parties; ++n) {
    const auto seg = sp.params.segment(static_cast<Index>(n) * pp, pp);
    if (a.mode == Mode::qubit) {
      terms.push_back(seg[0] * pauli_x() + seg[1] * pauli_y() + seg[2] * pauli_z());
    } else {
      Matrix h = pinned_term(seg, a.gd, sp.ranks[n]);
      if (a.mode == Mode::product && a.copies > 1) h = kron_power(h, a.copies);
      terms.push_back(std::move(h));
    }
  }
  return terms;
}

double fsep_from(const Ansatz& a, const detail::StartPoint& sp) {
  const int pp = a.per_party();
  double total = 0.0;
  for (int n = 0; n < a.parties; ++n) {
    const auto seg = sp.params.segment(static_cast<Index>(n) * pp, pp);
    if (a.mode == Mode::qubit) {
      total += 4.0 * seg.squaredNorm();
    } else {
      const double w = seg[a.gd * a.gd];
      const double spread2 =
          (a.mode == Mode::product) ? 4.0 * std::pow(w * w, a.copies) : 4.0 * w * w;
      total += spread2;
    }
  }
  return total;
}

// Gain is invariant under a global rescale of all weights; pinning the
// largest one to 1 keeps the separable bound at least 4 and the ascent away
// from the degenerate all-zero probe.
bool canonical_rescale(const Ansatz& a, detail::StartPoint& sp) {
  const int pp = a.per_party();
  double scale = 0.0;
  for (int n = 0; n < a.parties; ++n) {
    const auto seg = sp.params.segment(static_cast<Index>(n) * pp, pp);
    scale = std::max(scale, a.mode == Mode::qubit ? seg.norm()
                                                  : std::abs(seg[a.gd * a.gd]));
  }
  if (scale < 1e-12) return false;
  for (int n = 0; n < a.parties; ++n) {
    auto seg = sp.params.segment(static_cast<Index>(n) * pp, pp);
    if (a.mode == Mode::qubit)
      seg /= scale;
    else
      seg[a.gd * a.gd] /= scale;
  }
  return true;
}

void project(const Ansatz& a, detail::StartPoint& sp) {
  if (a.mode != Mode::qubit) return;
  for (int n = 0; n < a.parties; ++n) {
    auto seg = sp.params.segment(static_cast<Index>(n) * 3, 3);
    const double norm = seg.norm();
    if (norm > 1.0) seg /= norm;
  }
}

struct Objective {
  const QfiQuadraticForm& form;
  const Ansatz& ansatz;
  const std::vector<int>& ranks;

  double operator()(const Eigen::VectorXd& params) const {
    const detail::StartPoint sp{params, ranks};
    const std::vector<Matrix> terms = terms_from(ansatz, sp);
    const Index nb = ansatz.pd * ansatz.pd;
    Eigen::VectorXd x(static_cast<Index>(ansatz.parties) * nb);
    for (int n = 0; n < ansatz.parties; ++n)
      x.segment(static_cast<Index>(n) * nb, nb) = hermitian_coords(terms[n]);
    return form.qfi_coords(x) / fsep_from(ansatz, sp);
  }
};

// One restart: step along the finite-difference gradient, shrinking through
// the schedule on rejection and halving past its end (the polish phase).
// Returns false if the restart hit a degenerate or non-finite configuration.
bool ascend(const Objective& obj, const Ansatz& ansatz, const OptimizerConfig& config,
            detail::StartPoint& sp) {
  if (!canonical_rescale(ansatz, sp)) return false;
  project(ansatz, sp);
  double cur = obj(sp.params);
  if (!std::isfinite(cur)) return false;

  const Index np = sp.params.size();
  Eigen::VectorXd grad(np);
  Eigen::VectorXd probe = sp.params;
  std::size_t sched = 0;
  double step = config.step_schedule.front();
  bool have_grad = false;
  int stall = 0;

  auto shrink = [&]() -> bool {
    if (sched + 1 < config.step_schedule.size()) {
      step = config.step_schedule[++sched];
      return true;
    }
    step *= 0.5;
    return step >= kPolishFloor;
  };

  for (int iter = 0; iter < config.max_iters; ++iter) {
    if (!have_grad) {
      for (Index p = 0; p < np; ++p) {
        probe = sp.params;
        probe[p] += kFdStep;
        const double up = obj(probe);
        probe[p] = sp.params[p] - kFdStep;
        const double down = obj(probe);
        if (!std::isfinite(up) || !std::isfinite(down)) return false;
        grad[p] = (up - down) / (2.0 * kFdStep);
      }
      have_grad = true;
    }
    const double gn = grad.norm();
    if (gn < 1e-14) {
      if (!shrink()) break;
      continue;
    }
    detail::StartPoint cand{sp.params + (step / gn) * grad, sp.ranks};
    if (!canonical_rescale(ansatz, cand)) {
      if (!shrink()) break;
      continue;
    }
    project(ansatz, cand);
    const double val = obj(cand.params);
    if (!std::isfinite(val)) return false;
    if (val > cur) {
      const double improvement = val - cur;
      sp = std::move(cand);
      cur = val;
      have_grad = false;
      stall = (improvement < config.tol) ? stall + 1 : 0;
      if (stall >= 4) break;
    } else {
      if (!shrink()) break;
    }
  }
  return true;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  return seed * 6364136223846793005ULL + 1442695040888963407ULL * (k + 1);
}

detail::StartPoint canonical_start(const Ansatz& a) {
  detail::StartPoint sp;
  sp.params = Eigen::VectorXd::Zero(a.total());
  const int pp = a.per_party();
  for (int n = 0; n < a.parties; ++n) {
    if (a.mode == Mode::qubit)
      sp.params[static_cast<Index>(n) * pp + 2] = 1.0; // sigma_z everywhere
    else
      sp.params[static_cast<Index>(n) * pp + a.gd * a.gd] = 1.0; // w = 1, U = I
  }
  if (a.uses_ranks())
    sp.ranks.assign(a.parties, static_cast<int>((a.gd + 1) / 2));
  return sp;
}

detail::StartPoint random_start(const Ansatz& a, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> gen(-1.5, 1.5);
  std::uniform_real_distribution<double> weight(0.3, 1.0);
  detail::StartPoint sp;
  sp.params.resize(a.total());
  const int pp = a.per_party();
  if (a.uses_ranks()) {
    std::uniform_int_distribution<int> rank(1, static_cast<int>(a.gd) - 1);
    sp.ranks.resize(a.parties);
    for (int n = 0; n < a.parties; ++n) sp.ranks[n] = rank(rng);
  }
  for (int n = 0; n < a.parties; ++n) {
    auto seg = sp.params.segment(static_cast<Index>(n) * pp, pp);
    if (a.mode == Mode::qubit) {
      for (int i = 0; i < 3; ++i) seg[i] = sym(rng);
    } else {
      for (Index i = 0; i < a.gd * a.gd; ++i) seg[i] = gen(rng);
      seg[a.gd * a.gd] = weight(rng);
    }
  }
  return sp;
}

// Hermitian logarithm of a unitary via its Schur form (diagonal for normal
// input), so exp(i log) reproduces the unitary.
Matrix unitary_log(const Matrix& u) {
  Eigen::ComplexSchur<Matrix> schur(u);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("start_from_terms: Schur decomposition failed");
  const Index n = u.rows();
  Vector phases(n);
  for (Index i = 0; i < n; ++i) phases[i] = std::arg(schur.matrixT()(i, i));
  Matrix g = schur.matrixU() * phases.asDiagonal() * schur.matrixU().adjoint();
  return 0.5 * (g + Matrix(g.adjoint()));
}

} // namespace

void OptimizerConfig::validate() const {
  if (restarts < 1) throw std::invalid_argument("OptimizerConfig: restarts must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("OptimizerConfig: max_iters must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("OptimizerConfig: tol must be positive");
  if (step_schedule.empty())
    throw std::invalid_argument("OptimizerConfig: step schedule must be nonempty");
  for (double s : step_schedule)
    if (!(s > 0.0)) throw std::invalid_argument("OptimizerConfig: steps must be positive");
}

Eigen::VectorXd hermitian_coords(const Matrix& h) {
  const Index n = h.rows();
  Eigen::VectorXd x(n * n);
  Index at = 0;
  for (Index i = 0; i < n; ++i) x[at++] = h(i, i).real();
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      x[at++] = h(i, j).real();
      x[at++] = h(i, j).imag();
    }
  return x;
}

Matrix hermitian_from_coords(const Eigen::VectorXd& x, Index dim) {
  if (x.size() != dim * dim)
    throw std::invalid_argument("hermitian_from_coords: coordinate count mismatch");
  Matrix h = Matrix::Zero(dim, dim);
  Index at = 0;
  for (Index i = 0; i < dim; ++i) h(i, i) = x[at++];
  for (Index i = 0; i < dim; ++i)
    for (Index j = i + 1; j < dim; ++j) {
      const Complex v(x[at], x[at + 1]);
      at += 2;
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  return h;
}

QfiQuadraticForm::QfiQuadraticForm(const DensityMatrix& rho, const PartitionLayout& layout)
    : layout_(layout) {
  layout_.validate();
  if (rho.dim() != layout_.global_dim())
    throw std::invalid_argument("QfiQuadraticForm: state dimension does not match layout");
  pd_ = layout_.party_dim();
  const int parties = layout_.parties;
  const Index dim = rho.dim();

  const Eigensystem es = density_eigensystem(rho);
  std::vector<Index> idx;
  for (Index i = 0; i < es.values.size(); ++i)
    if (es.values[i] > 0.0) idx.push_back(i);
  const Index r = static_cast<Index>(idx.size());
  RealVector lam(r);
  Matrix vs(dim, r);
  for (Index j = 0; j < r; ++j) {
    lam[j] = es.values[idx[j]];
    vs.col(j) = es.vectors.col(idx[j]);
  }
  const Matrix psi = vs * lam.cwiseSqrt().asDiagonal();

  const Index nb = pd_ * pd_;
  const Index np = static_cast<Index>(parties) * nb;
  if (static_cast<double>(dim) * r * np > 2e7)
    throw std::invalid_argument("QfiQuadraticForm: instance too large for the dense form");

  Matrix sw(r, r);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j)
      sw(i, j) = std::sqrt(lam[i] * lam[j] / (lam[i] + lam[j]));

  // Column a of `moment` is vec(A_a Psi); of `corr`, vec(sqrtW .* (V^dag A_a V)).
  // Then B = 4 Re(moment^dag moment) - 8 Re(corr^dag corr).
  Matrix moment(dim * r, np);
  Matrix corr(r * r, np);

  struct Entry {
    Index i, j;
    Complex v;
  };

  for (int n = 0; n < parties; ++n) {
    const SiteGroupOffsets off = site_group_offsets(layout_.party_sites(n), layout_);
    for (Index b = 0; b < nb; ++b) {
      Entry ent[2];
      int nent = 0;
      if (b < pd_) {
        ent[nent++] = {b, b, Complex(1.0, 0.0)};
      } else {
        Index q = b - pd_;
        const Index pair = q / 2;
        const int kind = static_cast<int>(q % 2);
        Index pi = 0, pj = 0, seen = 0;
        bool found = false;
        for (Index i = 0; i < pd_ && !found; ++i)
          for (Index j = i + 1; j < pd_; ++j)
            if (seen++ == pair) {
              pi = i;
              pj = j;
              found = true;
              break;
            }
        if (kind == 0) {
          ent[nent++] = {pi, pj, Complex(1.0, 0.0)};
          ent[nent++] = {pj, pi, Complex(1.0, 0.0)};
        } else {
          ent[nent++] = {pi, pj, Complex(0.0, 1.0)};
          ent[nent++] = {pj, pi, Complex(0.0, -1.0)};
        }
      }

      Matrix y = Matrix::Zero(dim, r);
      Matrix z = Matrix::Zero(dim, r);
      for (int e = 0; e < nent; ++e)
        for (const Index rest : off.rest) {
          const Index row = off.group[ent[e].i] + rest;
          const Index col = off.group[ent[e].j] + rest;
          y.row(row) += ent[e].v * psi.row(col);
          z.row(row) += ent[e].v * vs.row(col);
        }
      const Matrix t = vs.adjoint() * z;
      const Index a = static_cast<Index>(n) * nb + b;
      moment.col(a) = Eigen::Map<const Vector>(y.data(), dim * r);
      const Matrix st = sw.cwiseProduct(t);
      corr.col(a) = Eigen::Map<const Vector>(st.data(), r * r);
    }
  }

  const Matrix bm = moment.adjoint() * moment;
  const Matrix bc = corr.adjoint() * corr;
  b_ = 4.0 * bm.real() - 8.0 * bc.real();
  b_ = 0.5 * (b_ + Eigen::MatrixXd(b_.transpose()));
}

double QfiQuadraticForm::qfi_coords(const Eigen::VectorXd& x) const {
  if (x.size() != b_.rows())
    throw std::invalid_argument("QfiQuadraticForm: coordinate vector size mismatch");
  return x.dot(b_ * x);
}

double QfiQuadraticForm::qfi_of(const std::vector<Matrix>& party_terms) const {
  if (static_cast<int>(party_terms.size()) != layout_.parties)
    throw std::invalid_argument("QfiQuadraticForm: need one term per party");
  const Index nb = pd_ * pd_;
  Eigen::VectorXd x(static_cast<Index>(layout_.parties) * nb);
  for (int n = 0; n < layout_.parties; ++n) {
    if (party_terms[n].rows() != pd_ || party_terms[n].cols() != pd_)
      throw std::invalid_argument("QfiQuadraticForm: term dimension mismatch");
    x.segment(static_cast<Index>(n) * nb, nb) = hermitian_coords(party_terms[n]);
  }
  return qfi_coords(x);
}

namespace detail {

OptimizeResult optimize_gain_impl(const DensityMatrix& rho, const PartitionLayout& layout,
                                  const OptimizerConfig& config,
                                  const std::vector<StartPoint>& warm_starts) {
  layout.validate();
  config.validate();
  if (layout.global_dim() > kDenseDimCap)
    throw std::invalid_argument("optimize_gain: dimension exceeds the dense evaluation cap");
  if (rho.dim() != layout.global_dim())
    throw std::invalid_argument("optimize_gain: state dimension does not match layout");

  const Ansatz ansatz = make_ansatz(resolve_mode(config.mode, layout), layout);
  const QfiQuadraticForm form(rho, layout);

  std::vector<StartPoint> starts;
  starts.reserve(warm_starts.size() + config.restarts);
  for (const StartPoint& w : warm_starts) {
    if (w.params.size() != ansatz.total() ||
        (ansatz.uses_ranks() && static_cast<int>(w.ranks.size()) != ansatz.parties))
      throw std::invalid_argument("optimize_gain: warm start does not match the ansatz");
    starts.push_back(w);
  }
  starts.push_back(canonical_start(ansatz));
  for (int k = 1; k < config.restarts; ++k)
    starts.push_back(random_start(ansatz, mix_seed(config.seed, k)));

  struct Candidate {
    GainReport report;
    StartPoint winner;
    double norm;
  };
  std::vector<std::optional<Candidate>> results(starts.size());
  const std::int64_t count = static_cast<std::int64_t>(starts.size());

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      StartPoint sp = starts[static_cast<std::size_t>(i)];
      const Objective obj{form, ansatz, sp.ranks};
      if (!ascend(obj, ansatz, config, sp)) continue;
      if (!canonical_rescale(ansatz, sp)) continue;
      project(ansatz, sp);
      std::vector<HermitianOperator> terms;
      for (Matrix& m : terms_from(ansatz, sp)) terms.emplace_back(std::move(m));
      GainReport report = gain_for(rho, terms, layout);
      if (!std::isfinite(report.gain)) continue;
      const double norm = sp.params.norm();
      results[static_cast<std::size_t>(i)] =
          Candidate{std::move(report), std::move(sp), norm};
    } catch (...) {
      // a failed restart is simply not a candidate
    }
  }

  std::optional<Candidate> best;
  for (auto& c : results) {
    if (!c) continue;
    if (!best) {
      best = std::move(c);
      continue;
    }
    const double tol = kTieTol * std::max(1.0, std::abs(best->report.gain));
    if (c->report.gain > best->report.gain + tol ||
        (c->report.gain > best->report.gain - tol && c->norm < best->norm)) {
      best = std::move(c);
    }
  }
  if (!best)
    throw std::runtime_error("optimize_gain: every restart failed");
  return OptimizeResult{std::move(best->report), std::move(best->winner)};
}

StartPoint start_from_terms(const PartitionLayout& layout, const OptimizerConfig& config,
                            const std::vector<HermitianOperator>& terms) {
  layout.validate();
  const Ansatz ansatz = make_ansatz(resolve_mode(config.mode, layout), layout);
  if (static_cast<int>(terms.size()) != ansatz.parties)
    throw std::invalid_argument("start_from_terms: need one term per party");
  if (ansatz.mode == Mode::product && ansatz.copies > 1)
    throw std::invalid_argument(
        "start_from_terms: cannot factor a party-space term into per-copy factors");

  StartPoint sp;
  sp.params = Eigen::VectorXd::Zero(ansatz.total());
  if (ansatz.uses_ranks()) sp.ranks.assign(ansatz.parties, 1);
  const int pp = ansatz.per_party();

  for (int n = 0; n < ansatz.parties; ++n) {
    const Matrix& h = terms[n].mat();
    if (h.rows() != ansatz.pd)
      throw std::invalid_argument("start_from_terms: term dimension mismatch");
    auto seg = sp.params.segment(static_cast<Index>(n) * pp, pp);
    if (ansatz.mode == Mode::qubit) {
      seg[0] = 0.5 * (h * pauli_x()).trace().real();
      seg[1] = 0.5 * (h * pauli_y()).trace().real();
      seg[2] = 0.5 * (h * pauli_z()).trace().real();
      continue;
    }
    const Eigensystem es = eigh(h);
    const double lo = es.values[0];
    const double hi = es.values[es.values.size() - 1];
    if (hi - lo < 1e-12)
      throw std::invalid_argument("start_from_terms: term has a degenerate spectrum");
    const double mid = 0.5 * (hi + lo);
    int rank = 0;
    for (Index i = 0; i < es.values.size(); ++i)
      if (es.values[i] > mid) ++rank;
    if (rank == 0 || rank == ansatz.gd)
      throw std::invalid_argument("start_from_terms: term has a one-sided spectrum");
    // Positive branch first, to match the diag(+1..., -1...) convention.
    Matrix u(ansatz.gd, ansatz.gd);
    Index at = 0;
    for (Index i = es.values.size(); i-- > 0;)
      if (es.values[i] > mid) u.col(at++) = es.vectors.col(i);
    for (Index i = 0; i < es.values.size(); ++i)
      if (es.values[i] <= mid) u.col(at++) = es.vectors.col(i);
    seg.head(ansatz.gd * ansatz.gd) = hermitian_coords(unitary_log(u));
    seg[ansatz.gd * ansatz.gd] = 0.5 * (hi - lo);
    sp.ranks[n] = rank;
  }
  return sp;
}

} // namespace detail

GainReport optimize_gain(const DensityMatrix& rho, const PartitionLayout& layout,
                         const OptimizerConfig& config) {
  return detail::optimize_gain_impl(rho, layout, config, {}).report;
}

std::vector<ScanPoint> optimize_gain_scan(const StateFamily& family,
                                          const PartitionLayout& layout,
                                          const std::vector<double>& grid,
                                          const OptimizerConfig& config) {
  std::vector<ScanPoint> out;
  out.reserve(grid.size());
  std::optional<detail::StartPoint> prev;
  for (const double p : grid) {
    ScanPoint pt;
    pt.parameter = p;
    try {
      const DensityMatrix rho = family(p);
      std::vector<detail::StartPoint> warm;
      const bool endpoint = std::abs(p) < 1e-12 || std::abs(p - 1.0) < 1e-12;
      if (prev && !endpoint) warm.push_back(*prev);
      detail::OptimizeResult res = detail::optimize_gain_impl(rho, layout, config, warm);
      pt.report = std::move(res.report);
      prev = std::move(res.winner);
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

} // namespace qmetro

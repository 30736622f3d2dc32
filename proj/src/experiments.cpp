#include "qmetro/experiments.hpp"

#include "qmetro/metrology.hpp"
#include "qmetro/multicopy.hpp"
#include "qmetro/states.hpp"
#include "qmetro/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qmetro {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  const std::string dir = cfg.outdir.empty() ? "." : cfg.outdir;
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

// One flag reseeds a whole run: the experiment seed wins over optimizer.seed.
OptimizerConfig opt_for(const ExperimentConfig& cfg) {
  OptimizerConfig o = cfg.optimizer;
  o.seed = cfg.seed;
  o.validate();
  return o;
}

bool is_endpoint(double p) { return std::abs(p) < 1e-12 || std::abs(p - 1.0) < 1e-12; }

std::vector<double> column(const CsvTable& t, const std::string& name) {
  auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end())
    throw std::invalid_argument("csv column not found: " + name);
  const std::size_t j = static_cast<std::size_t>(it - t.columns.begin());
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) out.push_back(row[j]);
  return out;
}

// Every driver plots from the CSV it just wrote, read back from disk.
void write_plot_from_csv(const std::string& csv_path, const std::string& svg_path,
                         PlotSpec spec, const std::string& x_column,
                         const std::vector<std::pair<std::string, std::string>>& y_columns,
                         const std::vector<bool>& dashed = {}) {
  const CsvTable t = read_csv(csv_path);
  const std::vector<double> x = column(t, x_column);
  for (std::size_t i = 0; i < y_columns.size(); ++i) {
    PlotSeries s;
    s.label = y_columns[i].second;
    s.x = x;
    s.y = column(t, y_columns[i].first);
    s.dashed = i < dashed.size() && dashed[i];
    spec.series.push_back(std::move(s));
  }
  write_text(svg_path, render_line_chart(spec));
}

} // namespace

void write_csv(const std::string& path, const CsvTable& table) {
  if (table.columns.empty()) throw std::invalid_argument("write_csv: no columns");
  std::ostringstream out;
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j) out << ',';
    out << table.columns[j];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::invalid_argument("write_csv: row width mismatch");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << fmt12(row[j]);
    }
    out << '\n';
  }
  write_text(path, out.str());
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  CsvTable t;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      const std::size_t c = line.find(',', pos);
      cells.push_back(line.substr(pos, c == std::string::npos ? c : c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    if (header) {
      t.columns = cells;
      header = false;
      continue;
    }
    if (cells.size() != t.columns.size())
      throw std::runtime_error("read_csv: ragged row in " + path);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw std::runtime_error("read_csv: bad cell '" + cell + "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw std::runtime_error("read_csv: empty file " + path);
  return t;
}

std::vector<double> parse_param_grid(const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("grid spec must look like name=start:stop:step");
  const std::string body = spec.substr(eq + 1);
  double start = 0.0, stop = 0.0, step = 0.0;
  if (std::sscanf(body.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3)
    throw std::invalid_argument("grid spec must look like name=start:stop:step");
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  if (stop < start) throw std::invalid_argument("grid stop must be >= start");
  const long long count = static_cast<long long>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 100000) throw std::invalid_argument("grid has too many points");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (long long k = 0; k < count; ++k) grid.push_back(start + static_cast<double>(k) * step);
  return grid;
}

// ---------------------------------------------------------------------------
// fig2: isotropic two-qubit pair, collective z probes over M copies.
// ---------------------------------------------------------------------------

ExperimentResult run_fig2(double p, int m_max, const ExperimentConfig& cfg) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("run_fig2: p must be in [0, 1]");
  if (m_max < 1 || m_max > 7) throw std::invalid_argument("run_fig2: m_max must be in 1..7");

  const StateWithLayout state = isotropic_two_qubit(p);
  const std::vector<HermitianOperator> per_copy{HermitianOperator(pauli_z()),
                                                HermitianOperator(pauli_z())};
  CsvTable t;
  t.columns = {"M", "F_Q", "4Var", "4I", "F_sep"};
  for (int m = 1; m <= m_max; ++m) {
    const PartitionLayout layout{2, m, 2};
    const double fq = multicopy_qfi_symmetric(state.rho, per_copy, layout);
    const double var4 = multicopy_variance_bound(state.rho, per_copy, layout);
    const double skew4 = 4.0 * multicopy_skew(state.rho, per_copy, layout);
    const Matrix zm = kron_power(pauli_z(), m);
    const double fsep =
        separable_bound({HermitianOperator(zm), HermitianOperator(zm)});
    t.rows.push_back({static_cast<double>(m), fq, var4, skew4, fsep});
  }

  ExperimentResult res;
  res.name = "fig2";
  const std::string csv = out_path(cfg, "fig2.csv");
  write_csv(csv, t);
  res.files.push_back(csv);

  const std::string svg = out_path(cfg, "fig2.svg");
  PlotSpec spec;
  spec.title = "collective z-probe metrics vs copy count (p = " + fmt12(p) + ")";
  spec.x_label = "copies M";
  spec.y_label = "value";
  write_plot_from_csv(csv, svg, spec, "M",
                      {{"F_Q", "F_Q"}, {"4Var", "4 Var"}, {"4I", "4 I"}, {"F_sep", "F_sep"}});
  res.files.push_back(svg);

  const auto& last = t.rows.back();
  std::ostringstream s;
  s << "p = " << fmt12(p) << "; at M = " << m_max << ": F_Q = " << fmt12(last[1])
    << ", F_sep = " << fmt12(last[4]) << ", gain = " << fmt12(last[1] / last[4]);
  res.summary = s.str();
  return res;
}

// ---------------------------------------------------------------------------
// fig3: closed-form gain of the pair family vs dimension, large copy counts.
// ---------------------------------------------------------------------------

ExperimentResult run_fig3(const std::vector<int>& copies_list, const ExperimentConfig& cfg) {
  if (copies_list.empty()) throw std::invalid_argument("run_fig3: empty copies list");
  for (int m : copies_list)
    if (m < 1) throw std::invalid_argument("run_fig3: copy counts must be positive");

  CsvTable t;
  t.columns = {"N"};
  for (int m : copies_list) t.columns.push_back("g_M" + std::to_string(m));

  const double lg_lo = std::log10(2.0);
  const double lg_hi = 7.0;
  const int points = 61;
  for (int k = 0; k < points; ++k) {
    const double n = std::pow(10.0, lg_lo + (lg_hi - lg_lo) * k / (points - 1));
    std::vector<double> row{n};
    for (int m : copies_list) row.push_back(scaling_gain(n, m));
    t.rows.push_back(std::move(row));
  }

  ExperimentResult res;
  res.name = "fig3";
  const std::string csv = out_path(cfg, "fig3.csv");
  write_csv(csv, t);
  res.files.push_back(csv);

  const std::string svg = out_path(cfg, "fig3.svg");
  PlotSpec spec;
  spec.title = "pair-family gain vs dimension";
  spec.x_label = "pair dimension N";
  spec.y_label = "gain";
  spec.log_x = true;
  std::vector<std::pair<std::string, std::string>> cols;
  for (int m : copies_list)
    cols.push_back({"g_M" + std::to_string(m), "M = " + std::to_string(m)});
  write_plot_from_csv(csv, svg, spec, "N", cols);
  res.files.push_back(svg);

  Json j;
  j["copies"] = copies_list;
  Json ex;
  const int m0 = copies_list.front();
  ex["g_N10"] = scaling_gain(10.0, m0);
  ex["g_N1e6"] = scaling_gain(1e6, m0);
  ex["g_N1e7"] = scaling_gain(1e7, m0);
  // Both limits of g = N [1 - (1 - 1/N)^M]: -> M for N >> M, -> N for M >> N.
  ex["large_N_limit_is_M"] = scaling_gain(1e12, m0);
  j["examples_M_first"] = ex;
  const std::string jpath = out_path(cfg, "fig3.json");
  write_text(jpath, j.dump(2) + "\n");
  res.files.push_back(jpath);

  std::ostringstream s;
  s << "gain saturates toward min(N, M); at N = 1e6, M = " << m0 << ": g = "
    << fmt12(scaling_gain(1e6, m0));
  res.summary = s.str();
  return res;
}

// ---------------------------------------------------------------------------
// figS1: gain onset of the white-noise GHZ family, qubit vs embedded probes.
// ---------------------------------------------------------------------------

namespace {

constexpr double kOnset = 1.0 + 1e-6;

struct Curve {
  std::string key;
  std::string label;
  bool dashed = false;
  PartitionLayout layout;
  StateFamily family;
  std::vector<ScanPoint> points;
};

// Locate the first crossing of gain = 1 along a scanned curve, then sharpen
// the bracket with a few bisection rounds of fresh optimizations.
Json curve_threshold(const Curve& c, const std::vector<double>& grid,
                     const OptimizerConfig& opt) {
  std::size_t cross = grid.size();
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    if (c.points[i].report && c.points[i].report->gain > kOnset) {
      cross = i;
      break;
    }
  }
  if (cross == grid.size()) return nullptr;
  if (cross == 0 || !c.points[cross - 1].report) return grid[cross];
  double lo = grid[cross - 1];
  double hi = grid[cross];
  for (int it = 0; it < 10; ++it) {
    const double mid = 0.5 * (lo + hi);
    const GainReport rep = optimize_gain(c.family(mid), c.layout, opt);
    (rep.gain > kOnset ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace

ExperimentResult run_figs1(const std::vector<int>& dims,
                           const std::vector<double>& p_grid,
                           const ExperimentConfig& cfg) {
  if (p_grid.size() < 2) throw std::invalid_argument("run_figs1: grid needs >= 2 points");
  std::vector<double> grid = p_grid;
  std::sort(grid.begin(), grid.end());
  for (double p : grid)
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("run_figs1: p must be in [0, 1]");
  std::set<int> dset(dims.begin(), dims.end());
  for (int d : dset)
    if (d < 3 || d > 5)
      throw std::invalid_argument("run_figs1: embedded dimensions must be in {3, 4, 5}");

  const OptimizerConfig opt = opt_for(cfg);
  const PartitionLayout qubit_layout{3, 1, 2};

  std::vector<Curve> curves;
  curves.push_back({"g_qubit", "qubit probes (d = 2)", true, qubit_layout,
                    [](double p) { return noisy_ghz_white(p, 3).rho; },
                    {}});
  for (int d : dset) {
    curves.push_back({"g_d" + std::to_string(d), "embedded d = " + std::to_string(d),
                      false, qubit_layout.with_local_dim(d),
                      [d, qubit_layout](double p) {
                        return embed_local_dim(noisy_ghz_white(p, 3).rho, qubit_layout, d);
                      },
                      {}});
  }
  for (auto& c : curves) c.points = optimize_gain_scan(c.family, c.layout, grid, opt);

  CsvTable t;
  t.columns = {"p"};
  for (const auto& c : curves) t.columns.push_back(c.key);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i]};
    for (const auto& c : curves)
      row.push_back(c.points[i].report ? c.points[i].report->gain : kNan);
    t.rows.push_back(std::move(row));
  }

  ExperimentResult res;
  res.name = "figS1";
  const std::string csv = out_path(cfg, "figS1.csv");
  write_csv(csv, t);
  res.files.push_back(csv);

  const std::string svg = out_path(cfg, "figS1.svg");
  PlotSpec spec;
  spec.title = "optimized gain of the white-noise GHZ family (N = 3)";
  spec.x_label = "GHZ weight p";
  spec.y_label = "gain";
  std::vector<std::pair<std::string, std::string>> cols;
  std::vector<bool> dashes;
  for (const auto& c : curves) {
    cols.push_back({c.key, c.label});
    dashes.push_back(c.dashed);
  }
  write_plot_from_csv(csv, svg, spec, "p", cols, dashes);
  res.files.push_back(svg);

  Json j;
  Json thresholds;
  Json errors = Json::array();
  for (const auto& c : curves) {
    thresholds[c.key] = curve_threshold(c, grid, opt);
    for (std::size_t i = 0; i < c.points.size(); ++i)
      if (!c.points[i].report)
        errors.push_back(c.key + " at p=" + fmt12(grid[i]) + ": " + c.points[i].error);
  }
  j["thresholds"] = thresholds;
  j["errors"] = errors;
  const std::string jpath = out_path(cfg, "figS1.json");
  write_text(jpath, j.dump(2) + "\n");
  res.files.push_back(jpath);

  res.ok = errors.empty();
  std::ostringstream s;
  s << "gain onset";
  for (const auto& c : curves) {
    const Json& th = thresholds[c.key];
    s << "; " << c.key << ": "
      << (th.is_null() ? std::string("none in range") : fmt12(th.get<double>()));
  }
  res.summary = s.str();
  return res;
}

// ---------------------------------------------------------------------------
// figS2: W / flipped-W mixture, one copy vs two copies.
// ---------------------------------------------------------------------------

ExperimentResult run_figs2(const std::vector<double>& p_grid, const ExperimentConfig& cfg) {
  if (p_grid.size() < 2) throw std::invalid_argument("run_figs2: grid needs >= 2 points");
  std::vector<double> grid = p_grid;
  std::sort(grid.begin(), grid.end());
  for (double p : grid)
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("run_figs2: p must be in [0, 1]");

  const OptimizerConfig opt = opt_for(cfg);
  const PartitionLayout layout1{3, 1, 2};
  const PartitionLayout layout2{3, 2, 2};
  const Matrix eye2 = identity(2);

  CsvTable t;
  t.columns = {"p", "g_M1", "g_M2"};
  Json errors = Json::array();
  std::optional<detail::StartPoint> prev1, prev2;
  std::vector<std::optional<GainReport>> reps1(grid.size()), reps2(grid.size());

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double p = grid[i];
    const DensityMatrix rho1 = w_wbar_mixture(p, 3).rho;
    const bool endpoint = is_endpoint(p);

    std::vector<detail::StartPoint> warm1;
    if (!endpoint && prev1) warm1.push_back(*prev1);
    try {
      auto r1 = detail::optimize_gain_impl(rho1, layout1, opt, warm1);
      reps1[i] = r1.report;
      prev1 = r1.winner;
    } catch (const std::exception& e) {
      errors.push_back("g_M1 at p=" + fmt12(p) + ": " + e.what());
      prev1.reset();
    }

    std::vector<detail::StartPoint> warm2;
    if (!endpoint && prev2) warm2.push_back(*prev2);
    if (reps1[i]) {
      // Lift the one-copy winner to a two-copy product probe a (x) 1.  The
      // lift certifies the same gain, so the two-copy curve never starts
      // below the one-copy curve; it uses only this grid point's own result,
      // so the endpoints stay decoupled from their neighbors.
      std::vector<HermitianOperator> lifted;
      for (const auto& h : reps1[i]->local_terms)
        lifted.emplace_back(kron(h.mat(), eye2));
      try {
        warm2.push_back(detail::start_from_terms(layout2, opt, lifted));
      } catch (const std::exception&) {
        // Degenerate one-copy winner; restarts cover this point.
      }
    }
    try {
      const DensityMatrix rho2 = DensityMatrix::trusted(kron(rho1.mat(), rho1.mat()));
      auto r2 = detail::optimize_gain_impl(rho2, layout2, opt, warm2);
      reps2[i] = r2.report;
      prev2 = r2.winner;
    } catch (const std::exception& e) {
      errors.push_back("g_M2 at p=" + fmt12(p) + ": " + e.what());
      prev2.reset();
    }

    t.rows.push_back({p, reps1[i] ? reps1[i]->gain : kNan, reps2[i] ? reps2[i]->gain : kNan});
  }

  ExperimentResult res;
  res.name = "figS2";
  const std::string csv = out_path(cfg, "figS2.csv");
  write_csv(csv, t);
  res.files.push_back(csv);

  const std::string svg = out_path(cfg, "figS2.svg");
  PlotSpec spec;
  spec.title = "optimized gain of the W / flipped-W mixture (N = 3)";
  spec.x_label = "mixing weight p";
  spec.y_label = "gain";
  write_plot_from_csv(csv, svg, spec, "p",
                      {{"g_M1", "one copy"}, {"g_M2", "two copies"}});
  res.files.push_back(svg);

  Json j;
  j["errors"] = errors;
  Json ends;
  for (std::size_t i : {std::size_t{0}, grid.size() - 1}) {
    if (!reps1[i] || !reps2[i]) continue;
    Json e;
    e["p"] = grid[i];
    e["g_M1"] = reps1[i]->gain;
    e["g_M2"] = reps2[i]->gain;
    e["diff"] = reps2[i]->gain - reps1[i]->gain;
    ends.push_back(e);
  }
  j["endpoints"] = ends;
  double worst = std::numeric_limits<double>::infinity();
  double worst_p = kNan;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!reps1[i] || !reps2[i]) continue;
    const double d = reps2[i]->gain - reps1[i]->gain;
    if (d < worst) {
      worst = d;
      worst_p = grid[i];
    }
  }
  j["min_two_copy_advantage"] = Json{{"p", worst_p}, {"value", worst}};
  const std::string jpath = out_path(cfg, "figS2.json");
  write_text(jpath, j.dump(2) + "\n");
  res.files.push_back(jpath);

  res.ok = errors.empty();
  std::ostringstream s;
  s << "min(g_M2 - g_M1) = " << fmt12(worst) << " at p = " << fmt12(worst_p)
    << (worst >= -1e-9 ? " (two copies never hurt)" : " (two-copy deficit!)");
  res.summary = s.str();
  return res;
}

// ---------------------------------------------------------------------------
// bounds: pair-interaction two-copy gain bound vs copy count.
// ---------------------------------------------------------------------------

ExperimentResult run_bounds(int m_max, const ExperimentConfig& cfg) {
  if (m_max < 2 || m_max > 10000) throw std::invalid_argument("run_bounds: m_max must be in 2..10000");

  CsvTable t;
  t.columns = {"M", "bound"};
  int first_below = -1;
  for (int m = 2; m <= m_max; ++m) {
    const double b = two_body_coupling_bound(m);
    if (first_below < 0 && b < 1.0) first_below = m;
    t.rows.push_back({static_cast<double>(m), b});
  }

  ExperimentResult res;
  res.name = "bounds";
  const std::string csv = out_path(cfg, "bounds.csv");
  write_csv(csv, t);
  res.files.push_back(csv);

  const std::string svg = out_path(cfg, "bounds.svg");
  PlotSpec spec;
  spec.title = "pair-interaction gain bound vs copy count";
  spec.x_label = "copies M";
  spec.y_label = "bound";
  write_plot_from_csv(csv, svg, spec, "M", {{"bound", "upper bound"}});
  res.files.push_back(svg);

  Json j;
  j["first_M_below_one"] = first_below < 0 ? Json(nullptr) : Json(first_below);
  const std::string jpath = out_path(cfg, "bounds.json");
  write_text(jpath, j.dump(2) + "\n");
  res.files.push_back(jpath);

  std::ostringstream s;
  if (first_below > 0)
    s << "bound drops below 1 at M = " << first_below;
  else
    s << "bound stays above 1 through M = " << m_max;
  res.summary = s.str();
  return res;
}

// ---------------------------------------------------------------------------
// scan: optimized gain along a named state family.
// ---------------------------------------------------------------------------

namespace {

struct ScanFamily {
  PartitionLayout layout;
  StateFamily family;
};

const std::map<std::string, ScanFamily>& scan_families() {
  static const std::map<std::string, ScanFamily> families = [] {
    std::map<std::string, ScanFamily> m;
    const PartitionLayout n3{3, 1, 2};
    m["noisy_ghz_white"] = {n3, [](double p) { return noisy_ghz_white(p, 3).rho; }};
    for (int d : {3, 4, 5}) {
      m["noisy_ghz_white_d" + std::to_string(d)] = {
          n3.with_local_dim(d),
          [d, n3](double p) { return embed_local_dim(noisy_ghz_white(p, 3).rho, n3, d); }};
    }
    m["ghz_diag_noise"] = {n3, [](double p) { return ghz_diag_noise(p, 3).rho; }};
    m["w_wbar_mixture"] = {n3, [](double p) { return w_wbar_mixture(p, 3).rho; }};
    m["isotropic_two_qubit"] = {{2, 1, 2},
                                [](double p) { return isotropic_two_qubit(p).rho; }};
    m["two_copy_bell"] = {{2, 2, 2},
                          [](double p) { return two_copy_bell_mixture(p).rho; }};
    return m;
  }();
  return families;
}

} // namespace

std::vector<std::string> scan_family_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : scan_families()) names.push_back(k);
  return names;
}

ExperimentResult run_scan(const std::string& family, const std::vector<double>& grid,
                          const ExperimentConfig& cfg) {
  if (grid.empty()) throw std::invalid_argument("run_scan: empty grid");
  const auto& families = scan_families();
  const auto it = families.find(family);
  if (it == families.end()) {
    std::string msg = "run_scan: unknown family '" + family + "'; known:";
    for (const auto& n : scan_family_names()) msg += " " + n;
    throw std::invalid_argument(msg);
  }

  const OptimizerConfig opt = opt_for(cfg);
  const auto points = optimize_gain_scan(it->second.family, it->second.layout, grid, opt);

  CsvTable t;
  t.columns = {"p", "gain", "F_Q", "F_sep", "ok"};
  Json jpoints = Json::array();
  bool all_ok = true;
  for (const auto& pt : points) {
    if (pt.report) {
      t.rows.push_back({pt.parameter, pt.report->gain, pt.report->fq, pt.report->fq_sep, 1.0});
      Json e = to_json(*pt.report);
      e["p"] = pt.parameter;
      jpoints.push_back(e);
    } else {
      t.rows.push_back({pt.parameter, kNan, kNan, kNan, 0.0});
      jpoints.push_back(Json{{"p", pt.parameter}, {"error", pt.error}});
      all_ok = false;
    }
  }

  ExperimentResult res;
  res.name = "scan";
  const std::string csv = out_path(cfg, "scan.csv");
  write_csv(csv, t);
  res.files.push_back(csv);

  const std::string svg = out_path(cfg, "scan.svg");
  PlotSpec spec;
  spec.title = "optimized gain: " + family;
  spec.x_label = "parameter";
  spec.y_label = "gain";
  write_plot_from_csv(csv, svg, spec, "p", {{"gain", family}});
  res.files.push_back(svg);

  Json j;
  j["family"] = family;
  j["points"] = jpoints;
  const std::string jpath = out_path(cfg, "scan.json");
  write_text(jpath, j.dump(2) + "\n");
  res.files.push_back(jpath);

  res.ok = all_ok;
  double best = -std::numeric_limits<double>::infinity();
  double best_p = kNan;
  for (const auto& pt : points)
    if (pt.report && pt.report->gain > best) {
      best = pt.report->gain;
      best_p = pt.parameter;
    }
  std::ostringstream s;
  s << family << ": best gain " << fmt12(best) << " at p = " << fmt12(best_p);
  res.summary = s.str();
  return res;
}

// ---------------------------------------------------------------------------
// verify: cross-checks between independent computation routes.
// ---------------------------------------------------------------------------

namespace {

struct CheckOutcome {
  bool pass = false;
  Json detail;
};

Matrix random_psd_unit_trace(Index d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = Complex(nd(gen), nd(gen));
  Matrix c = a * a.adjoint();
  c /= c.trace().real();
  return c;
}

SchmidtVector pair_schmidt(double E) {
  // E = 4 sigma0^2 sigma1^2 with sigma0 the smaller weight.
  const double s0 = std::sqrt((1.0 - std::sqrt(1.0 - E)) / 2.0);
  const double s1 = std::sqrt(1.0 - s0 * s0);
  Vector v(2);
  v << Complex(s0, 0.0), Complex(s1, 0.0);
  return SchmidtVector(v);
}

} // namespace

ExperimentResult run_verify(const ExperimentConfig& cfg) {
  const OptimizerConfig opt = opt_for(cfg);
  Json checks = Json::array();
  bool all = true;
  const auto run = [&](const std::string& name,
                       const std::function<CheckOutcome()>& fn) {
    Json entry{{"name", name}};
    try {
      CheckOutcome o = fn();
      entry["pass"] = o.pass;
      entry["detail"] = std::move(o.detail);
      all = all && o.pass;
    } catch (const std::exception& e) {
      entry["pass"] = false;
      entry["detail"] = Json{{"error", e.what()}};
      all = false;
    }
    checks.push_back(std::move(entry));
  };

  run("ghz_skew_closed_forms_agree", [] {
    Matrix c(2, 2);
    c << 0.5, 0.3, 0.3, 0.5;
    const CoefficientMatrix cm(c);
    const double via_ghz = ghz_family_skew(0.3, 2, 2);
    const double via_general = skew_closed_form(cm, 2, 2);
    const double via_qubit = qubit_skew_closed_form(0.5, 0.3, 2, 2);
    const StateWithLayout st = diagonal_subspace_state(cm, 2);
    const HermitianOperator d2(alternating_sign_diag(2));
    const double via_traces = multicopy_skew(st.rho, {d2, d2}, {2, 2, 2});
    const double ref = via_traces;
    const double worst = std::max({std::abs(via_ghz - ref), std::abs(via_general - ref),
                                   std::abs(via_qubit - ref)});
    return CheckOutcome{worst <= 1e-10,
                        Json{{"traces", ref},
                             {"ghz_form", via_ghz},
                             {"general_form", via_general},
                             {"qubit_form", via_qubit},
                             {"max_abs_diff", worst}}};
  });

  run("mapped_single_party_qfi_matches_direct", [] {
    const CoefficientMatrix cm(random_psd_unit_trace(3, 42));
    const StateWithLayout st = diagonal_subspace_state(cm, 2);
    const Matrix d3 = alternating_sign_diag(3);
    const HermitianOperator hd(kron(d3, d3));
    const double direct = multicopy_qfi_direct(st.rho, {hd, hd}, {2, 2, 3});
    const DiagMappedPair pair = diag_map(cm, 2, 2);
    const DensityMatrix rho_m =
        DensityMatrix::trusted(kron(pair.rho_tilde.mat(), pair.rho_tilde.mat()));
    const double mapped = qfi(rho_m, pair.h_tilde);
    const double rel = std::abs(direct - mapped) / std::max(1.0, std::abs(direct));
    return CheckOutcome{rel <= 1e-9,
                        Json{{"direct", direct}, {"mapped", mapped}, {"rel_diff", rel}}};
  });

  run("schmidt_probe_qfi_value_odd", [] {
    Vector v(3);
    v.setConstant(Complex(1.0 / std::sqrt(3.0), 0.0));
    const SchmidtVector sigma(v);
    const double closed = obs2_qfi_odd(sigma, 3);
    const StateWithLayout st = schmidt_state(sigma, 3);
    const HermitianOperator h = obs2_hamiltonian_odd(3);
    const GainReport rep = gain_for(st.rho, {h, h, h}, PartitionLayout{3, 1, 3});
    const bool pass = std::abs(closed - 16.0) <= 1e-9 && std::abs(rep.fq - 16.0) <= 1e-8;
    return CheckOutcome{pass, Json{{"closed_form", closed},
                                   {"dense", rep.fq},
                                   {"gain", rep.gain}}};
  });

  run("schmidt_probe_qfi_value_even", [] {
    Vector v(4);
    const double a = 1.0 / std::sqrt(6.0);
    v << Complex(a, 0), Complex(a, 0), Complex(a, 0), Complex(1.0 / std::sqrt(2.0), 0);
    const SchmidtVector sigma(v);
    const double closed = obs2_qfi_even(sigma, 3);
    const StateWithLayout st = schmidt_state(sigma, 3);
    const HermitianOperator h = obs2_hamiltonian_even(4);
    const GainReport rep = gain_for(st.rho, {h, h, h}, PartitionLayout{3, 1, 4});
    const bool pass = std::abs(closed - 16.0) <= 1e-9 && std::abs(rep.fq - 16.0) <= 1e-8;
    return CheckOutcome{pass, Json{{"closed_form", closed},
                                   {"dense", rep.fq},
                                   {"gain", rep.gain}}};
  });

  run("pair_entanglement_threshold", [] {
    const UsefulnessReport below = ghz_like_usefulness(pair_schmidt(1.0 / 3 - 0.05), 3);
    const UsefulnessReport above = ghz_like_usefulness(pair_schmidt(1.0 / 3 + 0.05), 3);
    const bool pass = !below.useful && above.useful &&
                      std::abs(below.entanglement_measure - (1.0 / 3 - 0.05)) <= 1e-12 &&
                      std::abs(above.threshold - 1.0 / 3) <= 1e-12;
    return CheckOutcome{pass, Json{{"E_below", below.entanglement_measure},
                                   {"E_above", above.entanglement_measure},
                                   {"threshold", above.threshold},
                                   {"useful_below", below.useful},
                                   {"useful_above", above.useful}}};
  });

  run("obs3_ring_N5_gain_le_1", [&opt] {
    const StateWithLayout ring = ring_cluster_state(5);
    const GainReport one = optimize_gain(ring.rho, ring.layout, opt);
    const DensityMatrix two_rho =
        DensityMatrix::trusted(kron(ring.rho.mat(), ring.rho.mat()));
    const GainReport two = optimize_gain(two_rho, PartitionLayout{5, 2, 2}, opt);
    const bool pass = one.gain <= 1.0 + 1e-4 && two.gain <= 1.0 + 1e-4;
    return CheckOutcome{pass, Json{{"gain_one_copy", one.gain},
                                   {"gain_two_copies", two.gain}}};
  });

  run("ring_reductions_maximally_mixed", [] {
    const StateWithLayout ring = ring_cluster_state(5);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Matrix r1 = partial_trace(ring.rho.mat(), {i}, ring.layout);
      worst = std::max(worst, (r1 - identity(2) / 2.0).cwiseAbs().maxCoeff());
      for (int j = i + 1; j < 5; ++j) {
        const Matrix r2 = partial_trace(ring.rho.mat(), {i, j}, ring.layout);
        worst = std::max(worst, (r2 - identity(4) / 4.0).cwiseAbs().maxCoeff());
      }
    }
    return CheckOutcome{worst <= 1e-12, Json{{"max_deviation", worst}}};
  });

  run("full_rank_product_bound", [] {
    const StateWithLayout st = isotropic_two_qubit(0.9);
    const std::vector<HermitianOperator> z{HermitianOperator(pauli_z()),
                                           HermitianOperator(pauli_z())};
    bool pass = true;
    Json rows = Json::array();
    for (int m = 1; m <= 6; ++m) {
      const PartitionLayout layout{2, m, 2};
      const double fq = multicopy_qfi_symmetric(st.rho, z, layout);
      const double ub = full_rank_upper_bound(st.rho, z, layout);
      const double closed = 8.0 + 8.0 * std::pow(0.9, m);
      pass = pass && fq <= ub + 1e-9 && std::abs(ub - closed) <= 1e-9;
      rows.push_back(Json{{"M", m}, {"F_Q", fq}, {"bound", ub}, {"closed", closed}});
    }
    return CheckOutcome{pass, Json{{"rows", rows}}};
  });

  run("twocopy_bell_g2", [] {
    const HermitianOperator zz(kron(pauli_z(), pauli_z()));
    bool pass = true;
    Json rows = Json::array();
    for (double p : {0.0, 0.3, 1.0}) {
      const StateWithLayout st = two_copy_bell_mixture(p);
      const GainReport rep = gain_for(st.rho, {zz, zz}, st.layout);
      pass = pass && std::abs(rep.gain - 2.0) <= 1e-10;
      rows.push_back(Json{{"p", p}, {"gain", rep.gain}, {"F_Q", rep.fq}});
    }
    return CheckOutcome{pass, Json{{"rows", rows}}};
  });

  run("m7_two_body", [] {
    Json rows = Json::array();
    for (int m = 2; m <= 7; ++m)
      rows.push_back(Json{{"M", m}, {"bound", two_body_coupling_bound(m)}});
    const double b6 = two_body_coupling_bound(6);
    const double b7 = two_body_coupling_bound(7);
    return CheckOutcome{b7 < 1.0 && b6 > 1.0, Json{{"rows", rows}, {"bound_M7", b7}}};
  });

  run("symmetric_matches_direct", [] {
    const StateWithLayout st = isotropic_two_qubit(0.52);
    const PartitionLayout layout{2, 3, 2};
    const std::vector<HermitianOperator> z{HermitianOperator(pauli_z()),
                                           HermitianOperator(pauli_z())};
    const double sym = multicopy_qfi_symmetric(st.rho, z, layout);
    const Matrix z3 = kron_power(pauli_z(), 3);
    const double direct = multicopy_qfi_direct(
        st.rho, {HermitianOperator(z3), HermitianOperator(z3)}, layout);
    const double rel = std::abs(sym - direct) / std::max(1.0, std::abs(direct));
    return CheckOutcome{rel <= 1e-7,
                        Json{{"symmetric", sym}, {"direct", direct}, {"rel_diff", rel}}};
  });

  run("symmetric_paths_agree", [] {
    const StateWithLayout st = isotropic_two_qubit(0.52);
    const PartitionLayout layout{2, 4, 2};
    const std::vector<HermitianOperator> z{HermitianOperator(pauli_z()),
                                           HermitianOperator(pauli_z())};
    const double a = multicopy_qfi_symmetric(st.rho, z, layout, SymmetricPath::kbar_full);
    const double b = multicopy_qfi_symmetric(st.rho, z, layout, SymmetricPath::pair_class);
    const double diff = std::abs(a - b) / std::max(1.0, std::abs(a));
    return CheckOutcome{diff <= 1e-10,
                        Json{{"kbar_full", a}, {"pair_class", b}, {"rel_diff", diff}}};
  });

  run("sampled_estimator_consistent", [&cfg] {
    const StateWithLayout ghz = ghz_state(3);
    const PartitionLayout lg{3, 2, 2};
    const std::vector<HermitianOperator> z3(3, HermitianOperator(pauli_z()));
    const SampledQfi pure = multicopy_qfi_sampled(ghz.rho, z3, lg, 1, cfg.seed);
    const double pure_exact = multicopy_variance_bound(ghz.rho, z3, lg);

    const StateWithLayout iso = isotropic_two_qubit(0.7);
    const PartitionLayout li{2, 2, 2};
    const std::vector<HermitianOperator> z2(2, HermitianOperator(pauli_z()));
    const SampledQfi mixed = multicopy_qfi_sampled(iso.rho, z2, li, 20000, cfg.seed + 7);
    const double mixed_exact = multicopy_qfi_symmetric(iso.rho, z2, li);
    const bool pass = std::abs(pure.estimate - pure_exact) <= 1e-9 &&
                      std::abs(mixed.estimate - mixed_exact) <=
                          5.0 * mixed.stderr_estimate + 1e-12 &&
                      mixed.stderr_estimate > 0.0;
    return CheckOutcome{pass, Json{{"pure_estimate", pure.estimate},
                                   {"pure_exact", pure_exact},
                                   {"mixed_estimate", mixed.estimate},
                                   {"mixed_exact", mixed_exact},
                                   {"mixed_stderr", mixed.stderr_estimate}}};
  });

  run("qfi_bound_chain", [] {
    const DensityMatrix rho(random_psd_unit_trace(4, 777));
    const PartitionLayout layout{2, 1, 2};
    const Matrix h =
        embed_on_sites(pauli_z(), {0}, layout) + embed_on_sites(pauli_z(), {1}, layout);
    const HermitianOperator hh(h);
    const double f = qfi(rho, hh);
    const double fr = qfi_rank_reduced(rho, hh);
    const double skew4 = 4.0 * skew_information(rho, hh);
    const double var4 = variance_bound(rho, hh);
    const bool pass = std::abs(f - fr) <= 1e-8 * (1.0 + std::abs(f)) &&
                      skew4 <= f + 1e-8 && f <= var4 + 1e-8;
    return CheckOutcome{pass, Json{{"F_Q", f},
                                   {"F_Q_rank_reduced", fr},
                                   {"4I", skew4},
                                   {"4Var", var4}}};
  });

  run("gain_onset_straddle_optimized", [&opt] {
    const PartitionLayout layout{3, 1, 2};
    const StateWithLayout below = schmidt_state(pair_schmidt(1.0 / 3 - 0.02), 3);
    const StateWithLayout above = schmidt_state(pair_schmidt(1.0 / 3 + 0.02), 3);
    const GainReport gb = optimize_gain(below.rho, layout, opt);
    const GainReport ga = optimize_gain(above.rho, layout, opt);
    const bool pass = gb.gain <= 1.0 + 1e-4 && ga.gain > 1.0 + 1e-6;
    return CheckOutcome{pass, Json{{"gain_below", gb.gain}, {"gain_above", ga.gain}}};
  });

  run("skew_closed_form_routes_agree", [] {
    Matrix c(2, 2);
    c << 0.6, 0.25, 0.25, 0.4;
    const double a = qubit_skew_closed_form(0.6, 0.25, 3, 2);
    const double b = skew_closed_form(CoefficientMatrix(c), 3, 2);
    const double g1 = qubit_skew_closed_form(0.5, 0.2, 4, 3);
    const double g2 = ghz_family_skew(0.2, 4, 3);
    const bool pass = std::abs(a - b) <= 1e-10 && std::abs(g1 - g2) <= 1e-10;
    return CheckOutcome{pass, Json{{"qubit_form", a},
                                   {"general_form", b},
                                   {"qubit_form_half", g1},
                                   {"ghz_form", g2}}};
  });

  run("scaling_gain_identities", [] {
    const double one = scaling_gain(17.0, 1.0);
    const double sat_n = scaling_gain(2.0, 1e6);
    const double sat_m = scaling_gain(1e9, 100.0);
    const bool mono_n = scaling_gain(10, 50) < scaling_gain(20, 50) &&
                        scaling_gain(20, 50) < scaling_gain(40, 50);
    const bool mono_m = scaling_gain(10, 5) < scaling_gain(10, 10) &&
                        scaling_gain(10, 10) < scaling_gain(10, 40);
    const bool capped = scaling_gain(7, 300) <= 7.0 + 1e-9 &&
                        scaling_gain(300, 7) <= 7.0 + 1e-9;
    const bool pass = std::abs(one - 1.0) <= 1e-12 && std::abs(sat_n - 2.0) <= 1e-6 &&
                      sat_m > 99.99999 && sat_m <= 100.0 && mono_n && mono_m && capped;
    return CheckOutcome{pass, Json{{"g_M1", one},
                                   {"g_N2_Mhuge", sat_n},
                                   {"g_Nhuge_M100", sat_m}}};
  });

  run("cluster_state_qfi_closed_form", [] {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    std::vector<HermitianOperator> lifted;
    for (int n = 0; n < 5; ++n) {
      const Matrix h = ud(gen) * pauli_x() + ud(gen) * pauli_y() + ud(gen) * pauli_z();
      lifted.emplace_back(kron(h, h));
    }
    const StateWithLayout ring = ring_cluster_state(5);
    const double closed = cluster_multicopy_qfi(5, 2, lifted);
    const double direct = multicopy_qfi_direct(ring.rho, lifted, PartitionLayout{5, 2, 2});
    const double rel = std::abs(closed - direct) / std::max(1.0, std::abs(direct));
    return CheckOutcome{rel <= 1e-9,
                        Json{{"closed", closed}, {"direct", direct}, {"rel_diff", rel}}};
  });

  Json j;
  j["all_pass"] = all;
  j["checks"] = checks;
  const std::string jpath = out_path(cfg, "verify.json");
  write_text(jpath, j.dump(2) + "\n");

  ExperimentResult res;
  res.name = "verify";
  res.files.push_back(jpath);
  res.ok = all;
  int passed = 0;
  std::string failed;
  for (const auto& c : checks) {
    if (c["pass"].get<bool>())
      ++passed;
    else
      failed += " " + c["name"].get<std::string>();
  }
  std::ostringstream s;
  s << passed << "/" << checks.size() << " checks passed";
  if (!failed.empty()) s << "; failed:" << failed;
  res.summary = s.str();
  return res;
}

} // namespace qmetro

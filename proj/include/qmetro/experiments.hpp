#pragma once

#include "qmetro/optimizer.hpp"
#include "qmetro/serialize.hpp"

#include <string>
#include <vector>

namespace qmetro {

// Shared settings for the experiment drivers.  The top-level seed overrides
// optimizer.seed so one flag reseeds a whole run.
struct ExperimentConfig {
  std::string outdir = "out";
  std::uint64_t seed = 0;
  OptimizerConfig optimizer;
};

struct ExperimentResult {
  std::string name;
  std::vector<std::string> files; // paths written, in order
  bool ok = true;
  std::string summary;
};

// Plain numeric CSV: one header line, %.12g cells, LF line endings.  All
// drivers regenerate their SVG from the written CSV (read back, not from the
// in-memory values), so the plot can never drift from the published table.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

// Collective QFI of M copies of the two-qubit isotropic state against its
// variance and skew companions, with the matching separable bound.
// Columns M,F_Q,4Var,4I,F_sep for M = 1..m_max (m_max <= 7).
ExperimentResult run_fig2(double p, int m_max, const ExperimentConfig& cfg);

// Gain of the maximally entangled pair family versus pair dimension N for a
// few large copy counts, from the closed form.
ExperimentResult run_fig3(const std::vector<int>& copies_list, const ExperimentConfig& cfg);

// Gain onset of the white-noise GHZ family (N = 3) under optimized local
// probes: the bare qubit family next to its embeddings into local dimension
// d in {3,4,5}.  Reports the noise level where each curve crosses gain 1.
ExperimentResult run_figs1(const std::vector<int>& dims,
                           const std::vector<double>& p_grid,
                           const ExperimentConfig& cfg);

// Optimized gain of the W / flipped-W mixture (N = 3) for one and two copies.
ExperimentResult run_figs2(const std::vector<double>& p_grid, const ExperimentConfig& cfg);

// Upper bound on the two-copy gain of pair interactions versus copy count.
ExperimentResult run_bounds(int m_max, const ExperimentConfig& cfg);

// Optimized gain along a named one-parameter state family.
ExperimentResult run_scan(const std::string& family, const std::vector<double>& grid,
                          const ExperimentConfig& cfg);
std::vector<std::string> scan_family_names();

// Cross-checks between independent computation routes (closed forms vs dense
// matrices, the two symmetric evaluator paths, sampled vs exact, bound
// chains).  Writes verify.json; ok is the conjunction of every check.
ExperimentResult run_verify(const ExperimentConfig& cfg);

// Parse a grid spec like "p=0:1:0.02" (name, start, stop, step).
std::vector<double> parse_param_grid(const std::string& spec);

} // namespace qmetro

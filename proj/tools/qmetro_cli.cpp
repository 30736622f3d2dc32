#include "qmetro/experiments.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace qmetro;

int main(int argc, char** argv) {
  CLI::App app{"metrological gain toolkit for multicopy quantum states"};
  app.require_subcommand(1);

  std::string outdir = "out";
  std::uint64_t seed = 0;
  std::string config_path;
  int threads = 0;
  auto* outdir_opt = app.add_option("--outdir", outdir, "output directory");
  outdir_opt->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "seed for restarts and sampling");
  seed_opt->capture_default_str();
  app.add_option("--config", config_path, "JSON config file (outdir, seed, optimizer)");
  auto* threads_opt =
      app.add_option("--threads", threads, "OpenMP threads (overrides QMETRO_THREADS)");

  double fig2_p = 0.9;
  int fig2_mmax = 7;
  auto* fig2 = app.add_subcommand("fig2", "isotropic pair: QFI, variance, skew vs copies");
  fig2->add_option("--p", fig2_p, "mixing weight")->capture_default_str();
  fig2->add_option("--mmax", fig2_mmax, "largest copy count (<= 7)")->capture_default_str();

  std::vector<int> fig3_m{2000, 4000, 6000};
  auto* fig3 = app.add_subcommand("fig3", "pair-family gain vs dimension, closed form");
  fig3->add_option("--m", fig3_m, "copy counts")->delimiter(',')->capture_default_str();

  std::vector<int> figs1_d{3, 4, 5};
  std::string figs1_grid = "p=0:1:0.02";
  auto* figs1 = app.add_subcommand("figs1", "white-noise GHZ gain onset, qubit vs embedded");
  figs1->add_option("--d", figs1_d, "embedded local dimensions (subset of 3,4,5)")
      ->delimiter(',')
      ->capture_default_str();
  figs1->add_option("--grid", figs1_grid, "grid spec name=start:stop:step")
      ->capture_default_str();

  std::string figs2_grid = "p=0:1:0.05";
  auto* figs2 = app.add_subcommand("figs2", "W mixture: one vs two copies");
  figs2->add_option("--grid", figs2_grid, "grid spec name=start:stop:step")
      ->capture_default_str();

  auto* verify =
      app.add_subcommand("verify", "cross-check independent computation routes");

  int bounds_m = 20;
  auto* bounds = app.add_subcommand("bounds", "pair-interaction gain bound vs copies");
  bounds->add_option("--m", bounds_m, "largest copy count")->capture_default_str();

  std::string scan_state;
  std::string scan_param = "p=0:1:0.02";
  std::string fam_help = "family name; one of:";
  for (const auto& n : scan_family_names()) fam_help += " " + n;
  auto* scan = app.add_subcommand("scan", "optimized gain along a named state family");
  scan->add_option("--state", scan_state, fam_help)->required();
  scan->add_option("--grid,--param", scan_param, "grid spec name=start:stop:step")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open config: " + config_path);
      Json j;
      in >> j;
      if (j.contains("outdir")) cfg.outdir = j["outdir"].get<std::string>();
      if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
      if (j.contains("optimizer"))
        cfg.optimizer = optimizer_config_from_json(j["optimizer"]);
    }
    // Explicit flags win over the config file; defaults fill the rest.
    if (outdir_opt->count()) cfg.outdir = outdir;
    if (seed_opt->count()) cfg.seed = seed;

    int nthreads = 0;
    if (const char* env = std::getenv("QMETRO_THREADS")) nthreads = std::atoi(env);
    if (threads_opt->count()) nthreads = threads;
#ifdef _OPENMP
    if (nthreads > 0) omp_set_num_threads(nthreads);
#else
    (void)nthreads;
#endif

    ExperimentResult res;
    if (*fig2)
      res = run_fig2(fig2_p, fig2_mmax, cfg);
    else if (*fig3)
      res = run_fig3(fig3_m, cfg);
    else if (*figs1)
      res = run_figs1(figs1_d, parse_param_grid(figs1_grid), cfg);
    else if (*figs2)
      res = run_figs2(parse_param_grid(figs2_grid), cfg);
    else if (*verify)
      res = run_verify(cfg);
    else if (*bounds)
      res = run_bounds(bounds_m, cfg);
    else if (*scan)
      res = run_scan(scan_state, parse_param_grid(scan_param), cfg);

    std::cout << res.name << ": " << res.summary << "\n";
    for (const auto& f : res.files) std::cout << "  wrote " << f << "\n";
    std::cout << "status: " << (res.ok ? "OK" : "FAIL") << "\n";
    return res.ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

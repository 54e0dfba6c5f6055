// Command-line front end: solve a single profile configuration, sweep a grid
// of initial conditions, or print the hypothesis report of a family.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "icurv/run_io.hpp"

namespace {

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::atof(tok.c_str()));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rotationally symmetric self-expanders to inverse curvature flows"};
  app.require_subcommand(1);

  icurv::RunConfig cfg;
  std::string config_path;
  std::string h0_list = "-1", r0_list = "1.5", rdot0_list = "0.3";

  auto* solve = app.add_subcommand("solve", "integrate one profile curve and verify it");
  solve->add_option("--family", cfg.family, "family spec (H, sigma-ratio:k=1, ...)");
  solve->add_option("--n", cfg.n, "ambient dimension parameter n >= 2");
  solve->add_option("--h0", cfg.ic.h0, "initial height (h0 < 0)");
  solve->add_option("--r0", cfg.ic.r0, "initial radius (r0 > -h0)");
  solve->add_option("--rdot0", cfg.ic.rdot0, "initial slope (0 < rdot0 < -h0/r0)");
  solve->add_option("--rtol", cfg.opts.rtol, "relative tolerance");
  solve->add_option("--atol", cfg.opts.atol, "absolute tolerance");
  solve->add_option("--span", cfg.opts.span, "half-width of the h-range");
  solve->add_option("--tail-eps", cfg.opts.tail_eps, "tail certificate threshold (0 disables)");
  solve->add_option("--max-steps", cfg.opts.max_steps, "step budget per solve");
  solve->add_option("--out-csv", cfg.out_csv, "write the sample table here");
  solve->add_option("--out-json", cfg.out_json, "write the JSON summary here");
  solve->add_option("--out-plot", cfg.out_plot, "write two-column h,r plot data here");
  solve->add_option("--format", cfg.format, "sample table format: csv or tsv");
  solve->add_option("--config", config_path, "JSON config file mirroring the flags");

  auto* sweep = app.add_subcommand("sweep", "independent solves over a grid of initial conditions");
  sweep->add_option("--family", cfg.family);
  sweep->add_option("--n", cfg.n);
  sweep->add_option("--h0", h0_list, "comma-separated h0 values");
  sweep->add_option("--r0", r0_list, "comma-separated r0 values");
  sweep->add_option("--rdot0", rdot0_list, "comma-separated rdot0 values");
  sweep->add_option("--rtol", cfg.opts.rtol);
  sweep->add_option("--atol", cfg.opts.atol);
  sweep->add_option("--span", cfg.opts.span);
  sweep->add_option("--tail-eps", cfg.opts.tail_eps);
  sweep->add_option("--max-steps", cfg.opts.max_steps);
  sweep->add_option("--out-csv", cfg.out_csv, "write the summary table here (default: stdout)");

  std::string family = "H";
  int n = 2;
  auto* check = app.add_subcommand("check-family", "hypothesis report for a family");
  check->add_option("--family", family);
  check->add_option("--n", n);

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) {
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) {
        std::cerr << "error: cannot read config file '" << config_path << "'\n";
        return 2;
      }
      try {
        icurv::RunConfig file_cfg = icurv::json::parse(is).get<icurv::RunConfig>();
        // explicit flags win over the config file
        icurv::RunConfig merged = file_cfg;
        if (solve->count("--family")) merged.family = cfg.family;
        if (solve->count("--n")) merged.n = cfg.n;
        if (solve->count("--h0")) merged.ic.h0 = cfg.ic.h0;
        if (solve->count("--r0")) merged.ic.r0 = cfg.ic.r0;
        if (solve->count("--rdot0")) merged.ic.rdot0 = cfg.ic.rdot0;
        if (solve->count("--rtol")) merged.opts.rtol = cfg.opts.rtol;
        if (solve->count("--atol")) merged.opts.atol = cfg.opts.atol;
        if (solve->count("--span")) merged.opts.span = cfg.opts.span;
        if (solve->count("--tail-eps")) merged.opts.tail_eps = cfg.opts.tail_eps;
        if (solve->count("--max-steps")) merged.opts.max_steps = cfg.opts.max_steps;
        if (solve->count("--out-csv")) merged.out_csv = cfg.out_csv;
        if (solve->count("--out-json")) merged.out_json = cfg.out_json;
        if (solve->count("--out-plot")) merged.out_plot = cfg.out_plot;
        if (solve->count("--format")) merged.format = cfg.format;
        cfg = merged;
      } catch (const std::exception& e) {
        std::cerr << "error: bad config file: " << e.what() << "\n";
        return 2;
      }
    }
    return icurv::cmd_solve(cfg);
  }
  if (sweep->parsed()) {
    icurv::SweepGrid grid{parse_list(h0_list), parse_list(r0_list), parse_list(rdot0_list)};
    return icurv::cmd_sweep(cfg, grid);
  }
  return icurv::cmd_check_family(family, n);
}

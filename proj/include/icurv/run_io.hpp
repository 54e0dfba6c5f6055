#pragma once

// Run configuration, artifact writers (sample CSV, JSON summary, plot data)
// and the command implementations behind the CLI front end. Kept in the
// library so the round-trip and determinism guarantees are directly testable.

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "icurv/invariants.hpp"
#include "icurv/profile_ode.hpp"
#include "icurv/symfun.hpp"

namespace icurv {

using json = nlohmann::ordered_json;

struct RunConfig {
  std::string family = "H";
  int n = 2;
  InitialConditions ic;
  SolveOptions opts;
  std::string out_csv;
  std::string out_json;
  std::string out_plot;
  std::string format = "csv";  // sample table format: csv | tsv

  bool operator==(const RunConfig&) const = default;
};

inline bool operator==(const InitialConditions& a, const InitialConditions& b) {
  return a.h0 == b.h0 && a.r0 == b.r0 && a.rdot0 == b.rdot0;
}
inline bool operator==(const SolveOptions& a, const SolveOptions& b) {
  return a.rtol == b.rtol && a.atol == b.atol && a.span == b.span && a.tail_eps == b.tail_eps &&
         a.max_steps == b.max_steps && a.initial_step == b.initial_step;
}

inline void to_json(json& j, const InitialConditions& ic) {
  j = json{{"h0", ic.h0}, {"r0", ic.r0}, {"rdot0", ic.rdot0}};
}
inline void from_json(const json& j, InitialConditions& ic) {
  ic.h0 = j.value("h0", -1.0);
  ic.r0 = j.value("r0", 1.5);
  ic.rdot0 = j.value("rdot0", 0.3);
}
inline void to_json(json& j, const SolveOptions& o) {
  j = json{{"rtol", o.rtol},         {"atol", o.atol},
           {"span", o.span},         {"tail_eps", o.tail_eps},
           {"max_steps", o.max_steps}, {"initial_step", o.initial_step}};
}
inline void from_json(const json& j, SolveOptions& o) {
  const SolveOptions d;
  o.rtol = j.value("rtol", d.rtol);
  o.atol = j.value("atol", d.atol);
  o.span = j.value("span", d.span);
  o.tail_eps = j.value("tail_eps", d.tail_eps);
  o.max_steps = j.value("max_steps", d.max_steps);
  o.initial_step = j.value("initial_step", d.initial_step);
}
inline void to_json(json& j, const RunConfig& c) {
  j = json{{"family", c.family}, {"n", c.n},           {"initial_conditions", c.ic},
           {"options", c.opts},  {"out_csv", c.out_csv}, {"out_json", c.out_json},
           {"out_plot", c.out_plot}, {"format", c.format}};
}
inline void from_json(const json& j, RunConfig& c) {
  const RunConfig d;
  c.family = j.value("family", d.family);
  c.n = j.value("n", d.n);
  if (j.contains("initial_conditions")) j.at("initial_conditions").get_to(c.ic);
  if (j.contains("options")) j.at("options").get_to(c.opts);
  c.out_csv = j.value("out_csv", d.out_csv);
  c.out_json = j.value("out_json", d.out_json);
  c.out_plot = j.value("out_plot", d.out_plot);
  c.format = j.value("format", d.format);
}

inline void to_json(json& j, const CheckVerdict& v) {
  j = json{{"check_id", to_string(v.check_id)},
           {"pass", v.pass},
           {"worst_margin", v.worst_margin},
           {"worst_location_h", v.worst_location_h}};
  if (!v.note.empty()) j["note"] = v.note;
}

// ---------------------------------------------------------------------------
// Artifact writers

namespace io_detail {

// 17 significant digits: lossless double round-trip.
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace io_detail

/// Sample table with header h,r,rdot,rddot,Q,domain_quantity,residual at 17
/// significant digits. sep is ',' for csv, '\t' for tsv.
inline std::string format_samples(const Trajectory& t, char sep = ',') {
  std::string out = "h,r,rdot,rddot,Q,domain_quantity,residual\n";
  if (sep != ',')
    for (auto& ch : out)
      if (ch == ',') ch = sep;
  for (const auto& p : t.points) {
    using io_detail::g17;
    out += g17(p.h);
    out += sep;
    out += g17(p.r);
    out += sep;
    out += g17(p.rdot);
    out += sep;
    out += g17(p.rddot);
    out += sep;
    out += g17(p.q);
    out += sep;
    out += g17(p.domain_quantity);
    out += sep;
    out += g17(p.residual);
    out += '\n';
  }
  return out;
}

/// Two-column plot data (h, r), gnuplot-friendly.
inline std::string format_plot_data(const Trajectory& t) {
  std::string out;
  for (const auto& p : t.points) {
    out += io_detail::g17(p.h);
    out += ' ';
    out += io_detail::g17(p.r);
    out += '\n';
  }
  return out;
}

/// JSON summary of a solve: configuration echo, headline numbers, and the
/// full verdict list.
inline json summary_json(const RunConfig& cfg, const SolveReport& rep) {
  json j;
  j["family"] = rep.family_spec;
  j["n"] = rep.n;
  j["initial_conditions"] = rep.ic;
  j["options"] = cfg.opts;
  j["mu"] = rep.mu;
  j["q_at_h0"] = rep.q_at_h0;
  j["h_star"] = rep.h_star;
  j["r_at_star"] = rep.r_at_star;
  j["r_min_est"] = rep.r_min_est;
  j["r_max_est"] = rep.r_max_est;
  j["lower_bound_c"] = rep.lower_bound_c;
  j["upper_bound_K"] = rep.upper_bound_K;
  j["residual_max"] = rep.residual_max;
  j["residual_rms"] = rep.residual_rms;
  j["termination"] = to_string(rep.termination);
  j["termination_left"] = to_string(rep.termination_left);
  j["termination_right"] = to_string(rep.termination_right);
  if (rep.has_domain_exit) {
    j["exit_h"] = rep.exit_h;
    j["exit_y"] = rep.exit_y;
  }
  j["steps"] = json{{"accepted", rep.stats.accepted},
                    {"rejected", rep.stats.rejected},
                    {"rhs_evaluations", rep.stats.rhs_evaluations},
                    {"max_scaled_error", rep.stats.max_scaled_error}};
  j["checks"] = rep.invariant_verdicts;
  j["all_pass"] = all_pass(rep.invariant_verdicts);
  return j;
}

inline bool write_file(const std::string& path, const std::string& content, std::ostream& err) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    err << "error: cannot open '" << path << "' for writing\n";
    return false;
  }
  os << content;
  return os.good();
}

// ---------------------------------------------------------------------------
// Commands

/// Solve one configuration, write the requested artifacts, and return the
/// process exit code: 0 all checks pass, 1 a check failed, 2 invalid
/// family/initial conditions, 3 truncated integration (domain exit, step
/// underflow, step budget).
inline int cmd_solve(const RunConfig& cfg, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  std::optional<CurvatureFunction> f;
  try {
    f.emplace(CurvatureFunction::parse(cfg.family, cfg.n));
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  const Validation v = validate_initial_conditions(cfg.ic);
  if (!v.ok) {
    for (const auto& s : v.violations) err << "error: " << s << "\n";
    return 2;
  }

  Trajectory t;
  SolveReport rep;
  try {
    auto solved = solve_with_checks(*f, cfg.ic, cfg.opts);
    t = std::move(solved.first);
    rep = std::move(solved.second);
  } catch (const EligibilityError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  const char sep = cfg.format == "tsv" ? '\t' : ',';
  if (!cfg.out_csv.empty() && !write_file(cfg.out_csv, format_samples(t, sep), err)) return 1;
  if (!cfg.out_plot.empty() && !write_file(cfg.out_plot, format_plot_data(t), err)) return 1;
  if (!cfg.out_json.empty() && !write_file(cfg.out_json, summary_json(cfg, rep).dump(2) + "\n", err))
    return 1;

  out << "family=" << rep.family_spec << " n=" << rep.n << " mu=" << io_detail::g17(rep.mu) << "\n"
      << "termination=" << to_string(rep.termination) << " (left " << to_string(rep.termination_left)
      << ", right " << to_string(rep.termination_right) << ")\n"
      << "h_star=" << io_detail::g17(rep.h_star) << " r(h_star)=" << io_detail::g17(rep.r_at_star) << "\n"
      << "r_min_est=" << io_detail::g17(rep.r_min_est) << " r_max_est=" << io_detail::g17(rep.r_max_est)
      << "\n"
      << "residual_max=" << io_detail::g17(rep.residual_max) << "\n";
  for (const auto& cv : rep.invariant_verdicts)
    out << (cv.pass ? "  [pass] " : "  [FAIL] ") << to_string(cv.check_id)
        << " margin=" << io_detail::g17(cv.worst_margin) << " at h=" << io_detail::g17(cv.worst_location_h)
        << (cv.note.empty() ? "" : "  (" + cv.note + ")") << "\n";

  if (rep.termination != Termination::ReachedSpan && rep.termination != Termination::CertifiedTail) {
    err << "error: integration truncated: " << to_string(rep.termination) << "\n";
    return 3;
  }
  return all_pass(rep.invariant_verdicts) ? 0 : 1;
}

struct SweepGrid {
  std::vector<double> h0s, r0s, rdot0s;
};

/// Independent solves over the Cartesian grid, one summary row per point, in
/// deterministic row-major order regardless of execution interleaving.
/// Returns the CSV text; per-row failures are recorded in-row.
inline std::string run_sweep(const RunConfig& base, const SweepGrid& grid, unsigned threads = 0) {
  struct Row {
    double h0, r0, rdot0;
    std::string status;
    double h_star = std::numeric_limits<double>::quiet_NaN();
    double r_min = std::numeric_limits<double>::quiet_NaN();
    double r_max = std::numeric_limits<double>::quiet_NaN();
    bool all_pass = false;
  };

  std::vector<Row> rows;
  for (double h0 : grid.h0s)
    for (double r0 : grid.r0s)
      for (double rd0 : grid.rdot0s) rows.push_back({h0, r0, rd0, "", 0, 0, 0, false});

  const CurvatureFunction f = CurvatureFunction::parse(base.family, base.n);

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      Row& row = rows[i];
      const InitialConditions ic{row.h0, row.r0, row.rdot0};
      const Validation v = validate_initial_conditions(ic);
      if (!v.ok) {
        row.status = "invalid:" + v.violations.front();
        continue;
      }
      try {
        auto [t, rep] = solve_with_checks(f, ic, base.opts);
        row.status = to_string(rep.termination);
        row.h_star = rep.h_star;
        row.r_min = rep.r_min_est;
        row.r_max = rep.r_max_est;
        row.all_pass = all_pass(rep.invariant_verdicts);
      } catch (const std::exception& e) {
        row.status = std::string("error:") + e.what();
      }
    }
  };

  unsigned nthreads = threads ? threads : std::thread::hardware_concurrency();
  nthreads = std::max(1u, std::min<unsigned>(nthreads, static_cast<unsigned>(rows.size())));
  {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i + 1 < nthreads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }

  std::string out = "h0,r0,rdot0,status,h_star,r_min,r_max,all_pass\n";
  for (const auto& row : rows) {
    using io_detail::g17;
    out += g17(row.h0);
    out += ',';
    out += g17(row.r0);
    out += ',';
    out += g17(row.rdot0);
    out += ',';
    // commas inside statuses would break the table
    std::string st = row.status;
    for (auto& ch : st)
      if (ch == ',') ch = ';';
    out += st;
    out += ',';
    out += g17(row.h_star);
    out += ',';
    out += g17(row.r_min);
    out += ',';
    out += g17(row.r_max);
    out += ',';
    out += row.all_pass ? "true" : "false";
    out += '\n';
  }
  return out;
}

inline int cmd_sweep(const RunConfig& base, const SweepGrid& grid, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  if (grid.h0s.empty() || grid.r0s.empty() || grid.rdot0s.empty()) {
    err << "error: sweep grid must be non-empty in every coordinate\n";
    return 2;
  }
  std::string table;
  try {
    table = run_sweep(base, grid);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  if (!base.out_csv.empty()) {
    if (!write_file(base.out_csv, table, err)) return 1;
  } else {
    out << table;
  }
  return 0;
}

/// Hypothesis report for one family: alpha, beta, gamma, the derivative
/// bound estimate, and pass/fail per hypothesis.
inline int cmd_check_family(const std::string& family, int n, std::ostream& out = std::cout,
                            std::ostream& err = std::cerr) {
  std::optional<CurvatureFunction> f;
  try {
    f.emplace(CurvatureFunction::parse(family, n));
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  const HypothesisReport rep = check_theorem_hypotheses(*f);
  const auto fmt = [](double v) { return io_detail::g17(v); };
  out << "family=" << f->spec_string() << " n=" << n << "\n"
      << "alpha=" << fmt(rep.alpha) << "\n"
      << "beta=" << fmt(rep.beta) << "\n"
      << "gamma=" << fmt(rep.gamma) << "\n"
      << "uniform_C=" << fmt(rep.derivative_bound) << "\n"
      << "rho_hat_limit_at_minus_alpha=" << fmt(rep.rho_hat_limit_at_minus_alpha) << "\n"
      << "cylinder_in_cone=" << (rep.cylinder_in_cone ? "yes" : "no") << "\n"
      << "bottle_eligible=" << (f->bottle_eligible() ? "yes" : "no") << "\n";
  out << "hypothesis alpha > 0: " << (rep.alpha > 0.0 ? "pass" : "FAIL") << "\n"
      << "hypothesis beta > 1: " << (rep.beta > 1.0 ? "pass" : "FAIL") << "\n"
      << "hypothesis rho_hat -> 0 at -alpha: " << (rep.rho_hat_vanishes_at_minus_alpha ? "pass" : "FAIL")
      << "\n"
      << "hypothesis derivative bound finite: " << (std::isfinite(rep.derivative_bound) ? "pass" : "FAIL")
      << "\n"
      << "passes_theorem: " << (rep.passes_theorem ? "pass" : "FAIL") << "\n";
  if (!rep.failures.empty()) {
    out << "failures:\n";
    for (const auto& s : rep.failures) out << "  - " << s << "\n";
  }
  return 0;
}

}  // namespace icurv

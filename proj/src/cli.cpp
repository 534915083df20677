#include "marketlcp/cli.hpp"

#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "marketlcp/case_io.hpp"
#include "marketlcp/error.hpp"
#include "marketlcp/game.hpp"
#include "marketlcp/report.hpp"

namespace marketlcp {

namespace {

struct Flags {
  std::string case_path;
  std::string out;
  std::string format;
  std::string lcp_path;
  double tol = 1e-9;
  double pivot_tol = 1e-11;
  double game_tol = 1e-6;
  std::uint64_t seed = 1;
  bool strict = false;
  int threads = 0;
  std::vector<double> wind_deltas;
  std::vector<double> kappas;
  std::vector<double> scales;
  std::string wind_unit;
  std::string kappa_demand;
};

std::filesystem::path resolve_case(const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::ValidationError, "--case is required");
  if (std::filesystem::exists(path)) return path;
  const auto bundled = bundled_case(path);
  if (std::filesystem::exists(bundled)) return bundled;
  throw Error(ErrorCode::ValidationError, "case file not found: " + path);
}

struct Loaded {
  CaseFile file;
  MarketOptions market;
};

Loaded load(const Flags& f, std::ostream& err) {
  Loaded l;
  l.file = parse_case_file(resolve_case(f.case_path), ParseOptions{f.strict});
  for (const auto& w : l.file.warnings) err << "warning: " << w << "\n";
  l.market.strict = f.strict;
  l.market.lcp.complementarity_tol = f.tol;
  l.market.lcp.pivot_tol = f.pivot_tol;
  return l;
}

BetaOptions beta_options(const Flags& f) {
  BetaOptions b;
  b.seed = f.seed;
  return b;
}

int wind_unit_of(const MarketCase& c, const std::string& id) {
  if (!id.empty()) {
    const int i = find_generator(c, id);
    if (i < 0) throw Error(ErrorCode::ValidationError, "unknown generator " + id);
    return i;
  }
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    if (c.generators[i].kind == UnitKind::Wind) return static_cast<int>(i);
  }
  throw Error(ErrorCode::NotWindUnit, "case has no wind unit");
}

int kappa_unit_of(const MarketCase& c, const std::string& id) {
  if (!id.empty()) {
    const int j = find_demand(c, id);
    if (j < 0) throw Error(ErrorCode::ValidationError, "unknown demand " + id);
    return j;
  }
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    if (c.demands[j].dispatchable) return static_cast<int>(j);
  }
  throw Error(ErrorCode::SpecTargetsFixedLoad, "case has no dispatchable demand");
}

double single(const std::vector<double>& v, const char* flag) {
  if (v.size() != 1) throw Error(ErrorCode::ValidationError, std::string(flag) + " takes one value here");
  return v.front();
}

// Flags take precedence over the case file's perturbation section.
PerturbationSpec spec_from(const Flags& f, const CaseFile& file) {
  if (f.wind_deltas.empty() && f.kappas.empty()) {
    if (!file.perturbation || file.perturbation->empty()) {
      throw Error(ErrorCode::ValidationError,
                  "no perturbation: pass --wind-delta and/or --kappa or add a perturbation section");
    }
    return *file.perturbation;
  }
  PerturbationSpec spec;
  const auto& c = file.market;
  if (!f.wind_deltas.empty()) {
    const double d = single(f.wind_deltas, "--wind-delta");
    if (d != 0.0) set_wind_delta(spec, c, wind_unit_of(c, f.wind_unit), d);
  }
  if (!f.kappas.empty()) {
    const double k = single(f.kappas, "--kappa");
    if (k != 0.0) set_curtailment(spec, c, kappa_unit_of(c, f.kappa_demand), k);
  }
  if (spec.empty()) throw Error(ErrorCode::ValidationError, "perturbation is empty");
  return spec;
}

BetaResult beta_with_fallback(const Matrix& m, const BetaOptions& opts) {
  try {
    return beta_of(m, opts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularEncountered) throw;
    BetaOptions sampled = opts;
    sampled.vertex_limit = 0;
    return beta_of(m, sampled);
  }
}

LcpInstance read_lcp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ValidationError, "cannot read LCP file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    const auto rows = j.at("m").get<std::vector<std::vector<double>>>();
    const auto q = j.at("q").get<std::vector<double>>();
    const int n = static_cast<int>(q.size());
    Matrix m(n, n);
    if (static_cast<int>(rows.size()) != n) throw Error(ErrorCode::ValidationError, "m must be n x n");
    for (int r = 0; r < n; ++r) {
      if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != n) {
        throw Error(ErrorCode::ValidationError, "m must be n x n");
      }
      for (int c = 0; c < n; ++c) m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
    LcpInstance inst = LcpInstance::unlabeled(m, Eigen::Map<const Vector>(q.data(), n));
    inst.validate();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, path + ": " + e.what());
  }
}

// Returns the exit code; writes the report in the requested format.
int finish(const RunReport& report, const Flags& f, ReportFormat fallback, std::ostream& out,
           int code = 0) {
  const ReportFormat fmt = f.format.empty() ? fallback : parse_format(f.format);
  const std::string text = emit_report(report, fmt);
  if (f.out.empty()) {
    out << text;
  } else {
    std::ofstream file(f.out, std::ios::binary);
    if (!file) throw Error(ErrorCode::ValidationError, "cannot write " + f.out);
    file << text;
  }
  return code;
}

int cmd_solve(const Flags& f, std::ostream& out, std::ostream& err, bool settle) {
  const auto l = load(f, err);
  const auto sol = solve_market(l.file.market, l.market);
  RunReport r;
  r.solution = make_solution_section(l.file.market, sol);
  if (settle) r.settlement = make_settlement_section(settlement(sol, l.file.market));
  return finish(r, f, ReportFormat::Text, out);
}

int cmd_pmatrix(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto l = load(f, err);
  const auto inst = assemble_lcp(l.file.market, f.strict);
  ClassifyOptions opts;
  opts.seed = f.seed;
  RunReport r;
  r.matrix_class = make_matrix_class_section(classify_p_matrix(inst.m, opts),
                                             static_cast<int>(inst.m.rows()));
  return finish(r, f, ReportFormat::Text, out);
}

int cmd_bound(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto l = load(f, err);
  const auto pert = apply_perturbation(l.file.market, spec_from(f, l.file));
  const auto beta = beta_with_fallback(pert.nominal_lcp.m, beta_options(f));
  RunReport r;
  r.bound = make_bound_section(perturbation_bound(pert.nominal_lcp, pert.delta_m, pert.delta_q, beta));
  return finish(r, f, ReportFormat::Text, out);
}

int cmd_perturb(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto l = load(f, err);
  ShiftOptions opts;
  opts.market = l.market;
  opts.beta = beta_options(f);
  RunReport r;
  r.shift = make_shift_section(l.file.market, shift_analysis(l.file.market, spec_from(f, l.file), opts));
  return finish(r, f, ReportFormat::Text, out);
}

int cmd_sweep(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto l = load(f, err);
  const auto& c = l.file.market;
  SweepAxes axes;
  if (!f.wind_deltas.empty()) axes.deltas = f.wind_deltas;
  if (!f.kappas.empty()) axes.kappas = f.kappas;
  if (!f.scales.empty()) axes.penetration_scales = f.scales;
  const bool any_delta = std::any_of(axes.deltas.begin(), axes.deltas.end(), [](double d) { return d != 0.0; });
  const bool any_kappa = std::any_of(axes.kappas.begin(), axes.kappas.end(), [](double k) { return k != 0.0; });
  if (any_delta) axes.wind_unit = wind_unit_of(c, f.wind_unit);
  if (any_kappa) axes.kappa_unit = kappa_unit_of(c, f.kappa_demand);
  ShiftOptions opts;
  opts.market = l.market;
  opts.beta = beta_options(f);
  const auto table = sweep(c, axes, opts);
  for (const auto& row : table.rows) {
    if (!row.error.empty()) err << "warning: cell delta=" << row.delta << " kappa=" << row.kappa
                                << ": " << row.error << "\n";
  }
  RunReport r;
  r.sweep = make_sweep_section(table);
  return finish(r, f, ReportFormat::Csv, out);
}

int cmd_verify_nash(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto l = load(f, err);
  const auto sol = solve_market(l.file.market, l.market);
  const auto cert = certify_epsilon_equilibrium(l.file.market, sol, f.game_tol);
  RunReport r;
  r.certificate = make_certificate_section(cert);
  return finish(r, f, ReportFormat::Text, out, cert.is_nash_within ? 0 : 3);
}

int cmd_check_two_alpha(const Flags& f, std::ostream& out, std::ostream& err) {
  const auto l = load(f, err);
  const auto& nominal = l.file.market;
  const auto pert = apply_perturbation(nominal, spec_from(f, l.file));
  const auto sol_nominal = solve_market(nominal, l.market);
  const auto sol_pert = solve_market(pert.perturbed, l.market);
  const auto rep = evaluate_two_alpha(nominal, sol_nominal, pert.perturbed, sol_pert, f.game_tol);
  RunReport r;
  r.two_alpha = make_two_alpha_section(rep);
  const int code = finish(r, f, ReportFormat::Text, out, rep.holds ? 0 : 3);
  if (!rep.holds) err << "assertion failed: epsilon exceeds 2 alpha + tol\n";
  return code;
}

int cmd_oracle(const Flags& f, std::ostream& out, std::ostream& err) {
  LcpInstance inst;
  if (!f.lcp_path.empty()) {
    inst = read_lcp(f.lcp_path);
  } else {
    inst = assemble_lcp(load(f, err).file.market, f.strict);
  }
  SolverOptions sopts;
  sopts.complementarity_tol = f.tol;
  sopts.pivot_tol = f.pivot_tol;
  const auto lemke = solve_lcp(inst, sopts);
  const auto oracle = enumerate_lcp_oracle(inst, f.tol);
  OracleSection s;
  s.dimension = static_cast<int>(inst.q.size());
  s.solutions_found = static_cast<int>(oracle.solutions.size());
  s.feasible_bases = oracle.feasible_bases;
  s.singular_bases = oracle.singular_bases;
  s.lemke_status = to_string(lemke.status);
  s.max_difference = INFINITY;
  for (const auto& sol : oracle.solutions) {
    s.max_difference = std::min(s.max_difference, (sol.x - lemke.x).cwiseAbs().maxCoeff());
  }
  constexpr double kAgreement = 1e-8;
  s.agrees = lemke.status == LcpStatus::Solved && s.max_difference <= kAgreement;
  RunReport r;
  r.oracle = s;
  return finish(r, f, ReportFormat::Text, out, s.agrees ? 0 : 3);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Flags f;
  if (const char* env = std::getenv(kTolEnv)) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0)) {
      err << "error: " << kTolEnv << " must be a positive number\n";
      return 1;
    }
    f.tol = v;
  }

  CLI::App app{"Market-clearing LCP solver with perturbation and equilibrium diagnostics",
               "marketlcp"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--case", f.case_path, "Case JSON file or bundled case name");
  app.add_option("--out", f.out, "Write the report here instead of standard output");
  app.add_option("--format", f.format, "text, json or csv")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  app.add_option("--tol", f.tol, "LCP complementarity tolerance")->check(CLI::PositiveNumber);
  app.add_option("--pivot-tol", f.pivot_tol, "Pivot threshold")->check(CLI::PositiveNumber);
  app.add_option("--game-tol", f.game_tol, "Equilibrium tolerance in $/h")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", f.seed, "Seed for sampled minors and sampled beta");
  app.add_flag("--strict", f.strict, "Reject unknown fields and non-rational bid stacks");
  app.add_option("--threads", f.threads, "Worker threads for parallel kernels (0 = default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--wind-delta", f.wind_deltas, "Wind forecast error fraction(s)")->delimiter(',');
  app.add_option("--kappa", f.kappas, "Curtailment factor(s)")->delimiter(',');
  app.add_option("--penetration-scale", f.scales, "Wind size multiplier(s) for sweep")
      ->delimiter(',');
  app.add_option("--wind-unit", f.wind_unit, "Generator id for wind deltas (default: first wind unit)");
  app.add_option("--kappa-demand", f.kappa_demand,
                 "Demand id for curtailment (default: first dispatchable demand)");
  app.add_option("--lcp", f.lcp_path, "oracle: JSON file with m (rows) and q instead of a case");

  auto* solve = app.add_subcommand("solve", "Clear the market and print LMPs and dispatch");
  auto* settle = app.add_subcommand("settle", "Clear the market and print the settlement");
  auto* pmatrix = app.add_subcommand("pmatrix", "Classify the assembled LCP matrix");
  auto* bound = app.add_subcommand("bound", "Perturbation bound for a wind or curtailment spec");
  auto* perturb = app.add_subcommand("perturb", "Bound and observed equilibrium shift");
  auto* sweep_cmd = app.add_subcommand("sweep", "Shift diagnostics over a parameter grid");
  auto* nash = app.add_subcommand("verify-nash", "Best-response certificate of the equilibrium");
  auto* two_alpha = app.add_subcommand("check-2alpha", "Perturbed equilibrium in the nominal game");
  auto* oracle = app.add_subcommand("oracle", "Brute-force LCP cross-check on small instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  if (f.threads > 0) omp_set_num_threads(f.threads);

  try {
    if (*solve) return cmd_solve(f, out, err, false);
    if (*settle) return cmd_solve(f, out, err, true);
    if (*pmatrix) return cmd_pmatrix(f, out, err);
    if (*bound) return cmd_bound(f, out, err);
    if (*perturb) return cmd_perturb(f, out, err);
    if (*sweep_cmd) return cmd_sweep(f, out, err);
    if (*nash) return cmd_verify_nash(f, out, err);
    if (*two_alpha) return cmd_check_two_alpha(f, out, err);
    if (*oracle) return cmd_oracle(f, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace marketlcp

#include "marketlcp/perturbation.hpp"

#include <algorithm>
#include <cmath>

#include "marketlcp/error.hpp"

namespace marketlcp {

namespace {

constexpr double kCapacityGuard = 1e-9;  // MW

const GeneratorUnit& wind_unit(const MarketCase& c, int unit, int block) {
  if (unit < 0 || unit >= static_cast<int>(c.generators.size())) {
    throw Error(ErrorCode::ValidationError, "generator index " + std::to_string(unit) +
                                                " out of range");
  }
  const auto& g = c.generators[static_cast<std::size_t>(unit)];
  if (g.kind != UnitKind::Wind) {
    throw Error(ErrorCode::SpecTargetsConventionalUnit, g.id + " is not a wind unit");
  }
  if (block < 0 || block >= static_cast<int>(g.blocks.size())) {
    throw Error(ErrorCode::ValidationError, g.id + " has no block " + std::to_string(block));
  }
  return g;
}

const DemandUnit& curtailable(const MarketCase& c, int unit, int block) {
  if (unit < 0 || unit >= static_cast<int>(c.demands.size())) {
    throw Error(ErrorCode::ValidationError, "demand index " + std::to_string(unit) +
                                                " out of range");
  }
  const auto& d = c.demands[static_cast<std::size_t>(unit)];
  if (!d.dispatchable) throw Error(ErrorCode::SpecTargetsFixedLoad, d.id + " is a fixed load");
  if (block < 0 || block >= static_cast<int>(d.blocks.size())) {
    throw Error(ErrorCode::ValidationError, d.id + " has no block " + std::to_string(block));
  }
  return d;
}

void check_fraction(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) {
    throw Error(ErrorCode::ValidationError,
                std::string(what) + " must lie in (0, 1), got " + std::to_string(v));
  }
}

}  // namespace

void set_wind_delta(PerturbationSpec& spec, const MarketCase& c, int unit, double delta) {
  const auto& g = wind_unit(c, unit, 0);
  for (int b = 0; b < static_cast<int>(g.blocks.size()); ++b) spec.wind_deltas[{unit, b}] = delta;
}

void set_curtailment(PerturbationSpec& spec, const MarketCase& c, int unit, double kappa) {
  const auto& d = curtailable(c, unit, 0);
  for (int k = 0; k < static_cast<int>(d.blocks.size()); ++k) spec.curtailments[{unit, k}] = kappa;
}

double reserve_cost(const GeneratorUnit& unit, int block, double delta) {
  if (unit.kind != UnitKind::Wind) throw Error(ErrorCode::NotWindUnit, unit.id + " is not wind");
  if (block < 0 || block >= static_cast<int>(unit.mean_power_mw.size())) {
    throw Error(ErrorCode::ValidationError, unit.id + " has no block " + std::to_string(block));
  }
  check_fraction(delta, "wind forecast error");
  const double dw = unit.mean_power_mw[static_cast<std::size_t>(block)] * delta;
  return unit.reserve_cost_b * dw + 0.5 * unit.reserve_cost_c * dw * dw;
}

double reserve_adder(const GeneratorUnit& unit, int block, double delta) {
  const double cost = reserve_cost(unit, block, delta);
  const double dw = unit.mean_power_mw[static_cast<std::size_t>(block)] * delta;
  const double remaining = unit.blocks[static_cast<std::size_t>(block)].size_mw - dw;
  return cost / std::max(remaining, kCapacityGuard);
}

PerturbedCase apply_perturbation(const MarketCase& c, const PerturbationSpec& spec) {
  PerturbedCase out;
  out.perturbed = c;
  auto& pc = out.perturbed;

  for (const auto& [key, delta] : spec.wind_deltas) {
    const auto [unit, block] = key;
    const auto& g = wind_unit(c, unit, block);
    check_fraction(delta, "wind forecast error");
    const double dw = g.mean_power_mw[static_cast<std::size_t>(block)] * delta;
    const double adder = reserve_adder(g, block, delta);
    auto& blk = pc.generators[static_cast<std::size_t>(unit)].blocks[static_cast<std::size_t>(block)];
    blk.size_mw = std::max(0.0, blk.size_mw - dw);
    blk.price_per_mwh += adder;
    if (blk.bid_per_mwh) *blk.bid_per_mwh += adder;
  }
  for (const auto& [key, unused] : spec.wind_deltas) {
    auto& g = pc.generators[static_cast<std::size_t>(key.first)];
    g.unit_capacity_mw = std::min(g.unit_capacity_mw, g.block_sum());
  }

  for (const auto& [key, kappa] : spec.curtailments) {
    const auto [unit, block] = key;
    curtailable(c, unit, block);
    check_fraction(kappa, "curtailment factor");
    auto& blk = pc.demands[static_cast<std::size_t>(unit)].blocks[static_cast<std::size_t>(block)];
    blk.size_mw *= 1.0 - kappa;
  }
  for (std::size_t j = 0; j < pc.demands.size(); ++j) {
    const double before = c.demands[j].block_sum();
    if (before > 0.0 && c.demands[j].min_demand_mw > 0.0) {
      pc.demands[j].min_demand_mw =
          std::min(c.demands[j].min_demand_mw * pc.demands[j].block_sum() / before,
                   pc.demands[j].block_sum());
    }
  }

  out.nominal_lcp = assemble_lcp(c);
  out.perturbed_lcp = assemble_lcp(pc);
  out.delta_m = out.perturbed_lcp.m - out.nominal_lcp.m;
  out.delta_q = out.perturbed_lcp.q - out.nominal_lcp.q;
  return out;
}

MarketCase scale_wind(const MarketCase& c, double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::ValidationError, "penetration scale must be positive");
  MarketCase out = c;
  for (auto& g : out.generators) {
    if (g.kind != UnitKind::Wind) continue;
    for (auto& b : g.blocks) b.size_mw *= scale;
    for (auto& p : g.mean_power_mw) p *= scale;
    g.unit_capacity_mw *= scale;
  }
  return out;
}

ShiftReport shift_analysis(const MarketCase& c, const PerturbationSpec& spec,
                           const ShiftOptions& opts) {
  ShiftReport rep;
  rep.spec = spec;
  const PerturbedCase pert = apply_perturbation(c, spec);

  BetaResult beta;
  if (opts.beta_cache) {
    beta = *opts.beta_cache;
  } else {
    try {
      beta = beta_of(pert.nominal_lcp.m, opts.beta);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularEncountered) throw;
      // Singular vertices: beta is unbounded, the sampled interior value is
      // the only finite statement available.
      BetaOptions sampled = opts.beta;
      sampled.vertex_limit = 0;
      beta = beta_of(pert.nominal_lcp.m, sampled);
    }
  }
  rep.bound = perturbation_bound(pert.nominal_lcp, pert.delta_m, pert.delta_q, beta);
  rep.mu_heuristic = beta.is_lower_bound;
  rep.penetration = wind_penetration(c);

  const auto nominal = solve_market(c, opts.market);
  const auto perturbed = solve_market(pert.perturbed, opts.market);
  rep.nominal_source = nominal.source;
  rep.perturbed_source = perturbed.source;
  rep.nominal_lmp = nominal.lmp;
  rep.perturbed_lmp = perturbed.lmp;
  for (std::size_t n = 0; n < nominal.lmp.size(); ++n) {
    rep.max_lmp_change = std::max(rep.max_lmp_change, std::abs(perturbed.lmp[n] - nominal.lmp[n]));
  }
  const double diff = inf_norm(Vector(nominal.x - perturbed.x));
  const double base = inf_norm(nominal.x);
  rep.observed_shift = diff == 0.0 ? 0.0 : (base > 0.0 ? diff / base : INFINITY);
  return rep;
}

SweepTable sweep(const MarketCase& c, const SweepAxes& axes, const ShiftOptions& opts) {
  if (axes.deltas.empty() || axes.kappas.empty() || axes.penetration_scales.empty()) {
    throw Error(ErrorCode::ValidationError, "sweep axes must be nonempty");
  }
  int wind = axes.wind_unit;
  if (wind < 0) {
    for (std::size_t i = 0; i < c.generators.size() && wind < 0; ++i) {
      if (c.generators[i].kind == UnitKind::Wind) wind = static_cast<int>(i);
    }
  }
  const bool any_delta = std::any_of(axes.deltas.begin(), axes.deltas.end(),
                                     [](double d) { return d != 0.0; });
  const bool any_kappa = std::any_of(axes.kappas.begin(), axes.kappas.end(),
                                     [](double k) { return k != 0.0; });
  if (any_delta && wind < 0) throw Error(ErrorCode::NotWindUnit, "case has no wind unit");
  if (any_delta) wind_unit(c, wind, 0);
  if (any_kappa) curtailable(c, axes.kappa_unit, 0);

  // Scaling wind changes q only, so every cell shares the nominal M.
  const LcpInstance base = assemble_lcp(c);
  ShiftOptions cell_opts = opts;
  if (!cell_opts.beta_cache) {
    try {
      cell_opts.beta_cache = beta_of(base.m, opts.beta);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularEncountered) throw;
      BetaOptions sampled = opts.beta;
      sampled.vertex_limit = 0;
      cell_opts.beta_cache = beta_of(base.m, sampled);
    }
  }

  SweepTable table;
  for (double d : axes.deltas) {
    for (double k : axes.kappas) {
      for (double s : axes.penetration_scales) {
        SweepRow row;
        row.delta = d;
        row.kappa = k;
        row.penetration_scale = s;
        table.rows.push_back(row);
      }
    }
  }

  const int cells = static_cast<int>(table.rows.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < cells; ++i) {
    auto& row = table.rows[static_cast<std::size_t>(i)];
    try {
      const MarketCase scaled = scale_wind(c, row.penetration_scale);
      PerturbationSpec spec;
      if (row.delta != 0.0) set_wind_delta(spec, scaled, wind, row.delta);
      if (row.kappa != 0.0) set_curtailment(spec, scaled, axes.kappa_unit, row.kappa);
      ShiftOptions local = cell_opts;
      if (!(assemble_lcp(scaled).m == base.m)) local.beta_cache.reset();
      local.beta.parallel = false;
      const auto rep = shift_analysis(scaled, spec, local);
      row.penetration = rep.penetration;
      row.beta = rep.bound.beta;
      row.eta = rep.bound.eta;
      row.mu = rep.bound.mu;
      row.observed_shift = rep.observed_shift;
      row.max_lmp_change = rep.max_lmp_change;
      row.mu_heuristic = rep.mu_heuristic;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  return table;
}

}  // namespace marketlcp

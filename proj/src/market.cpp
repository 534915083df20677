#include "marketlcp/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "marketlcp/error.hpp"
#include "marketlcp/welfare_lp.hpp"

namespace marketlcp {

namespace {

double sum_sizes(const std::vector<Block>& blocks) {
  double s = 0.0;
  for (const auto& b : blocks) s += b.size_mw;
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

double GeneratorUnit::block_sum() const { return sum_sizes(blocks); }
double DemandUnit::block_sum() const { return sum_sizes(blocks); }

int Network::reference_bus() const {
  for (std::size_t n = 0; n < buses.size(); ++n) {
    if (buses[n].reference) return static_cast<int>(n);
  }
  return -1;
}

DemandUnit make_fixed_load(std::string id, int bus, double mw) {
  DemandUnit d;
  d.id = std::move(id);
  d.bus = bus;
  d.blocks = {Block{mw, kFixedLoadUtility, std::nullopt}};
  d.min_demand_mw = mw;
  d.dispatchable = false;
  return d;
}

ValidationReport validate_case(const MarketCase& c, bool strict) {
  ValidationReport rep;
  const auto& net = c.network;
  const int nb = static_cast<int>(net.buses.size());
  auto fail = [](ErrorCode code, const std::string& msg) { throw Error(code, msg); };

  if (nb == 0) fail(ErrorCode::ValidationError, "network has no buses");
  if (!(net.mva_base > 0.0)) fail(ErrorCode::ValidationError, "mva_base must be positive");
  const auto refs = std::count_if(net.buses.begin(), net.buses.end(),
                                  [](const Bus& b) { return b.reference; });
  if (refs > 1) fail(ErrorCode::DuplicateReference, std::to_string(refs) + " reference buses");
  if (refs == 0) fail(ErrorCode::ValidationError, "no reference bus");
  std::set<int> numbers;
  for (const auto& b : net.buses) {
    if (!numbers.insert(b.number).second) {
      fail(ErrorCode::ValidationError, "duplicate bus number " + std::to_string(b.number));
    }
  }

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(nb));
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const auto& line = net.lines[l];
    const std::string name = "line " + std::to_string(l);
    if (line.from < 0 || line.from >= nb || line.to < 0 || line.to >= nb) {
      fail(ErrorCode::ValidationError, name + " references an unknown bus");
    }
    if (line.from == line.to) fail(ErrorCode::ValidationError, name + " is a self loop");
    if (!(line.reactance_pu > 0.0)) {
      fail(ErrorCode::ValidationError, name + " needs a positive reactance");
    }
    if (!(line.capacity_mw > 0.0)) {
      fail(ErrorCode::ValidationError, name + " needs a positive capacity");
    }
    adj[static_cast<std::size_t>(line.from)].push_back(line.to);
    adj[static_cast<std::size_t>(line.to)].push_back(line.from);
  }
  std::vector<bool> seen(static_cast<std::size_t>(nb), false);
  std::queue<int> todo;
  todo.push(0);
  seen[0] = true;
  int reached = 1;
  while (!todo.empty()) {
    const int n = todo.front();
    todo.pop();
    for (int m : adj[static_cast<std::size_t>(n)]) {
      if (!seen[static_cast<std::size_t>(m)]) {
        seen[static_cast<std::size_t>(m)] = true;
        ++reached;
        todo.push(m);
      }
    }
  }
  if (reached != nb) {
    fail(ErrorCode::UnconnectedNetwork,
         std::to_string(nb - reached) + " buses are not connected to bus " +
             std::to_string(net.buses[0].number));
  }

  if (c.generators.empty()) fail(ErrorCode::ValidationError, "case has no generators");
  std::set<std::string> ids;
  auto check_blocks = [&](const std::string& id, const std::vector<Block>& blocks) {
    if (!ids.insert(id).second) fail(ErrorCode::ValidationError, "duplicate unit id " + id);
    if (blocks.empty()) fail(ErrorCode::ValidationError, id + " has no blocks");
    for (const auto& b : blocks) {
      if (!(b.size_mw >= 0.0) || !std::isfinite(b.size_mw)) {
        fail(ErrorCode::ValidationError, id + " has a negative block size");
      }
      if (!std::isfinite(b.price_per_mwh) || !std::isfinite(b.bid())) {
        fail(ErrorCode::ValidationError, id + " has a non-finite price");
      }
    }
  };
  auto rationality = [&](const std::string& id, bool ok, const char* what) {
    if (ok) return;
    const std::string msg = id + ": block " + what;
    if (strict) fail(ErrorCode::NonRationalBids, msg);
    rep.warnings.push_back(msg);
  };

  for (const auto& g : c.generators) {
    check_blocks(g.id, g.blocks);
    if (g.bus < 0 || g.bus >= nb) fail(ErrorCode::ValidationError, g.id + " bus out of range");
    const double total = g.block_sum();
    if (!(g.unit_capacity_mw >= 0.0)) {
      fail(ErrorCode::ValidationError, g.id + " has a negative unit capacity");
    }
    if (g.unit_capacity_mw > total + 1e-9) {
      fail(ErrorCode::ValidationError,
           g.id + " unit capacity " + fmt(g.unit_capacity_mw) + " exceeds block sum " +
               fmt(total));
    }
    if (g.unit_capacity_mw < total - 1e-9) {
      rep.warnings.push_back(g.id + ": unit capacity below block sum");
    }
    bool ok = true;
    for (std::size_t b = 1; b < g.blocks.size(); ++b) {
      ok = ok && g.blocks[b].bid() >= g.blocks[b - 1].bid();
    }
    rationality(g.id, ok, "marginal costs decrease");
    if (g.kind == UnitKind::Wind) {
      if (g.mean_power_mw.size() != g.blocks.size()) {
        fail(ErrorCode::ValidationError, g.id + " needs one mean power per block");
      }
      for (double p : g.mean_power_mw) {
        if (!(p >= 0.0)) fail(ErrorCode::ValidationError, g.id + " has negative mean power");
      }
      if (!(g.reserve_cost_b >= 0.0) || !(g.reserve_cost_c >= 0.0)) {
        fail(ErrorCode::ValidationError, g.id + " has negative reserve-cost coefficients");
      }
    }
  }
  for (const auto& d : c.demands) {
    check_blocks(d.id, d.blocks);
    if (d.bus < 0 || d.bus >= nb) fail(ErrorCode::ValidationError, d.id + " bus out of range");
    if (!(d.min_demand_mw >= 0.0) || d.min_demand_mw > d.block_sum() + 1e-9) {
      fail(ErrorCode::ValidationError, d.id + " minimum demand outside [0, block sum]");
    }
    if (!d.dispatchable && d.blocks.size() != 1) {
      fail(ErrorCode::ValidationError, d.id + " fixed load must have a single block");
    }
    bool ok = true;
    for (std::size_t k = 1; k < d.blocks.size(); ++k) {
      ok = ok && d.blocks[k].bid() <= d.blocks[k - 1].bid();
    }
    rationality(d.id, ok, "marginal utilities increase");
  }
  return rep;
}

MarketLayout::MarketLayout(const MarketCase& c) {
  int pos = 0;
  for (const auto& g : c.generators) {
    gen_.push_back(pos);
    pos += static_cast<int>(g.blocks.size());
  }
  for (const auto& d : c.demands) {
    dem_.push_back(pos);
    pos += static_cast<int>(d.blocks.size());
  }
  const int ref = c.network.reference_bus();
  const int nb = static_cast<int>(c.network.buses.size());
  for (int n = 0; n < nb; ++n) angle_pos_.push_back(n == ref ? -1 : pos++);
  for (int n = 0; n < nb; ++n) angle_neg_.push_back(n == ref ? -1 : pos++);
  alpha_ = pos;
  pos += static_cast<int>(c.generators.size());
  for (const auto& g : c.generators) {
    phi_.push_back(pos);
    pos += static_cast<int>(g.blocks.size());
  }
  sigma_ = pos;
  pos += static_cast<int>(c.demands.size());
  for (const auto& d : c.demands) {
    psi_.push_back(pos);
    pos += static_cast<int>(d.blocks.size());
  }
  rho_ = pos;
  pos += nb;
  gamma_ = pos;
  pos += 2 * static_cast<int>(c.network.lines.size());
  size_ = pos;
}

double line_flow_mw(const Network& net, int line, const std::vector<double>& angles) {
  const auto& l = net.lines[static_cast<std::size_t>(line)];
  return net.mva_base * l.susceptance_pu() *
         (angles[static_cast<std::size_t>(l.from)] - angles[static_cast<std::size_t>(l.to)]);
}

LcpInstance assemble_lcp(const MarketCase& c, bool strict) {
  validate_case(c, strict);
  const MarketLayout lay(c);
  const int n = lay.size();
  const int np = lay.primal_size();
  const auto& net = c.network;

  // Constraint rows g(p) = G p + h >= 0 over the primal block, one per dual.
  Matrix g = Matrix::Zero(n - np, np);
  Vector h = Vector::Zero(n - np);
  Vector cost = Vector::Zero(np);
  auto row = [&](int dual_index) { return dual_index - np; };
  // Angle delta_n enters with +1 on delta+ and -1 on delta-.
  auto add_angle = [&](int r, int bus, double v) {
    if (lay.angle_pos(bus) < 0) return;
    g(r, lay.angle_pos(bus)) += v;
    g(r, lay.angle_neg(bus)) -= v;
  };

  for (int i = 0; i < static_cast<int>(c.generators.size()); ++i) {
    const auto& gen = c.generators[static_cast<std::size_t>(i)];
    h(row(lay.alpha(i))) = gen.unit_capacity_mw;
    for (int b = 0; b < static_cast<int>(gen.blocks.size()); ++b) {
      const auto& blk = gen.blocks[static_cast<std::size_t>(b)];
      const int p = lay.gen_block(i, b);
      cost(p) = blk.bid();
      g(row(lay.alpha(i)), p) = -1.0;
      g(row(lay.phi(i, b)), p) = -1.0;
      h(row(lay.phi(i, b))) = blk.size_mw;
      g(row(lay.rho(gen.bus)), p) += 1.0;
    }
  }
  for (int j = 0; j < static_cast<int>(c.demands.size()); ++j) {
    const auto& dem = c.demands[static_cast<std::size_t>(j)];
    h(row(lay.sigma(j))) = -dem.min_demand_mw;
    for (int k = 0; k < static_cast<int>(dem.blocks.size()); ++k) {
      const auto& blk = dem.blocks[static_cast<std::size_t>(k)];
      const int p = lay.demand_block(j, k);
      cost(p) = -blk.bid();
      g(row(lay.sigma(j)), p) = 1.0;
      g(row(lay.psi(j, k)), p) = -1.0;
      h(row(lay.psi(j, k))) = blk.size_mw;
      g(row(lay.rho(dem.bus)), p) -= 1.0;
    }
  }
  for (int l = 0; l < static_cast<int>(net.lines.size()); ++l) {
    const auto& line = net.lines[static_cast<std::size_t>(l)];
    const double s = net.mva_base * line.susceptance_pu();
    // Balance rows subtract the outflow s (delta_from - delta_to).
    add_angle(row(lay.rho(line.from)), line.from, -s);
    add_angle(row(lay.rho(line.from)), line.to, s);
    add_angle(row(lay.rho(line.to)), line.from, s);
    add_angle(row(lay.rho(line.to)), line.to, -s);
    const int fwd = row(lay.gamma(l, 0));
    const int rev = row(lay.gamma(l, 1));
    h(fwd) = line.capacity_mw;
    h(rev) = line.capacity_mw;
    add_angle(fwd, line.from, -s);
    add_angle(fwd, line.to, s);
    add_angle(rev, line.from, s);
    add_angle(rev, line.to, -s);
  }

  LcpInstance inst;
  inst.m = Matrix::Zero(n, n);
  inst.m.topRightCorner(np, n - np) = -g.transpose();
  inst.m.bottomLeftCorner(n - np, np) = g;
  inst.q.resize(n);
  inst.q << cost, h;

  inst.labels.resize(static_cast<std::size_t>(n));
  auto label = [&](int pos, VarKind kind, int entity, int sub = -1) {
    inst.labels[static_cast<std::size_t>(pos)] = {kind, entity, sub};
  };
  for (int i = 0; i < static_cast<int>(c.generators.size()); ++i) {
    label(lay.alpha(i), VarKind::UnitCapacityDual, i);
    for (int b = 0; b < static_cast<int>(c.generators[static_cast<std::size_t>(i)].blocks.size());
         ++b) {
      label(lay.gen_block(i, b), VarKind::GenBlock, i, b);
      label(lay.phi(i, b), VarKind::GenBlockDual, i, b);
    }
  }
  for (int j = 0; j < static_cast<int>(c.demands.size()); ++j) {
    label(lay.sigma(j), VarKind::DemandMinDual, j);
    for (int k = 0; k < static_cast<int>(c.demands[static_cast<std::size_t>(j)].blocks.size());
         ++k) {
      label(lay.demand_block(j, k), VarKind::DemandBlock, j, k);
      label(lay.psi(j, k), VarKind::DemandBlockDual, j, k);
    }
  }
  for (int b = 0; b < static_cast<int>(net.buses.size()); ++b) {
    label(lay.rho(b), VarKind::Price, b);
    if (lay.angle_pos(b) >= 0) {
      label(lay.angle_pos(b), VarKind::AnglePos, b);
      label(lay.angle_neg(b), VarKind::AngleNeg, b);
    }
  }
  for (int l = 0; l < static_cast<int>(net.lines.size()); ++l) {
    label(lay.gamma(l, 0), VarKind::LineCapacityDual, l, 0);
    label(lay.gamma(l, 1), VarKind::LineCapacityDual, l, 1);
  }
  return inst;
}

std::string to_string(SolutionSource source) {
  return source == SolutionSource::Lcp ? "Lcp" : "LpFallback";
}

double EquilibriumSolution::unit_output(int unit) const {
  const auto& v = generation_mw[static_cast<std::size_t>(unit)];
  return std::accumulate(v.begin(), v.end(), 0.0);
}

double EquilibriumSolution::unit_consumption(int unit) const {
  const auto& v = consumption_mw[static_cast<std::size_t>(unit)];
  return std::accumulate(v.begin(), v.end(), 0.0);
}

EquilibriumSolution solution_from_vector(const MarketCase& c, const Vector& x) {
  const MarketLayout lay(c);
  if (x.size() != lay.size()) {
    throw Error(ErrorCode::ValidationError, "solution vector does not match the case layout");
  }
  EquilibriumSolution s;
  s.x = x;
  const int ng = static_cast<int>(c.generators.size());
  const int nd = static_cast<int>(c.demands.size());
  const int nb = static_cast<int>(c.network.buses.size());
  const int nl = static_cast<int>(c.network.lines.size());
  for (int i = 0; i < ng; ++i) {
    const auto nblk = c.generators[static_cast<std::size_t>(i)].blocks.size();
    std::vector<double> gen(nblk), phi(nblk);
    for (std::size_t b = 0; b < nblk; ++b) {
      gen[b] = x(lay.gen_block(i, static_cast<int>(b)));
      phi[b] = x(lay.phi(i, static_cast<int>(b)));
    }
    s.generation_mw.push_back(std::move(gen));
    s.phi.push_back(std::move(phi));
    s.alpha.push_back(x(lay.alpha(i)));
  }
  for (int j = 0; j < nd; ++j) {
    const auto nblk = c.demands[static_cast<std::size_t>(j)].blocks.size();
    std::vector<double> dem(nblk), psi(nblk);
    for (std::size_t k = 0; k < nblk; ++k) {
      dem[k] = x(lay.demand_block(j, static_cast<int>(k)));
      psi[k] = x(lay.psi(j, static_cast<int>(k)));
    }
    s.consumption_mw.push_back(std::move(dem));
    s.psi.push_back(std::move(psi));
    s.sigma.push_back(x(lay.sigma(j)));
  }
  for (int b = 0; b < nb; ++b) {
    s.angles_rad.push_back(lay.angle_pos(b) < 0 ? 0.0
                                                : x(lay.angle_pos(b)) - x(lay.angle_neg(b)));
    s.lmp.push_back(x(lay.rho(b)));
  }
  for (int l = 0; l < nl; ++l) {
    s.line_flows_mw.push_back(line_flow_mw(c.network, l, s.angles_rad));
    s.gamma_forward.push_back(x(lay.gamma(l, 0)));
    s.gamma_reverse.push_back(x(lay.gamma(l, 1)));
  }
  return s;
}

void verify_solution(const MarketCase& c, const EquilibriumSolution& sol, double tol) {
  const auto& net = c.network;
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::SolverFailure, msg); };
  std::vector<double> net_injection(net.buses.size(), 0.0);

  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    const auto& g = c.generators[i];
    double total = 0.0;
    for (std::size_t b = 0; b < g.blocks.size(); ++b) {
      const double p = sol.generation_mw[i][b];
      if (p < -tol || p > g.blocks[b].size_mw + tol) {
        fail(g.id + " block " + std::to_string(b) + " output " + fmt(p) + " outside limits");
      }
      total += p;
    }
    if (total > g.unit_capacity_mw + tol) fail(g.id + " exceeds unit capacity");
    net_injection[static_cast<std::size_t>(g.bus)] += total;
  }
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    const auto& d = c.demands[j];
    double total = 0.0;
    for (std::size_t k = 0; k < d.blocks.size(); ++k) {
      const double p = sol.consumption_mw[j][k];
      if (p < -tol || p > d.blocks[k].size_mw + tol) {
        fail(d.id + " block " + std::to_string(k) + " consumption " + fmt(p) +
             " outside limits");
      }
      total += p;
    }
    if (total < d.min_demand_mw - tol) fail(d.id + " below minimum demand");
    net_injection[static_cast<std::size_t>(d.bus)] -= total;
  }
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const double f = sol.line_flows_mw[l];
    if (std::abs(f) > net.lines[l].capacity_mw + tol) {
      fail("line " + std::to_string(l) + " flow " + fmt(f) + " exceeds capacity");
    }
    net_injection[static_cast<std::size_t>(net.lines[l].from)] -= f;
    net_injection[static_cast<std::size_t>(net.lines[l].to)] += f;
  }
  for (std::size_t n = 0; n < net.buses.size(); ++n) {
    if (std::abs(net_injection[n]) > tol) {
      fail("bus " + std::to_string(net.buses[n].number) + " imbalance " +
           fmt(net_injection[n]) + " MW");
    }
  }
}

namespace {

EquilibriumSolution fallback(const MarketCase& c) {
  const auto res = solve_welfare_lp(c);
  switch (res.lp.status) {
    case LpStatus::Optimal: break;
    case LpStatus::Infeasible:
      throw Error(ErrorCode::Infeasible, "demand minimums cannot be met by deliverable supply");
    default:
      throw Error(ErrorCode::SolverFailure,
                  "social-welfare program ended with status " + to_string(res.lp.status));
  }
  auto sol = solution_from_vector(c, res.x);
  sol.source = SolutionSource::LpFallback;
  sol.pivots = res.lp.iterations;
  return sol;
}

}  // namespace

EquilibriumSolution solve_market(const MarketCase& c, const MarketOptions& opts) {
  const LcpInstance inst = assemble_lcp(c, opts.strict);
  const LcpSolution lcp = solve_lcp(inst, opts.lcp);

  EquilibriumSolution sol;
  if (lcp.status == LcpStatus::Solved) {
    sol = solution_from_vector(c, lcp.x);
    sol.pivots = lcp.pivots;
  } else if (opts.allow_fallback) {
    sol = fallback(c);
    sol.diagnostics.push_back("complementary pivoting ended with " + to_string(lcp.status) +
                              ", solved the social-welfare program instead");
  } else {
    throw Error(ErrorCode::SolverFailure,
                "complementary pivoting ended with " + to_string(lcp.status));
  }
  sol.status = lcp.status;

  verify_solution(c, sol, opts.check_tol);

  LcpSolution check;
  check.x = sol.x;
  if (!satisfies_complementarity(inst, check, 1e-8)) {
    sol.diagnostics.push_back("complementarity residual above 1e-8");
  }
  for (std::size_t n = 0; n < c.network.buses.size(); ++n) {
    if (sol.lmp[n] > opts.check_tol) continue;
    double local = 0.0;
    for (std::size_t j = 0; j < c.demands.size(); ++j) {
      if (c.demands[j].bus == static_cast<int>(n)) local += sol.unit_consumption(static_cast<int>(j));
    }
    if (local > opts.check_tol) {
      sol.diagnostics.push_back("zero price at bus " + std::to_string(c.network.buses[n].number) +
                                " with local demand " + fmt(local) + " MW");
    }
  }
  return sol;
}

double social_welfare(const EquilibriumSolution& sol, const MarketCase& c) {
  double w = 0.0;
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    if (!c.demands[j].dispatchable) continue;
    for (std::size_t k = 0; k < c.demands[j].blocks.size(); ++k) {
      w += c.demands[j].blocks[k].bid() * sol.consumption_mw[j][k];
    }
  }
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    for (std::size_t b = 0; b < c.generators[i].blocks.size(); ++b) {
      w -= c.generators[i].blocks[b].bid() * sol.generation_mw[i][b];
    }
  }
  return w;
}

SettlementReport settlement(const EquilibriumSolution& sol, const MarketCase& c) {
  SettlementReport rep;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    const auto& g = c.generators[i];
    SettlementRow r;
    r.unit_id = g.id;
    r.bus = c.network.buses[static_cast<std::size_t>(g.bus)].number;
    r.price_per_mwh = sol.lmp[static_cast<std::size_t>(g.bus)];
    for (std::size_t b = 0; b < g.blocks.size(); ++b) {
      const double p = sol.generation_mw[i][b];
      r.quantity_mw += p;
      r.revenue += r.price_per_mwh * p;
      r.cost += g.blocks[b].price_per_mwh * p;
    }
    r.profit = r.revenue - r.cost;
    rep.generators.push_back(r);
  }
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    const auto& d = c.demands[j];
    SettlementRow r;
    r.unit_id = d.id;
    r.generator = false;
    r.bus = c.network.buses[static_cast<std::size_t>(d.bus)].number;
    r.price_per_mwh = sol.lmp[static_cast<std::size_t>(d.bus)];
    for (std::size_t k = 0; k < d.blocks.size(); ++k) {
      const double p = sol.consumption_mw[j][k];
      r.quantity_mw += p;
      r.cost += r.price_per_mwh * p;
      r.revenue += d.blocks[k].price_per_mwh * p;
    }
    if (d.dispatchable) {
      r.profit = r.revenue - r.cost;
    } else {
      r.revenue = nan;
      r.profit = nan;
    }
    rep.demands.push_back(r);
  }
  return rep;
}

double wind_penetration(const MarketCase& c, PenetrationMode mode,
                        const EquilibriumSolution* sol) {
  if (mode == PenetrationMode::Scheduled && sol == nullptr) {
    throw Error(ErrorCode::ValidationError, "scheduled penetration needs a solution");
  }
  double wind = 0.0;
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    const auto& g = c.generators[i];
    if (g.kind != UnitKind::Wind) continue;
    wind += mode == PenetrationMode::Capacity ? g.block_sum()
                                              : sol->unit_output(static_cast<int>(i));
  }
  double demand = 0.0;
  for (const auto& d : c.demands) {
    if (d.dispatchable) demand += d.block_sum();
  }
  if (wind == 0.0) return 0.0;
  return demand > 0.0 ? wind / demand : std::numeric_limits<double>::infinity();
}

}  // namespace marketlcp

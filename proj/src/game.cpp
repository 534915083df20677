#include "marketlcp/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "marketlcp/error.hpp"

namespace marketlcp {

StrategyIndex::StrategyIndex(const MarketCase& c) {
  for (const auto& g : c.generators) {
    gen_.push_back(size_);
    size_ += static_cast<int>(g.blocks.size());
  }
  for (const auto& d : c.demands) {
    dem_.push_back(size_);
    size_ += static_cast<int>(d.blocks.size());
  }
  const int ref = c.network.reference_bus();
  for (int n = 0; n < static_cast<int>(c.network.buses.size()); ++n) {
    angle_.push_back(n == ref ? -1 : size_);
    if (n != ref) ++size_;
  }
}

Vector profile_of(const MarketCase& c, const EquilibriumSolution& sol) {
  const StrategyIndex idx(c);
  Vector s = Vector::Zero(idx.size());
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    for (std::size_t b = 0; b < c.generators[i].blocks.size(); ++b) {
      s(idx.gen_block(static_cast<int>(i), static_cast<int>(b))) = sol.generation_mw[i][b];
    }
  }
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    for (std::size_t k = 0; k < c.demands[j].blocks.size(); ++k) {
      s(idx.demand_block(static_cast<int>(j), static_cast<int>(k))) = sol.consumption_mw[j][k];
    }
  }
  for (std::size_t n = 0; n < c.network.buses.size(); ++n) {
    const int a = idx.angle(static_cast<int>(n));
    if (a >= 0) s(a) = sol.angles_rad[n];
  }
  return s;
}

namespace {

LinearProgram empty_polytope(int vars) {
  LinearProgram lp;
  lp.a = Matrix::Zero(0, vars);
  lp.b = Vector::Zero(0);
  lp.c = Vector::Zero(vars);
  lp.free_var.assign(static_cast<std::size_t>(vars), false);
  return lp;
}

void add_row(LinearProgram& lp, const Vector& row, RowSense sense, double rhs) {
  const auto m = lp.a.rows();
  lp.a.conservativeResize(m + 1, Eigen::NoChange);
  lp.a.row(m) = row.transpose();
  lp.b.conservativeResize(m + 1);
  lp.b(m) = rhs;
  lp.sense.push_back(sense);
}

LinearProgram intersect(const LinearProgram& x, const LinearProgram& y) {
  LinearProgram out = x;
  for (int r = 0; r < y.rows(); ++r) {
    add_row(out, y.a.row(r).transpose(), y.sense[static_cast<std::size_t>(r)], y.b(r));
  }
  return out;
}

double flow_coefficient(const Network& net, const Line& l) {
  return net.mva_base * l.susceptance_pu();
}

}  // namespace

std::vector<PlayerView> players(const MarketCase& c) {
  const StrategyIndex idx(c);
  std::vector<PlayerView> out;
  for (int i = 0; i < static_cast<int>(c.generators.size()); ++i) {
    const auto& g = c.generators[static_cast<std::size_t>(i)];
    PlayerView p;
    p.kind = PlayerKind::GenCo;
    p.unit = i;
    p.id = g.id;
    const int nb = static_cast<int>(g.blocks.size());
    for (int b = 0; b < nb; ++b) p.vars.push_back(idx.gen_block(i, b));
    p.constraints = empty_polytope(nb);
    for (int b = 0; b < nb; ++b) {
      add_row(p.constraints, Vector::Unit(nb, b), RowSense::Le,
              g.blocks[static_cast<std::size_t>(b)].size_mw);
    }
    add_row(p.constraints, Vector::Ones(nb), RowSense::Le, g.unit_capacity_mw);
    out.push_back(std::move(p));
  }
  for (int j = 0; j < static_cast<int>(c.demands.size()); ++j) {
    const auto& d = c.demands[static_cast<std::size_t>(j)];
    PlayerView p;
    p.kind = PlayerKind::ConCo;
    p.unit = j;
    p.id = d.id;
    const int nk = static_cast<int>(d.blocks.size());
    for (int k = 0; k < nk; ++k) p.vars.push_back(idx.demand_block(j, k));
    p.constraints = empty_polytope(nk);
    for (int k = 0; k < nk; ++k) {
      add_row(p.constraints, Vector::Unit(nk, k), RowSense::Le,
              d.blocks[static_cast<std::size_t>(k)].size_mw);
    }
    add_row(p.constraints, Vector::Ones(nk), RowSense::Ge, d.min_demand_mw);
    out.push_back(std::move(p));
  }

  PlayerView iso;
  iso.kind = PlayerKind::Iso;
  iso.id = "ISO";
  std::vector<int> local(c.network.buses.size(), -1);
  for (int n = 0; n < static_cast<int>(c.network.buses.size()); ++n) {
    if (idx.angle(n) < 0) continue;
    local[static_cast<std::size_t>(n)] = static_cast<int>(iso.vars.size());
    iso.vars.push_back(idx.angle(n));
  }
  const int na = static_cast<int>(iso.vars.size());
  iso.constraints = empty_polytope(na);
  iso.constraints.free_var.assign(static_cast<std::size_t>(na), true);
  for (int dir = 0; dir < 2; ++dir) {
    for (const auto& l : c.network.lines) {
      Vector row = Vector::Zero(na);
      const double s = (dir == 0 ? 1.0 : -1.0) * flow_coefficient(c.network, l);
      if (local[static_cast<std::size_t>(l.from)] >= 0) row(local[static_cast<std::size_t>(l.from)]) += s;
      if (local[static_cast<std::size_t>(l.to)] >= 0) row(local[static_cast<std::size_t>(l.to)]) -= s;
      add_row(iso.constraints, row, RowSense::Le, l.capacity_mw);
    }
  }
  out.push_back(std::move(iso));
  return out;
}

Vector payoff_gradient(const MarketCase& c, const std::vector<double>& lmp,
                       const PlayerView& player) {
  const StrategyIndex idx(c);
  Vector g = Vector::Zero(idx.size());
  auto price = [&](int bus) { return lmp[static_cast<std::size_t>(bus)]; };
  switch (player.kind) {
    case PlayerKind::GenCo: {
      const auto& u = c.generators[static_cast<std::size_t>(player.unit)];
      for (int b = 0; b < static_cast<int>(u.blocks.size()); ++b) {
        g(idx.gen_block(player.unit, b)) =
            price(u.bus) - u.blocks[static_cast<std::size_t>(b)].price_per_mwh;
      }
      break;
    }
    case PlayerKind::ConCo: {
      const auto& u = c.demands[static_cast<std::size_t>(player.unit)];
      for (int k = 0; k < static_cast<int>(u.blocks.size()); ++k) {
        g(idx.demand_block(player.unit, k)) =
            u.blocks[static_cast<std::size_t>(k)].price_per_mwh - price(u.bus);
      }
      break;
    }
    case PlayerKind::Iso: {
      // Social welfare plus the priced nodal balance.
      for (int i = 0; i < static_cast<int>(c.generators.size()); ++i) {
        const auto& u = c.generators[static_cast<std::size_t>(i)];
        for (int b = 0; b < static_cast<int>(u.blocks.size()); ++b) {
          g(idx.gen_block(i, b)) = price(u.bus) - u.blocks[static_cast<std::size_t>(b)].bid();
        }
      }
      for (int j = 0; j < static_cast<int>(c.demands.size()); ++j) {
        const auto& u = c.demands[static_cast<std::size_t>(j)];
        for (int k = 0; k < static_cast<int>(u.blocks.size()); ++k) {
          g(idx.demand_block(j, k)) = u.blocks[static_cast<std::size_t>(k)].bid() - price(u.bus);
        }
      }
      for (const auto& l : c.network.lines) {
        const double v = -flow_coefficient(c.network, l) * (price(l.from) - price(l.to));
        if (idx.angle(l.from) >= 0) g(idx.angle(l.from)) += v;
        if (idx.angle(l.to) >= 0) g(idx.angle(l.to)) -= v;
      }
      break;
    }
  }
  return g;
}

double payoff(const MarketCase& c, const std::vector<double>& lmp, const PlayerView& player,
              const Vector& profile) {
  return payoff_gradient(c, lmp, player).dot(profile);
}

namespace {

bool box_bounded(const LinearProgram& lp) {
  for (int j = 0; j < lp.cols(); ++j) {
    if (!lp.free_var.empty() && lp.free_var[static_cast<std::size_t>(j)]) return false;
    bool bounded = false;
    for (int r = 0; r < lp.rows() && !bounded; ++r) {
      if (lp.sense[static_cast<std::size_t>(r)] == RowSense::Ge || lp.a(r, j) <= 0.0) continue;
      bounded = (lp.a.row(r).array() != 0.0).count() == 1;
    }
    if (!bounded) return false;
  }
  return true;
}

double combinations(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

BestResponse vertex_enumeration(const LinearProgram& lp, const Vector& objective) {
  const int n = lp.cols();
  // All rows as a.v <= b, followed by the sign constraints.
  std::vector<Vector> rows;
  std::vector<double> rhs;
  for (int r = 0; r < lp.rows(); ++r) {
    const Vector a = lp.a.row(r).transpose();
    switch (lp.sense[static_cast<std::size_t>(r)]) {
      case RowSense::Le: rows.push_back(a); rhs.push_back(lp.b(r)); break;
      case RowSense::Ge: rows.push_back(-a); rhs.push_back(-lp.b(r)); break;
      case RowSense::Eq:
        rows.push_back(a);
        rhs.push_back(lp.b(r));
        rows.push_back(-a);
        rhs.push_back(-lp.b(r));
        break;
    }
  }
  for (int j = 0; j < n; ++j) {
    rows.push_back(-Vector::Unit(n, j));
    rhs.push_back(0.0);
  }
  const int m = static_cast<int>(rows.size());

  BestResponse best;
  best.method = "vertex enumeration";
  best.best_payoff = -std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = i;
  Matrix a(n, n);
  Vector b(n);
  for (;;) {
    for (int i = 0; i < n; ++i) {
      a.row(i) = rows[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])].transpose();
      b(i) = rhs[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])];
    }
    Eigen::PartialPivLU<Matrix> lu(a);
    if (lu.rcond() > 1e-12) {
      const Vector v = lu.solve(b);
      bool feasible = true;
      for (int r = 0; r < m && feasible; ++r) {
        const double lhs = rows[static_cast<std::size_t>(r)].dot(v);
        feasible = lhs <= rhs[static_cast<std::size_t>(r)] +
                              1e-9 * (1.0 + std::abs(rhs[static_cast<std::size_t>(r)]));
      }
      if (feasible) {
        const double val = objective.dot(v);
        if (val > best.best_payoff + 1e-12 * (1.0 + std::abs(val))) {
          best.best_payoff = val;
          best.strategy = v;
        }
      }
    }
    int i = n - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == m - n + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < n; ++k) {
      pick[static_cast<std::size_t>(k)] = pick[static_cast<std::size_t>(k - 1)] + 1;
    }
  }
  if (best.strategy.size() == 0) {
    throw Error(ErrorCode::SolverFailure, "player strategy set is empty");
  }
  return best;
}

}  // namespace

BestResponse maximize_over(const LinearProgram& polytope, const Vector& objective) {
  const int n = polytope.cols();
  if (n == 0) {
    BestResponse br;
    br.method = "empty strategy set";
    br.strategy = Vector::Zero(0);
    return br;
  }
  const int m = polytope.rows() + n;
  if (n <= 12 && box_bounded(polytope) && combinations(m, n) <= 2e5) {
    return vertex_enumeration(polytope, objective);
  }
  LinearProgram lp = polytope;
  lp.c = -objective;
  const auto res = solve_lp(lp);
  if (res.status == LpStatus::Unbounded) {
    throw Error(ErrorCode::UnboundedBestResponse, "best response is unbounded");
  }
  if (res.status != LpStatus::Optimal) {
    throw Error(ErrorCode::SolverFailure, "best-response program ended with " + to_string(res.status));
  }
  BestResponse br;
  br.method = "simplex";
  br.strategy = res.x;
  br.best_payoff = objective.dot(res.x);
  return br;
}

namespace {

Vector restrict(const Vector& full, const std::vector<int>& vars) {
  Vector out(static_cast<int>(vars.size()));
  for (std::size_t i = 0; i < vars.size(); ++i) out(static_cast<int>(i)) = full(vars[i]);
  return out;
}

BestResponse gap_against(const Vector& gradient, const LinearProgram& polytope,
                         const std::vector<int>& vars, const Vector& profile) {
  const Vector obj = restrict(gradient, vars);
  BestResponse br = maximize_over(polytope, obj);
  br.realized_payoff = obj.dot(restrict(profile, vars));
  br.gap = br.best_payoff - br.realized_payoff;
  return br;
}

}  // namespace

BestResponse best_response_gap(const MarketCase& c, const EquilibriumSolution& sol,
                               const PlayerView& player) {
  return gap_against(payoff_gradient(c, sol.lmp, player), player.constraints, player.vars,
                     profile_of(c, sol));
}

EquilibriumCertificate certify_epsilon_equilibrium(const MarketCase& c,
                                                   const EquilibriumSolution& sol, double tol) {
  EquilibriumCertificate cert;
  cert.tolerance = tol;
  cert.method = "per-player linear best response at fixed prices";
  const Vector profile = profile_of(c, sol);
  for (const auto& p : players(c)) {
    const auto br =
        gap_against(payoff_gradient(c, sol.lmp, p), p.constraints, p.vars, profile);
    cert.player_ids.push_back(p.id);
    cert.gaps.push_back(br.gap);
    cert.epsilon = std::max(cert.epsilon, br.gap);
  }
  cert.is_nash_within = cert.epsilon <= tol;
  return cert;
}

namespace {

void require_compatible(const MarketCase& a, const MarketCase& b) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::IncompatibleGames, "games differ in " + what);
  };
  if (a.generators.size() != b.generators.size()) fail("generator count");
  if (a.demands.size() != b.demands.size()) fail("demand count");
  if (a.network.buses.size() != b.network.buses.size()) fail("bus count");
  if (a.network.lines.size() != b.network.lines.size()) fail("line count");
  if (a.network.reference_bus() != b.network.reference_bus()) fail("reference bus");
  for (std::size_t i = 0; i < a.generators.size(); ++i) {
    if (a.generators[i].blocks.size() != b.generators[i].blocks.size()) fail(a.generators[i].id);
    if (a.generators[i].bus != b.generators[i].bus) fail(a.generators[i].id);
  }
  for (std::size_t j = 0; j < a.demands.size(); ++j) {
    if (a.demands[j].blocks.size() != b.demands[j].blocks.size()) fail(a.demands[j].id);
    if (a.demands[j].bus != b.demands[j].bus) fail(a.demands[j].id);
  }
}

}  // namespace

GameDistance game_distance(const MarketCase& a, const EquilibriumSolution& sol_a,
                           const MarketCase& b, const EquilibriumSolution& sol_b) {
  require_compatible(a, b);
  const auto pa = players(a);
  const auto pb = players(b);
  std::vector<LinearProgram> joint;
  for (std::size_t q = 0; q < pa.size(); ++q) joint.push_back(intersect(pa[q].constraints, pb[q].constraints));
  const Vector s_a = profile_of(a, sol_a);
  const Vector s_b = profile_of(b, sol_b);

  GameDistance d;
  d.profiles = {"nominal equilibrium", "perturbed equilibrium",
                "per-owner maximizing and minimizing vertices of the joint strategy set"};
  d.note = "strategy sets intersected across the two games";
  for (std::size_t p = 0; p < pa.size(); ++p) {
    const Vector diff = payoff_gradient(a, sol_a.lmp, pa[p]) - payoff_gradient(b, sol_b.lmp, pb[p]);
    double hi = 0.0, lo = 0.0;
    for (std::size_t q = 0; q < pa.size(); ++q) {
      const Vector obj = restrict(diff, pa[q].vars);
      if (obj.size() == 0 || obj.cwiseAbs().maxCoeff() == 0.0) continue;
      hi += maximize_over(joint[q], obj).best_payoff;
      lo -= maximize_over(joint[q], Vector(-obj)).best_payoff;
    }
    const double sup = std::max({hi, -lo, std::abs(diff.dot(s_a)), std::abs(diff.dot(s_b))});
    d.player_ids.push_back(pa[p].id);
    d.per_player.push_back(sup);
    d.alpha = std::max(d.alpha, sup);
  }
  return d;
}

TwoAlphaReport evaluate_two_alpha(const MarketCase& nominal, const EquilibriumSolution& sol_nominal,
                                  const MarketCase& perturbed,
                                  const EquilibriumSolution& sol_perturbed, double tol) {
  TwoAlphaReport rep;
  rep.tolerance = tol;
  rep.distance = game_distance(nominal, sol_nominal, perturbed, sol_perturbed);
  rep.alpha = rep.distance.alpha;
  rep.own_epsilon = certify_epsilon_equilibrium(perturbed, sol_perturbed, tol).epsilon;

  const auto pn = players(nominal);
  const auto pp = players(perturbed);
  const Vector s = profile_of(perturbed, sol_perturbed);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < pn.size(); ++q) {
    const auto br = gap_against(payoff_gradient(nominal, sol_nominal.lmp, pn[q]),
                                intersect(pn[q].constraints, pp[q].constraints), pn[q].vars, s);
    if (br.gap > worst) {
      worst = br.gap;
      rep.worst_player = pn[q].id;
    }
  }
  rep.epsilon = std::max(0.0, worst);
  rep.holds = rep.epsilon <= 2.0 * rep.alpha + tol;
  return rep;
}

TwoAlphaReport check_two_alpha(const MarketCase& nominal, const MarketCase& perturbed,
                               const EquilibriumSolution& sol_perturbed, double tol,
                               const MarketOptions& opts) {
  const auto sol_nominal = solve_market(nominal, opts);
  auto rep = evaluate_two_alpha(nominal, sol_nominal, perturbed, sol_perturbed, tol);
  if (rep.own_epsilon > tol) {
    throw Error(ErrorCode::AssertionFailed,
                "perturbed solution is not an equilibrium of its own game (epsilon " +
                    std::to_string(rep.own_epsilon) + ")");
  }
  if (!rep.holds) {
    throw Error(ErrorCode::AssertionFailed,
                rep.worst_player + ": epsilon " + std::to_string(rep.epsilon) +
                    " exceeds 2 alpha " + std::to_string(2.0 * rep.alpha));
  }
  return rep;
}

}  // namespace marketlcp

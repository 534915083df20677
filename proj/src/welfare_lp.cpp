#include "marketlcp/welfare_lp.hpp"

#include <algorithm>

namespace marketlcp {

namespace {

struct LpIndex {
  std::vector<int> gen, dem, angle;
  int cols = 0;

  explicit LpIndex(const MarketCase& c) {
    for (const auto& g : c.generators) {
      gen.push_back(cols);
      cols += static_cast<int>(g.blocks.size());
    }
    for (const auto& d : c.demands) {
      dem.push_back(cols);
      cols += static_cast<int>(d.blocks.size());
    }
    const int ref = c.network.reference_bus();
    for (int n = 0; n < static_cast<int>(c.network.buses.size()); ++n) {
      angle.push_back(n == ref ? -1 : cols);
      if (n != ref) ++cols;
    }
  }
};

}  // namespace

LinearProgram build_welfare_lp(const MarketCase& c) {
  const LpIndex idx(c);
  const auto& net = c.network;
  const int nb = static_cast<int>(net.buses.size());
  const int nl = static_cast<int>(net.lines.size());

  std::vector<std::pair<std::vector<std::pair<int, double>>, std::pair<RowSense, double>>> rows;
  auto add = [&](std::vector<std::pair<int, double>> coeffs, RowSense s, double rhs) {
    rows.push_back({std::move(coeffs), {s, rhs}});
  };

  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    std::vector<std::pair<int, double>> r;
    for (std::size_t b = 0; b < c.generators[i].blocks.size(); ++b) {
      r.push_back({idx.gen[i] + static_cast<int>(b), 1.0});
    }
    add(r, RowSense::Le, c.generators[i].unit_capacity_mw);
  }
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    const auto& g = c.generators[i];
    for (std::size_t b = 0; b < g.blocks.size(); ++b) {
      add({{idx.gen[i] + static_cast<int>(b), 1.0}}, RowSense::Le, g.blocks[b].size_mw);
    }
  }
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    std::vector<std::pair<int, double>> r;
    for (std::size_t k = 0; k < c.demands[j].blocks.size(); ++k) {
      r.push_back({idx.dem[j] + static_cast<int>(k), 1.0});
    }
    add(r, RowSense::Ge, c.demands[j].min_demand_mw);
  }
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    const auto& d = c.demands[j];
    for (std::size_t k = 0; k < d.blocks.size(); ++k) {
      add({{idx.dem[j] + static_cast<int>(k), 1.0}}, RowSense::Le, d.blocks[k].size_mw);
    }
  }

  // consumption + net outflow - generation <= 0 at every bus.
  std::vector<std::vector<std::pair<int, double>>> balance(static_cast<std::size_t>(nb));
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    for (std::size_t b = 0; b < c.generators[i].blocks.size(); ++b) {
      balance[static_cast<std::size_t>(c.generators[i].bus)].push_back(
          {idx.gen[i] + static_cast<int>(b), -1.0});
    }
  }
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    for (std::size_t k = 0; k < c.demands[j].blocks.size(); ++k) {
      balance[static_cast<std::size_t>(c.demands[j].bus)].push_back(
          {idx.dem[j] + static_cast<int>(k), 1.0});
    }
  }
  auto flow_terms = [&](const Line& l, double sign) {
    const double s = net.mva_base * l.susceptance_pu() * sign;
    std::vector<std::pair<int, double>> r;
    if (idx.angle[static_cast<std::size_t>(l.from)] >= 0) {
      r.push_back({idx.angle[static_cast<std::size_t>(l.from)], s});
    }
    if (idx.angle[static_cast<std::size_t>(l.to)] >= 0) {
      r.push_back({idx.angle[static_cast<std::size_t>(l.to)], -s});
    }
    return r;
  };
  for (const auto& l : net.lines) {
    for (auto t : flow_terms(l, 1.0)) balance[static_cast<std::size_t>(l.from)].push_back(t);
    for (auto t : flow_terms(l, -1.0)) balance[static_cast<std::size_t>(l.to)].push_back(t);
  }
  for (int n = 0; n < nb; ++n) add(balance[static_cast<std::size_t>(n)], RowSense::Le, 0.0);

  for (int l = 0; l < nl; ++l) {
    const auto& line = net.lines[static_cast<std::size_t>(l)];
    add(flow_terms(line, 1.0), RowSense::Le, line.capacity_mw);
  }
  for (int l = 0; l < nl; ++l) {
    const auto& line = net.lines[static_cast<std::size_t>(l)];
    add(flow_terms(line, -1.0), RowSense::Le, line.capacity_mw);
  }

  LinearProgram lp;
  const int m = static_cast<int>(rows.size());
  lp.a = Matrix::Zero(m, idx.cols);
  lp.b = Vector::Zero(m);
  lp.c = Vector::Zero(idx.cols);
  lp.free_var.assign(static_cast<std::size_t>(idx.cols), false);
  for (int r = 0; r < m; ++r) {
    for (auto [col, v] : rows[static_cast<std::size_t>(r)].first) lp.a(r, col) += v;
    lp.sense.push_back(rows[static_cast<std::size_t>(r)].second.first);
    lp.b(r) = rows[static_cast<std::size_t>(r)].second.second;
  }
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    for (std::size_t b = 0; b < c.generators[i].blocks.size(); ++b) {
      lp.c(idx.gen[i] + static_cast<int>(b)) = c.generators[i].blocks[b].bid();
    }
  }
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    for (std::size_t k = 0; k < c.demands[j].blocks.size(); ++k) {
      lp.c(idx.dem[j] + static_cast<int>(k)) = -c.demands[j].blocks[k].bid();
    }
  }
  for (int a : idx.angle) {
    if (a >= 0) lp.free_var[static_cast<std::size_t>(a)] = true;
  }
  return lp;
}

WelfareLpResult solve_welfare_lp(const MarketCase& c) {
  WelfareLpResult out;
  const LinearProgram lp = build_welfare_lp(c);
  out.lp = solve_lp(lp);
  if (out.lp.status != LpStatus::Optimal) return out;

  const LpIndex idx(c);
  const MarketLayout layout(c);
  const Vector& p = out.lp.x;
  const Vector& y = out.lp.duals;
  Vector x = Vector::Zero(layout.size());
  int row = 0;
  auto dual = [&](bool ge) { return std::max(0.0, ge ? y(row++) : -y(row++)); };

  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    for (std::size_t b = 0; b < c.generators[i].blocks.size(); ++b) {
      x(layout.gen_block(static_cast<int>(i), static_cast<int>(b))) =
          std::max(0.0, p(idx.gen[i] + static_cast<int>(b)));
    }
  }
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    for (std::size_t k = 0; k < c.demands[j].blocks.size(); ++k) {
      x(layout.demand_block(static_cast<int>(j), static_cast<int>(k))) =
          std::max(0.0, p(idx.dem[j] + static_cast<int>(k)));
    }
  }
  for (std::size_t n = 0; n < idx.angle.size(); ++n) {
    if (idx.angle[n] < 0) continue;
    const double delta = p(idx.angle[n]);
    x(layout.angle_pos(static_cast<int>(n))) = std::max(0.0, delta);
    x(layout.angle_neg(static_cast<int>(n))) = std::max(0.0, -delta);
  }
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    x(layout.alpha(static_cast<int>(i))) = dual(false);
  }
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    for (std::size_t b = 0; b < c.generators[i].blocks.size(); ++b) {
      x(layout.phi(static_cast<int>(i), static_cast<int>(b))) = dual(false);
    }
  }
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    x(layout.sigma(static_cast<int>(j))) = dual(true);
  }
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    for (std::size_t k = 0; k < c.demands[j].blocks.size(); ++k) {
      x(layout.psi(static_cast<int>(j), static_cast<int>(k))) = dual(false);
    }
  }
  for (std::size_t n = 0; n < c.network.buses.size(); ++n) {
    x(layout.rho(static_cast<int>(n))) = dual(false);
  }
  for (int dir = 0; dir < 2; ++dir) {
    for (std::size_t l = 0; l < c.network.lines.size(); ++l) {
      x(layout.gamma(static_cast<int>(l), dir)) = dual(false);
    }
  }
  out.x = std::move(x);
  return out;
}

}  // namespace marketlcp

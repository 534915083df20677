#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "marketlcp/case_io.hpp"
#include "marketlcp/lcp.hpp"
#include "marketlcp/market.hpp"
#include "marketlcp/random.hpp"

namespace fixtures {

using namespace marketlcp;

// Positive diagonal, strictly row diagonally dominant: always a P-matrix.
inline Matrix random_p_matrix(Rng& rng, int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      m(i, j) = rng.uniform(-1.0, 1.0);
      off += std::abs(m(i, j));
    }
    m(i, i) = off + rng.uniform(0.1, 2.0);
  }
  return m;
}

inline Vector random_vector(Rng& rng, int n, double lo, double hi) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

inline Block block(double size, double price) { return Block{size, price, std::nullopt}; }

inline Network single_bus() {
  Network net;
  net.buses.push_back({1, true});
  return net;
}

inline Network two_bus(double capacity) {
  Network net;
  net.buses = {{1, true}, {2, false}};
  net.lines.push_back(Line{0, 1, 0.1, capacity});
  return net;
}

inline GeneratorUnit generator(std::string id, int bus, std::vector<Block> blocks) {
  GeneratorUnit g;
  g.id = std::move(id);
  g.bus = bus;
  g.blocks = std::move(blocks);
  g.unit_capacity_mw = g.block_sum();
  return g;
}

inline GeneratorUnit wind(std::string id, int bus, std::vector<Block> blocks, double b = 5.0,
                          double c = 1.0) {
  GeneratorUnit g = generator(std::move(id), bus, std::move(blocks));
  g.kind = UnitKind::Wind;
  for (const auto& blk : g.blocks) g.mean_power_mw.push_back(blk.size_mw);
  g.reserve_cost_b = b;
  g.reserve_cost_c = c;
  return g;
}

inline DemandUnit demand(std::string id, int bus, std::vector<Block> blocks, double min_mw = 0.0) {
  DemandUnit d;
  d.id = std::move(id);
  d.bus = bus;
  d.blocks = std::move(blocks);
  d.min_demand_mw = min_mw;
  return d;
}

// One bus, one 10 MW generator at 20 $/MWh and a 5 MW fixed load.
inline MarketCase one_bus_fixed() {
  MarketCase c;
  c.name = "one-bus-fixed";
  c.network = single_bus();
  c.generators.push_back(generator("g1", 0, {block(10, 20)}));
  c.demands.push_back(make_fixed_load("l1", 0, 5));
  return c;
}

// One bus, the same generator and a dispatchable 5 MW block worth 30 $/MWh.
inline MarketCase one_bus_dispatchable() {
  MarketCase c;
  c.name = "one-bus";
  c.network = single_bus();
  c.generators.push_back(generator("g1", 0, {block(10, 20)}));
  c.demands.push_back(demand("d1", 0, {block(5, 30)}));
  return c;
}

// Cheap generation at bus 1, expensive at bus 2, 10 MW fixed load at bus 2.
inline MarketCase two_bus_congested(double capacity) {
  MarketCase c;
  c.name = "two-bus";
  c.network = two_bus(capacity);
  c.generators.push_back(generator("g1", 0, {block(20, 20)}));
  c.generators.push_back(generator("g2", 1, {block(20, 50)}));
  c.demands.push_back(make_fixed_load("l2", 1, 10));
  return c;
}

inline MarketCase bundled(const std::string& name) {
  return parse_case_file(bundled_case(name)).market;
}

struct RandomCaseOptions {
  int min_buses = 2;
  int max_buses = 5;
  bool fixed_loads = true;
  bool wind = false;
  double min_capacity = 5.0;
  double max_capacity = 60.0;
};

// Connected network (random spanning tree plus extra lines), rational block
// stacks with distinct prices, fixed loads only where local generation covers
// them so every case is feasible. With fixed loads on, the first generator
// always serves one, so some energy clears and the LMPs are unique.
inline MarketCase random_case(Rng& rng, const RandomCaseOptions& opts = {}) {
  MarketCase c;
  const int nb = rng.integer(opts.min_buses, opts.max_buses);
  c.name = "random";
  for (int n = 0; n < nb; ++n) c.network.buses.push_back({n + 1, n == 0});
  auto add_line = [&](int a, int b) {
    c.network.lines.push_back(
        Line{a, b, rng.uniform(0.05, 0.5), rng.uniform(opts.min_capacity, opts.max_capacity)});
  };
  for (int n = 1; n < nb; ++n) add_line(rng.integer(0, n - 1), n);
  const int extra = nb > 2 ? rng.integer(0, nb - 2) : 0;
  for (int e = 0; e < extra; ++e) {
    const int a = rng.integer(0, nb - 1);
    const int b = rng.integer(0, nb - 1);
    if (a != b) add_line(a, b);
  }

  auto stack = [&](int blocks, bool ascending, double lo, double hi) {
    std::vector<double> prices;
    for (int k = 0; k < blocks; ++k) prices.push_back(rng.uniform(lo, hi));
    std::sort(prices.begin(), prices.end());
    if (!ascending) std::reverse(prices.begin(), prices.end());
    std::vector<Block> out;
    for (double p : prices) out.push_back(block(rng.uniform(2.0, 25.0), p));
    return out;
  };

  const int ng = rng.integer(1, 3);
  for (int i = 0; i < ng; ++i) {
    auto g = generator("g" + std::to_string(i + 1), rng.integer(0, nb - 1),
                       stack(rng.integer(1, 3), true, 5.0, 45.0));
    if (opts.wind && i == 0) {
      g.kind = UnitKind::Wind;
      for (const auto& b : g.blocks) g.mean_power_mw.push_back(b.size_mw);
    }
    if (rng.uniform() < 0.3) g.unit_capacity_mw = g.block_sum() * rng.uniform(0.6, 1.0);
    c.generators.push_back(std::move(g));
  }
  const int nd = rng.integer(1, 3);
  for (int j = 0; j < nd; ++j) {
    auto d = demand("d" + std::to_string(j + 1), rng.integer(0, nb - 1),
                    stack(rng.integer(1, 3), false, 10.0, 60.0));
    c.demands.push_back(std::move(d));
  }
  if (opts.fixed_loads) {
    for (const auto& g : c.generators) {
      if (&g == &c.generators.front() || rng.uniform() < 0.5) {
        c.demands.push_back(make_fixed_load("l" + std::to_string(c.demands.size() + 1), g.bus,
                                            rng.uniform(0.5, 0.5 * g.unit_capacity_mw)));
      }
    }
  }
  return c;
}

}  // namespace fixtures

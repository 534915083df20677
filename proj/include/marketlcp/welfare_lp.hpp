#pragma once

#include "marketlcp/market.hpp"
#include "marketlcp/simplex.hpp"

namespace marketlcp {

// Social-welfare clearing as a linear program, built directly from the case
// and independent of the LCP assembly. Variables: generator blocks, demand
// blocks, then one free angle per non-reference bus. Rows: unit capacity,
// generator blocks, minimum demand, demand blocks, nodal balance, line
// limits forward then reverse.
LinearProgram build_welfare_lp(const MarketCase& c);

struct WelfareLpResult {
  LpResult lp;
  // Primal and recovered duals in MarketLayout order (valid when Optimal).
  Vector x;
};

WelfareLpResult solve_welfare_lp(const MarketCase& c);

}  // namespace marketlcp

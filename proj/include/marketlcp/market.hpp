#pragma once

#include <optional>
#include <string>
#include <vector>

#include "marketlcp/lcp.hpp"

namespace marketlcp {

// Utility assigned to non-dispatchable loads so they always clear.
inline constexpr double kFixedLoadUtility = 1e4;

struct Block {
  double size_mw = 0.0;
  double price_per_mwh = 0.0;        // marginal cost or marginal utility
  std::optional<double> bid_per_mwh;  // defaults to the marginal value

  double bid() const { return bid_per_mwh.value_or(price_per_mwh); }
  friend bool operator==(const Block&, const Block&) = default;
};

enum class UnitKind { Conventional, Wind };

struct GeneratorUnit {
  std::string id;
  int bus = 0;  // index into Network::buses
  std::vector<Block> blocks;
  double unit_capacity_mw = 0.0;
  UnitKind kind = UnitKind::Conventional;
  // Wind only: mean power per block and quadratic reserve-cost coefficients.
  std::vector<double> mean_power_mw;
  double reserve_cost_b = 5.0;
  double reserve_cost_c = 1.0;

  double block_sum() const;
  friend bool operator==(const GeneratorUnit&, const GeneratorUnit&) = default;
};

struct DemandUnit {
  std::string id;
  int bus = 0;
  std::vector<Block> blocks;
  double min_demand_mw = 0.0;
  bool dispatchable = true;

  double block_sum() const;
  friend bool operator==(const DemandUnit&, const DemandUnit&) = default;
};

struct Bus {
  int number = 0;  // external bus number as printed in reports
  bool reference = false;
  friend bool operator==(const Bus&, const Bus&) = default;
};

struct Line {
  int from = 0;  // bus indices
  int to = 0;
  double reactance_pu = 0.0;
  double capacity_mw = 100.0;

  double susceptance_pu() const { return 1.0 / reactance_pu; }
  friend bool operator==(const Line&, const Line&) = default;
};

struct Network {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  double mva_base = 100.0;

  int reference_bus() const;  // -1 when there is none
  friend bool operator==(const Network&, const Network&) = default;
};

struct MarketCase {
  std::string name;
  Network network;
  std::vector<GeneratorUnit> generators;
  std::vector<DemandUnit> demands;  // dispatchable demands and fixed loads

  friend bool operator==(const MarketCase&, const MarketCase&) = default;
};

// Fixed load as a single block with min = max, cleared at kFixedLoadUtility.
DemandUnit make_fixed_load(std::string id, int bus, double mw);

struct ValidationReport {
  std::vector<std::string> warnings;
};

// Structural checks. Non-rational bid stacks throw NonRationalBids when
// strict, otherwise they are reported as warnings.
ValidationReport validate_case(const MarketCase& c, bool strict = false);

// Index map from market entities to positions in the LCP vector.
class MarketLayout {
 public:
  explicit MarketLayout(const MarketCase& c);

  int size() const { return size_; }
  int gen_block(int unit, int block) const { return gen_[unit] + block; }
  int demand_block(int unit, int block) const { return dem_[unit] + block; }
  // -1 for the reference bus.
  int angle_pos(int bus) const { return angle_pos_[bus]; }
  int angle_neg(int bus) const { return angle_neg_[bus]; }
  int alpha(int unit) const { return alpha_ + unit; }
  int phi(int unit, int block) const { return phi_[unit] + block; }
  int sigma(int unit) const { return sigma_ + unit; }
  int psi(int unit, int block) const { return psi_[unit] + block; }
  int rho(int bus) const { return rho_ + bus; }
  int gamma(int line, int direction) const { return gamma_ + 2 * line + direction; }
  int primal_size() const { return alpha_; }

 private:
  std::vector<int> gen_, dem_, angle_pos_, angle_neg_, phi_, psi_;
  int alpha_ = 0, sigma_ = 0, rho_ = 0, gamma_ = 0, size_ = 0;
};

// Flow on a line from angles (MW, positive from -> to).
double line_flow_mw(const Network& net, int line, const std::vector<double>& angles);

LcpInstance assemble_lcp(const MarketCase& c, bool strict = false);

enum class SolutionSource { Lcp, LpFallback };

std::string to_string(SolutionSource source);

struct EquilibriumSolution {
  std::vector<std::vector<double>> generation_mw;   // [unit][block]
  std::vector<std::vector<double>> consumption_mw;  // [unit][block]
  std::vector<double> angles_rad;                   // per bus, reference = 0
  std::vector<double> lmp;                          // rho_n, $/MWh
  std::vector<double> line_flows_mw;
  std::vector<double> alpha;               // unit capacity duals
  std::vector<std::vector<double>> phi;    // generator block duals
  std::vector<double> sigma;               // per-unit minimum demand duals
  std::vector<std::vector<double>> psi;    // demand block duals
  std::vector<double> gamma_forward;
  std::vector<double> gamma_reverse;
  Vector x;  // full LCP vector in MarketLayout order
  LcpStatus status = LcpStatus::Solved;
  SolutionSource source = SolutionSource::Lcp;
  int pivots = 0;
  std::vector<std::string> diagnostics;

  double unit_output(int unit) const;
  double unit_consumption(int unit) const;
};

struct MarketOptions {
  SolverOptions lcp;
  bool strict = false;
  bool allow_fallback = true;
  double check_tol = 1e-6;  // MW and $/MWh tolerance of the post-solve checks
};

// Rebuilds named quantities from an LCP vector in MarketLayout order.
EquilibriumSolution solution_from_vector(const MarketCase& c, const Vector& x);

EquilibriumSolution solve_market(const MarketCase& c, const MarketOptions& opts = {});

// Throws SolverFailure naming the first violated balance, flow or block limit.
void verify_solution(const MarketCase& c, const EquilibriumSolution& sol, double tol);

double social_welfare(const EquilibriumSolution& sol, const MarketCase& c);

struct SettlementRow {
  std::string unit_id;
  int bus = 0;  // external number
  bool generator = true;
  double quantity_mw = 0.0;
  double price_per_mwh = 0.0;
  // Generators: revenue from sales, production cost, profit.
  // Demands: bid value of consumption, payment, surplus; value and surplus
  // are NaN for fixed loads.
  double revenue = 0.0;
  double cost = 0.0;
  double profit = 0.0;
};

struct SettlementReport {
  std::vector<SettlementRow> generators;
  std::vector<SettlementRow> demands;
};

SettlementReport settlement(const EquilibriumSolution& sol, const MarketCase& c);

enum class PenetrationMode { Capacity, Scheduled };

// Wind block power over the sum of dispatchable demand block maxima.
double wind_penetration(const MarketCase& c, PenetrationMode mode = PenetrationMode::Capacity,
                        const EquilibriumSolution* sol = nullptr);

}  // namespace marketlcp

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "marketlcp/market.hpp"
#include "marketlcp/matrix_class.hpp"

namespace marketlcp {

// Keys are (unit index, block index).
struct PerturbationSpec {
  std::map<std::pair<int, int>, double> wind_deltas;
  std::map<std::pair<int, int>, double> curtailments;

  bool empty() const { return wind_deltas.empty() && curtailments.empty(); }
  friend bool operator==(const PerturbationSpec&, const PerturbationSpec&) = default;
};

// Same fraction on every block of one unit.
void set_wind_delta(PerturbationSpec& spec, const MarketCase& c, int unit, double delta);
void set_curtailment(PerturbationSpec& spec, const MarketCase& c, int unit, double kappa);

// b Dw + (c/2) Dw^2 with Dw = mean power * delta, in $/h.
double reserve_cost(const GeneratorUnit& unit, int block, double delta);

// Reserve cost spread over the capacity that remains after the shortfall.
double reserve_adder(const GeneratorUnit& unit, int block, double delta);

struct PerturbedCase {
  MarketCase perturbed;
  LcpInstance nominal_lcp;
  LcpInstance perturbed_lcp;
  Matrix delta_m;
  Vector delta_q;
};

PerturbedCase apply_perturbation(const MarketCase& c, const PerturbationSpec& spec);

// Wind block sizes, mean powers and unit capacities multiplied by scale.
MarketCase scale_wind(const MarketCase& c, double scale);

struct ShiftOptions {
  MarketOptions market;
  BetaOptions beta;
  // Reused when present; beta depends on M only.
  std::optional<BetaResult> beta_cache;
};

struct ShiftReport {
  PerturbationBound bound;
  double observed_shift = 0.0;  // ||x* - x*_D||_inf / ||x*||_inf
  std::vector<double> nominal_lmp;
  std::vector<double> perturbed_lmp;
  double max_lmp_change = 0.0;
  double penetration = 0.0;  // capacity-based x^w of the nominal case
  bool mu_heuristic = false;  // beta is a sampled lower bound
  PerturbationSpec spec;
  SolutionSource nominal_source = SolutionSource::Lcp;
  SolutionSource perturbed_source = SolutionSource::Lcp;
};

// Never throws EtaExceedsOne: the report then carries no mu and the caller
// decides (see require_bound).
ShiftReport shift_analysis(const MarketCase& c, const PerturbationSpec& spec,
                           const ShiftOptions& opts = {});

struct SweepAxes {
  std::vector<double> deltas{0.0};
  std::vector<double> kappas{0.0};
  std::vector<double> penetration_scales{1.0};
  int wind_unit = -1;    // -1 selects the first wind unit
  int kappa_unit = -1;   // required when any kappa is nonzero
};

struct SweepRow {
  double delta = 0.0;
  double kappa = 0.0;
  double penetration_scale = 1.0;
  double penetration = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  std::optional<double> mu;
  double observed_shift = 0.0;
  double max_lmp_change = 0.0;
  bool mu_heuristic = false;
  std::string error;  // empty when the cell succeeded
};

struct SweepTable {
  std::vector<SweepRow> rows;  // delta-major, then kappa, then penetration scale
};

// A zero delta or kappa means no entry for that axis. Cells run in parallel;
// failures are recorded in the row and the sweep continues.
SweepTable sweep(const MarketCase& c, const SweepAxes& axes, const ShiftOptions& opts = {});

}  // namespace marketlcp

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "marketlcp/game.hpp"
#include "marketlcp/lcp.hpp"
#include "marketlcp/market.hpp"
#include "marketlcp/matrix_class.hpp"
#include "marketlcp/perturbation.hpp"

namespace marketlcp {

// Serialized report sections. Field names are the JSON keys; anything with a
// physical unit carries it as a suffix. Optional doubles serialize as null.

struct BusRow {
  int bus = 0;
  double lmp_usd_per_mwh = 0.0;
  double angle_rad = 0.0;
  friend bool operator==(const BusRow&, const BusRow&) = default;
};

struct UnitRow {
  std::string unit_id;
  int bus = 0;
  double quantity_mw = 0.0;
  friend bool operator==(const UnitRow&, const UnitRow&) = default;
};

struct LineRow {
  int from_bus = 0;
  int to_bus = 0;
  double flow_mw = 0.0;
  double capacity_mw = 0.0;
  friend bool operator==(const LineRow&, const LineRow&) = default;
};

struct SolutionSection {
  std::string case_name;
  std::string status;
  std::string source;
  int pivots = 0;
  std::vector<BusRow> buses;
  std::vector<UnitRow> generators;
  std::vector<UnitRow> demands;
  std::vector<LineRow> lines;
  double total_generation_mw = 0.0;
  double total_consumption_mw = 0.0;
  double social_welfare_usd_per_h = 0.0;
  std::vector<std::string> diagnostics;
  friend bool operator==(const SolutionSection&, const SolutionSection&) = default;
};

struct SettlementLine {
  std::string unit_id;
  std::string role;  // "generator" or "demand"
  int bus = 0;
  double quantity_mw = 0.0;
  double price_usd_per_mwh = 0.0;
  std::optional<double> revenue_usd_per_h;
  double cost_usd_per_h = 0.0;
  std::optional<double> profit_usd_per_h;
  friend bool operator==(const SettlementLine&, const SettlementLine&) = default;
};

struct SettlementSection {
  std::vector<SettlementLine> rows;  // generators, then demands
  friend bool operator==(const SettlementSection&, const SettlementSection&) = default;
};

struct MatrixClassSection {
  int dimension = 0;
  bool is_p_matrix = false;
  std::string method;
  double min_minor = 0.0;
  std::optional<std::vector<int>> witness;
  std::uint64_t minors_checked = 0;
  friend bool operator==(const MatrixClassSection&, const MatrixClassSection&) = default;
};

struct BoundSection {
  std::string norm = "inf";
  double beta = 0.0;
  bool beta_is_lower_bound = false;
  double eta = 0.0;
  double epsilon_m = 0.0;
  double epsilon_q = 0.0;
  double epsilon = 0.0;
  std::optional<double> mu;
  double m_norm = 0.0;
  double q_norm = 0.0;
  friend bool operator==(const BoundSection&, const BoundSection&) = default;
};

struct SpecEntry {
  std::string unit_id;
  int block = 0;
  double value = 0.0;  // delta for wind entries, kappa for curtailments
  friend bool operator==(const SpecEntry&, const SpecEntry&) = default;
};

struct ShiftSection {
  BoundSection bound;
  double observed_shift = 0.0;
  double max_lmp_change_usd_per_mwh = 0.0;
  double penetration = 0.0;
  bool mu_heuristic = false;
  std::vector<int> buses;
  std::vector<double> nominal_lmp_usd_per_mwh;
  std::vector<double> perturbed_lmp_usd_per_mwh;
  std::vector<SpecEntry> wind_deltas;
  std::vector<SpecEntry> curtailments;
  std::string nominal_source;
  std::string perturbed_source;
  friend bool operator==(const ShiftSection&, const ShiftSection&) = default;
};

struct SweepLine {
  double delta = 0.0;
  double kappa = 0.0;
  double penetration = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  std::optional<double> mu;
  double observed_shift = 0.0;
  double max_lmp_change_usd_per_mwh = 0.0;
  double penetration_scale = 1.0;
  bool mu_heuristic = false;
  std::string error;
  friend bool operator==(const SweepLine&, const SweepLine&) = default;
};

struct SweepSection {
  std::vector<SweepLine> rows;
  friend bool operator==(const SweepSection&, const SweepSection&) = default;
};

struct PlayerValue {
  std::string player_id;
  double value_usd_per_h = 0.0;
  friend bool operator==(const PlayerValue&, const PlayerValue&) = default;
};

struct CertificateSection {
  double epsilon_usd_per_h = 0.0;
  double tolerance_usd_per_h = 0.0;
  bool is_nash_within = true;
  std::string method;
  std::vector<PlayerValue> gaps;
  friend bool operator==(const CertificateSection&, const CertificateSection&) = default;
};

struct TwoAlphaSection {
  double alpha_usd_per_h = 0.0;
  double epsilon_usd_per_h = 0.0;
  double own_epsilon_usd_per_h = 0.0;
  double tolerance_usd_per_h = 0.0;
  bool holds = true;
  std::string worst_player;
  bool alpha_exact = true;
  std::string note;
  std::vector<PlayerValue> deviations;
  friend bool operator==(const TwoAlphaSection&, const TwoAlphaSection&) = default;
};

struct OracleSection {
  int dimension = 0;
  int solutions_found = 0;
  std::int64_t feasible_bases = 0;
  std::int64_t singular_bases = 0;
  std::string lemke_status;
  double max_difference = 0.0;  // componentwise, same units as x
  bool agrees = false;
  friend bool operator==(const OracleSection&, const OracleSection&) = default;
};

struct RunReport {
  std::optional<SolutionSection> solution;
  std::optional<SettlementSection> settlement;
  std::optional<MatrixClassSection> matrix_class;
  std::optional<BoundSection> bound;
  std::optional<ShiftSection> shift;
  std::optional<SweepSection> sweep;
  std::optional<CertificateSection> certificate;
  std::optional<TwoAlphaSection> two_alpha;
  std::optional<OracleSection> oracle;

  bool empty() const;
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

SolutionSection make_solution_section(const MarketCase& c, const EquilibriumSolution& sol);
SettlementSection make_settlement_section(const SettlementReport& rep);
MatrixClassSection make_matrix_class_section(const MatrixClassReport& rep, int dimension);
BoundSection make_bound_section(const PerturbationBound& bound);
ShiftSection make_shift_section(const MarketCase& c, const ShiftReport& rep);
SweepSection make_sweep_section(const SweepTable& table);
CertificateSection make_certificate_section(const EquilibriumCertificate& cert);
TwoAlphaSection make_two_alpha_section(const TwoAlphaReport& rep);

enum class ReportFormat { Text, Json, Csv };

ReportFormat parse_format(const std::string& name);

// Json: one object with a key per present section; the empty report is "{}".
// Csv: the table of each present section, separated by a blank line; the
// empty report is the empty string. Text: aligned human-readable tables.
std::string emit_report(const RunReport& report, ReportFormat format);

// Inverse of the JSON emission. Throws SchemaError on malformed input.
RunReport parse_report_json(const std::string& text);

// CSV field formatting shared by every table: shortest round-trip decimal,
// empty for missing values, quoted when the text contains a separator.
std::string csv_number(double v);
std::string csv_text(const std::string& s);

}  // namespace marketlcp

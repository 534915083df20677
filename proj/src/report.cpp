#include "marketlcp/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "marketlcp/error.hpp"

namespace marketlcp {

using Json = nlohmann::ordered_json;

bool RunReport::empty() const {
  return !solution && !settlement && !matrix_class && !bound && !shift && !sweep && !certificate &&
         !two_alpha && !oracle;
}

// ---------------------------------------------------------------- builders

SolutionSection make_solution_section(const MarketCase& c, const EquilibriumSolution& sol) {
  SolutionSection s;
  s.case_name = c.name;
  s.status = to_string(sol.status);
  s.source = to_string(sol.source);
  s.pivots = sol.pivots;
  const auto& net = c.network;
  for (std::size_t n = 0; n < net.buses.size(); ++n) {
    s.buses.push_back({net.buses[n].number, sol.lmp[n], sol.angles_rad[n]});
  }
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    const auto& g = c.generators[i];
    const double p = sol.unit_output(static_cast<int>(i));
    s.generators.push_back({g.id, net.buses[static_cast<std::size_t>(g.bus)].number, p});
    s.total_generation_mw += p;
  }
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    const auto& d = c.demands[j];
    const double p = sol.unit_consumption(static_cast<int>(j));
    s.demands.push_back({d.id, net.buses[static_cast<std::size_t>(d.bus)].number, p});
    s.total_consumption_mw += p;
  }
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const auto& line = net.lines[l];
    s.lines.push_back({net.buses[static_cast<std::size_t>(line.from)].number,
                       net.buses[static_cast<std::size_t>(line.to)].number, sol.line_flows_mw[l],
                       line.capacity_mw});
  }
  s.social_welfare_usd_per_h = social_welfare(sol, c);
  s.diagnostics = sol.diagnostics;
  return s;
}

namespace {

std::optional<double> finite_or_none(double v) {
  return std::isnan(v) ? std::nullopt : std::optional<double>(v);
}

SettlementLine settlement_line(const SettlementRow& r) {
  return {r.unit_id,        r.generator ? "generator" : "demand", r.bus,
          r.quantity_mw,    r.price_per_mwh,                      finite_or_none(r.revenue),
          r.cost,           finite_or_none(r.profit)};
}

std::vector<SpecEntry> spec_entries(const std::map<std::pair<int, int>, double>& m,
                                    const auto& units) {
  std::vector<SpecEntry> out;
  for (const auto& [key, v] : m) {
    out.push_back({units[static_cast<std::size_t>(key.first)].id, key.second, v});
  }
  return out;
}

}  // namespace

SettlementSection make_settlement_section(const SettlementReport& rep) {
  SettlementSection s;
  for (const auto& r : rep.generators) s.rows.push_back(settlement_line(r));
  for (const auto& r : rep.demands) s.rows.push_back(settlement_line(r));
  return s;
}

MatrixClassSection make_matrix_class_section(const MatrixClassReport& rep, int dimension) {
  return {dimension, rep.is_p_matrix, to_string(rep.method), rep.min_minor, rep.witness,
          rep.minors_checked};
}

BoundSection make_bound_section(const PerturbationBound& b) {
  BoundSection s;
  s.beta = b.beta;
  s.beta_is_lower_bound = b.beta_is_lower_bound;
  s.eta = b.eta;
  s.epsilon_m = b.epsilon_m;
  s.epsilon_q = b.epsilon_q;
  s.epsilon = b.epsilon;
  s.mu = b.mu;
  s.m_norm = b.m_norm;
  s.q_norm = b.q_norm;
  return s;
}

ShiftSection make_shift_section(const MarketCase& c, const ShiftReport& rep) {
  ShiftSection s;
  s.bound = make_bound_section(rep.bound);
  s.observed_shift = rep.observed_shift;
  s.max_lmp_change_usd_per_mwh = rep.max_lmp_change;
  s.penetration = rep.penetration;
  s.mu_heuristic = rep.mu_heuristic;
  for (const auto& b : c.network.buses) s.buses.push_back(b.number);
  s.nominal_lmp_usd_per_mwh = rep.nominal_lmp;
  s.perturbed_lmp_usd_per_mwh = rep.perturbed_lmp;
  s.wind_deltas = spec_entries(rep.spec.wind_deltas, c.generators);
  s.curtailments = spec_entries(rep.spec.curtailments, c.demands);
  s.nominal_source = to_string(rep.nominal_source);
  s.perturbed_source = to_string(rep.perturbed_source);
  return s;
}

SweepSection make_sweep_section(const SweepTable& table) {
  SweepSection s;
  for (const auto& r : table.rows) {
    s.rows.push_back({r.delta, r.kappa, r.penetration, r.beta, r.eta, r.mu, r.observed_shift,
                      r.max_lmp_change, r.penetration_scale, r.mu_heuristic, r.error});
  }
  return s;
}

CertificateSection make_certificate_section(const EquilibriumCertificate& cert) {
  CertificateSection s;
  s.epsilon_usd_per_h = cert.epsilon;
  s.tolerance_usd_per_h = cert.tolerance;
  s.is_nash_within = cert.is_nash_within;
  s.method = cert.method;
  for (std::size_t i = 0; i < cert.player_ids.size(); ++i) {
    s.gaps.push_back({cert.player_ids[i], cert.gaps[i]});
  }
  return s;
}

TwoAlphaSection make_two_alpha_section(const TwoAlphaReport& rep) {
  TwoAlphaSection s;
  s.alpha_usd_per_h = rep.alpha;
  s.epsilon_usd_per_h = rep.epsilon;
  s.own_epsilon_usd_per_h = rep.own_epsilon;
  s.tolerance_usd_per_h = rep.tolerance;
  s.holds = rep.holds;
  s.worst_player = rep.worst_player;
  s.alpha_exact = rep.distance.exact;
  s.note = rep.distance.note;
  for (std::size_t i = 0; i < rep.distance.player_ids.size(); ++i) {
    s.deviations.push_back({rep.distance.player_ids[i], rep.distance.per_player[i]});
  }
  return s;
}

ReportFormat parse_format(const std::string& name) {
  if (name == "text") return ReportFormat::Text;
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw Error(ErrorCode::ValidationError, "unknown format '" + name + "' (text, json, csv)");
}

// -------------------------------------------------------------------- JSON

namespace {

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
Json num(const std::optional<double>& v) { return v ? num(*v) : Json(nullptr); }

template <class T, class F>
Json array_of(const std::vector<T>& v, F&& f) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(f(x));
  return a;
}

Json to_json(const PlayerValue& p, const char* value_key) {
  return Json{{"player_id", p.player_id}, {value_key, num(p.value_usd_per_h)}};
}

Json to_json(const SpecEntry& e, const char* value_key) {
  return Json{{"unit_id", e.unit_id}, {"block", e.block}, {value_key, e.value}};
}

Json to_json(const SolutionSection& s) {
  Json j;
  j["case_name"] = s.case_name;
  j["status"] = s.status;
  j["source"] = s.source;
  j["pivots"] = s.pivots;
  j["buses"] = array_of(s.buses, [](const BusRow& b) {
    return Json{{"bus", b.bus}, {"lmp_usd_per_mwh", num(b.lmp_usd_per_mwh)}, {"angle_rad", num(b.angle_rad)}};
  });
  auto unit = [](const UnitRow& u) {
    return Json{{"unit_id", u.unit_id}, {"bus", u.bus}, {"quantity_mw", num(u.quantity_mw)}};
  };
  j["generators"] = array_of(s.generators, unit);
  j["demands"] = array_of(s.demands, unit);
  j["lines"] = array_of(s.lines, [](const LineRow& l) {
    return Json{{"from_bus", l.from_bus}, {"to_bus", l.to_bus}, {"flow_mw", num(l.flow_mw)},
                {"capacity_mw", num(l.capacity_mw)}};
  });
  j["total_generation_mw"] = num(s.total_generation_mw);
  j["total_consumption_mw"] = num(s.total_consumption_mw);
  j["social_welfare_usd_per_h"] = num(s.social_welfare_usd_per_h);
  j["diagnostics"] = s.diagnostics;
  return j;
}

Json to_json(const SettlementSection& s) {
  Json j;
  j["rows"] = array_of(s.rows, [](const SettlementLine& r) {
    return Json{{"unit_id", r.unit_id},
                {"role", r.role},
                {"bus", r.bus},
                {"quantity_mw", num(r.quantity_mw)},
                {"price_usd_per_mwh", num(r.price_usd_per_mwh)},
                {"revenue_usd_per_h", num(r.revenue_usd_per_h)},
                {"cost_usd_per_h", num(r.cost_usd_per_h)},
                {"profit_usd_per_h", num(r.profit_usd_per_h)}};
  });
  return j;
}

Json to_json(const MatrixClassSection& s) {
  Json j;
  j["dimension"] = s.dimension;
  j["is_p_matrix"] = s.is_p_matrix;
  j["method"] = s.method;
  j["min_minor"] = num(s.min_minor);
  j["witness"] = s.witness ? Json(*s.witness) : Json(nullptr);
  j["minors_checked"] = s.minors_checked;
  return j;
}

Json to_json(const BoundSection& s) {
  Json j;
  j["norm"] = s.norm;
  j["beta"] = num(s.beta);
  j["beta_is_lower_bound"] = s.beta_is_lower_bound;
  j["eta"] = num(s.eta);
  j["epsilon_m"] = num(s.epsilon_m);
  j["epsilon_q"] = num(s.epsilon_q);
  j["epsilon"] = num(s.epsilon);
  j["mu"] = num(s.mu);
  j["m_norm"] = num(s.m_norm);
  j["q_norm"] = num(s.q_norm);
  return j;
}

Json numbers(const std::vector<double>& v) {
  return array_of(v, [](double x) { return num(x); });
}

Json to_json(const ShiftSection& s) {
  Json j;
  j["bound"] = to_json(s.bound);
  j["observed_shift"] = num(s.observed_shift);
  j["max_lmp_change_usd_per_mwh"] = num(s.max_lmp_change_usd_per_mwh);
  j["penetration"] = num(s.penetration);
  j["mu_heuristic"] = s.mu_heuristic;
  j["buses"] = s.buses;
  j["nominal_lmp_usd_per_mwh"] = numbers(s.nominal_lmp_usd_per_mwh);
  j["perturbed_lmp_usd_per_mwh"] = numbers(s.perturbed_lmp_usd_per_mwh);
  j["wind_deltas"] = array_of(s.wind_deltas, [](const SpecEntry& e) { return to_json(e, "delta"); });
  j["curtailments"] = array_of(s.curtailments, [](const SpecEntry& e) { return to_json(e, "kappa"); });
  j["nominal_source"] = s.nominal_source;
  j["perturbed_source"] = s.perturbed_source;
  return j;
}

Json to_json(const SweepSection& s) {
  Json j;
  j["rows"] = array_of(s.rows, [](const SweepLine& r) {
    return Json{{"delta", num(r.delta)},
                {"kappa", num(r.kappa)},
                {"penetration", num(r.penetration)},
                {"beta", num(r.beta)},
                {"eta", num(r.eta)},
                {"mu", num(r.mu)},
                {"observed_shift", num(r.observed_shift)},
                {"max_lmp_change_usd_per_mwh", num(r.max_lmp_change_usd_per_mwh)},
                {"penetration_scale", num(r.penetration_scale)},
                {"mu_heuristic", r.mu_heuristic},
                {"error", r.error}};
  });
  return j;
}

Json to_json(const CertificateSection& s) {
  Json j;
  j["epsilon_usd_per_h"] = num(s.epsilon_usd_per_h);
  j["tolerance_usd_per_h"] = num(s.tolerance_usd_per_h);
  j["is_nash_within"] = s.is_nash_within;
  j["method"] = s.method;
  j["gaps"] = array_of(s.gaps, [](const PlayerValue& p) { return to_json(p, "gap_usd_per_h"); });
  return j;
}

Json to_json(const TwoAlphaSection& s) {
  Json j;
  j["alpha_usd_per_h"] = num(s.alpha_usd_per_h);
  j["epsilon_usd_per_h"] = num(s.epsilon_usd_per_h);
  j["own_epsilon_usd_per_h"] = num(s.own_epsilon_usd_per_h);
  j["tolerance_usd_per_h"] = num(s.tolerance_usd_per_h);
  j["holds"] = s.holds;
  j["worst_player"] = s.worst_player;
  j["alpha_exact"] = s.alpha_exact;
  j["note"] = s.note;
  j["deviations"] =
      array_of(s.deviations, [](const PlayerValue& p) { return to_json(p, "deviation_usd_per_h"); });
  return j;
}

Json to_json(const OracleSection& s) {
  Json j;
  j["dimension"] = s.dimension;
  j["solutions_found"] = s.solutions_found;
  j["feasible_bases"] = s.feasible_bases;
  j["singular_bases"] = s.singular_bases;
  j["lemke_status"] = s.lemke_status;
  j["max_difference"] = num(s.max_difference);
  j["agrees"] = s.agrees;
  return j;
}

// Readers: null maps to NaN for plain doubles and to nullopt for optionals.
double get_num(const Json& j, const char* key) {
  const Json& v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

std::optional<double> get_opt(const Json& j, const char* key) {
  const Json& v = j.at(key);
  return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
}

template <class T, class F>
std::vector<T> vector_of(const Json& a, F&& f) {
  std::vector<T> out;
  for (const auto& x : a) out.push_back(f(x));
  return out;
}

std::vector<double> get_numbers(const Json& j, const char* key) {
  return vector_of<double>(j.at(key), [](const Json& x) {
    return x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>();
  });
}

PlayerValue player_value(const Json& j, const char* key) {
  return {j.at("player_id").get<std::string>(), get_num(j, key)};
}

SpecEntry spec_entry(const Json& j, const char* key) {
  return {j.at("unit_id").get<std::string>(), j.at("block").get<int>(), j.at(key).get<double>()};
}

UnitRow unit_row(const Json& u) {
  return {u.at("unit_id").get<std::string>(), u.at("bus").get<int>(), get_num(u, "quantity_mw")};
}

SolutionSection solution_from(const Json& j) {
  SolutionSection s;
  s.case_name = j.at("case_name").get<std::string>();
  s.status = j.at("status").get<std::string>();
  s.source = j.at("source").get<std::string>();
  s.pivots = j.at("pivots").get<int>();
  s.buses = vector_of<BusRow>(j.at("buses"), [](const Json& b) {
    return BusRow{b.at("bus").get<int>(), get_num(b, "lmp_usd_per_mwh"), get_num(b, "angle_rad")};
  });
  s.generators = vector_of<UnitRow>(j.at("generators"), unit_row);
  s.demands = vector_of<UnitRow>(j.at("demands"), unit_row);
  s.lines = vector_of<LineRow>(j.at("lines"), [](const Json& l) {
    return LineRow{l.at("from_bus").get<int>(), l.at("to_bus").get<int>(), get_num(l, "flow_mw"),
                   get_num(l, "capacity_mw")};
  });
  s.total_generation_mw = get_num(j, "total_generation_mw");
  s.total_consumption_mw = get_num(j, "total_consumption_mw");
  s.social_welfare_usd_per_h = get_num(j, "social_welfare_usd_per_h");
  s.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  return s;
}

SettlementSection settlement_from(const Json& j) {
  SettlementSection s;
  s.rows = vector_of<SettlementLine>(j.at("rows"), [](const Json& r) {
    return SettlementLine{r.at("unit_id").get<std::string>(), r.at("role").get<std::string>(),
                          r.at("bus").get<int>(),             get_num(r, "quantity_mw"),
                          get_num(r, "price_usd_per_mwh"),    get_opt(r, "revenue_usd_per_h"),
                          get_num(r, "cost_usd_per_h"),       get_opt(r, "profit_usd_per_h")};
  });
  return s;
}

MatrixClassSection matrix_class_from(const Json& j) {
  MatrixClassSection s;
  s.dimension = j.at("dimension").get<int>();
  s.is_p_matrix = j.at("is_p_matrix").get<bool>();
  s.method = j.at("method").get<std::string>();
  s.min_minor = get_num(j, "min_minor");
  if (!j.at("witness").is_null()) s.witness = j.at("witness").get<std::vector<int>>();
  s.minors_checked = j.at("minors_checked").get<std::uint64_t>();
  return s;
}

BoundSection bound_from(const Json& j) {
  BoundSection s;
  s.norm = j.at("norm").get<std::string>();
  s.beta = get_num(j, "beta");
  s.beta_is_lower_bound = j.at("beta_is_lower_bound").get<bool>();
  s.eta = get_num(j, "eta");
  s.epsilon_m = get_num(j, "epsilon_m");
  s.epsilon_q = get_num(j, "epsilon_q");
  s.epsilon = get_num(j, "epsilon");
  s.mu = get_opt(j, "mu");
  s.m_norm = get_num(j, "m_norm");
  s.q_norm = get_num(j, "q_norm");
  return s;
}

ShiftSection shift_from(const Json& j) {
  ShiftSection s;
  s.bound = bound_from(j.at("bound"));
  s.observed_shift = get_num(j, "observed_shift");
  s.max_lmp_change_usd_per_mwh = get_num(j, "max_lmp_change_usd_per_mwh");
  s.penetration = get_num(j, "penetration");
  s.mu_heuristic = j.at("mu_heuristic").get<bool>();
  s.buses = j.at("buses").get<std::vector<int>>();
  s.nominal_lmp_usd_per_mwh = get_numbers(j, "nominal_lmp_usd_per_mwh");
  s.perturbed_lmp_usd_per_mwh = get_numbers(j, "perturbed_lmp_usd_per_mwh");
  s.wind_deltas = vector_of<SpecEntry>(j.at("wind_deltas"), [](const Json& e) { return spec_entry(e, "delta"); });
  s.curtailments = vector_of<SpecEntry>(j.at("curtailments"), [](const Json& e) { return spec_entry(e, "kappa"); });
  s.nominal_source = j.at("nominal_source").get<std::string>();
  s.perturbed_source = j.at("perturbed_source").get<std::string>();
  return s;
}

SweepSection sweep_from(const Json& j) {
  SweepSection s;
  s.rows = vector_of<SweepLine>(j.at("rows"), [](const Json& r) {
    return SweepLine{get_num(r, "delta"),
                     get_num(r, "kappa"),
                     get_num(r, "penetration"),
                     get_num(r, "beta"),
                     get_num(r, "eta"),
                     get_opt(r, "mu"),
                     get_num(r, "observed_shift"),
                     get_num(r, "max_lmp_change_usd_per_mwh"),
                     get_num(r, "penetration_scale"),
                     r.at("mu_heuristic").get<bool>(),
                     r.at("error").get<std::string>()};
  });
  return s;
}

CertificateSection certificate_from(const Json& j) {
  CertificateSection s;
  s.epsilon_usd_per_h = get_num(j, "epsilon_usd_per_h");
  s.tolerance_usd_per_h = get_num(j, "tolerance_usd_per_h");
  s.is_nash_within = j.at("is_nash_within").get<bool>();
  s.method = j.at("method").get<std::string>();
  s.gaps = vector_of<PlayerValue>(j.at("gaps"), [](const Json& p) { return player_value(p, "gap_usd_per_h"); });
  return s;
}

TwoAlphaSection two_alpha_from(const Json& j) {
  TwoAlphaSection s;
  s.alpha_usd_per_h = get_num(j, "alpha_usd_per_h");
  s.epsilon_usd_per_h = get_num(j, "epsilon_usd_per_h");
  s.own_epsilon_usd_per_h = get_num(j, "own_epsilon_usd_per_h");
  s.tolerance_usd_per_h = get_num(j, "tolerance_usd_per_h");
  s.holds = j.at("holds").get<bool>();
  s.worst_player = j.at("worst_player").get<std::string>();
  s.alpha_exact = j.at("alpha_exact").get<bool>();
  s.note = j.at("note").get<std::string>();
  s.deviations = vector_of<PlayerValue>(
      j.at("deviations"), [](const Json& p) { return player_value(p, "deviation_usd_per_h"); });
  return s;
}

OracleSection oracle_from(const Json& j) {
  OracleSection s;
  s.dimension = j.at("dimension").get<int>();
  s.solutions_found = j.at("solutions_found").get<int>();
  s.feasible_bases = j.at("feasible_bases").get<std::int64_t>();
  s.singular_bases = j.at("singular_bases").get<std::int64_t>();
  s.lemke_status = j.at("lemke_status").get<std::string>();
  s.max_difference = get_num(j, "max_difference");
  s.agrees = j.at("agrees").get<bool>();
  return s;
}

std::string emit_json(const RunReport& r) {
  Json j = Json::object();
  if (r.solution) j["solution"] = to_json(*r.solution);
  if (r.settlement) j["settlement"] = to_json(*r.settlement);
  if (r.matrix_class) j["matrix_class"] = to_json(*r.matrix_class);
  if (r.bound) j["bound"] = to_json(*r.bound);
  if (r.shift) j["shift"] = to_json(*r.shift);
  if (r.sweep) j["sweep"] = to_json(*r.sweep);
  if (r.certificate) j["certificate"] = to_json(*r.certificate);
  if (r.two_alpha) j["two_alpha"] = to_json(*r.two_alpha);
  if (r.oracle) j["oracle"] = to_json(*r.oracle);
  return j.dump(2) + "\n";
}

// --------------------------------------------------------------------- CSV

class CsvTable {
 public:
  explicit CsvTable(const std::vector<std::string>& header) { row(header); }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_text(cells[i]);
    }
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::string opt_cell(const std::optional<double>& v) { return v ? csv_number(*v) : std::string(); }
std::string bool_cell(bool b) { return b ? "true" : "false"; }

std::vector<std::string> csv_tables(const RunReport& r) {
  std::vector<std::string> tables;
  if (r.solution) {
    CsvTable t({"bus", "lmp_usd_per_mwh", "angle_rad"});
    for (const auto& b : r.solution->buses) {
      t.row({std::to_string(b.bus), csv_number(b.lmp_usd_per_mwh), csv_number(b.angle_rad)});
    }
    tables.push_back(t.str());
    CsvTable u({"unit_id", "role", "bus", "quantity_mw"});
    for (const auto& g : r.solution->generators) {
      u.row({g.unit_id, "generator", std::to_string(g.bus), csv_number(g.quantity_mw)});
    }
    for (const auto& d : r.solution->demands) {
      u.row({d.unit_id, "demand", std::to_string(d.bus), csv_number(d.quantity_mw)});
    }
    tables.push_back(u.str());
    CsvTable l({"from_bus", "to_bus", "flow_mw", "capacity_mw"});
    for (const auto& x : r.solution->lines) {
      l.row({std::to_string(x.from_bus), std::to_string(x.to_bus), csv_number(x.flow_mw),
             csv_number(x.capacity_mw)});
    }
    tables.push_back(l.str());
  }
  if (r.settlement) {
    CsvTable t({"unit_id", "bus", "quantity_mw", "price_usd_per_mwh", "revenue_usd_per_h",
                "cost_usd_per_h", "profit_usd_per_h"});
    for (const auto& x : r.settlement->rows) {
      t.row({x.unit_id, std::to_string(x.bus), csv_number(x.quantity_mw),
             csv_number(x.price_usd_per_mwh), opt_cell(x.revenue_usd_per_h),
             csv_number(x.cost_usd_per_h), opt_cell(x.profit_usd_per_h)});
    }
    tables.push_back(t.str());
  }
  if (r.matrix_class) {
    const auto& m = *r.matrix_class;
    std::string witness;
    if (m.witness) {
      for (std::size_t i = 0; i < m.witness->size(); ++i) {
        witness += (i ? " " : "") + std::to_string((*m.witness)[i]);
      }
    }
    CsvTable t({"dimension", "is_p_matrix", "method", "min_minor", "witness", "minors_checked"});
    t.row({std::to_string(m.dimension), bool_cell(m.is_p_matrix), m.method, csv_number(m.min_minor),
           witness, std::to_string(m.minors_checked)});
    tables.push_back(t.str());
  }
  auto bound_row = [](const BoundSection& b) {
    return std::vector<std::string>{b.norm,
                                    csv_number(b.beta),
                                    bool_cell(b.beta_is_lower_bound),
                                    csv_number(b.eta),
                                    csv_number(b.epsilon_m),
                                    csv_number(b.epsilon_q),
                                    csv_number(b.epsilon),
                                    opt_cell(b.mu),
                                    csv_number(b.m_norm),
                                    csv_number(b.q_norm)};
  };
  const std::vector<std::string> bound_header{"norm",      "beta",      "beta_is_lower_bound",
                                              "eta",       "epsilon_m", "epsilon_q",
                                              "epsilon",   "mu",        "m_norm",
                                              "q_norm"};
  if (r.bound) {
    CsvTable t(bound_header);
    t.row(bound_row(*r.bound));
    tables.push_back(t.str());
  }
  if (r.shift) {
    const auto& s = *r.shift;
    auto header = bound_header;
    for (const char* h : {"observed_shift", "max_lmp_change_usd_per_mwh", "penetration", "mu_heuristic"}) {
      header.emplace_back(h);
    }
    CsvTable t(header);
    auto row = bound_row(s.bound);
    row.push_back(csv_number(s.observed_shift));
    row.push_back(csv_number(s.max_lmp_change_usd_per_mwh));
    row.push_back(csv_number(s.penetration));
    row.push_back(bool_cell(s.mu_heuristic));
    t.row(row);
    tables.push_back(t.str());
    CsvTable b({"bus", "nominal_lmp_usd_per_mwh", "perturbed_lmp_usd_per_mwh"});
    for (std::size_t n = 0; n < s.buses.size(); ++n) {
      b.row({std::to_string(s.buses[n]), csv_number(s.nominal_lmp_usd_per_mwh[n]),
             csv_number(s.perturbed_lmp_usd_per_mwh[n])});
    }
    tables.push_back(b.str());
  }
  if (r.sweep) {
    CsvTable t({"delta", "kappa", "penetration", "beta", "eta", "mu", "observed_shift",
                "max_lmp_change", "penetration_scale", "mu_heuristic", "error"});
    for (const auto& x : r.sweep->rows) {
      t.row({csv_number(x.delta), csv_number(x.kappa), csv_number(x.penetration),
             csv_number(x.beta), csv_number(x.eta), opt_cell(x.mu), csv_number(x.observed_shift),
             csv_number(x.max_lmp_change_usd_per_mwh), csv_number(x.penetration_scale),
             bool_cell(x.mu_heuristic), x.error});
    }
    tables.push_back(t.str());
  }
  if (r.certificate) {
    CsvTable t({"player_id", "gap_usd_per_h"});
    for (const auto& p : r.certificate->gaps) t.row({p.player_id, csv_number(p.value_usd_per_h)});
    tables.push_back(t.str());
  }
  if (r.two_alpha) {
    const auto& a = *r.two_alpha;
    CsvTable t({"alpha_usd_per_h", "epsilon_usd_per_h", "own_epsilon_usd_per_h",
                "tolerance_usd_per_h", "holds", "worst_player", "alpha_exact"});
    t.row({csv_number(a.alpha_usd_per_h), csv_number(a.epsilon_usd_per_h),
           csv_number(a.own_epsilon_usd_per_h), csv_number(a.tolerance_usd_per_h), bool_cell(a.holds),
           a.worst_player, bool_cell(a.alpha_exact)});
    tables.push_back(t.str());
    CsvTable d({"player_id", "deviation_usd_per_h"});
    for (const auto& p : a.deviations) d.row({p.player_id, csv_number(p.value_usd_per_h)});
    tables.push_back(d.str());
  }
  if (r.oracle) {
    const auto& o = *r.oracle;
    CsvTable t({"dimension", "solutions_found", "feasible_bases", "singular_bases", "lemke_status",
                "max_difference", "agrees"});
    t.row({std::to_string(o.dimension), std::to_string(o.solutions_found),
           std::to_string(o.feasible_bases), std::to_string(o.singular_bases), o.lemke_status,
           csv_number(o.max_difference), bool_cell(o.agrees)});
    tables.push_back(t.str());
  }
  return tables;
}

// -------------------------------------------------------------------- text

std::string fixed(double v, int digits = 4) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string opt_sci(const std::optional<double>& v) { return v ? sci(*v) : "n/a"; }

void text_bound(std::ostringstream& o, const BoundSection& b) {
  o << "norm                " << b.norm << "\n";
  o << "beta                " << sci(b.beta) << (b.beta_is_lower_bound ? "  (sampled lower bound)" : "")
    << "\n";
  o << "||M||               " << sci(b.m_norm) << "\n";
  o << "||q||               " << sci(b.q_norm) << "\n";
  o << "epsilon_M           " << sci(b.epsilon_m) << "\n";
  o << "epsilon_q           " << sci(b.epsilon_q) << "\n";
  o << "epsilon             " << sci(b.epsilon) << "\n";
  o << "eta                 " << sci(b.eta) << "\n";
  o << "mu                  " << (b.mu ? sci(*b.mu) : "undefined (eta >= 1)") << "\n";
}

std::string emit_text(const RunReport& r) {
  std::ostringstream o;
  auto section = [&](const char* title) {
    if (o.tellp() > 0) o << "\n";
    o << "== " << title << " ==\n";
  };
  char buf[256];
  if (r.solution) {
    const auto& s = *r.solution;
    section("solution");
    o << "case " << s.case_name << ": status " << s.status << ", source " << s.source << ", "
      << s.pivots << " pivots\n";
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& b : s.buses) {
      lo = std::min(lo, b.lmp_usd_per_mwh);
      hi = std::max(hi, b.lmp_usd_per_mwh);
    }
    if (!s.buses.empty() && hi - lo <= 1e-6) {
      o << "uniform LMP " << fixed(hi) << " $/MWh at all " << s.buses.size() << " buses\n";
    } else {
      o << "LMP range " << fixed(lo) << " .. " << fixed(hi) << " $/MWh\n";
    }
    o << "total generation " << fixed(s.total_generation_mw) << " MW, total consumption "
      << fixed(s.total_consumption_mw) << " MW, social welfare " << fixed(s.social_welfare_usd_per_h)
      << " $/h\n";
    o << "\n   bus   LMP $/MWh    angle rad\n";
    for (const auto& b : s.buses) {
      std::snprintf(buf, sizeof buf, "%6d %11.4f %12.6f\n", b.bus, b.lmp_usd_per_mwh, b.angle_rad);
      o << buf;
    }
    o << "\nunit         bus      MW\n";
    for (const auto* rows : {&s.generators, &s.demands}) {
      for (const auto& u : *rows) {
        std::snprintf(buf, sizeof buf, "%-10s %5d %9.4f\n", u.unit_id.c_str(), u.bus, u.quantity_mw);
        o << buf;
      }
    }
    int binding = 0;
    for (const auto& l : s.lines) binding += std::abs(l.flow_mw) >= l.capacity_mw - 1e-6;
    o << "\n" << s.lines.size() << " lines, " << binding << " at capacity\n";
    for (const auto& d : s.diagnostics) o << "note: " << d << "\n";
  }
  if (r.settlement) {
    section("settlement");
    o << "unit         bus        MW    $/MWh   revenue $/h    cost $/h  profit $/h\n";
    for (const auto& x : r.settlement->rows) {
      std::snprintf(buf, sizeof buf, "%-10s %5d %9.4f %8.4f %13s %11s %11s\n", x.unit_id.c_str(),
                    x.bus, x.quantity_mw, x.price_usd_per_mwh,
                    x.revenue_usd_per_h ? fixed(*x.revenue_usd_per_h).c_str() : "n/a",
                    fixed(x.cost_usd_per_h).c_str(),
                    x.profit_usd_per_h ? fixed(*x.profit_usd_per_h).c_str() : "n/a");
      o << buf;
    }
  }
  if (r.matrix_class) {
    const auto& m = *r.matrix_class;
    section("matrix class");
    o << "dimension           " << m.dimension << "\n";
    o << "method              " << m.method << "\n";
    o << "P-matrix            "
      << (m.is_p_matrix ? (m.method == "SampledMinors" ? "not refuted" : "yes") : "no") << "\n";
    o << "min minor           " << sci(m.min_minor) << "\n";
    o << "minors checked      " << m.minors_checked << "\n";
    if (m.witness) {
      o << "witness             {";
      for (std::size_t i = 0; i < m.witness->size(); ++i) o << (i ? ", " : "") << (*m.witness)[i];
      o << "}\n";
    }
  }
  if (r.bound) {
    section("perturbation bound");
    text_bound(o, *r.bound);
  }
  if (r.shift) {
    const auto& s = *r.shift;
    section("equilibrium shift");
    text_bound(o, s.bound);
    o << "observed shift      " << sci(s.observed_shift) << "\n";
    o << "max LMP change      " << fixed(s.max_lmp_change_usd_per_mwh) << " $/MWh\n";
    o << "wind penetration    " << fixed(s.penetration) << "\n";
    if (s.mu_heuristic) o << "mu is heuristic: beta is a sampled lower bound\n";
    o << "solved by           " << s.nominal_source << " / " << s.perturbed_source << "\n";
  }
  if (r.sweep) {
    section("sweep");
    o << "   delta   kappa  penetr        beta         eta          mu    observed\n";
    for (const auto& x : r.sweep->rows) {
      std::snprintf(buf, sizeof buf, "%8.4f %7.4f %7.4f %11s %11s %11s %11s%s\n", x.delta, x.kappa,
                    x.penetration, sci(x.beta).c_str(), sci(x.eta).c_str(), opt_sci(x.mu).c_str(),
                    sci(x.observed_shift).c_str(), x.error.empty() ? "" : ("  " + x.error).c_str());
      o << buf;
    }
  }
  if (r.certificate) {
    const auto& c = *r.certificate;
    section("equilibrium certificate");
    o << "epsilon " << sci(c.epsilon_usd_per_h) << " $/h, tolerance " << sci(c.tolerance_usd_per_h)
      << " $/h: " << (c.is_nash_within ? "Nash within tolerance" : "NOT an equilibrium") << "\n";
    for (const auto& p : c.gaps) o << "  " << p.player_id << "  gap " << sci(p.value_usd_per_h) << "\n";
  }
  if (r.two_alpha) {
    const auto& a = *r.two_alpha;
    section("two-alpha check");
    o << "alpha " << sci(a.alpha_usd_per_h) << " $/h" << (a.alpha_exact ? "" : " (lower bound)")
      << ", epsilon in nominal game " << sci(a.epsilon_usd_per_h) << " $/h, own epsilon "
      << sci(a.own_epsilon_usd_per_h) << " $/h\n";
    o << (a.holds ? "holds" : "VIOLATED") << ": epsilon <= 2 alpha + " << sci(a.tolerance_usd_per_h);
    if (!a.worst_player.empty()) o << " (largest gap: " << a.worst_player << ")";
    o << "\n";
    if (!a.note.empty()) o << "note: " << a.note << "\n";
  }
  if (r.oracle) {
    const auto& x = *r.oracle;
    section("oracle");
    o << "dimension " << x.dimension << ", " << x.solutions_found << " solution(s), "
      << x.feasible_bases << " feasible and " << x.singular_bases << " singular bases\n";
    o << "Lemke " << x.lemke_status << ", max difference " << sci(x.max_difference) << ": "
      << (x.agrees ? "agrees" : "DISAGREES") << "\n";
  }
  return o.str();
}

}  // namespace

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string emit_report(const RunReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json:
      return report.empty() ? std::string("{}\n") : emit_json(report);
    case ReportFormat::Csv: {
      std::string out;
      for (const auto& t : csv_tables(report)) {
        if (!out.empty()) out += '\n';
        out += t;
      }
      return out;
    }
    case ReportFormat::Text:
      return emit_text(report);
  }
  return {};
}

RunReport parse_report_json(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, "report must be a JSON object");
    RunReport r;
    if (j.contains("solution")) r.solution = solution_from(j.at("solution"));
    if (j.contains("settlement")) r.settlement = settlement_from(j.at("settlement"));
    if (j.contains("matrix_class")) r.matrix_class = matrix_class_from(j.at("matrix_class"));
    if (j.contains("bound")) r.bound = bound_from(j.at("bound"));
    if (j.contains("shift")) r.shift = shift_from(j.at("shift"));
    if (j.contains("sweep")) r.sweep = sweep_from(j.at("sweep"));
    if (j.contains("certificate")) r.certificate = certificate_from(j.at("certificate"));
    if (j.contains("two_alpha")) r.two_alpha = two_alpha_from(j.at("two_alpha"));
    if (j.contains("oracle")) r.oracle = oracle_from(j.at("oracle"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("report JSON: ") + e.what());
  }
}

}  // namespace marketlcp

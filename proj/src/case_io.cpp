#include "marketlcp/case_io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "marketlcp/error.hpp"

namespace marketlcp {

using Json = nlohmann::ordered_json;

namespace {

class Reader {
 public:
  Reader(const ParseOptions& opts, std::vector<std::string>& warnings)
      : opts_(opts), warnings_(warnings) {}

  [[noreturn]] void schema(const std::string& path, const std::string& msg) const {
    throw Error(ErrorCode::SchemaError, path + ": " + msg);
  }

  const Json& object(const Json& j, const std::string& path,
                     std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) schema(path, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, unused] : j.items()) {
      if (ok.count(key)) continue;
      if (opts_.strict) schema(path + "." + key, "unknown field");
      warnings_.push_back("ignored unknown field " + path + "." + key);
    }
    return j;
  }

  const Json& array(const Json& j, const std::string& key, const std::string& path) const {
    if (!j.contains(key)) schema(path + "." + key, "missing");
    const Json& a = j.at(key);
    if (!a.is_array()) schema(path + "." + key, "expected an array");
    return a;
  }

  double number(const Json& j, const std::string& key, const std::string& path) const {
    if (!j.contains(key)) schema(path + "." + key, "missing");
    const Json& v = j.at(key);
    if (!v.is_number()) schema(path + "." + key, "expected a number");
    return v.get<double>();
  }

  std::optional<double> opt_number(const Json& j, const std::string& key,
                                   const std::string& path) const {
    if (!j.contains(key)) return std::nullopt;
    return number(j, key, path);
  }

  int integer(const Json& j, const std::string& key, const std::string& path) const {
    if (!j.contains(key)) schema(path + "." + key, "missing");
    const Json& v = j.at(key);
    if (!v.is_number_integer()) schema(path + "." + key, "expected an integer");
    return v.get<int>();
  }

  std::string string(const Json& j, const std::string& key, const std::string& path) const {
    if (!j.contains(key)) schema(path + "." + key, "missing");
    const Json& v = j.at(key);
    if (!v.is_string()) schema(path + "." + key, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const Json& j, const std::string& key, const std::string& path, bool fallback) const {
    if (!j.contains(key)) return fallback;
    const Json& v = j.at(key);
    if (!v.is_boolean()) schema(path + "." + key, "expected true or false");
    return v.get<bool>();
  }

 private:
  const ParseOptions& opts_;
  std::vector<std::string>& warnings_;
};

std::string at(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

std::vector<Block> read_blocks(const Reader& rd, const Json& unit, const std::string& path) {
  std::vector<Block> out;
  const Json& arr = rd.array(unit, "blocks", path);
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const std::string p = at(path + ".blocks", k);
    const Json& b = rd.object(arr[k], p, {"size_mw", "price_per_mwh", "block_cost_per_h", "bid_per_mwh"});
    Block blk;
    blk.size_mw = rd.number(b, "size_mw", p);
    const auto price = rd.opt_number(b, "price_per_mwh", p);
    const auto cost = rd.opt_number(b, "block_cost_per_h", p);
    if (price.has_value() == cost.has_value()) {
      rd.schema(p, "give exactly one of price_per_mwh and block_cost_per_h");
    }
    if (price) {
      blk.price_per_mwh = *price;
    } else {
      if (!(blk.size_mw > 0.0)) rd.schema(p, "block_cost_per_h needs a positive size_mw");
      blk.price_per_mwh = *cost / blk.size_mw;
    }
    blk.bid_per_mwh = rd.opt_number(b, "bid_per_mwh", p);
    out.push_back(blk);
  }
  return out;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

int find_generator(const MarketCase& c, const std::string& id) {
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    if (c.generators[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int find_demand(const MarketCase& c, const std::string& id) {
  for (std::size_t j = 0; j < c.demands.size(); ++j) {
    if (c.demands[j].id == id) return static_cast<int>(j);
  }
  return -1;
}

CaseFile parse_case_text(const std::string& text, const ParseOptions& opts) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw Error(ErrorCode::SchemaError, "malformed JSON at line " + std::to_string(line) +
                                            ", column " + std::to_string(col));
  }

  CaseFile file;
  const Reader rd(opts, file.warnings);
  rd.object(root, "$",
            {"schema_version", "metadata", "network", "generators", "demands", "fixed_loads",
             "perturbation"});
  if (!root.contains("schema_version") || !root.at("schema_version").is_number_integer()) {
    throw Error(ErrorCode::VersionError, "schema_version is missing or not an integer");
  }
  if (root.at("schema_version").get<int>() != kSchemaVersion) {
    throw Error(ErrorCode::VersionError,
                "unsupported schema_version " + root.at("schema_version").dump() +
                    ", expected " + std::to_string(kSchemaVersion));
  }

  auto& mc = file.market;
  if (root.contains("metadata")) {
    const Json& meta = rd.object(root.at("metadata"), "$.metadata", {"name", "source", "notes"});
    if (meta.contains("name")) mc.name = rd.string(meta, "name", "$.metadata");
    if (meta.contains("source")) file.source = rd.string(meta, "source", "$.metadata");
    if (meta.contains("notes")) {
      const Json& notes = rd.array(meta, "notes", "$.metadata");
      for (std::size_t i = 0; i < notes.size(); ++i) {
        if (!notes[i].is_string()) rd.schema(at("$.metadata.notes", i), "expected a string");
        file.notes.push_back(notes[i].get<std::string>());
      }
    }
  }

  if (!root.contains("network")) rd.schema("$.network", "missing");
  const Json& net = rd.object(root.at("network"), "$.network", {"mva_base", "buses", "lines"});
  mc.network.mva_base = rd.opt_number(net, "mva_base", "$.network").value_or(100.0);
  std::map<int, int> bus_index;
  const Json& buses = rd.array(net, "buses", "$.network");
  for (std::size_t n = 0; n < buses.size(); ++n) {
    const std::string p = at("$.network.buses", n);
    const Json& b = rd.object(buses[n], p, {"id", "reference"});
    Bus bus;
    bus.number = rd.integer(b, "id", p);
    bus.reference = rd.boolean(b, "reference", p, false);
    if (!bus_index.emplace(bus.number, static_cast<int>(n)).second) {
      throw Error(ErrorCode::ValidationError, p + ": duplicate bus id " + std::to_string(bus.number));
    }
    mc.network.buses.push_back(bus);
  }
  auto bus_of = [&](const Json& j, const std::string& key, const std::string& p) {
    const int id = rd.integer(j, key, p);
    const auto it = bus_index.find(id);
    if (it == bus_index.end()) {
      throw Error(ErrorCode::ValidationError, p + "." + key + ": unknown bus " + std::to_string(id));
    }
    return it->second;
  };
  const Json& lines = rd.array(net, "lines", "$.network");
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const std::string p = at("$.network.lines", l);
    const Json& j = rd.object(lines[l], p, {"from", "to", "reactance_pu", "capacity_mw"});
    Line line;
    line.from = bus_of(j, "from", p);
    line.to = bus_of(j, "to", p);
    line.reactance_pu = rd.number(j, "reactance_pu", p);
    line.capacity_mw = rd.opt_number(j, "capacity_mw", p).value_or(100.0);
    mc.network.lines.push_back(line);
  }

  const Json& gens = rd.array(root, "generators", "$");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string p = at("$.generators", i);
    const Json& j = rd.object(gens[i], p, {"id", "bus", "kind", "unit_capacity_mw", "blocks", "wind"});
    GeneratorUnit g;
    g.id = rd.string(j, "id", p);
    g.bus = bus_of(j, "bus", p);
    g.blocks = read_blocks(rd, j, p);
    g.unit_capacity_mw = rd.opt_number(j, "unit_capacity_mw", p).value_or(g.block_sum());
    const std::string kind = j.contains("kind") ? rd.string(j, "kind", p) : "conventional";
    if (kind == "wind") {
      g.kind = UnitKind::Wind;
    } else if (kind != "conventional") {
      rd.schema(p + ".kind", "expected \"conventional\" or \"wind\"");
    }
    if (j.contains("wind")) {
      if (g.kind != UnitKind::Wind) rd.schema(p + ".wind", "only allowed when kind is \"wind\"");
      const std::string wp = p + ".wind";
      const Json& w = rd.object(j.at("wind"), wp, {"mean_power_mw", "reserve_cost_b", "reserve_cost_c"});
      if (w.contains("mean_power_mw")) {
        const Json& mp = rd.array(w, "mean_power_mw", wp);
        for (std::size_t k = 0; k < mp.size(); ++k) {
          if (!mp[k].is_number()) rd.schema(at(wp + ".mean_power_mw", k), "expected a number");
          g.mean_power_mw.push_back(mp[k].get<double>());
        }
      }
      g.reserve_cost_b = rd.opt_number(w, "reserve_cost_b", wp).value_or(g.reserve_cost_b);
      g.reserve_cost_c = rd.opt_number(w, "reserve_cost_c", wp).value_or(g.reserve_cost_c);
    }
    if (g.kind == UnitKind::Wind && g.mean_power_mw.empty()) {
      for (const auto& b : g.blocks) g.mean_power_mw.push_back(b.size_mw);
    }
    mc.generators.push_back(std::move(g));
  }

  if (root.contains("demands")) {
    const Json& dems = rd.array(root, "demands", "$");
    for (std::size_t j = 0; j < dems.size(); ++j) {
      const std::string p = at("$.demands", j);
      const Json& o = rd.object(dems[j], p, {"id", "bus", "min_demand_mw", "blocks", "dispatchable"});
      DemandUnit d;
      d.id = rd.string(o, "id", p);
      d.bus = bus_of(o, "bus", p);
      d.blocks = read_blocks(rd, o, p);
      d.min_demand_mw = rd.opt_number(o, "min_demand_mw", p).value_or(0.0);
      d.dispatchable = rd.boolean(o, "dispatchable", p, true);
      mc.demands.push_back(std::move(d));
    }
  }
  if (root.contains("fixed_loads")) {
    const Json& fixed = rd.array(root, "fixed_loads", "$");
    for (std::size_t j = 0; j < fixed.size(); ++j) {
      const std::string p = at("$.fixed_loads", j);
      const Json& o = rd.object(fixed[j], p, {"id", "bus", "demand_mw"});
      mc.demands.push_back(
          make_fixed_load(rd.string(o, "id", p), bus_of(o, "bus", p), rd.number(o, "demand_mw", p)));
    }
  }

  const auto report = validate_case(mc, opts.strict);
  file.warnings.insert(file.warnings.end(), report.warnings.begin(), report.warnings.end());

  if (root.contains("perturbation")) {
    const Json& pj = rd.object(root.at("perturbation"), "$.perturbation", {"wind_deltas", "curtailments"});
    PerturbationSpec spec;
    auto entries = [&](const char* key, const char* value, bool wind) {
      if (!pj.contains(key)) return;
      const std::string base = std::string("$.perturbation.") + key;
      const Json& arr = rd.array(pj, key, "$.perturbation");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = at(base, i);
        const Json& e = rd.object(arr[i], p, {"unit", value, "block"});
        const std::string id = rd.string(e, "unit", p);
        const double v = rd.number(e, value, p);
        if (!(v > 0.0 && v < 1.0)) {
          throw Error(ErrorCode::ValidationError,
                      p + "." + value + " must lie in (0, 1)" +
                          (wind && v < 0.0 ? "; underestimation is not modeled" : ""));
        }
        const int unit = wind ? find_generator(mc, id) : find_demand(mc, id);
        if (unit < 0) throw Error(ErrorCode::ValidationError, p + ": unknown unit " + id);
        if (e.contains("block")) {
          const int block = rd.integer(e, "block", p);
          PerturbationSpec probe;
          if (wind) {
            set_wind_delta(probe, mc, unit, v);
            if (!probe.wind_deltas.count({unit, block})) {
              throw Error(ErrorCode::ValidationError, p + ": no block " + std::to_string(block));
            }
            spec.wind_deltas[{unit, block}] = v;
          } else {
            set_curtailment(probe, mc, unit, v);
            if (!probe.curtailments.count({unit, block})) {
              throw Error(ErrorCode::ValidationError, p + ": no block " + std::to_string(block));
            }
            spec.curtailments[{unit, block}] = v;
          }
        } else if (wind) {
          set_wind_delta(spec, mc, unit, v);
        } else {
          set_curtailment(spec, mc, unit, v);
        }
      }
    };
    entries("wind_deltas", "delta", true);
    entries("curtailments", "kappa", false);
    file.perturbation = std::move(spec);
  }
  return file;
}

CaseFile parse_case_file(const std::filesystem::path& path, const ParseOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ValidationError, "cannot read case file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_case_text(ss.str(), opts);
}

namespace {

Json blocks_json(const std::vector<Block>& blocks) {
  Json arr = Json::array();
  for (const auto& b : blocks) {
    Json o;
    o["size_mw"] = b.size_mw;
    o["price_per_mwh"] = b.price_per_mwh;
    if (b.bid_per_mwh) o["bid_per_mwh"] = *b.bid_per_mwh;
    arr.push_back(std::move(o));
  }
  return arr;
}

bool canonical_fixed(const DemandUnit& d) {
  return !d.dispatchable && d.blocks.size() == 1 && !d.blocks[0].bid_per_mwh &&
         d.blocks[0].price_per_mwh == kFixedLoadUtility && d.min_demand_mw == d.blocks[0].size_mw;
}

}  // namespace

std::string emit_case(const CaseFile& file) {
  const auto& mc = file.market;
  auto bus_number = [&](int index) { return mc.network.buses[static_cast<std::size_t>(index)].number; };

  Json root;
  root["schema_version"] = kSchemaVersion;
  Json meta;
  meta["name"] = mc.name;
  if (!file.source.empty()) meta["source"] = file.source;
  if (!file.notes.empty()) meta["notes"] = file.notes;
  root["metadata"] = std::move(meta);

  Json net;
  net["mva_base"] = mc.network.mva_base;
  net["buses"] = Json::array();
  for (const auto& b : mc.network.buses) {
    Json o;
    o["id"] = b.number;
    if (b.reference) o["reference"] = true;
    net["buses"].push_back(std::move(o));
  }
  net["lines"] = Json::array();
  for (const auto& l : mc.network.lines) {
    Json o;
    o["from"] = bus_number(l.from);
    o["to"] = bus_number(l.to);
    o["reactance_pu"] = l.reactance_pu;
    o["capacity_mw"] = l.capacity_mw;
    net["lines"].push_back(std::move(o));
  }
  root["network"] = std::move(net);

  root["generators"] = Json::array();
  for (const auto& g : mc.generators) {
    Json o;
    o["id"] = g.id;
    o["bus"] = bus_number(g.bus);
    o["kind"] = g.kind == UnitKind::Wind ? "wind" : "conventional";
    o["unit_capacity_mw"] = g.unit_capacity_mw;
    o["blocks"] = blocks_json(g.blocks);
    if (g.kind == UnitKind::Wind) {
      Json w;
      w["mean_power_mw"] = g.mean_power_mw;
      w["reserve_cost_b"] = g.reserve_cost_b;
      w["reserve_cost_c"] = g.reserve_cost_c;
      o["wind"] = std::move(w);
    }
    root["generators"].push_back(std::move(o));
  }

  // Fixed loads go to their own section only as a trailing run, so parsing
  // the output reproduces the demand order.
  std::size_t first_fixed = mc.demands.size();
  while (first_fixed > 0 && canonical_fixed(mc.demands[first_fixed - 1])) --first_fixed;
  root["demands"] = Json::array();
  root["fixed_loads"] = Json::array();
  for (std::size_t j = 0; j < mc.demands.size(); ++j) {
    const auto& d = mc.demands[j];
    Json o;
    o["id"] = d.id;
    o["bus"] = bus_number(d.bus);
    if (j >= first_fixed) {
      o["demand_mw"] = d.blocks[0].size_mw;
      root["fixed_loads"].push_back(std::move(o));
      continue;
    }
    o["min_demand_mw"] = d.min_demand_mw;
    if (!d.dispatchable) o["dispatchable"] = false;
    o["blocks"] = blocks_json(d.blocks);
    root["demands"].push_back(std::move(o));
  }

  if (file.perturbation) {
    Json p;
    p["wind_deltas"] = Json::array();
    for (const auto& [key, v] : file.perturbation->wind_deltas) {
      p["wind_deltas"].push_back(
          Json{{"unit", mc.generators[static_cast<std::size_t>(key.first)].id}, {"block", key.second}, {"delta", v}});
    }
    p["curtailments"] = Json::array();
    for (const auto& [key, v] : file.perturbation->curtailments) {
      p["curtailments"].push_back(
          Json{{"unit", mc.demands[static_cast<std::size_t>(key.first)].id}, {"block", key.second}, {"kappa", v}});
    }
    root["perturbation"] = std::move(p);
  }
  return root.dump(2) + "\n";
}

std::filesystem::path bundled_case(const std::string& name) {
  return std::filesystem::path(MARKETLCP_DATA_DIR) / name;
}

}  // namespace marketlcp

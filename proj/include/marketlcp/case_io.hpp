#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "marketlcp/market.hpp"
#include "marketlcp/perturbation.hpp"

namespace marketlcp {

inline constexpr int kSchemaVersion = 1;

struct CaseFile {
  MarketCase market;
  std::optional<PerturbationSpec> perturbation;
  std::string source;               // metadata.source
  std::vector<std::string> notes;   // metadata.notes
  std::vector<std::string> warnings;  // produced while parsing, not serialized
};

struct ParseOptions {
  bool strict = false;  // unknown fields and non-rational stacks become errors
};

// SchemaError carries line and column for malformed JSON and the JSON path
// for type errors; ValidationError names the violated constraint.
CaseFile parse_case_text(const std::string& text, const ParseOptions& opts = {});
CaseFile parse_case_file(const std::filesystem::path& path, const ParseOptions& opts = {});

// Canonical JSON: dispatchable demands in "demands", single-block loads with
// min = max at the fixed-load utility in "fixed_loads".
std::string emit_case(const CaseFile& file);

int find_generator(const MarketCase& c, const std::string& id);
int find_demand(const MarketCase& c, const std::string& id);

// Path of a bundled case under the data directory.
std::filesystem::path bundled_case(const std::string& name);

}  // namespace marketlcp

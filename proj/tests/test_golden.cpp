#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "marketlcp/cli.hpp"

namespace {

// Numbers may differ in the last bits across compilers; everything else must
// match exactly. Regenerate with tools/regen_golden.sh after reviewing a diff.
constexpr double kRelTol = 1e-9;

std::string read(const std::string& name) {
  std::ifstream in(std::string(MARKETLCP_GOLDEN_DIR) + "/" + name);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string run(std::vector<std::string> args) {
  args.insert(args.begin(), "marketlcp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  EXPECT_EQ(marketlcp::run_cli(static_cast<int>(argv.size()), argv.data(), out, err), 0)
      << err.str();
  return out.str();
}

bool close(double a, double b) {
  return std::abs(a - b) <= kRelTol * std::max({1.0, std::abs(a), std::abs(b)});
}

void compare(const nlohmann::json& want, const nlohmann::json& got, const std::string& path) {
  if (want.is_number() && got.is_number()) {
    EXPECT_TRUE(close(want.get<double>(), got.get<double>()))
        << path << ": " << want << " vs " << got;
    return;
  }
  ASSERT_EQ(want.type(), got.type()) << path;
  if (want.is_object()) {
    ASSERT_EQ(want.size(), got.size()) << path;
    for (auto it = want.begin(); it != want.end(); ++it) {
      ASSERT_TRUE(got.contains(it.key())) << path << "." << it.key();
      compare(it.value(), got.at(it.key()), path + "." + it.key());
    }
  } else if (want.is_array()) {
    ASSERT_EQ(want.size(), got.size()) << path;
    for (std::size_t i = 0; i < want.size(); ++i) {
      compare(want[i], got[i], path + "[" + std::to_string(i) + "]");
    }
  } else {
    EXPECT_EQ(want, got) << path;
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string part; std::getline(in, part, sep);) out.push_back(part);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

bool numeric(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

}  // namespace

TEST(Golden, Ieee30SolveJson) {
  const auto want = nlohmann::json::parse(read("ieee30_solve.json"));
  const auto got = nlohmann::json::parse(run({"solve", "--case", "ieee30.json", "--format", "json"}));
  compare(want, got, "$");
}

TEST(Golden, Ieee30SettleCsv) {
  const auto want = split(read("ieee30_settle.csv"), '\n');
  const auto got = split(run({"settle", "--case", "ieee30.json", "--format", "csv"}), '\n');
  ASSERT_EQ(want.size(), got.size());
  for (std::size_t r = 0; r < want.size(); ++r) {
    const auto a = split(want[r], ',');
    const auto b = split(got[r], ',');
    ASSERT_EQ(a.size(), b.size()) << "row " << r;
    for (std::size_t c = 0; c < a.size(); ++c) {
      double x = 0, y = 0;
      if (numeric(a[c], x) && numeric(b[c], y)) {
        EXPECT_TRUE(close(x, y)) << "row " << r << " col " << c << ": " << a[c] << " vs " << b[c];
      } else {
        EXPECT_EQ(a[c], b[c]) << "row " << r << " col " << c;
      }
    }
  }
}

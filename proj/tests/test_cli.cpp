#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "marketlcp/case_io.hpp"
#include "marketlcp/cli.hpp"
#include "marketlcp/report.hpp"

using namespace marketlcp;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "marketlcp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

int count_lines(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Cli, SolvePrintsUniformPrice) {
  const auto r = cli({"solve", "--case", "ieee30.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("uniform LMP 23.622"), std::string::npos) << r.out;
}

TEST(Cli, SolveJsonParsesBack) {
  const auto r = cli({"solve", "--case", "tiny2bus.json", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = parse_report_json(r.out);
  ASSERT_TRUE(rep.solution.has_value());
  EXPECT_EQ(rep.solution->buses.size(), 2u);
}

TEST(Cli, SweepGridSize) {
  const auto r =
      cli({"sweep", "--case", "ieee30.json", "--wind-delta", "0.1,0.2", "--kappa", "0.0,0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 1 + 4) << r.out;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')),
            "delta,kappa,penetration,beta,eta,mu,observed_shift,max_lmp_change,"
            "penetration_scale,mu_heuristic,error");
}

TEST(Cli, PmatrixUsesExactMinorsOnSmallCase) {
  const auto r = cli({"pmatrix", "--case", "tiny2bus.json", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = parse_report_json(r.out);
  ASSERT_TRUE(rep.matrix_class.has_value());
  EXPECT_EQ(rep.matrix_class->method, "ExactMinors");
  EXPECT_FALSE(rep.matrix_class->is_p_matrix);
}

TEST(Cli, VerifyNashAndTwoAlpha) {
  EXPECT_EQ(cli({"verify-nash", "--case", "ieee30.json"}).code, 0);
  EXPECT_EQ(cli({"check-2alpha", "--case", "ieee30.json", "--kappa", "0.2"}).code, 0);
  EXPECT_EQ(cli({"check-2alpha", "--case", "ieee30.json", "--wind-delta", "0.2"}).code, 0);
}

TEST(Cli, BoundAndPerturb) {
  const auto b = cli({"bound", "--case", "tiny2bus.json", "--wind-delta", "0.3", "--format", "json"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_TRUE(parse_report_json(b.out).bound.has_value());
  const auto p = cli({"perturb", "--case", "tiny2bus.json", "--wind-delta", "0.3", "--format", "json"});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_TRUE(parse_report_json(p.out).shift.has_value());
}

TEST(Cli, OracleAgreesOnOneBus) {
  const auto r = cli({"oracle", "--case", "onebus.json", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(parse_report_json(r.out).oracle->agrees);
}

TEST(Cli, OracleOnRawLcp) {
  const auto path = temp_file("marketlcp_cli_lcp.json", R"({"m": [[2, 1], [1, 2]], "q": [-1, -1]})");
  const auto r = cli({"oracle", "--lcp", path.string(), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = parse_report_json(r.out);
  EXPECT_EQ(rep.oracle->solutions_found, 1);
  EXPECT_EQ(rep.oracle->dimension, 2);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"solve", "--case", "does-not-exist.json"}).code, 1);
  const auto bad = temp_file("marketlcp_cli_bad.json", "{\"schema_version\": 1,");
  const auto r = cli({"solve", "--case", bad.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"solve", "--case", "ieee30.json", "--format", "xml"}).code, 1);
  EXPECT_EQ(cli({"perturb", "--case", "ieee30.json", "--wind-delta", "1.5"}).code, 1);
}

TEST(Cli, OutFlagWritesFile) {
  const auto path = std::filesystem::temp_directory_path() / "marketlcp_cli_out.csv";
  std::filesystem::remove(path);
  const auto r = cli({"settle", "--case", "onebus.json", "--format", "csv", "--out", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_NE(text.str().find("\nunit_id,bus,quantity_mw,price_usd_per_mwh,"), std::string::npos);
}

TEST(Cli, DeterministicOutput) {
  const std::vector<std::string> args = {"sweep", "--case", "ieee30.json", "--wind-delta",
                                         "0.1,0.3", "--penetration-scale", "1,2", "--seed", "7"};
  EXPECT_EQ(cli(args).out, cli(args).out);
  const std::vector<std::string> solve = {"solve", "--case", "ieee30.json", "--format", "json"};
  EXPECT_EQ(cli(solve).out, cli(solve).out);
}

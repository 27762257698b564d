#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "schottky/cli.hpp"

using namespace schottky;
namespace fs = std::filesystem;

namespace {

const std::string configs = SCHOTTKY_CONFIG_DIR;

json read_json(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = fs::temp_directory_path() / ("schottky_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "schottky");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json s_star() { return read_json(configs + "/s_star.json"); }

}  // namespace

TEST(Config, DefaultsFromMinimalDocument) {
  const json j = {{"surface", s_star()["surface"]}};
  const RunConfig c = config_from_json(j);
  EXPECT_EQ(c.N, 2);
  EXPECT_EQ(c.surface.genus(), 2);
  EXPECT_EQ(c.tol("rank.gap"), 1e6);
  EXPECT_EQ(c.rank_cases.size(), 2u);
  EXPECT_THROW((void)c.tol("no.such"), ConfigError);
}

TEST(Config, RejectsBadDocuments) {
  json j = s_star();
  j["unknown"] = 1;
  EXPECT_THROW((void)config_from_json(j), ConfigError);
  j = s_star();
  j["surface"]["genus"] = 3;
  EXPECT_THROW((void)config_from_json(j), ConfigError);
  j = s_star();
  j["tolerances"] = {{"rank.gap", -1.0}};
  EXPECT_THROW((void)config_from_json(j), ConfigError);
  j = s_star();
  j["tolerances"] = {{"not.a.tolerance", 1.0}};
  EXPECT_THROW((void)config_from_json(j), ConfigError);
  j = s_star();
  j["punctured"]["words"] = {{1, 5}};
  EXPECT_THROW((void)config_from_json(j), ConfigError);
  j = s_star();
  j.erase("surface");
  EXPECT_THROW((void)config_from_json(j), ConfigError);
}

TEST(Config, EchoRoundTrips) {
  const RunConfig c = load_config(configs + "/s_star.json");
  const json echo = config_to_json(c);
  const RunConfig d = config_from_json(echo);
  EXPECT_EQ(config_to_json(d), echo);
  EXPECT_TRUE(same_surface(c.surface, d.surface));
  EXPECT_EQ(d.rank_cases.size(), c.rank_cases.size());
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"s_star.json", "single_handle.json", "genus_three.json"})
    EXPECT_NO_THROW((void)load_config(configs + "/" + name)) << name;
}

TEST(Parsing, NumbersAndGrids) {
  EXPECT_EQ(cli::parse_complex("0.5,-1", "x"), cplx(0.5, -1.0));
  EXPECT_EQ(cli::parse_complex("0.5", "x"), cplx(0.5, 0.0));
  EXPECT_THROW((void)cli::parse_complex("1,2,3", "x"), ConfigError);
  EXPECT_THROW((void)cli::parse_complex("a,b", "x"), ConfigError);
  EXPECT_THROW((void)cli::parse_grid("0,1,2,0,1"), ConfigError);
}

TEST(Cli, ExitCodes) {
  const std::string cfg = configs + "/s_star.json";
  auto r = run_cli({"--config", cfg, "validate"});
  EXPECT_EQ(r.code, cli::exit_ok) << r.err;
  EXPECT_NE(r.out.find("\"valid\": true"), std::string::npos);

  EXPECT_EQ(run_cli({"--config", cfg}).code, cli::exit_config);
  EXPECT_EQ(run_cli({"--config", cfg, "check", "--suite", "nope"}).code, cli::exit_config);
  EXPECT_EQ(run_cli({"--config", "/nonexistent.json", "validate"}).code, cli::exit_config);
  EXPECT_EQ(run_cli({"--config", write_temp("bad.json", "{ not json"), "validate"}).code, cli::exit_config);

  r = run_cli({"--config", cfg, "--workers", "2", "check", "--suite", "cocycle"});
  EXPECT_EQ(r.code, cli::exit_ok) << r.out << r.err;
}

TEST(Cli, FailingCheckExitsOne) {
  json j = s_star();
  j["tolerances"] = {{"cocycle.law", 1e-30}};
  const auto path = write_temp("tight.json", j.dump());
  const auto r = run_cli({"--config", path, "--workers", "1", "check", "--suite", "cocycle"});
  EXPECT_EQ(r.code, cli::exit_fail);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, OverlappingDiscsAreInvalid) {
  json j = s_star();
  j["surface"]["handles"][1]["w_plus"] = {-5.9, 0.0};
  const auto path = write_temp("overlap.json", j.dump());
  const auto r = run_cli({"--config", path, "validate"});
  EXPECT_EQ(r.code, cli::exit_fail);
  EXPECT_NE(r.out.find("\"valid\": false"), std::string::npos);
}

TEST(Cli, EnumerateAndEval) {
  const std::string cfg = configs + "/s_star.json";
  const auto json_path = (fs::temp_directory_path() / "schottky_test_enum.json").string();
  auto r = run_cli({"--config", cfg, "--json", json_path, "--max-len", "2", "enumerate"});
  ASSERT_EQ(r.code, cli::exit_ok) << r.err;
  const json e = read_json(json_path);
  EXPECT_EQ(e["count"], 17);
  EXPECT_EQ(e["shells"], json::array({1, 4, 12}));

  const auto csv = (fs::temp_directory_path() / "schottky_test_eval.csv").string();
  r = run_cli({"--config", cfg, "--max-len", "4", "eval", "--what", "bers", "--grid", "-1,1,3,-1,1,2", "--y",
               "0.3,0.4", "--out", csv});
  ASSERT_EQ(r.code, cli::exit_ok) << r.err;
  std::ifstream in(csv);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 1 + 6);
  EXPECT_EQ(run_cli({"--config", cfg, "eval", "--what", "nope", "--grid", "-1,1,3,-1,1,2"}).code, cli::exit_config);
}

TEST(Report, StripRunFields) {
  json j = {{"wall_time_s", 1.0}, {"workers", 3}, {"a", {{"wall_time_s", 2.0}, {"b", 1}}}};
  const json s = strip_run_fields(j);
  EXPECT_EQ(s, (json{{"a", {{"b", 1}}}}));
}

TEST(Report, DeterministicAcrossWorkers) {
  RunConfig c = load_config(configs + "/s_star.json");
  c.series.L = 6;
  const std::vector<std::string> names{"validity", "cocycle", "period"};
  set_workers(1);
  const json a = strip_run_fields(run_suites(c, names, nullptr).to_json());
  set_workers(3);
  const json b = strip_run_fields(run_suites(c, names, nullptr).to_json());
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Report, SkipsSuitesBelowTheirGenus) {
  const RunConfig c = load_config(configs + "/single_handle.json");
  Context ctx(c);
  const auto rep = run_suite(ctx, "residue");
  EXPECT_FALSE(rep.executed());
  EXPECT_TRUE(rep.pass());
  EXPECT_THROW((void)run_suite(ctx, "nope"), ConfigError);
}

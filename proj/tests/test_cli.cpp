#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace {

struct CliRun {
  int status = -1;
  std::string out;
};

std::string cli() {
  if (const char* p = std::getenv("HSPLINE_CLI"); p && *p) return p;
#ifdef HSPLINE_CLI_PATH
  return HSPLINE_CLI_PATH;
#else
  return "hspline";
#endif
}

CliRun run(const std::string& args) {
  CliRun r;
  const std::string cmd = cli() + " " + args + " 2>/dev/null";
  FILE* f = ::popen(cmd.c_str(), "r");
  if (!f) return r;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), f)) > 0) r.out.append(buf.data(), n);
  const int st = ::pclose(f);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

nlohmann::json run_json(const std::string& args, int expect_status = 0) {
  const CliRun r = run(args + " --format json");
  EXPECT_EQ(r.status, expect_status) << args << "\n" << r.out;
  return nlohmann::json::parse(r.out);
}

const nlohmann::json& check(const nlohmann::json& j, const std::string& name) {
  for (const auto& c : j.at("checks"))
    if (c.at("name") == name) return c;
  static const nlohmann::json none;
  ADD_FAILURE() << "no check named " << name;
  return none;
}

}  // namespace

TEST(Cli, EvalPointsAndTableValues) {
  const auto j = run_json("eval --n 1 --point 1,0.5,0.5 --point 5,0.5,0");
  const auto& rows = j.at("tables").at(0).at("rows");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0][3].get<double>(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(rows[1][3].get<double>(), 0.0);
  const auto k = run_json("eval --n 2 --point 1.5,0.8,0.4 --strategy slice");
  EXPECT_NEAR(k.at("tables").at(0).at("rows")[0][3].get<double>(), 0.2422222222, 1e-3);
}

TEST(Cli, DeterministicOutput) {
  const CliRun a = run("eval --n 2 --random 5 --seed 7 --format csv");
  const CliRun b = run("eval --n 2 --random 5 --seed 7 --format csv");
  const CliRun c = run("eval --n 2 --random 5 --seed 8 --format csv");
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_NE(a.out.find("# values\nx,y,t,value\n"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("eval --n 7 --point 1,1,1").status, 2);
  EXPECT_EQ(run("eval --point 1,1,1").status, 2);
  EXPECT_EQ(run("eval --n 1 --point 1,1").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run("verify nosuchsuite").status, 2);
  EXPECT_EQ(run("--help").status, 0);
  EXPECT_EQ(run("verify group").status, 0);
  EXPECT_EQ(run("verify vector-fields --form printed").status, 1);
  EXPECT_EQ(run("verify vector-fields --form corrected").status, 0);
}

TEST(Cli, JsonReportStructure) {
  const auto j = run_json("verify integrals --n 1 --n 2");
  EXPECT_EQ(j.at("tool"), "hspline");
  EXPECT_EQ(j.at("command"), "verify integrals");
  EXPECT_TRUE(j.at("pass").get<bool>());
  EXPECT_EQ(j.at("config").at("seed"), 20240611);
  ASSERT_EQ(j.at("checks").size(), 2u);
  for (const auto& c : j.at("checks")) {
    EXPECT_EQ(c.at("status"), "PASS");
    EXPECT_TRUE(c.contains("measured") && c.contains("expected") && c.contains("tolerance"));
  }
  EXPECT_NEAR(check(j, "integral phi2").at("measured").get<double>(), 2.0, 1e-6);
}

TEST(Cli, ConfigFileOverridesOptions) {
  const auto path = std::filesystem::temp_directory_path() / ("hspline-cli-" + std::to_string(::getpid()) + ".json");
  std::ofstream(path) << R"({"seed": 99, "count": 3})";
  const auto j = run_json("verify periodization --config " + path.string());
  EXPECT_EQ(j.at("config").at("seed"), 99);
  EXPECT_EQ(j.at("config").at("count"), 3);
  std::ofstream(path) << R"({"nonsense": 1})";
  EXPECT_EQ(run("verify group --config " + path.string()).status, 2);
  std::filesystem::remove(path);
}

TEST(Cli, RieszSeparable) {
  const auto j = run_json("riesz --separable B2 --lambda-grid 21");
  EXPECT_NEAR(check(j, "A").at("measured").get<double>(), 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(check(j, "B").at("measured").get<double>(), 2.0, 1e-6);
  const auto c = run_json("riesz --separable chi --p 3 --lambda-grid 11");
  EXPECT_EQ(check(c, "min S").at("measured").get<double>(), 3.0);
  EXPECT_EQ(run("riesz --separable B9").status, 2);
  EXPECT_EQ(run("riesz").status, 2);
}

TEST(Cli, DualAndPerturbation) {
  const auto j = run_json("dual --separable B3");
  EXPECT_LE(check(j, "biorthogonality deviation").at("measured").get<double>(), 1e-10);
  const auto p = run_json("dual --separable B3 --perturb 0.1", 1);
  EXPECT_GE(check(p, "biorthogonality deviation").at("measured").get<double>(), 0.01);
  EXPECT_EQ(check(p, "biorthogonality deviation").at("status"), "FAIL");
  EXPECT_EQ(run("dual --phi 1").status, 0);
}

TEST(Cli, GridIsCached) {
  const auto dir = std::filesystem::temp_directory_path() / ("hspline-cli-cache-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  const CliRun a = run("eval --n 1 --grid 3,3,3 --cache-dir " + dir.string());
  EXPECT_EQ(a.status, 0);
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) files += e.path().extension() == ".grid";
  EXPECT_EQ(files, 1);
  EXPECT_EQ(run("eval --n 1 --grid 3,3,3 --cache-dir " + dir.string()).out, a.out);
  std::filesystem::remove_all(dir);
}

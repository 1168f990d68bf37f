#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "guichard/io.hpp"

namespace fs = std::filesystem;
using guichard::json;
using guichard::read_json;

namespace {

const fs::path& work() {
  static const fs::path p = [] {
    const fs::path d = fs::temp_directory_path() / "guichard_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

// exit status of the CLI; stdout and stderr go to <work>/last.txt
int run(const std::string& args) {
  const std::string cmd = std::string("\"") + GUICHARD_CLI_PATH + "\" " + args + " > \"" + (work() / "last.txt").string() + "\" 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string last_output() {
  std::ifstream is(work() / "last.txt");
  return {std::istreambuf_iterator<char>(is), {}};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

std::string out(const std::string& name) { return (work() / name).string(); }

}  // namespace

TEST(Cli, CatalogListAndShow) {
  ASSERT_EQ(run("catalog list"), 0);
  const json list = json::parse(last_output());
  ASSERT_EQ(list.size(), 5u);
  EXPECT_EQ(list[0].at("name"), "example1");
  ASSERT_EQ(run("catalog show example3 --param c=2"), 0);
  EXPECT_EQ(json::parse(last_output()).at("params").at("c"), 2.0);
  EXPECT_EQ(run("catalog show example9"), 1);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("construct"), 1);  // no source
  EXPECT_EQ(run("construct --catalog example1 --class-b"), 1);
  EXPECT_EQ(run("evolve --catalog example5 --steps 0"), 1);
  EXPECT_EQ(run("evolve --catalog example5 --scheme euler"), 1);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, ConstructIsDeterministic) {
  ASSERT_EQ(run("construct --catalog example1 --c 0.5,1 --n 33 --out " + out("con_a")), 0) << last_output();
  ASSERT_EQ(run("construct --catalog example1 --c 0.5,1 --n 33 --out " + out("con_b")), 0);
  for (const char* f : {"construct.json", "c_0.5/bundle.json", "c_1/report.json"})
    EXPECT_EQ(slurp(work() / "con_a" / f), slurp(work() / "con_b" / f)) << f;
  const json rep = read_json(work() / "con_a" / "c_1" / "report.json");
  EXPECT_TRUE(rep.at("admissible").get<bool>());
}

TEST(Cli, CounterexampleExitsWithTwo) {
  EXPECT_EQ(run("construct --catalog example2 --out " + out("con_ex2")), 2);
  const json j = read_json(work() / "con_ex2" / "construct.json");
  EXPECT_EQ(j.at("runs")[0].at("failing_residual"), "extension");
  EXPECT_GT(j.at("runs")[0].at("value").get<double>(), 0.1);
  EXPECT_EQ(run("evolve --catalog example2 --out " + out("ev_ex2")), 2);
}

TEST(Cli, ClassAConstruction) {
  ASSERT_EQ(run("construct --class-a --zeta \"1+x^2\" --D \"y\" --c 1 --n 33 --out " + out("con_a_class")), 0)
      << last_output();
  const json rep = read_json(work() / "con_a_class" / "c_1" / "report.json");
  EXPECT_EQ(rep.at("classification").at("label"), "A");
}

TEST(Cli, EvolveVerifyRoundTrip) {
  ASSERT_EQ(run("evolve --catalog example5 --n 25 --z-max 0.02 --steps 4 --snapshot-every 2 --out " + out("ev5")), 0)
      << last_output();
  EXPECT_TRUE(fs::exists(work() / "ev5" / "c_1" / "diagnostics.json"));
  EXPECT_EQ(run("verify " + out("ev5/c_1") + " --out " + out("ev5_verify.json")), 0) << last_output();
  EXPECT_TRUE(read_json(work() / "ev5_verify.json").at("pass").get<bool>());
  EXPECT_EQ(run("verify " + out("nowhere")), 1);
}

TEST(Cli, PerturbedRunIsGatedOrFailsVerification) {
  EXPECT_EQ(run("evolve --catalog example5 --n 25 --z-max 0.02 --steps 4 --perturb 0.05 --out " + out("ev_p1")), 2);
  ASSERT_EQ(run("evolve --catalog example5 --n 25 --z-max 0.02 --steps 4 --perturb 0.05 --no-gate --out " +
                out("ev_p2")),
            0)
      << last_output();
  EXPECT_EQ(run("verify " + out("ev_p2/c_1")), 2);
}

TEST(Cli, TripwireExitsWithThree) {
  EXPECT_EQ(run("evolve --catalog example5 --n 25 --z-max 0.02 --steps 4 --tripwire 1e-3 --out " + out("ev_trip")), 3);
  const json s = read_json(work() / "ev_trip" / "summary.json");
  EXPECT_TRUE(s.at("runs")[0].at("aborted").get<bool>());
}

TEST(Cli, SweepReportsPairwiseDistances) {
  ASSERT_EQ(run("sweep --catalog example5 --n 25 --c 1,2 --z-max 0.02 --steps 4 --out " + out("sw")), 0)
      << last_output();
  const json s = read_json(work() / "sw" / "summary.json");
  ASSERT_EQ(s.at("pairwise_distance").size(), 1u);
  EXPECT_GT(s.at("pairwise_distance")[0].at("sup_phi_final").get<double>(), 1e-4);
  EXPECT_EQ(s.at("runs")[0].at("verification"), "PASS");
}

TEST(Cli, ConfigFile) {
  {
    std::ofstream os(work() / "run.toml");
    os << "[evolve]\ncatalog = \"example5\"\nn = 25\nz-max = 0.02\nsteps = 2\nout = \"" << out("ev_cfg") << "\"\n";
  }
  ASSERT_EQ(run("--config " + out("run.toml") + " evolve"), 0) << last_output();
  EXPECT_EQ(read_json(work() / "ev_cfg" / "summary.json").at("config").at("steps"), 2);
}

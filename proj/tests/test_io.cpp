#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "guichard/catalog.hpp"
#include "guichard/evolution.hpp"
#include "guichard/flatness.hpp"
#include "guichard/io.hpp"

using namespace guichard;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("guichard_test_io_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

TEST(Io, NumbersRoundTripExactly) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, (i % 40) - 20);
    EXPECT_EQ(std::stod(fmt(v)), v);
  }
  EXPECT_EQ(fmt(0.1), "0.1");
}

TEST(Io, LatticeAndFieldRoundTrip) {
  const auto lat = Lattice::square(25, -0.3, 0.3, -1, 6);
  const json lj = lattice_to_json(*lat);
  const auto back = lattice_from_json(json::parse(lj.dump()));
  EXPECT_EQ(back->size(), lat->size());
  EXPECT_EQ(back->fd_order(), 6);
  EXPECT_EQ(back->margin(), lat->margin());
  const ScalarField f = exp(ScalarField::coordinate(2, 0)) * cos(ScalarField::coordinate(2, 1));
  const ScalarField g = field_from_json(json::parse(field_to_json(f, lat).dump()));
  EXPECT_EQ(g.rep(), Rep::grid);
  EXPECT_EQ(g.values_on(*lat), f.values_on(*lat));
  const ScalarField j = field_from_json(json::parse(field_to_json(f.to_jets(lat, 5), lat, true).dump()));
  EXPECT_EQ(j.rep(), Rep::jets);
  EXPECT_LT(sup_norm(j.dx().dy() - f.dx().dy(), *lat, 0), 1e-13);
  EXPECT_THROW(lattice_from_json(json{{"arity", 2}}), IoError);
}

TEST(Io, CsvLayout) {
  const auto lat = Lattice::square(25, 0.0, 1.0);
  const std::string csv = field_csv(ScalarField::coordinate(2, 0), *lat);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "i,j,x,y,value");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, lat->size());
}

TEST(Io, ReadErrorsAreReported) {
  const fs::path dir = scratch("errors");
  EXPECT_THROW(read_json(dir / "missing.json"), IoError);
  write_text(dir / "bad.json", "{not json");
  EXPECT_THROW(read_json(dir / "bad.json"), IoError);
  EXPECT_THROW(read_trajectory(dir / "nowhere"), IoError);
  fs::remove_all(dir);
}

TEST(Io, TrajectoryDirectoryRoundTrip) {
  const CatalogEntry e = build_example("example5", {{"n", 25.0}});
  EvolutionConfig c;
  c.z_max = 0.02;
  c.steps = 4;
  c.snapshot_every = 2;
  const Trajectory tr = evolve(e.initial_data(), c);
  const fs::path dir = scratch("trajectory");
  write_trajectory(dir, tr);
  for (const char* f : {"diagnostics.json", "level_0000.json", "level_0004.json", "level_0002_phi.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const Trajectory back = read_trajectory(dir);
  ASSERT_EQ(back.levels.size(), tr.levels.size());
  EXPECT_EQ(back.config.steps, 4);
  EXPECT_EQ(back.c, tr.c);
  for (std::size_t i = 0; i < tr.levels.size(); ++i) {
    EXPECT_EQ(back.levels[i].phi, tr.levels[i].phi);
    EXPECT_EQ(back.levels[i].monitor[3], tr.levels[i].monitor[3]);
    EXPECT_EQ(back.levels[i].state.has_value(), tr.levels[i].state.has_value());
  }
  // verification of the reloaded directory matches the in-memory one
  const auto v1 = verify_trajectory(tr), v2 = verify_trajectory(back);
  ASSERT_EQ(v1.reports.size(), v2.reports.size());
  for (std::size_t i = 0; i < v1.reports.size(); ++i)
    EXPECT_NEAR(v1.reports[i].phi_eqs_max(), v2.reports[i].phi_eqs_max(), 1e-15);
  // byte-identical output on a second write
  const fs::path dir2 = scratch("trajectory2");
  write_trajectory(dir2, tr);
  EXPECT_EQ(slurp(dir / "diagnostics.json"), slurp(dir2 / "diagnostics.json"));
  EXPECT_EQ(slurp(dir / "level_0004.json"), slurp(dir2 / "level_0004.json"));
  fs::remove(dir / "level_0003.json");
  EXPECT_THROW(read_trajectory(dir), IoError);
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

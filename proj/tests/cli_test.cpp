#include <gtest/gtest.h>

#include <string>

#include "cli_support.hpp"

namespace {

int count_data_rows(const std::string& csv) {
  int rows = 0;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') ++rows;
  }
  return rows - 1;  // header
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new cli::ScratchDir("cli");
    ASSERT_EQ(cli::run("solve-barrier --family power --k 1 --alpha 1 --n 200 --out " + (*dir_ / "u.csv")), 0);
  }
  static void TearDownTestSuite() { delete dir_; }
  static std::string barrier() { return *dir_ / "u.csv"; }
  static std::string out(const std::string& name) { return *dir_ / name; }
  static cli::ScratchDir* dir_;
};

cli::ScratchDir* Cli::dir_ = nullptr;

}  // namespace

TEST_F(Cli, SolveBarrierWritesMetadataAndRows) {
  const std::string body = cli::slurp(barrier());
  EXPECT_EQ(body.rfind("# {", 0), 0u);
  EXPECT_NE(body.find("\"version\""), std::string::npos);
  EXPECT_NE(body.find("\"config\""), std::string::npos);
  EXPECT_EQ(count_data_rows(body), 201);
}

TEST_F(Cli, SolveBarrierFromMeasureFile) {
  const std::string spec = out("m.json");
  std::ofstream(spec) << R"({"family":"table","k":1,"density":[1,1,2]})";
  EXPECT_EQ(cli::run("solve-barrier --measure " + spec + " --n 50 --out " + out("t.csv")), 0);
  EXPECT_EQ(cli::run("solve-barrier --family table --n 50 --out " + out("t2.csv")), 2);
}

TEST_F(Cli, SweepEmitsOneRowPerDelta) {
  const std::string csv = out("sweep.csv");
  ASSERT_EQ(cli::run("sweep-delta --config " + cli::configs() + "/quartic.json --barrier " + barrier() +
                     " --deltas 0.001:0.01:10 --samples 50 --out " + csv),
            0);
  const std::string body = cli::slurp(csv);
  EXPECT_EQ(count_data_rows(body), 10);
  EXPECT_NE(body.find("delta,estimate,std_error,mean_steps\n"), std::string::npos);
}

TEST_F(Cli, RerunsAreByteIdentical) {
  const std::string cfg = cli::configs() + "/quartic.json";
  for (const std::string& args :
       {"sample --barrier " + barrier() + " --n 1000 --seed 5 --out ",
        "solve-pde --config " + cfg + " --barrier " + barrier() + " --samples 200 --seed 3 --out ",
        "verify-embedding --barrier " + barrier() + " --paths 100 --dt 1e-3 --out "}) {
    // same output path: the path is part of the echoed config
    ASSERT_EQ(cli::run(args + out("a")), 0) << args;
    const std::string first = cli::slurp(out("a"));
    ASSERT_EQ(cli::run(args + out("a")), 0) << args;
    EXPECT_EQ(first, cli::slurp(out("a"))) << args;
  }
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(cli::run("--help >/dev/null"), 0);
  EXPECT_EQ(cli::run(""), 2);
  EXPECT_EQ(cli::run("solve-barrier --bogus 1 --out " + out("x.csv")), 2);
  EXPECT_EQ(cli::run("solve-barrier --alpha 0.5 --out " + out("x.csv")), 2);
  EXPECT_EQ(cli::run("sample --barrier /nonexistent.csv --out " + out("x.csv")), 2);
  EXPECT_EQ(cli::run("sample --barrier " + barrier() + " --eps -1 --out " + out("x.csv")), 2);
  EXPECT_EQ(cli::run("sweep-delta --config " + cli::configs() + "/quartic.json --barrier " + barrier() +
                     " --deltas a:b --out " + out("x.csv")),
            2);

  // a table that is not nonincreasing
  std::ofstream(out("bad.csv")) << "x,r\n0,0.1\n0.5,0.2\n1,0\n";
  EXPECT_EQ(cli::run("sample --barrier " + out("bad.csv") + " --out " + out("x.csv")), 4);

  // no mass near the origin: the barrier is unbounded there
  std::ofstream(out("gap.json")) << R"({"family":"table","k":1,"density":[0,0,0,0,1]})";
  EXPECT_EQ(cli::run("solve-barrier --measure " + out("gap.json") + " --n 50 --out " + out("g.csv")), 3);

  // start outside the closed domain
  std::ofstream(out("start.json"))
      << R"({"T":1,"lower":{"kind":"affine","a":0,"b":0},"upper":{"kind":"affine","a":2,"b":-1},)"
      << R"("boundary_data":{"kind":"quartic"}})";
  EXPECT_EQ(cli::run("solve-pde --config " + out("start.json") + " --barrier " + barrier() +
                     " --x0 5 --out " + out("x.json")),
            2);
}

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include "fluidq/csv.hpp"

// Drives the installed CLI binary (path in FLUIDQ_CLI) through std::system.

namespace {

std::string cli_path() {
  const char* p = std::getenv("FLUIDQ_CLI");
  REQUIRE_MESSAGE(p != nullptr, "FLUIDQ_CLI must point at the fluidq binary");
  return p;
}

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " > cli_stdout.txt 2> cli_stderr.txt";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("scale command writes a monotone table") {
  REQUIRE(run("--command scale --model brownian --c 0.5 --grid 0:3:13 --out cli_scale.csv") == 0);
  fluidq::csv::Table t = fluidq::csv::read("cli_scale.csv");
  REQUIRE(t.columns == std::vector<std::string>{"x", "W_q", "engine"});
  REQUIRE(t.rows.size() == 13);
  CHECK(t.number(0, 1) == 1.0);  // W(0) = 1
  for (std::size_t k = 0; k + 1 < t.rows.size(); ++k)
    CHECK(t.number(k, 1) <= t.number(k + 1, 1));
  CHECK(t.rows[0][2] == "closed_form");
}

TEST_CASE("scale command with c = 1 dispatches the limit branch") {
  REQUIRE(run("--command scale --model brownian --c 1 --grid 0:2:5 --out cli_scale1.csv") == 0);
  fluidq::csv::Table t = fluidq::csv::read("cli_scale1.csv");
  CHECK(t.number(0, 1) == 1.0);  // W_1(0) = 1
}

TEST_CASE("scale command rejects a negative grid with a usage error") {
  CHECK(run("--command scale --model brownian --c 0.5 --grid -1:2:5 --out cli_bad.csv") == 1);
  const std::string err = slurp("cli_stderr.txt");
  CHECK(err.find("usage") != std::string::npos);
}

TEST_CASE("law command echoes the formula identifier") {
  REQUIRE(run("--command law --law QstarCDF --model brownian --c 0.5 --grid 0:3:7 "
              "--out cli_law.csv") == 0);
  fluidq::csv::Table t = fluidq::csv::read("cli_law.csv");
  REQUIRE(t.rows.size() == 7);
  double prev = -1.0;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const double v = t.number(k, 3);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v >= prev);
    prev = v;
    CHECK(t.rows[k][4].find("QstarCDF") != std::string::npos);
  }
}

TEST_CASE("law command: busy transform grid includes the normalization point") {
  REQUIRE(run("--command law --law BusyLT --model brownian --c 0.5 --grid 0:1:5 "
              "--out cli_busy.csv") == 0);
  fluidq::csv::Table t = fluidq::csv::read("cli_busy.csv");
  CHECK(t.number(0, 3) == 1.0);  // value 1 at alpha = 0
}

TEST_CASE("law command: brownian density table") {
  REQUIRE(run("--command law --law BrownianDensity --which busy_length --model brownian "
              "--c 0.5 --grid 0:10:101 --out cli_dens.csv") == 0);
  fluidq::csv::Table t = fluidq::csv::read("cli_dens.csv");
  REQUIRE(t.rows.size() == 101);
  // unimodal nonnegative density with a decaying tail
  for (std::size_t k = 0; k < t.rows.size(); ++k) CHECK(t.number(k, 3) >= 0.0);
  CHECK(t.number(100, 3) < t.number(10, 3));
}

TEST_CASE("evaluation failures exit with status 2") {
  // negative level inside the sweep: the evaluator rejects the row
  CHECK(run("--command law --law TripleLaw --model brownian --c 0.5 "
            "--grid=-2:-1:3 --out cli_x.csv") == 2);
  const std::string err = slurp("cli_stderr.txt");
  CHECK(err.find("TripleLaw") != std::string::npos);  // offending row is named
}

TEST_CASE("malformed law options exit with status 1") {
  CHECK(run("--command law --law IdleEndpointsLT --model tempered_stable --phi 1 "
            "--gamma 2 --nu 0.5 --alpha nonsense --out cli_x.csv") == 1);  // parse error
  // brownian density requested from a non-brownian model
  CHECK(run("--command law --law BrownianDensity --model tempered_stable --phi 1 "
            "--gamma 2 --nu 0.5 --out cli_x.csv") == 1);
}

TEST_CASE("invalid model is rejected up front") {
  CHECK(run("--command law --law QstarCDF --model brownian --c 1.2 --out cli_x.csv") == 1);
  const std::string err = slurp("cli_stderr.txt");
  CHECK(err.find("c must lie in (0,1)") != std::string::npos);
}

TEST_CASE("simulate is reproducible and reports the censored count") {
  REQUIRE(run("--command simulate --model brownian --c 0.5 --cycles 2000 --seed 42 "
              "--workers 2 --out cli_sim_a.csv") == 0);
  const std::string summary = slurp("cli_stdout.txt");
  CHECK(summary.find("censored=0") != std::string::npos);
  CHECK(summary.find("mean_b=") != std::string::npos);
  REQUIRE(run("--command simulate --model brownian --c 0.5 --cycles 2000 --seed 42 "
              "--workers 2 --out cli_sim_b.csv") == 0);
  // identical seed => identical file (modulo the provenance comments, which
  // are identical too)
  CHECK(slurp("cli_sim_a.csv") == slurp("cli_sim_b.csv"));
}

TEST_CASE("validate produces a report and a meaningful exit status") {
  REQUIRE(run("--command validate --model brownian --c 0.5 --cycles 20000 --seed 3 "
              "--workers 2 --out cli_validation.json") == 0);
  const std::string report = slurp("cli_validation.json");
  CHECK(report.find("\"overall_pass\": true") != std::string::npos);
  CHECK(report.find("mc_mean_busy") != std::string::npos);
  const std::string out = slurp("cli_stdout.txt");
  CHECK(out.find("PASS") != std::string::npos);
}

TEST_CASE("config file with flag override") {
  {
    std::ofstream cfg("cli_config.json");
    cfg << R"({"command": "scale", "model": {"kind": "brownian", "c": 0.5},
               "grid": "0:1:3", "out": "cli_cfg_out.csv"})";
  }
  REQUIRE(run("--config cli_config.json") == 0);
  fluidq::csv::Table t1 = fluidq::csv::read("cli_cfg_out.csv");
  REQUIRE(t1.rows.size() == 3);
  // flag overrides the grid from the file
  REQUIRE(run("--config cli_config.json --grid 0:1:5") == 0);
  fluidq::csv::Table t2 = fluidq::csv::read("cli_cfg_out.csv");
  REQUIRE(t2.rows.size() == 5);
}

TEST_CASE("usage errors exit with status 1") {
  CHECK(run("--command nosuch") == 1);
  CHECK(run("--command law --law NoSuchLaw --model brownian --c 0.5") == 1);
}

TEST_CASE("infrastructure failures exit with status 3") {
  CHECK(run("--command scale --model brownian --c 0.5 --grid 0:1:3 "
            "--out /no/such/dir/out.csv") == 3);
}

TEST_CASE("validation failure exits with status 4") {
  // epsilon far above the small-jump variance budget fails that named check
  CHECK(run("--command validate --model brownian --c 0.5 --cycles 2000 --seed 3 "
            "--epsilon 1e-3 --out cli_val_fail.json") == 4);
  const std::string report = slurp("cli_val_fail.json");
  CHECK(report.find("\"overall_pass\": false") != std::string::npos);
}

TEST_SUITE_END();

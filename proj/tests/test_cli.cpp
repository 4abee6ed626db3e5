#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

// Runs the command line tool with the given arguments, capturing the merged
// stdout and stderr text.
RunResult run(const std::string& args) {
  const std::string capture = "cli_capture.txt";
  const std::string cmd = std::string(COOPT_CLI_PATH) + " " + args + " > " + capture + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(capture);
  std::ostringstream buf;
  buf << in.rdbuf();
  r.output = buf.str();
  std::remove(capture.c_str());
  return r;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("help and argument errors") {
  CHECK(run("--help").exit_code == 0);
  CHECK(run("test --help").exit_code == 0);
  const RunResult bad = run("test --no-such-flag");
  CHECK(bad.exit_code == 2);
  const RunResult noinput = run("test");
  CHECK(noinput.exit_code == 2);
  CHECK(noinput.output.find("--input") != std::string::npos);
  CHECK(run("test --input1 cli_missing.tsv --input2 cli_missing.tsv").exit_code == 2);
}

TEST_CASE("simulate, test, hmap, and distance round trip") {
  const RunResult sim =
      run("simulate --scenario 1d-location --n1 15 --n2 15 --seed 9 "
          "--out1 cli_s1.tsv --out2 cli_s2.tsv");
  REQUIRE(sim.exit_code == 0);
  CHECK(sim.output.find("wrote") != std::string::npos);

  const RunResult test = run("test --input1 cli_s1.tsv --input2 cli_s2.tsv");
  REQUIRE(test.exit_code == 0);
  CHECK(test.output.find("gamma_post ") == 0);
  const double gamma = std::stod(test.output.substr(11));
  CHECK(gamma >= 0.0);
  CHECK(gamma <= 1.0);

  const RunResult hm =
      run("hmap --input1 cli_s1.tsv --input2 cli_s2.tsv --out cli_tree.json");
  REQUIRE(hm.exit_code == 0);
  CHECK(hm.output.find("entire space") != std::string::npos);
  std::ifstream jf("cli_tree.json");
  nlohmann::json j;
  jf >> j;
  CHECK(j.contains("gamma_post"));
  CHECK(j.at("tree").contains("root"));
  std::remove("cli_tree.json");

  const RunResult dist =
      run("distance --input1 cli_s1.tsv --input2 cli_s2.tsv --metric l1 --draws 40 --seed 2");
  REQUIRE(dist.exit_code == 0);
  CHECK(dist.output.find("# mean ") != std::string::npos);
  CHECK(dist.output.find("# q50 ") != std::string::npos);

  std::remove("cli_s1.tsv");
  std::remove("cli_s2.tsv");
}

TEST_CASE("grouped input matches the two-file form") {
  write_file("cli_grp.tsv", "x1\tarm\n0.10\tcontrol\n0.30\tcontrol\n0.62\ttreated\n"
                            "0.55\tcontrol\n0.81\ttreated\n0.93\ttreated\n");
  write_file("cli_g1.tsv", "x1\n0.10\n0.30\n0.55\n");
  write_file("cli_g2.tsv", "x1\n0.62\n0.81\n0.93\n");
  const RunResult grouped = run("test --input cli_grp.tsv --group arm");
  const RunResult split = run("test --input1 cli_g1.tsv --input2 cli_g2.tsv");
  REQUIRE(grouped.exit_code == 0);
  REQUIRE(split.exit_code == 0);
  CHECK(grouped.output == split.output);
  CHECK(run("test --input cli_grp.tsv").exit_code == 2);
  CHECK(run("test --input cli_grp.tsv --group arm --input1 cli_g1.tsv").exit_code == 2);
  std::remove("cli_grp.tsv");
  std::remove("cli_g1.tsv");
  std::remove("cli_g2.tsv");
}

TEST_CASE("goodness of fit against uniform and grid bases") {
  write_file("cli_gof.tsv", "x1\n0.05\n0.12\n0.18\n0.22\n0.31\n0.44\n0.58\n0.71\n0.84\n0.96\n");
  const RunResult uni = run("gof --input cli_gof.tsv");
  REQUIRE(uni.exit_code == 0);
  CHECK(uni.output.find("rho_post ") == 0);

  write_file("cli_grid.txt", "depth 1\n0 3\n1 1\n");
  const RunResult grid = run("gof --input cli_gof.tsv --base cli_grid.txt");
  REQUIRE(grid.exit_code == 0);
  CHECK(grid.output.find("rho_post ") == 0);
  CHECK(run("gof --input cli_gof.tsv --base cli_nothere.txt").exit_code == 2);
  std::remove("cli_gof.tsv");
  std::remove("cli_grid.txt");
}

TEST_CASE("table mode end to end") {
  const RunResult sim =
      run("simulate --scenario table-iid --n1 40 --n2 40 --seed 3 --table-dims 10 "
          "--out1 cli_t1.tsv --out2 cli_t2.tsv");
  REQUIRE(sim.exit_code == 0);
  const RunResult test = run("test --input1 cli_t1.tsv --input2 cli_t2.tsv --mode table");
  REQUIRE(test.exit_code == 0);
  CHECK(test.output.find("gamma_post ") == 0);
  std::remove("cli_t1.tsv");
  std::remove("cli_t2.tsv");
}

TEST_CASE("roc and power summaries") {
  const RunResult r =
      run("roc --scenario 1d-location --statistic ks --reps 6 --n1 12 --n2 12 --seed 4");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("fpr\ttpr") != std::string::npos);
  CHECK(r.output.find("auc ") != std::string::npos);

  const RunResult p = run(
      "power --scenario 1d-location --statistic ks --reps 6 --n1 12 --n2 12 --seed 4 "
      "--level 0.5");
  REQUIRE(p.exit_code == 0);
  CHECK(p.output.find("power ") == 0);
  CHECK(run("roc --scenario bogus --statistic ks --reps 4 --n1 8 --n2 8").exit_code == 2);
}

TEST_CASE("resource limits exit with their own status") {
  write_file("cli_wide.tsv",
             "x1\tx2\tx3\tx4\n0\t0\t0\t0\n1\t1\t1\t1\n0\t1\t0\t1\n1\t0\t1\t0\n");
  const RunResult r = run("oracle --input1 cli_wide.tsv --input2 cli_wide.tsv --mode table");
  CHECK(r.exit_code == 3);
  std::remove("cli_wide.tsv");
}

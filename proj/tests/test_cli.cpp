#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ld3/cli.hpp"
#include "ld3/dataset.hpp"
#include "ld3/evalkit.hpp"
#include "ld3/fixtures.hpp"
#include "ld3/partition.hpp"
#include "ld3/scm.hpp"
#include "test_util.hpp"

using namespace ld3;
namespace fs = std::filesystem;

namespace {

const fs::path kTmp = fs::temp_directory_path() / "ld3_cli_test";

std::string slurp(const fs::path& path) {
  std::ostringstream ss;
  ss << std::ifstream(path).rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) { return cli::run(args); }

struct TmpDir {
  TmpDir() {
    fs::remove_all(kTmp);
    fs::create_directories(kTmp);
  }
};

std::string p(const std::string& name) { return (kTmp / name).string(); }

}  // namespace

TEST_CASE("simulate writes a deterministic dataset triple") {
  TmpDir tmp;
  int rc = run_cli({"simulate", "--fixture", "fig_c1", "--n", "10000",
                    "--seed", "1", "--out", p("sim")});
  CHECK(rc == 0);
  Dataset d =
      Dataset::from_csv(slurp(p("sim.csv")), slurp(p("sim.schema.json")));
  CHECK(d.n_rows() == 10000);
  CHECK(d.n_cols() == 16);
  CHECK(d.has_column("X"));
  CHECK(d.has_column("M3"));

  auto first = slurp(p("sim.csv"));
  CHECK(run_cli({"simulate", "--fixture", "fig_c1", "--n", "10000", "--seed",
                 "1", "--out", p("sim")}) == 0);
  CHECK(slurp(p("sim.csv")) == first);

  // model file round-trips through the simulate --scm path
  CHECK(run_cli({"simulate", "--scm", p("sim.scm.json"), "--n", "50", "--seed",
                 "2", "--out", p("sim2")}) == 0);
  CHECK(Dataset::from_csv(slurp(p("sim2.csv")), slurp(p("sim2.schema.json")))
            .n_rows() == 50);
}

TEST_CASE("simulate usage errors exit with 2") {
  TmpDir tmp;
  CHECK(run_cli({"simulate", "--fixture", "fig_c1", "--n", "0", "--seed", "1",
                 "--out", p("x")}) == 2);
  CHECK(run_cli({"simulate", "--fixture", "nope", "--n", "10", "--seed", "1",
                 "--out", p("x")}) == 2);
  CHECK(run_cli({"simulate", "--n", "10", "--seed", "1"}) == 2);
  CHECK(run_cli({"simulate", "--fixture", "fig_c1", "--seed", "1"}) == 2);
  CHECK(run_cli({"nonsense"}) == 2);
}

TEST_CASE("discover reports the detected direct edge through the exit code") {
  TmpDir tmp;
  REQUIRE(run_cli({"simulate", "--fixture", "fig_c1", "--n", "50000", "--seed",
                   "3", "--out", p("d")}) == 0);
  int rc = run_cli({"discover", "--data", p("d.csv"), "--schema",
                    p("d.schema.json"), "--x", "X", "--y", "Y", "--test",
                    "fisherz", "--alpha", "0.01", "--out", p("report.json"),
                    "--trace", p("trace.jsonl")});
  CHECK(rc == 3);  // direct discrimination detected
  auto report = nlohmann::json::parse(slurp(p("report.json")));
  CHECK(report.at("sdc") == 1);
  auto a_de = report.at("a_de").get<std::vector<std::string>>();
  auto m = score_parents(a_de, oracle_a_de(fig_c1()));
  CHECK(m.f1 >= 0.9);
  CHECK(report.at("test_count").get<long>() <= 7 * 14 + 1);
  CHECK(!slurp(p("trace.jsonl")).empty());

  // no direct edge -> exit 0 and sdc 0
  REQUIRE(run_cli({"simulate", "--fixture", "fig_c1", "--no-direct-edge",
                   "--n", "50000", "--seed", "4", "--out", p("nd")}) == 0);
  CHECK(run_cli({"discover", "--data", p("nd.csv"), "--schema",
                 p("nd.schema.json"), "--x", "X", "--y", "Y", "--out",
                 p("report0.json")}) == 0);
  CHECK(nlohmann::json::parse(slurp(p("report0.json"))).at("sdc") == 0);
}

TEST_CASE("discover usage errors") {
  TmpDir tmp;
  REQUIRE(run_cli({"simulate", "--fixture", "fig_c1", "--n", "500", "--seed",
                   "3", "--out", p("d")}) == 0);
  CHECK(run_cli({"discover", "--data", p("d.csv"), "--schema",
                 p("d.schema.json"), "--x", "X", "--y", "X"}) == 2);
  CHECK(run_cli({"discover", "--data", p("d.csv"), "--schema",
                 p("d.schema.json"), "--x", "X", "--y", "Y", "--test",
                 "chi2"}) == 2);  // continuous data, categorical test
  CHECK(run_cli({"discover", "--data", p("missing.csv"), "--schema",
                 p("d.schema.json"), "--x", "X", "--y", "Y"}) != 0);
}

TEST_CASE("estimate: least squares from a report") {
  TmpDir tmp;
  REQUIRE(run_cli({"simulate", "--fixture", "fig_c1", "--n", "100000",
                   "--seed", "5", "--out", p("e")}) == 0);
  REQUIRE(run_cli({"discover", "--data", p("e.csv"), "--schema",
                   p("e.schema.json"), "--x", "X", "--y", "Y", "--out",
                   p("rep.json")}) == 3);
  CHECK(run_cli({"estimate", "--data", p("e.csv"), "--schema",
                 p("e.schema.json"), "--x", "X", "--y", "Y", "--from-report",
                 p("rep.json"), "--out", p("est.json")}) == 0);
  auto est = nlohmann::json::parse(slurp(p("est.json")));
  CHECK(est.at("estimator") == "ols");
  CHECK(std::abs(est.at("value").get<double>() - 1.25) < 0.03);
  CHECK(est.at("p_value").get<double>() < 0.01);
}

TEST_CASE("estimate: stratified needs a split, audit bundles both stages") {
  TmpDir tmp;
  // discrete data from the five-node shape
  Dag g = testutil::sfm5_dag();
  std::map<std::string, int> cards;
  for (const auto& n : g.nodes()) cards[n] = 2;
  DiscreteScm scm = DiscreteScm::random(g, cards, 11);
  write_text_file(p("sfm5.scm.json"), scm.to_json());
  REQUIRE(run_cli({"simulate", "--scm", p("sfm5.scm.json"), "--n", "200000",
                   "--seed", "6", "--out", p("disc")}) == 0);

  // stratified without a split is a usage error
  CHECK(run_cli({"estimate", "--data", p("disc.csv"), "--schema",
                 p("disc.schema.json"), "--x", "X", "--y", "Y", "--estimator",
                 "stratified", "--adjust", "C,K,M"}) == 2);

  write_text_file(p("split.json"),
                  R"({"s_set": ["C", "K"], "m_set": ["M"]})");
  CHECK(run_cli({"estimate", "--data", p("disc.csv"), "--schema",
                 p("disc.schema.json"), "--x", "X", "--y", "Y", "--estimator",
                 "stratified", "--split", p("split.json"), "--x-val", "1",
                 "--x-star", "0", "--bootstrap-seed", "9", "--out",
                 p("strat.json")}) == 0);
  double truth = true_wcde_discrete(scm, "X", "Y", 1, 0);
  auto est = nlohmann::json::parse(slurp(p("strat.json")));
  CHECK(std::abs(est.at("value").get<double>() - truth) < 0.03);

  // an impossible exposure level cannot be estimated -> exit 4
  CHECK(run_cli({"estimate", "--data", p("disc.csv"), "--schema",
                 p("disc.schema.json"), "--x", "X", "--y", "Y", "--estimator",
                 "stratified", "--split", p("split.json"), "--x-val", "7",
                 "--x-star", "0"}) == 4);

  // audit = discover + estimate in one pass
  int rc = run_cli({"audit", "--data", p("disc.csv"), "--schema",
                    p("disc.schema.json"), "--x", "X", "--y", "Y", "--test",
                    "chi2", "--alpha", "0.01", "--estimator", "stratified",
                    "--split", p("split.json"), "--out", p("audit.json")});
  CHECK(rc == 3);
  auto combined = nlohmann::json::parse(slurp(p("audit.json")));
  CHECK(combined.contains("report"));
  CHECK(combined.contains("estimate"));
  CHECK(combined.at("report").at("sdc") == 1);
}

TEST_CASE("binning routes continuous columns into the categorical test") {
  TmpDir tmp;
  REQUIRE(run_cli({"simulate", "--fixture", "fig_d5", "--n", "40000", "--seed",
                   "8", "--direct-effect", "7", "--out", p("b")}) == 0);
  std::vector<std::string> args{"discover", "--data", p("b.csv"), "--schema",
                                p("b.schema.json"), "--x", "X", "--y", "Y",
                                "--test", "chi2", "--alpha", "0.01", "--out",
                                p("breport.json")};
  for (const auto& name : fig_d5().nodes()) {
    args.push_back("--bin");
    args.push_back(name + "=3");
  }
  CHECK(run_cli(args) == 3);
  auto report = nlohmann::json::parse(slurp(p("breport.json")));
  auto a_de = report.at("a_de").get<std::vector<std::string>>();
  auto m = score_parents(a_de, oracle_a_de(fig_d5()));
  CHECK(m.recall >= 2.0 / 3.0);
}

TEST_CASE("bench runs a suite file and writes the output bundle") {
  TmpDir tmp;
  write_text_file(p("suite.json"), R"({
    "name": "tiny",
    "cells": [
      {"id": "er", "kind": "oracle_er", "node_counts": [6, 12],
       "graphs_per_count": 2, "alpha": 0.01}
    ]
  })");
  CHECK(run_cli({"bench", "--suite", p("suite.json"), "--seed", "7", "--out",
                 p("bench_out")}) == 0);
  CHECK(fs::exists(p("bench_out") + "/cells.jsonl"));
  CHECK(fs::exists(p("bench_out") + "/aggregate.csv"));
  CHECK(fs::exists(p("bench_out") + "/plotdata.csv"));

  CHECK(run_cli({"bench", "--suite", p("no_such_suite.json"), "--seed", "7",
                 "--out", p("bench_out2")}) == 2);
  CHECK(run_cli({"bench", "--suite", p("suite.json"), "--out",
                 p("bench_out3")}) == 2);  // seed is mandatory
}

TEST_CASE("help exits cleanly") { CHECK(run_cli({"--help"}) == 0); }

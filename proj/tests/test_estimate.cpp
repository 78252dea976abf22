#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ld3/estimate.hpp"
#include "ld3/fixtures.hpp"
#include "ld3/partition.hpp"
#include "ld3/scm.hpp"
#include "test_util.hpp"

using namespace ld3;
using ld3::testutil::sfm5_dag;

namespace {

DiscreteScm sfm5_scm(uint64_t seed) {
  Dag g = sfm5_dag();
  std::map<std::string, int> cards;
  for (const auto& n : g.nodes()) cards[n] = 2;
  return DiscreteScm::random(g, cards, seed);
}

AdjustmentSpec sfm5_split() { return AdjustmentSpec::with_split({"C", "K"}, {"M"}); }

double variance(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= v.size();
  double acc = 0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / (v.size() - 1);
}

}  // namespace

TEST_CASE("ols null calibration: p exceeds 0.05 on at least 93 of 100 null "
          "draws") {
  int accepted = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(7000 + seed);
    std::normal_distribution<double> noise;
    std::vector<double> x(10000), y(10000);
    for (size_t i = 0; i < x.size(); ++i) {
      x[i] = noise(rng);
      y[i] = noise(rng);
    }
    Dataset d;
    d.add_column({"x", ColumnType::Continuous, 0}, std::move(x));
    d.add_column({"y", ColumnType::Continuous, 0}, std::move(y));
    auto est = wcde_ols(d, "x", "y", AdjustmentSpec::plain({}));
    if (est.p_value > 0.05) ++accepted;
  }
  CHECK(accepted >= 93);
}

TEST_CASE("ols recovers the pinned direct effect on the 16-node fixture") {
  auto scm = LinearGaussianScm::random(fig_c1(), 5, 1.25);
  Dataset data = scm.sample(100000, 31);
  auto est = wcde_ols(data, "X", "Y",
                      AdjustmentSpec::plain(oracle_a_de(fig_c1())));
  CHECK(est.value == doctest::Approx(1.25).epsilon(0.016));
  CHECK(est.p_value < 0.01);
  CHECK(est.ci_low <= est.value);
  CHECK(est.value <= est.ci_high);
  CHECK(est.n_used == 100000);
}

TEST_CASE("ols drops exactly collinear covariates and keeps going") {
  auto scm = LinearGaussianScm::random(fig_c1(), 5, 1.25);
  Dataset data = scm.sample(20000, 32);
  Dataset with_dup = data;
  with_dup.add_column({"Z1_copy", ColumnType::Continuous, 0},
                      data.column("Z1"));
  auto covs = oracle_a_de(fig_c1());
  auto clean = wcde_ols(with_dup, "X", "Y", AdjustmentSpec::plain(covs));
  covs.push_back("Z1_copy");
  auto dropped = wcde_ols(with_dup, "X", "Y", AdjustmentSpec::plain(covs));
  CHECK(dropped.notes.size() == 1);
  CHECK(dropped.value == doctest::Approx(clean.value));

  Dataset tiny;
  tiny.add_column({"x", ColumnType::Continuous, 0}, {1, 2});
  tiny.add_column({"y", ColumnType::Continuous, 0}, {2, 1});
  CHECK_THROWS_AS(wcde_ols(tiny, "x", "y", AdjustmentSpec::plain({})),
                  std::invalid_argument);
}

TEST_CASE("adjusting for everything inflates ols variance on the 17-node "
          "fixture") {
  Dag g = fig_d5();
  auto scm = LinearGaussianScm::random(g, 11, 7.0);
  std::vector<std::string> z;
  for (const auto& n : g.nodes())
    if (n != "X" && n != "Y") z.push_back(n);
  std::vector<double> with_a_de, with_all;
  for (int rep = 0; rep < 50; ++rep) {
    Dataset d = scm.sample(1000, 8000 + rep);
    with_a_de.push_back(
        wcde_ols(d, "X", "Y", AdjustmentSpec::plain(oracle_a_de(g))).value);
    with_all.push_back(wcde_ols(d, "X", "Y", AdjustmentSpec::plain(z)).value);
  }
  CHECK(variance(with_all) > 1.5 * variance(with_a_de));
}

TEST_CASE("stratified contrast on the two-node table is the difference of "
          "conditionals") {
  Dag g({"X", "Y"});
  g.add_edge("X", "Y");
  g.designate("X", "Y");
  DiscreteScm scm(g, {{"X", 2}, {"Y", 2}},
                  {{"X", {{0.5, 0.5}}}, {"Y", {{0.7, 0.3}, {0.2, 0.8}}}});
  Dataset d = scm.sample(100000, 41);
  auto spec = AdjustmentSpec::with_split({}, {});
  CHECK(cde_at_m(d, "X", "Y", 1, 0, {}, spec) ==
        doctest::Approx(0.5).epsilon(0.03));
  auto est = wcde_stratified(d, "X", "Y", 1, 0, spec);
  CHECK(est.value == doctest::Approx(0.5).epsilon(0.03));
  CHECK(est.p_value < 0.01);
}

TEST_CASE("per-mediator contrasts match the enumeration oracle and vary "
          "under interaction") {
  DiscreteScm scm = sfm5_scm(11);
  Dataset d = scm.sample(200000, 42);
  auto spec = sfm5_split();
  double c0 = cde_at_m(d, "X", "Y", 1, 0, {0}, spec);
  double c1 = cde_at_m(d, "X", "Y", 1, 0, {1}, spec);
  double t0 = true_cde_discrete(scm, "X", "Y", 1, 0, {0});
  double t1 = true_cde_discrete(scm, "X", "Y", 1, 0, {1});
  CHECK(c0 == doctest::Approx(t0).epsilon(0.08));
  CHECK(c1 == doctest::Approx(t1).epsilon(0.08));
  // Random quadratic tables interact: the contrast depends on m.
  CHECK(std::abs(t0 - t1) > 0.02);

  // The weighted estimate is the P(m)-weighted mean of the per-m values.
  auto est = wcde_stratified(d, "X", "Y", 1, 0, spec);
  const auto& m_col = d.column("M");
  double p1 = 0;
  for (double v : m_col) p1 += v;
  p1 /= m_col.size();
  CHECK(est.value == doctest::Approx(c0 * (1 - p1) + c1 * p1).epsilon(1e-9));
}

TEST_CASE("stratified estimate approaches the enumerated truth") {
  DiscreteScm scm = sfm5_scm(11);
  double truth = true_wcde_discrete(scm, "X", "Y", 1, 0);
  Dataset d = scm.sample(200000, 43);
  StratifiedOptions opt;
  opt.bootstrap_seed = 7;
  auto est = wcde_stratified(d, "X", "Y", 1, 0, sfm5_split(), opt);
  CHECK(est.value == doctest::Approx(truth).epsilon(0.05));
  CHECK(est.ci_low < truth);
  CHECK(truth < est.ci_high);
  CHECK(est.estimator == "stratified");
}

TEST_CASE("no direct edge: stratified estimate sits at zero") {
  Dag g = sfm5_dag(false);
  std::map<std::string, int> cards;
  for (const auto& n : g.nodes()) cards[n] = 2;
  DiscreteScm scm = DiscreteScm::random(g, cards, 11);
  CHECK(true_wcde_discrete(scm, "X", "Y", 1, 0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  Dataset d = scm.sample(100000, 44);
  auto est = wcde_stratified(d, "X", "Y", 1, 0, sfm5_split());
  CHECK(std::abs(est.value) < 0.03);
}

TEST_CASE("product-of-marginals weighting differs from joint weighting when "
          "the adjusters and mediators are dependent") {
  // C drives both K-side strata and M through X, so P(s)P(m) != P(s, m).
  DiscreteScm scm = sfm5_scm(11);
  Dataset d = scm.sample(200000, 45);
  auto spec = sfm5_split();
  StratifiedOptions product;
  StratifiedOptions joint;
  joint.joint_weighting = true;
  double v_product = wcde_stratified(d, "X", "Y", 1, 0, spec, product).value;
  double v_joint = wcde_stratified(d, "X", "Y", 1, 0, spec, joint).value;
  CHECK(std::abs(v_product - v_joint) > 1e-4);

  // The product weighting is the one that matches the enumerated truth.
  double truth = true_wcde_discrete(scm, "X", "Y", 1, 0);
  CHECK(std::abs(v_product - truth) < std::abs(v_joint - truth));
}

TEST_CASE("stratified estimator failure modes") {
  DiscreteScm scm = sfm5_scm(11);
  Dataset d = scm.sample(1000, 46);
  CHECK_THROWS_AS(
      wcde_stratified(d, "X", "Y", 1, 0, AdjustmentSpec::plain({"C", "K", "M"})),
      std::invalid_argument);  // split missing
  CHECK_THROWS_AS(AdjustmentSpec::with_split({"C", "K"}, {"K"}),
                  std::invalid_argument);  // overlap

  // An exposure level with no rows leaves no supported stratum.
  Dataset constant;
  constant.add_column({"X", ColumnType::Categorical, 2},
                      std::vector<double>(100, 0.0));
  constant.add_column({"Y", ColumnType::Categorical, 2},
                      std::vector<double>(100, 1.0));
  CHECK_THROWS_AS(
      wcde_stratified(constant, "X", "Y", 1, 0, AdjustmentSpec::with_split({}, {})),
      std::runtime_error);
}

TEST_CASE("bootstrap interval covers the truth at the nominal rate "
          "(reduced replicate count)") {
  DiscreteScm scm = sfm5_scm(11);
  double truth = true_wcde_discrete(scm, "X", "Y", 1, 0);
  int covered = 0;
  const int reps = 40;
  for (int rep = 0; rep < reps; ++rep) {
    Dataset d = scm.sample(20000, 9000 + rep);
    StratifiedOptions opt;
    opt.bootstrap_seed = 100 + rep;
    opt.bootstrap_resamples = 300;
    auto est = wcde_stratified(d, "X", "Y", 1, 0, sfm5_split(), opt);
    if (est.ci_low <= truth && truth <= est.ci_high) ++covered;
  }
  CHECK(covered >= 33);  // ~ 95% nominal with binomial slack
}

TEST_CASE("estimate serialization carries the contract fields") {
  DiscreteScm scm = sfm5_scm(11);
  Dataset d = scm.sample(5000, 47);
  auto est = wcde_stratified(d, "X", "Y", 1, 0, sfm5_split());
  auto j = est.to_json();
  for (const char* field : {"\"value\"", "\"ci\"", "\"p_value\"",
                            "\"n_used\"", "\"estimator\"", "\"dropped_mass\""})
    CHECK(j.find(field) != std::string::npos);
}

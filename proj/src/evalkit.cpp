#include "ld3/evalkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "ld3/estimate.hpp"
#include "ld3/fixtures.hpp"
#include "ld3/ld3.hpp"
#include "ld3/partition.hpp"
#include "ld3/scm.hpp"

namespace ld3 {

ParentMetrics score_parents(const std::vector<std::string>& predicted,
                            const std::vector<std::string>& truth) {
  std::set<std::string> pred(predicted.begin(), predicted.end());
  std::set<std::string> tru(truth.begin(), truth.end());
  size_t tp = 0;
  for (const auto& v : pred) tp += tru.count(v);

  ParentMetrics m;
  if (pred.empty() && tru.empty()) {
    m.precision = m.recall = m.f1 = 1.0;
    return m;
  }
  m.precision = pred.empty() ? 0.0 : static_cast<double>(tp) / pred.size();
  m.recall = tru.empty() ? 0.0 : static_cast<double>(tp) / tru.size();
  m.f1 = (m.precision + m.recall) > 0
             ? 2 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

std::vector<std::string> brute_force_parents(CiTest& test,
                                             const std::string& x,
                                             const std::string& y,
                                             const std::vector<std::string>& z,
                                             double alpha) {
  std::vector<std::string> out;
  for (const auto& v : z) {
    std::vector<std::string> cond{x};
    for (const auto& w : z)
      if (w != v) cond.push_back(w);
    CiQuery q{v, y, std::move(cond), alpha};
    if (!test(q).independent) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> brute_force_parents(const Dag& g, double alpha) {
  if (!g.exposure() || !g.outcome())
    throw std::invalid_argument("graph has no designated exposure/outcome");
  std::vector<std::string> z;
  for (int v = 0; v < g.num_nodes(); ++v)
    if (v != *g.exposure() && v != *g.outcome()) z.push_back(g.name(v));
  OracleCiTest test(g);
  return brute_force_parents(test, g.name(*g.exposure()),
                             g.name(*g.outcome()), z, alpha);
}

namespace {

using nlohmann::json;

struct Row {
  std::string sort_key;
  json data;
};

double mean_of(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  return v.empty() ? 0.0 : m / v.size();
}

double variance_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v);
  double acc = 0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / (v.size() - 1);
}

// Normal-approximation interval over replicates: mean ± 1.96 sd/sqrt(k).
struct Ci {
  double mean, lo, hi;
};
Ci ci_of(const std::vector<double>& v) {
  double m = mean_of(v);
  double half =
      v.size() > 1 ? 1.96 * std::sqrt(variance_of(v) / v.size()) : 0.0;
  return {m, m - half, m + half};
}

std::vector<int> log_spaced_counts(int lo, int hi, int k) {
  std::vector<int> out;
  for (int i = 0; i < k; ++i) {
    double t = k == 1 ? 0.0 : static_cast<double>(i) / (k - 1);
    int n = static_cast<int>(std::lround(
        std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))));
    out.push_back(std::max(n, 2));
  }
  return out;
}

json ld3_row(const Ld3Report& report, const Dag& g) {
  auto truth = oracle_a_de(g);
  auto metrics = score_parents(report.a_de, truth);
  bool edge = g.has_edge(*g.exposure(), *g.outcome());
  json j;
  j["a_de"] = report.a_de;
  j["truth"] = truth;
  j["f1"] = metrics.f1;
  j["precision"] = metrics.precision;
  j["recall"] = metrics.recall;
  j["sdc"] = report.sdc;
  j["sdc_correct"] = (report.sdc == 1) == edge ? 1.0 : 0.0;
  j["test_count"] = report.test_count;
  j["wall_time_ms"] = report.wall_time_ms;
  j["degenerate_queries"] = report.degenerate_queries;
  return j;
}

struct SuiteContext {
  std::vector<Row> rows;
  std::vector<json> aggregates;  // {cell, group, metric, mean, ci_lo, ci_hi, n}
  std::vector<json> plot;        // {series, x, y, ci_lo, ci_hi}
};

void aggregate_metric(SuiteContext& ctx, const std::string& cell,
                      const std::string& group, const std::string& metric,
                      const std::vector<double>& values) {
  auto ci = ci_of(values);
  ctx.aggregates.push_back({{"cell", cell},
                            {"group", group},
                            {"metric", metric},
                            {"mean", ci.mean},
                            {"ci_lo", ci.lo},
                            {"ci_hi", ci.hi},
                            {"n", values.size()}});
}

void plot_point(SuiteContext& ctx, const std::string& series, double x,
                const std::vector<double>& values) {
  auto ci = ci_of(values);
  ctx.plot.push_back({{"series", series},
                      {"x", x},
                      {"y", ci.mean},
                      {"ci_lo", ci.lo},
                      {"ci_hi", ci.hi}});
}

// ---- oracle_er: ER sweep with the d-separation oracle -------------------

void run_oracle_er(const json& cell, SuiteContext& ctx,
                   const std::function<void(std::function<void()>)>& submit,
                   std::mutex& mu) {
  std::string id = cell.at("id");
  auto counts = cell.contains("node_counts")
                    ? cell.at("node_counts").get<std::vector<int>>()
                    : log_spaced_counts(5, 500, 18);
  int per = cell.value("graphs_per_count", 5);
  double out_degree = cell.value("expected_out_degree", 2.0);
  uint64_t seed0 = cell.value("seed", 7);
  Ld3Config cfg;
  cfg.alpha = cell.value("alpha", 0.01);
  cfg.test = TestKind::Oracle;
  cfg.sdc_conditioning = sdc_conditioning_from_string(
      cell.value("sdc_conditioning", std::string("full_a_de")));

  int job_idx = 0;
  for (int n : counts) {
    for (int g_idx = 0; g_idx < per; ++g_idx) {
      uint64_t seed = seed0 + 1000003ULL * job_idx;
      ++job_idx;
      submit([&ctx, &mu, id, n, g_idx, seed, cfg, out_degree]() {
        double p = std::min(1.0, out_degree / std::max(n - 1, 1));
        Dag g = random_er_dag(n, p, seed);
        auto report = run_ld3(g, cfg);
        json row = ld3_row(report, g);
        row["cell"] = id;
        row["n_nodes"] = g.num_nodes();
        row["n_edges"] = g.num_edges();
        row["z_size"] = g.num_nodes() - 2;
        row["graph_seed"] = seed;
        std::ostringstream key;
        key << id << "|" << std::setw(6) << std::setfill('0') << n << "|"
            << g_idx;
        std::lock_guard<std::mutex> lock(mu);
        ctx.rows.push_back({key.str(), std::move(row)});
      });
    }
  }
}

void aggregate_oracle_er(const json& cell, SuiteContext& ctx) {
  std::string id = cell.at("id");
  std::map<int, std::vector<json>> by_z;
  for (const auto& row : ctx.rows)
    if (row.data.at("cell") == id)
      by_z[row.data.at("z_size").get<int>()].push_back(row.data);
  std::vector<double> all_f1, all_prec, all_rec, all_sdc;
  for (const auto& [z, rows] : by_z) {
    std::vector<double> f1, tests, wall;
    for (const auto& r : rows) {
      f1.push_back(r.at("f1").get<double>());
      tests.push_back(r.at("test_count").get<double>());
      wall.push_back(r.at("wall_time_ms").get<double>());
      all_f1.push_back(r.at("f1").get<double>());
      all_prec.push_back(r.at("precision").get<double>());
      all_rec.push_back(r.at("recall").get<double>());
      all_sdc.push_back(r.at("sdc_correct").get<double>());
    }
    std::string group = "z=" + std::to_string(z);
    aggregate_metric(ctx, id, group, "f1", f1);
    aggregate_metric(ctx, id, group, "test_count", tests);
    aggregate_metric(ctx, id, group, "wall_time_ms", wall);
    plot_point(ctx, id + ":test_count", z, tests);
    plot_point(ctx, id + ":wall_time_ms", z, wall);
  }
  aggregate_metric(ctx, id, "all", "f1", all_f1);
  aggregate_metric(ctx, id, "all", "precision", all_prec);
  aggregate_metric(ctx, id, "all", "recall", all_rec);
  aggregate_metric(ctx, id, "all", "sdc_accuracy", all_sdc);
}

// ---- fixture_grid: sample-size sweep on a fixture SCM -------------------

void run_fixture_grid(const json& cell, SuiteContext& ctx,
                      const std::function<void(std::function<void()>)>& submit,
                      std::mutex& mu) {
  std::string id = cell.at("id");
  std::string fixture = cell.at("fixture");
  double direct = cell.value("direct_effect", 1.25);
  uint64_t scm_seed = cell.value("scm_seed", 5);
  auto n_grid = cell.at("n_grid").get<std::vector<long>>();
  int replicates = cell.value("replicates", 10);
  bool no_edge_variant = cell.value("include_no_edge_variant", false);
  bool estimate = cell.value("estimator", std::string("ols")) == "ols";
  Ld3Config cfg;
  cfg.alpha = cell.value("alpha", 0.01);
  cfg.test = test_kind_from_string(cell.value("test", std::string("fisherz")));
  cfg.sdc_conditioning = sdc_conditioning_from_string(
      cell.value("sdc_conditioning", std::string("full_a_de")));

  std::vector<bool> variants{true};
  if (no_edge_variant) variants.push_back(false);
  for (bool with_edge : variants) {
    for (long n : n_grid) {
      for (int rep = 0; rep < replicates; ++rep) {
        submit([&ctx, &mu, id, fixture, direct, scm_seed, with_edge, n, rep,
                cfg, estimate]() {
          Dag g = fixture_by_id(fixture, with_edge);
          LinearGaussianScm scm =
              LinearGaussianScm::random(g, scm_seed, direct);
          uint64_t seed = 0xC0FFEEULL + 7919ULL * rep + 13ULL * n +
                          (with_edge ? 0 : 1000000007ULL);
          Dataset data = scm.sample(n, seed);
          std::vector<std::string> z;
          for (const auto& name : g.nodes())
            if (name != "X" && name != "Y") z.push_back(name);
          auto report = run_ld3(data, "X", "Y", z, cfg);
          json row = ld3_row(report, g);
          row["cell"] = id;
          row["variant"] = with_edge ? "edge" : "no_edge";
          row["n"] = n;
          row["replicate"] = rep;
          if (estimate) {
            auto est =
                wcde_ols(data, "X", "Y", AdjustmentSpec::plain(report.a_de));
            row["wcde_a_de"] = est.value;
            auto est_all = wcde_ols(data, "X", "Y", AdjustmentSpec::plain(z));
            row["wcde_all_z"] = est_all.value;
          }
          std::ostringstream key;
          key << id << "|" << (with_edge ? "edge" : "noed") << "|"
              << std::setw(8) << std::setfill('0') << n << "|" << std::setw(4)
              << rep;
          std::lock_guard<std::mutex> lock(mu);
          ctx.rows.push_back({key.str(), std::move(row)});
        });
      }
    }
  }
}

void aggregate_fixture_grid(const json& cell, SuiteContext& ctx) {
  std::string id = cell.at("id");
  std::map<std::pair<std::string, long>, std::vector<json>> groups;
  for (const auto& row : ctx.rows)
    if (row.data.at("cell") == id)
      groups[{row.data.at("variant").get<std::string>(),
              row.data.at("n").get<long>()}]
          .push_back(row.data);
  for (const auto& [key, rows] : groups) {
    const auto& [variant, n] = key;
    std::vector<double> f1, sdc_ok, wcde;
    for (const auto& r : rows) {
      f1.push_back(r.at("f1").get<double>());
      sdc_ok.push_back(r.at("sdc_correct").get<double>());
      if (r.contains("wcde_a_de"))
        wcde.push_back(r.at("wcde_a_de").get<double>());
    }
    std::string group = variant + ",n=" + std::to_string(n);
    aggregate_metric(ctx, id, group, "f1", f1);
    aggregate_metric(ctx, id, group, "sdc_accuracy", sdc_ok);
    if (!wcde.empty()) aggregate_metric(ctx, id, group, "wcde", wcde);
    plot_point(ctx, id + ":f1:" + variant, static_cast<double>(n), f1);
    plot_point(ctx, id + ":sdc_accuracy:" + variant, static_cast<double>(n),
               sdc_ok);
    if (!wcde.empty())
      plot_point(ctx, id + ":wcde:" + variant, static_cast<double>(n), wcde);
  }
}

// ---- latent_drop: remove one column, rerun, score vs truth-minus-latent --

void run_latent_drop(const json& cell, SuiteContext& ctx,
                     const std::function<void(std::function<void()>)>& submit,
                     std::mutex& mu) {
  std::string id = cell.at("id");
  std::string fixture = cell.at("fixture");
  double direct = cell.value("direct_effect", 1.25);
  uint64_t scm_seed = cell.value("scm_seed", 5);
  long n = cell.value("n", 50000);
  int replicates = cell.value("replicates", 10);
  auto drops = cell.at("drops").get<std::vector<std::string>>();
  Ld3Config cfg;
  cfg.alpha = cell.value("alpha", 0.01);
  cfg.test = test_kind_from_string(cell.value("test", std::string("fisherz")));

  for (const auto& drop : drops) {
    for (int rep = 0; rep < replicates; ++rep) {
      submit([&ctx, &mu, id, fixture, direct, scm_seed, n, rep, drop,
              cfg]() {
        Dag g = fixture_by_id(fixture, true);
        LinearGaussianScm scm = LinearGaussianScm::random(g, scm_seed, direct);
        Dataset data =
            scm.sample(n, 0xABCDULL + 104729ULL * rep).without_column(drop);
        std::vector<std::string> z;
        for (const auto& name : g.nodes())
          if (name != "X" && name != "Y" && name != drop) z.push_back(name);
        auto report = run_ld3(data, "X", "Y", z, cfg);
        auto truth = oracle_a_de(g);
        truth.erase(std::remove(truth.begin(), truth.end(), drop),
                    truth.end());
        auto metrics = score_parents(report.a_de, truth);
        json row;
        row["cell"] = id;
        row["drop"] = drop;
        row["replicate"] = rep;
        row["a_de"] = report.a_de;
        row["truth_minus_latent"] = truth;
        row["f1"] = metrics.f1;
        row["precision"] = metrics.precision;
        row["recall"] = metrics.recall;
        row["sdc_correct"] = report.sdc == 1 ? 1.0 : 0.0;
        auto est = wcde_ols(data, "X", "Y", AdjustmentSpec::plain(report.a_de));
        row["wcde"] = est.value;
        std::ostringstream key;
        key << id << "|" << drop << "|" << std::setw(4) << std::setfill('0')
            << rep;
        std::lock_guard<std::mutex> lock(mu);
        ctx.rows.push_back({key.str(), std::move(row)});
      });
    }
  }
}

void aggregate_latent_drop(const json& cell, SuiteContext& ctx) {
  std::string id = cell.at("id");
  std::map<std::string, std::vector<json>> by_drop;
  for (const auto& row : ctx.rows)
    if (row.data.at("cell") == id)
      by_drop[row.data.at("drop").get<std::string>()].push_back(row.data);
  for (const auto& [drop, rows] : by_drop) {
    std::vector<double> f1, prec, rec, sdc, wcde;
    for (const auto& r : rows) {
      f1.push_back(r.at("f1").get<double>());
      prec.push_back(r.at("precision").get<double>());
      rec.push_back(r.at("recall").get<double>());
      sdc.push_back(r.at("sdc_correct").get<double>());
      wcde.push_back(r.at("wcde").get<double>());
    }
    std::string group = "latent=" + drop;
    aggregate_metric(ctx, id, group, "wcde", wcde);
    aggregate_metric(ctx, id, group, "sdc_accuracy", sdc);
    aggregate_metric(ctx, id, group, "f1", f1);
    aggregate_metric(ctx, id, group, "precision", prec);
    aggregate_metric(ctx, id, group, "recall", rec);
  }
}

// ---- variance: adjustment-set comparison on a fixture -------------------

void run_variance(const json& cell, SuiteContext& ctx,
                  const std::function<void(std::function<void()>)>& submit,
                  std::mutex& mu) {
  std::string id = cell.at("id");
  std::string fixture = cell.at("fixture");
  double direct = cell.value("direct_effect", 7.0);
  uint64_t scm_seed = cell.value("scm_seed", 11);
  auto n_grid = cell.at("n_grid").get<std::vector<long>>();
  int replicates = cell.value("replicates", 100);

  for (long n : n_grid) {
    for (int rep = 0; rep < replicates; ++rep) {
      submit([&ctx, &mu, id, fixture, direct, scm_seed, n, rep]() {
        Dag g = fixture_by_id(fixture, true);
        LinearGaussianScm scm = LinearGaussianScm::random(g, scm_seed, direct);
        Dataset data = scm.sample(n, 0xFEEDULL + 15485863ULL * rep + n);
        auto a_de = oracle_a_de(g);
        std::vector<std::string> z;
        for (const auto& name : g.nodes())
          if (name != "X" && name != "Y") z.push_back(name);
        auto est_a = wcde_ols(data, "X", "Y", AdjustmentSpec::plain(a_de));
        auto est_z = wcde_ols(data, "X", "Y", AdjustmentSpec::plain(z));
        json row;
        row["cell"] = id;
        row["n"] = n;
        row["replicate"] = rep;
        row["wcde_a_de"] = est_a.value;
        row["wcde_all_z"] = est_z.value;
        std::ostringstream key;
        key << id << "|" << std::setw(8) << std::setfill('0') << n << "|"
            << std::setw(4) << rep;
        std::lock_guard<std::mutex> lock(mu);
        ctx.rows.push_back({key.str(), std::move(row)});
      });
    }
  }
}

void aggregate_variance(const json& cell, SuiteContext& ctx) {
  std::string id = cell.at("id");
  std::map<long, std::vector<json>> by_n;
  for (const auto& row : ctx.rows)
    if (row.data.at("cell") == id)
      by_n[row.data.at("n").get<long>()].push_back(row.data);
  for (const auto& [n, rows] : by_n) {
    std::vector<double> a_de, all_z;
    for (const auto& r : rows) {
      a_de.push_back(r.at("wcde_a_de").get<double>());
      all_z.push_back(r.at("wcde_all_z").get<double>());
    }
    std::string group = "n=" + std::to_string(n);
    aggregate_metric(ctx, id, group, "wcde_a_de", a_de);
    aggregate_metric(ctx, id, group, "wcde_all_z", all_z);
    double ratio = variance_of(all_z) / std::max(variance_of(a_de), 1e-300);
    ctx.aggregates.push_back({{"cell", id},
                              {"group", group},
                              {"metric", "variance_ratio_allz_over_ade"},
                              {"mean", ratio},
                              {"ci_lo", ratio},
                              {"ci_hi", ratio},
                              {"n", rows.size()}});
    plot_point(ctx, id + ":variance_ratio", static_cast<double>(n), {ratio});
  }
}

}  // namespace

namespace {
void run_suite(json suite, const std::string& out_dir, int threads);
}  // namespace

void run_benchmark(const std::string& suite_path, const std::string& out_dir,
                   int threads) {
  run_suite(json::parse(read_text_file(suite_path)), out_dir, threads);
}

void run_benchmark_with_default_seed(const std::string& suite_path,
                                     const std::string& out_dir, int threads,
                                     uint64_t default_seed) {
  json suite = json::parse(read_text_file(suite_path));
  if (suite.contains("cells"))
    for (auto& cell : suite.at("cells")) {
      if (!cell.contains("seed")) cell["seed"] = default_seed;
      if (!cell.contains("scm_seed")) cell["scm_seed"] = default_seed;
    }
  run_suite(std::move(suite), out_dir, threads);
}

namespace {

void run_suite(json suite, const std::string& out_dir, int threads) {
  if (!suite.contains("cells") || !suite.at("cells").is_array())
    throw std::invalid_argument("suite spec needs a cells array");
  for (const auto& cell : suite.at("cells")) {
    std::string kind = cell.at("kind");
    if (kind != "oracle_er" && kind != "fixture_grid" &&
        kind != "latent_drop" && kind != "variance")
      throw std::invalid_argument("unknown cell kind: " + kind);
    if ((kind == "fixture_grid" || kind == "latent_drop" ||
         kind == "variance") &&
        !is_known_fixture(cell.at("fixture")))
      throw std::invalid_argument(
          "unknown fixture id: " + cell.at("fixture").get<std::string>());
  }

  SuiteContext ctx;
  std::mutex mu;
  std::vector<std::function<void()>> jobs;
  auto submit = [&](std::function<void()> job) {
    jobs.push_back(std::move(job));
  };

  for (const auto& cell : suite.at("cells")) {
    std::string kind = cell.at("kind");
    if (kind == "oracle_er") run_oracle_er(cell, ctx, submit, mu);
    if (kind == "fixture_grid") run_fixture_grid(cell, ctx, submit, mu);
    if (kind == "latent_drop") run_latent_drop(cell, ctx, submit, mu);
    if (kind == "variance") run_variance(cell, ctx, submit, mu);
  }

  int workers = threads > 0
                    ? threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, jobs.size()));
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        try {
          jobs[i]();
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::sort(ctx.rows.begin(), ctx.rows.end(),
            [](const Row& a, const Row& b) { return a.sort_key < b.sort_key; });

  for (const auto& cell : suite.at("cells")) {
    std::string kind = cell.at("kind");
    if (kind == "oracle_er") aggregate_oracle_er(cell, ctx);
    if (kind == "fixture_grid") aggregate_fixture_grid(cell, ctx);
    if (kind == "latent_drop") aggregate_latent_drop(cell, ctx);
    if (kind == "variance") aggregate_variance(cell, ctx);
  }

  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir + "/cells.jsonl");
    for (const auto& row : ctx.rows) out << row.data.dump() << "\n";
  }
  {
    std::ofstream out(out_dir + "/aggregate.csv");
    out << "cell,group,metric,mean,ci_lo,ci_hi,n\n";
    out.precision(10);
    for (const auto& a : ctx.aggregates)
      out << a.at("cell").get<std::string>() << ","
          << "\"" << a.at("group").get<std::string>() << "\","
          << a.at("metric").get<std::string>() << ","
          << a.at("mean").get<double>() << "," << a.at("ci_lo").get<double>()
          << "," << a.at("ci_hi").get<double>() << ","
          << a.at("n").get<size_t>() << "\n";
  }
  {
    std::ofstream out(out_dir + "/plotdata.csv");
    out << "series,x,y,ci_lo,ci_hi\n";
    out.precision(10);
    for (const auto& p : ctx.plot)
      out << p.at("series").get<std::string>() << "," << p.at("x").get<double>()
          << "," << p.at("y").get<double>() << ","
          << p.at("ci_lo").get<double>() << "," << p.at("ci_hi").get<double>()
          << "\n";
  }
}

}  // namespace

}  // namespace ld3

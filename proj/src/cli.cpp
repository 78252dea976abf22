#include "ld3/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "ld3/dataset.hpp"
#include "ld3/estimate.hpp"
#include "ld3/evalkit.hpp"
#include "ld3/fixtures.hpp"
#include "ld3/ld3.hpp"
#include "ld3/scm.hpp"

namespace ld3::cli {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitSdcDetected = 3;
constexpr int kExitEstimation = 4;

struct DiscoverArgs {
  std::string data_path, schema_path, x, y, out = "report.json", trace_path;
  std::vector<std::string> z;
  std::vector<std::string> bins;  // col=k
  std::string test = "fisherz";
  std::string sdc_conditioning = "full_a_de";
  double alpha = 0.01;
};

Dataset load_dataset(const std::string& data_path,
                     const std::string& schema_path,
                     const std::vector<std::string>& bins) {
  Dataset data = Dataset::from_csv(read_text_file(data_path),
                                   read_text_file(schema_path));
  for (const auto& spec : bins) {
    auto eq = spec.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--bin expects col=k, got: " + spec);
    data.bin_column(spec.substr(0, eq), std::stoi(spec.substr(eq + 1)));
  }
  return data;
}

Ld3Report discover(const DiscoverArgs& args, const Dataset& data) {
  if (args.x == args.y)
    throw std::invalid_argument("exposure and outcome must differ");
  std::vector<std::string> z = args.z;
  if (z.empty()) {
    for (const auto& name : data.column_names())
      if (name != args.x && name != args.y) z.push_back(name);
  }
  Ld3Config cfg;
  cfg.alpha = args.alpha;
  cfg.test = test_kind_from_string(args.test);
  cfg.sdc_conditioning = sdc_conditioning_from_string(args.sdc_conditioning);
  cfg.record_trace = !args.trace_path.empty();
  Ld3Report report = run_ld3(data, args.x, args.y, z, cfg);
  if (!args.trace_path.empty())
    write_text_file(args.trace_path, report.trace_jsonl());
  return report;
}

struct EstimateArgs {
  std::string estimator = "ols";
  std::string adjust;       // comma-separated covariates
  std::string from_report;  // report JSON with an a_de field
  std::string split_path;   // JSON {"s_set": [], "m_set": []}
  int x_val = 1, x_star = 0;
  uint64_t bootstrap_seed = 0;
};

WcdeEstimate estimate(const EstimateArgs& args, const Dataset& data,
                      const std::string& x, const std::string& y,
                      const std::vector<std::string>& a_de_hint) {
  std::vector<std::string> covariates;
  if (!args.adjust.empty()) {
    std::istringstream in(args.adjust);
    std::string tok;
    while (std::getline(in, tok, ','))
      if (!tok.empty()) covariates.push_back(tok);
  } else if (!args.from_report.empty()) {
    auto j = json::parse(read_text_file(args.from_report));
    covariates = j.at("a_de").get<std::vector<std::string>>();
  } else {
    covariates = a_de_hint;
  }

  if (args.estimator == "ols")
    return wcde_ols(data, x, y, AdjustmentSpec::plain(covariates));
  if (args.estimator != "stratified")
    throw std::invalid_argument("unknown estimator: " + args.estimator);
  if (args.split_path.empty())
    throw std::invalid_argument(
        "stratified estimation needs --split (JSON with s_set and m_set)");
  auto split = json::parse(read_text_file(args.split_path));
  auto spec = AdjustmentSpec::with_split(
      split.at("s_set").get<std::vector<std::string>>(),
      split.at("m_set").get<std::vector<std::string>>());
  StratifiedOptions opt;
  opt.bootstrap_seed = args.bootstrap_seed;
  return wcde_stratified(data, x, y, args.x_val, args.x_star, spec, opt);
}

int cmd_simulate(const std::string& fixture, const std::string& scm_path,
                 long n, uint64_t seed, uint64_t scm_seed, double direct,
                 bool no_direct_edge, const std::string& out_prefix) {
  if (fixture.empty() == scm_path.empty())
    throw std::invalid_argument("pass exactly one of --fixture or --scm");

  std::string scm_json;
  Dataset data;
  if (!fixture.empty()) {
    Dag g = fixture_by_id(fixture, !no_direct_edge);
    auto scm = LinearGaussianScm::random(g, scm_seed, direct);
    data = scm.sample(n, seed);
    scm_json = scm.to_json();
  } else {
    auto text = read_text_file(scm_path);
    auto kind = json::parse(text).value("kind", std::string());
    if (kind == "linear_gaussian") {
      auto scm = LinearGaussianScm::from_json(text);
      data = scm.sample(n, seed);
      scm_json = scm.to_json();
    } else if (kind == "discrete") {
      auto scm = DiscreteScm::from_json(text);
      data = scm.sample(n, seed);
      scm_json = scm.to_json();
    } else {
      throw std::invalid_argument("unrecognized model kind in " + scm_path);
    }
  }
  write_text_file(out_prefix + ".csv", data.to_csv());
  write_text_file(out_prefix + ".schema.json", data.schema_json());
  write_text_file(out_prefix + ".scm.json", scm_json);
  std::cout << "wrote " << out_prefix << ".csv (" << data.n_rows() << " rows, "
            << data.n_cols() << " columns)\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{
      "Local discovery of an outcome's parents, direct-discrimination "
      "verdicts, and weighted controlled direct effect estimation"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Sample a dataset from a model");
  std::string sim_fixture, sim_scm, sim_out = "sim";
  long sim_n = 0;
  uint64_t sim_seed = 0, sim_scm_seed = 5;
  double sim_direct = 1.25;
  bool sim_no_edge = false;
  sim->add_option("--fixture", sim_fixture, "fixture id (fig_c1 | fig_d5)");
  sim->add_option("--scm", sim_scm, "model JSON path");
  sim->add_option("--n", sim_n, "rows to sample")->required();
  sim->add_option("--seed", sim_seed, "sampling seed")->required();
  sim->add_option("--scm-seed", sim_scm_seed,
                  "seed for fixture coefficient draws");
  sim->add_option("--direct-effect", sim_direct,
                  "pinned coefficient for the designated direct edge");
  sim->add_flag("--no-direct-edge", sim_no_edge,
                "build the fixture without the direct edge");
  sim->add_option("--out", sim_out, "output path prefix");

  // discover
  auto* disc = app.add_subcommand("discover", "Run parent discovery");
  DiscoverArgs d;
  disc->add_option("--data", d.data_path, "CSV path")->required();
  disc->add_option("--schema", d.schema_path, "schema sidecar JSON")
      ->required();
  disc->add_option("--x", d.x, "exposure column")->required();
  disc->add_option("--y", d.y, "outcome column")->required();
  disc->add_option("--z", d.z, "candidate columns (default: all others)");
  disc->add_option("--test", d.test, "fisherz | chi2");
  disc->add_option("--alpha", d.alpha, "significance level");
  disc->add_option("--sdc-conditioning", d.sdc_conditioning,
                   "paper_exact | full_a_de");
  disc->add_option("--bin", d.bins,
                   "quantile-bin a continuous column, col=k (repeatable)");
  disc->add_option("--out", d.out, "report JSON path");
  disc->add_option("--trace", d.trace_path, "per-query trace JSONL path");

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate the weighted effect");
  DiscoverArgs e_common;
  EstimateArgs e;
  std::string est_out = "estimate.json";
  est->add_option("--data", e_common.data_path, "CSV path")->required();
  est->add_option("--schema", e_common.schema_path, "schema sidecar JSON")
      ->required();
  est->add_option("--x", e_common.x, "exposure column")->required();
  est->add_option("--y", e_common.y, "outcome column")->required();
  est->add_option("--bin", e_common.bins, "col=k (repeatable)");
  est->add_option("--estimator", e.estimator, "ols | stratified");
  est->add_option("--adjust", e.adjust, "comma-separated covariates");
  est->add_option("--from-report", e.from_report,
                  "take covariates from a discovery report");
  est->add_option("--split", e.split_path,
                  "JSON with s_set/m_set for the stratified estimator");
  est->add_option("--x-val", e.x_val, "treated exposure level");
  est->add_option("--x-star", e.x_star, "control exposure level");
  est->add_option("--bootstrap-seed", e.bootstrap_seed, "bootstrap seed");
  est->add_option("--out", est_out, "estimate JSON path");

  // audit
  auto* aud = app.add_subcommand("audit", "Discover, then estimate");
  DiscoverArgs a;
  EstimateArgs ae;
  std::string aud_out = "audit.json";
  aud->add_option("--data", a.data_path, "CSV path")->required();
  aud->add_option("--schema", a.schema_path, "schema sidecar JSON")
      ->required();
  aud->add_option("--x", a.x, "exposure column")->required();
  aud->add_option("--y", a.y, "outcome column")->required();
  aud->add_option("--z", a.z, "candidate columns (default: all others)");
  aud->add_option("--test", a.test, "fisherz | chi2");
  aud->add_option("--alpha", a.alpha, "significance level");
  aud->add_option("--sdc-conditioning", a.sdc_conditioning,
                  "paper_exact | full_a_de");
  aud->add_option("--bin", a.bins, "col=k (repeatable)");
  aud->add_option("--estimator", ae.estimator, "ols | stratified");
  aud->add_option("--split", ae.split_path, "s_set/m_set JSON");
  aud->add_option("--x-val", ae.x_val, "treated exposure level");
  aud->add_option("--x-star", ae.x_star, "control exposure level");
  aud->add_option("--bootstrap-seed", ae.bootstrap_seed, "bootstrap seed");
  aud->add_option("--out", aud_out, "combined JSON path");
  aud->add_option("--trace", a.trace_path, "per-query trace JSONL path");

  // bench
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
  std::string bench_suite, bench_out = "bench_out";
  uint64_t bench_seed = 0;
  int bench_threads = 0;
  bench->add_option("--suite", bench_suite, "suite spec JSON")->required();
  bench->add_option("--seed", bench_seed, "seed for cells that omit one")
      ->required();
  bench->add_option("--out", bench_out, "output directory");
  bench->add_option("--threads", bench_threads, "worker count (0 = auto)");

  std::vector<std::string> argv_copy(args.rbegin(), args.rend());
  try {
    app.parse(argv_copy);
  } catch (const CLI::CallForHelp& help) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& err) {
    std::cerr << err.what() << "\n";
    return kExitUsage;
  }

  try {
    if (sim->parsed()) {
      if (sim_n < 1) throw std::invalid_argument("--n must be >= 1");
      return cmd_simulate(sim_fixture, sim_scm, sim_n, sim_seed, sim_scm_seed,
                          sim_direct, sim_no_edge, sim_out);
    }
    if (disc->parsed()) {
      Dataset data = load_dataset(d.data_path, d.schema_path, d.bins);
      Ld3Report report = discover(d, data);
      write_text_file(d.out, report.to_json());
      std::cout << "sdc=" << report.sdc << " |a_de|=" << report.a_de.size()
                << " tests=" << report.test_count << "\n";
      return report.sdc == 1 ? kExitSdcDetected : kExitOk;
    }
    if (est->parsed()) {
      Dataset data =
          load_dataset(e_common.data_path, e_common.schema_path,
                       e_common.bins);
      WcdeEstimate result;
      try {
        result = estimate(e, data, e_common.x, e_common.y, {});
      } catch (const std::runtime_error& err) {
        std::cerr << "estimation failed: " << err.what() << "\n";
        return kExitEstimation;
      }
      write_text_file(est_out, result.to_json());
      std::cout << "wcde=" << result.value << " p=" << result.p_value << "\n";
      return kExitOk;
    }
    if (aud->parsed()) {
      Dataset data = load_dataset(a.data_path, a.schema_path, a.bins);
      Ld3Report report = discover(a, data);
      WcdeEstimate result;
      try {
        result = estimate(ae, data, a.x, a.y, report.a_de);
      } catch (const std::runtime_error& err) {
        std::cerr << "estimation failed: " << err.what() << "\n";
        return kExitEstimation;
      }
      json combined;
      combined["report"] = json::parse(report.to_json());
      combined["estimate"] = json::parse(result.to_json());
      write_text_file(aud_out, combined.dump(2));
      std::cout << "sdc=" << report.sdc << " wcde=" << result.value
                << " p=" << result.p_value << "\n";
      return report.sdc == 1 ? kExitSdcDetected : kExitOk;
    }
    if (bench->parsed()) {
      if (!std::filesystem::exists(bench_suite))
        throw std::invalid_argument("suite file not found: " + bench_suite);
      run_benchmark_with_default_seed(bench_suite, bench_out, bench_threads,
                                      bench_seed);
      std::cout << "wrote " << bench_out << "/{cells.jsonl,aggregate.csv,"
                << "plotdata.csv}\n";
      return kExitOk;
    }
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitEstimation;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace ld3::cli

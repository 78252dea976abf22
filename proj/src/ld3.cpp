#include "ld3/ld3.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "json.hpp"

namespace ld3 {

TestKind test_kind_from_string(const std::string& s) {
  if (s == "fisherz") return TestKind::FisherZ;
  if (s == "chi2") return TestKind::Chi2;
  if (s == "oracle") return TestKind::Oracle;
  throw std::invalid_argument("unknown test kind: " + s);
}

const char* to_string(TestKind t) {
  switch (t) {
    case TestKind::FisherZ: return "fisherz";
    case TestKind::Chi2: return "chi2";
    case TestKind::Oracle: return "oracle";
  }
  return "?";
}

SdcConditioning sdc_conditioning_from_string(const std::string& s) {
  if (s == "paper_exact") return SdcConditioning::PaperExact;
  if (s == "full_a_de") return SdcConditioning::FullADe;
  throw std::invalid_argument("unknown sdc conditioning mode: " + s);
}

const char* to_string(SdcConditioning s) {
  return s == SdcConditioning::PaperExact ? "paper_exact" : "full_a_de";
}

namespace {

class Runner {
 public:
  Runner(CiTest& test, const Ld3Config& cfg, Ld3Report& report)
      : test_(test), cfg_(cfg), report_(report) {}

  CiDecision ask(const char* step, const std::string& a, const std::string& b,
                 std::vector<std::string> s) {
    CiQuery q{a, b, std::move(s), cfg_.alpha};
    CiDecision d = test_(q);
    if (d.degenerate) ++report_.degenerate_queries;
    if (cfg_.record_trace) report_.trace.push_back({step, q, d});
    return d;
  }

 private:
  CiTest& test_;
  const Ld3Config& cfg_;
  Ld3Report& report_;
};

}  // namespace

Ld3Report run_ld3(CiTest& test, const std::string& x, const std::string& y,
                  const std::vector<std::string>& z, const Ld3Config& cfg) {
  if (x == y) throw std::invalid_argument("exposure and outcome must differ");
  for (const auto& v : z)
    if (v == x || v == y)
      throw std::invalid_argument("candidate set must exclude x and y");
  test.check_column(x);
  test.check_column(y);
  for (const auto& v : z) test.check_column(v);

  auto t0 = std::chrono::steady_clock::now();
  test.reset_counter();

  Ld3Report report;
  report.alpha = cfg.alpha;
  report.test = cfg.test;
  Runner run(test, cfg, report);

  std::vector<std::string> remaining;  // candidate parents, input order
  std::vector<std::string> z4;
  for (const auto& v : z) {
    // Disconnected screen: independent of both x and y.
    CiDecision vx = run.ask("screen_disconnected_x", v, x, {});
    if (vx.independent) {
      CiDecision vy = run.ask("screen_disconnected_y", v, y, {});
      if (vy.independent) {
        report.labels[v] = Partition::Z8;
        continue;
      }
    }
    // Exposure-channel screen: y-association present but gone given x.
    CiDecision vy = run.ask("screen_x_channel_marginal", v, y, {});
    if (!vy.independent) {
      CiDecision vyx = run.ask("screen_x_channel_given_x", v, y, {x});
      if (vyx.independent) {
        report.labels[v] = Partition::Z5or7;
        continue;
      }
    }
    // X-independent screen: no marginal x-association, but one appears
    // when y is held fixed.
    CiDecision vx2 = run.ask("screen_x_independent_marginal", v, x, {});
    if (vx2.independent) {
      CiDecision vxy = run.ask("screen_x_independent_given_y", v, x, {y});
      if (!vxy.independent) {
        report.labels[v] = Partition::Z4;
        z4.push_back(v);
        continue;
      }
    }
    remaining.push_back(v);
  }

  // Adjacency to y among the unscreened candidates, controlling for x, the
  // x-independent screenees, and every other unscreened candidate.
  std::vector<std::string> parents_13;
  for (const auto& v : remaining) {
    std::vector<std::string> cond{x};
    cond.insert(cond.end(), z4.begin(), z4.end());
    for (const auto& w : remaining)
      if (w != v) cond.push_back(w);
    CiDecision d = run.ask("parent_confounder_mediator", v, y, cond);
    if (!d.independent) {
      report.labels[v] = Partition::Z1or3Parent;
      parents_13.push_back(v);
    } else {
      report.labels[v] = Partition::Unresolved;
    }
  }

  // Adjacency to y among the x-independent screenees.
  std::vector<std::string> parents_4;
  for (const auto& v : z4) {
    std::vector<std::string> cond{x};
    cond.insert(cond.end(), parents_13.begin(), parents_13.end());
    for (const auto& w : z4)
      if (w != v) cond.push_back(w);
    CiDecision d = run.ask("parent_x_independent", v, y, cond);
    if (!d.independent) {
      report.labels[v] = Partition::Z4Parent;
      parents_4.push_back(v);
    }
  }

  report.a_de = parents_13;
  report.a_de.insert(report.a_de.end(), parents_4.begin(), parents_4.end());
  std::sort(report.a_de.begin(), report.a_de.end());

  std::vector<std::string> sdc_cond = parents_13;
  if (cfg.sdc_conditioning == SdcConditioning::FullADe)
    sdc_cond.insert(sdc_cond.end(), parents_4.begin(), parents_4.end());
  CiDecision sdc = run.ask("direct_edge", x, y, sdc_cond);
  report.sdc = sdc.independent ? 0 : 1;

  report.test_count = test.counter().total;
  report.tests_by_conditioning_size = test.counter().by_conditioning_size;
  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(
          std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

Ld3Report run_ld3(const Dataset& data, const std::string& x,
                  const std::string& y, const std::vector<std::string>& z,
                  const Ld3Config& cfg) {
  if (cfg.test == TestKind::Oracle)
    throw std::invalid_argument(
        "oracle test needs a graph; use the Dag overload");
  if (cfg.test == TestKind::FisherZ) {
    FisherZTest test(data);
    return run_ld3(test, x, y, z, cfg);
  }
  ChiSquareTest test(data);
  return run_ld3(test, x, y, z, cfg);
}

Ld3Report run_ld3(const Dag& g, const Ld3Config& cfg) {
  if (!g.exposure() || !g.outcome())
    throw std::invalid_argument("graph has no designated exposure/outcome");
  std::vector<std::string> z;
  for (int v = 0; v < g.num_nodes(); ++v)
    if (v != *g.exposure() && v != *g.outcome()) z.push_back(g.name(v));
  return run_ld3(g, z, cfg);
}

Ld3Report run_ld3(const Dag& g, const std::vector<std::string>& z,
                  const Ld3Config& cfg) {
  if (!g.exposure() || !g.outcome())
    throw std::invalid_argument("graph has no designated exposure/outcome");
  Ld3Config oracle_cfg = cfg;
  oracle_cfg.test = TestKind::Oracle;
  OracleCiTest test(g);
  return run_ld3(test, g.name(*g.exposure()), g.name(*g.outcome()), z,
                 oracle_cfg);
}

int evaluate_sdc(CiTest& test, const std::string& x, const std::string& y,
                 const std::vector<std::string>& conditioning, double alpha) {
  CiQuery q{x, y, conditioning, alpha};
  return test(q).independent ? 0 : 1;
}

std::string Ld3Report::to_json() const {
  nlohmann::json j;
  nlohmann::json labels_json;
  for (const auto& [name, label] : labels)
    labels_json[name] = to_string(label);
  j["labels"] = labels_json;
  j["a_de"] = a_de;
  j["sdc"] = sdc;
  j["test_count"] = test_count;
  nlohmann::json hist;
  for (const auto& [size, count] : tests_by_conditioning_size)
    hist[std::to_string(size)] = count;
  j["tests_by_conditioning_size"] = hist;
  j["degenerate_queries"] = degenerate_queries;
  j["wall_time_ms"] = wall_time_ms;
  j["alpha"] = alpha;
  j["test"] = to_string(test);
  return j.dump(2);
}

std::string Ld3Report::trace_jsonl() const {
  std::string out;
  for (const auto& entry : trace) {
    nlohmann::json j;
    j["step"] = entry.step;
    j["a"] = entry.query.a;
    j["b"] = entry.query.b;
    j["s"] = entry.query.s;
    j["independent"] = entry.decision.independent;
    j["p_value"] = entry.decision.p_value;
    j["statistic"] = entry.decision.statistic;
    j["degenerate"] = entry.decision.degenerate;
    out += j.dump();
    out += "\n";
  }
  return out;
}

}  // namespace ld3

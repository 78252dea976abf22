#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ld3/citest.hpp"
#include "ld3/dataset.hpp"
#include "ld3/graph.hpp"

namespace ld3 {

struct ParentMetrics {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double sdc_accuracy = std::numeric_limits<double>::quiet_NaN();
};

/// Set-based precision/recall/F1 of a predicted parent set against the
/// ground truth. Empty-vs-empty scores 1; empty against nonempty scores 0.
ParentMetrics score_parents(const std::vector<std::string>& predicted,
                            const std::vector<std::string>& truth);

/// Markov-boundary baseline: keeps every candidate that stays dependent on
/// y given x and all the other candidates. Performs exactly |z| tests.
std::vector<std::string> brute_force_parents(CiTest& test,
                                             const std::string& x,
                                             const std::string& y,
                                             const std::vector<std::string>& z,
                                             double alpha);
std::vector<std::string> brute_force_parents(const Dag& g, double alpha = 0.01);

/// Runs a benchmark suite (JSON spec) and writes cells.jsonl, aggregate.csv,
/// and plotdata.csv under out_dir. Cells execute on a work pool; outputs are
/// deterministic for a fixed spec. threads <= 0 means hardware concurrency.
void run_benchmark(const std::string& suite_path, const std::string& out_dir,
                   int threads = 0);

/// Same, but cells that omit seed/scm_seed inherit default_seed first.
void run_benchmark_with_default_seed(const std::string& suite_path,
                                     const std::string& out_dir, int threads,
                                     uint64_t default_seed);

}  // namespace ld3

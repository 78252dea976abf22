#pragma once

#include <map>
#include <string>
#include <vector>

#include "ld3/citest.hpp"
#include "ld3/dataset.hpp"
#include "ld3/graph.hpp"
#include "ld3/partition.hpp"

namespace ld3 {

enum class TestKind { FisherZ, Chi2, Oracle };
TestKind test_kind_from_string(const std::string& s);
const char* to_string(TestKind t);

/// Conditioning set for the final direct-edge check. PaperExact conditions
/// on the confounder/mediator parents only; FullADe adds the Z4 parents,
/// which also blocks collider-opened routes through them.
enum class SdcConditioning { PaperExact, FullADe };
SdcConditioning sdc_conditioning_from_string(const std::string& s);
const char* to_string(SdcConditioning s);

struct Ld3Config {
  double alpha = 0.01;
  TestKind test = TestKind::FisherZ;
  SdcConditioning sdc_conditioning = SdcConditioning::FullADe;
  bool record_trace = false;
};

struct TraceEntry {
  std::string step;
  CiQuery query;
  CiDecision decision;
};

struct Ld3Report {
  std::map<std::string, Partition> labels;
  std::vector<std::string> a_de;  // sorted
  int sdc = 0;
  long test_count = 0;
  std::map<int, long> tests_by_conditioning_size;
  long degenerate_queries = 0;
  double wall_time_ms = 0.0;
  double alpha = 0.0;
  TestKind test = TestKind::Oracle;
  std::vector<TraceEntry> trace;

  std::string to_json() const;
  std::string trace_jsonl() const;
};

/// Sequential partition screening around (x, y): variables disconnected from
/// the pair, variables whose y-association dies given x, and x-independent
/// variables are set aside first; the rest are tested for adjacency to y
/// with everything else controlled, and the surviving Z4 members get the
/// same adjacency check. The parents found form the adjustment set, and a
/// final x–y test given that set decides the direct-edge verdict.
Ld3Report run_ld3(CiTest& test, const std::string& x, const std::string& y,
                  const std::vector<std::string>& z, const Ld3Config& cfg);

/// Convenience: builds the configured data-driven test. cfg.test must not be
/// Oracle here. Column types are checked before any test runs.
Ld3Report run_ld3(const Dataset& data, const std::string& x,
                  const std::string& y, const std::vector<std::string>& z,
                  const Ld3Config& cfg);

/// Convenience: oracle run on a designated graph; z defaults to every node
/// except x and y.
Ld3Report run_ld3(const Dag& g, const Ld3Config& cfg);
Ld3Report run_ld3(const Dag& g, const std::vector<std::string>& z,
                  const Ld3Config& cfg);

/// The direct-edge verdict on its own: 0 iff the test accepts x ⊥ y given
/// the conditioning columns.
int evaluate_sdc(CiTest& test, const std::string& x, const std::string& y,
                 const std::vector<std::string>& conditioning, double alpha);

}  // namespace ld3

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ld3/dataset.hpp"
#include "ld3/graph.hpp"

namespace ld3 {

struct CiQuery {
  std::string a;
  std::string b;
  std::vector<std::string> s;
  double alpha = 0.01;
};

struct CiDecision {
  bool independent = false;
  double p_value = 0.0;
  double statistic = 0.0;
  double dof_or_n_eff = 0.0;
  bool degenerate = false;
};

/// Counts queries per run; by_conditioning_size is a histogram over |s|.
/// Not synchronized: a counter belongs to one worker.
struct TestCounter {
  long total = 0;
  std::map<int, long> by_conditioning_size;

  void record(int conditioning_size) {
    ++total;
    ++by_conditioning_size[conditioning_size];
  }
  void reset() {
    total = 0;
    by_conditioning_size.clear();
  }
};

/// Shared contract for conditional-independence tests. Every query routed
/// through operator() increments the counter exactly once.
class CiTest {
 public:
  virtual ~CiTest() = default;

  CiDecision operator()(const CiQuery& q) {
    validate(q);
    counter_.record(static_cast<int>(q.s.size()));
    return decide(q);
  }

  const TestCounter& counter() const { return counter_; }
  void reset_counter() { counter_.reset(); }

  /// Throws std::invalid_argument when a column cannot be handled.
  virtual void check_column(const std::string& name) const = 0;

 protected:
  virtual CiDecision decide(const CiQuery& q) = 0;

 private:
  static void validate(const CiQuery& q);
  TestCounter counter_;
};

/// Partial-correlation z-transform test for continuous columns. The full
/// covariance matrix is computed once; each query inverts a small submatrix.
class FisherZTest : public CiTest {
 public:
  explicit FisherZTest(const Dataset& data);
  explicit FisherZTest(Dataset&&) = delete;  // non-owning view
  void check_column(const std::string& name) const override;

 protected:
  CiDecision decide(const CiQuery& q) override;

 private:
  const Dataset* data_;
  std::vector<double> cov_;  // row-major d x d
  size_t d_ = 0;
};

/// Pearson chi-square pooled over strata of the conditioning columns.
/// Strata with any expected cell below the count threshold are dropped; when
/// nothing survives the decision is degenerate and reported independent.
class ChiSquareTest : public CiTest {
 public:
  explicit ChiSquareTest(const Dataset& data, double min_expected_count = 5.0);
  explicit ChiSquareTest(Dataset&&) = delete;  // non-owning view
  void check_column(const std::string& name) const override;

 protected:
  CiDecision decide(const CiQuery& q) override;

 private:
  const Dataset* data_;
  double min_expected_;
};

/// Reads answers from graph d-separation.
class OracleCiTest : public CiTest {
 public:
  explicit OracleCiTest(const Dag& g);
  explicit OracleCiTest(Dag&&) = delete;  // non-owning view
  void check_column(const std::string& name) const override;

 protected:
  CiDecision decide(const CiQuery& q) override;

 private:
  const Dag* g_;
};

double normal_two_sided_p(double z);
double chi_square_sf(double statistic, double dof);

}  // namespace ld3

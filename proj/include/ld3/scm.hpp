#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ld3/dataset.hpp"
#include "ld3/graph.hpp"

namespace ld3 {

/// Linear-Gaussian structural model: each node is the coefficient-weighted
/// sum of its parents plus independent Gaussian noise. Immutable after
/// construction; sampling is a pure function of (model, n, seed).
class LinearGaussianScm {
 public:
  LinearGaussianScm(Dag dag,
                    std::map<std::pair<std::string, std::string>, double>
                        edge_coefficients,
                    std::map<std::string, double> noise_std);

  /// Coefficient magnitudes drawn uniform on [0.5, 1.5] with random sign,
  /// unit noise everywhere. When the designated direct edge exists its
  /// coefficient is pinned to direct_effect.
  static LinearGaussianScm random(const Dag& dag, uint64_t seed,
                                  double direct_effect);

  const Dag& dag() const { return dag_; }
  double coefficient(const std::string& parent, const std::string& child) const;

  Dataset sample(size_t n, uint64_t seed) const;

  std::string to_json() const;
  static LinearGaussianScm from_json(const std::string& text);

 private:
  Dag dag_;
  std::vector<std::vector<int>> parent_order_;  // per node, name-sorted
  std::vector<std::vector<double>> coef_;       // aligned with parent_order_
  std::vector<double> noise_std_;
};

/// Discrete structural model defined by per-node conditional probability
/// tables. Row index is the mixed-radix encoding of parent levels with
/// parents taken in name order (first parent varies fastest); each row sums
/// to one.
class DiscreteScm {
 public:
  DiscreteScm(Dag dag, std::map<std::string, int> cardinality,
              std::map<std::string, std::vector<std::vector<double>>> cpt);

  /// Random tables whose logits are quadratic in parent levels with
  /// coefficients drawn uniform on [-1, 1], softmax-normalized.
  static DiscreteScm random(const Dag& dag,
                            const std::map<std::string, int>& cardinality,
                            uint64_t seed);

  const Dag& dag() const { return dag_; }
  int cardinality(const std::string& node) const;
  const std::vector<std::vector<double>>& cpt(const std::string& node) const;

  /// CPT row for node v under a full assignment (indexed by node id).
  size_t row_index(int v, const std::vector<int>& state) const;

  Dataset sample(size_t n, uint64_t seed) const;

  std::string to_json() const;
  static DiscreteScm from_json(const std::string& text);

 private:
  Dag dag_;
  std::vector<std::vector<int>> parent_order_;  // per node, name-sorted
  std::vector<int> card_;
  std::vector<std::vector<std::vector<double>>> cpt_;
};

/// In a linear model without interaction the controlled direct effect does
/// not depend on mediator values, so the weighted effect is the direct-edge
/// coefficient (zero when the edge is absent).
double true_wcde_linear(const LinearGaussianScm& scm, const std::string& x,
                        const std::string& y);

/// Exact weighted controlled direct effect by brute-force enumeration of the
/// joint distribution: for every configuration of the mediator parents of y,
/// the interventional contrast E[y | do(x_val, m)] - E[y | do(x_star, m)] is
/// computed on the mutilated model and averaged under the observational
/// marginal of m. Throws when the joint state space exceeds 1e7.
double true_wcde_discrete(const DiscreteScm& scm, const std::string& x,
                          const std::string& y, int x_val, int x_star);

/// The mediator parents of y (parents of y descending from x), name-sorted.
/// This is the configuration space the weighted effect averages over.
std::vector<std::string> mediator_parents(const Dag& g, const std::string& x,
                                          const std::string& y);

/// Exact interventional contrast at one configuration of the mediator
/// parents of y, by the same enumeration.
double true_cde_discrete(const DiscreteScm& scm, const std::string& x,
                         const std::string& y, int x_val, int x_star,
                         const std::vector<int>& m_val);

}  // namespace ld3

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ld3/dataset.hpp"

namespace ld3 {

struct WcdeEstimate {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  size_t n_used = 0;
  std::string estimator;      // "ols" | "stratified"
  double dropped_mass = 0.0;  // stratified only: renormalized-away mass
  std::vector<std::string> notes;

  std::string to_json() const;
};

/// Covariates to adjust for. The stratified estimator additionally needs the
/// split into non-mediator adjusters (s_set) and mediator parents (m_set);
/// the two halves must partition the covariates.
struct AdjustmentSpec {
  std::vector<std::string> covariates;
  std::optional<std::pair<std::vector<std::string>, std::vector<std::string>>>
      split;  // (s_set, m_set)

  static AdjustmentSpec plain(std::vector<std::string> covariates);
  static AdjustmentSpec with_split(std::vector<std::string> s_set,
                                   std::vector<std::string> m_set);
  void validate() const;
};

/// Least squares of y on [intercept, x, covariates]; the reported value is
/// the coefficient on x with normal-approximation CI and two-sided p-value.
/// Exactly collinear covariates are dropped (noted) before the fit.
WcdeEstimate wcde_ols(const Dataset& data, const std::string& x,
                      const std::string& y, const AdjustmentSpec& adj);

/// Stratified contrast at one mediator configuration:
///   sum_s (E[y | x_val, s, m] - E[y | x_star, s, m]) P(s)
/// with empirical conditional means and the marginal of s. Strata without
/// support in both exposure arms are dropped and the s-mass renormalized.
/// Throws when no stratum has support.
double cde_at_m(const Dataset& data, const std::string& x,
                const std::string& y, int x_val, int x_star,
                const std::vector<int>& m_val, const AdjustmentSpec& adj);

struct StratifiedOptions {
  int bootstrap_resamples = 500;
  uint64_t bootstrap_seed = 0;
  /// When set, the marginal product weighting P(s)P(m) is replaced by the
  /// joint P(s, m). Exists to make the difference testable; estimation
  /// should leave it off.
  bool joint_weighting = false;
};

/// Mediator-weighted average of the stratified contrasts:
///   sum_m cde_at_m(m) P(m)
/// with a seeded percentile bootstrap over rows for the CI and p-value.
WcdeEstimate wcde_stratified(const Dataset& data, const std::string& x,
                             const std::string& y, int x_val, int x_star,
                             const AdjustmentSpec& adj,
                             const StratifiedOptions& opt = {});

}  // namespace ld3

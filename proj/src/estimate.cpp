#include "ld3/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "json.hpp"
#include "ld3/citest.hpp"

namespace ld3 {

std::string WcdeEstimate::to_json() const {
  nlohmann::json j;
  j["value"] = value;
  j["ci"] = {ci_low, ci_high};
  j["p_value"] = p_value;
  j["n_used"] = n_used;
  j["estimator"] = estimator;
  if (estimator == "stratified") j["dropped_mass"] = dropped_mass;
  if (!notes.empty()) j["notes"] = notes;
  return j.dump(2);
}

AdjustmentSpec AdjustmentSpec::plain(std::vector<std::string> covariates) {
  AdjustmentSpec spec;
  spec.covariates = std::move(covariates);
  spec.validate();
  return spec;
}

AdjustmentSpec AdjustmentSpec::with_split(std::vector<std::string> s_set,
                                          std::vector<std::string> m_set) {
  AdjustmentSpec spec;
  spec.covariates = s_set;
  spec.covariates.insert(spec.covariates.end(), m_set.begin(), m_set.end());
  spec.split = {std::move(s_set), std::move(m_set)};
  spec.validate();
  return spec;
}

void AdjustmentSpec::validate() const {
  auto sorted = covariates;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("duplicate covariate in adjustment spec");
  if (!split) return;
  auto all = split->first;
  all.insert(all.end(), split->second.begin(), split->second.end());
  std::sort(all.begin(), all.end());
  if (all != sorted)
    throw std::invalid_argument(
        "split must partition the covariates (s_set and m_set disjoint)");
}

WcdeEstimate wcde_ols(const Dataset& data, const std::string& x,
                      const std::string& y, const AdjustmentSpec& adj) {
  adj.validate();
  size_t n = data.n_rows();
  if (n <= adj.covariates.size() + 2)
    throw std::invalid_argument("too few rows for this covariate count");

  WcdeEstimate est;
  est.estimator = "ols";
  est.n_used = n;

  // Columns enter in the order [intercept, x, covariates]; a column that is
  // exactly collinear with the ones already kept is dropped, so x survives
  // unless it is constant.
  Eigen::MatrixXd design(n, adj.covariates.size() + 2);
  design.col(0).setOnes();
  size_t used = 1;
  std::vector<std::string> order{x};
  order.insert(order.end(), adj.covariates.begin(), adj.covariates.end());
  int x_col = -1;
  for (const auto& name : order) {
    const auto& col = data.column(name);
    Eigen::Map<const Eigen::VectorXd> v(col.data(), n);
    Eigen::MatrixXd kept = design.leftCols(used);
    Eigen::VectorXd fitted =
        kept * kept.completeOrthogonalDecomposition().solve(v);
    double resid2 = (v - fitted).squaredNorm();
    if (resid2 <= 1e-10 * std::max(v.squaredNorm(), 1.0)) {
      if (name == x)
        throw std::invalid_argument(
            "exposure column is collinear with the intercept alone; effect "
            "not estimable");
      est.notes.push_back("dropped collinear covariate: " + name);
      continue;
    }
    design.col(used) = v;
    if (name == x) x_col = static_cast<int>(used);
    ++used;
  }
  Eigen::MatrixXd design_used = design.leftCols(used);

  Eigen::Map<const Eigen::VectorXd> yv(data.column(y).data(), n);
  Eigen::MatrixXd xtx = design_used.transpose() * design_used;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  Eigen::VectorXd beta = ldlt.solve(design_used.transpose() * yv);
  double rss = (yv - design_used * beta).squaredNorm();
  double sigma2 = rss / static_cast<double>(n - used);
  Eigen::MatrixXd xtx_inv = ldlt.solve(Eigen::MatrixXd::Identity(used, used));
  double se = std::sqrt(std::max(sigma2 * xtx_inv(x_col, x_col), 0.0));

  est.value = beta(x_col);
  est.ci_low = est.value - 1.959963984540054 * se;
  est.ci_high = est.value + 1.959963984540054 * se;
  est.p_value = se > 0 ? normal_two_sided_p(est.value / se) : 0.0;
  return est;
}

namespace {

// Sufficient statistics for the plug-in estimator: a histogram over y levels
// per (x level, s config, m config). The statistic depends on rows only
// through these counts, so a multinomial redraw of the table is exactly a
// row bootstrap.
struct CellTable {
  struct Key {
    int x;
    std::vector<int> s, m;
    bool operator<(const Key& o) const {
      return std::tie(x, s, m) < std::tie(o.x, o.s, o.m);
    }
  };
  std::map<Key, std::vector<long>> cells;
  long n = 0;
  int y_levels = 0;

  static CellTable build(const Dataset& data, const std::string& x,
                         const std::string& y,
                         const std::vector<std::string>& s_set,
                         const std::vector<std::string>& m_set) {
    auto need_categorical = [&](const std::string& name) {
      if (data.info(name).type != ColumnType::Categorical)
        throw std::invalid_argument(
            "stratified estimator needs categorical column: " + name);
    };
    need_categorical(x);
    need_categorical(y);
    for (const auto& name : s_set) need_categorical(name);
    for (const auto& name : m_set) need_categorical(name);

    CellTable t;
    t.y_levels = data.info(y).levels;
    t.n = static_cast<long>(data.n_rows());
    const auto& cx = data.column(x);
    const auto& cy = data.column(y);
    std::vector<const std::vector<double>*> cs, cm;
    for (const auto& name : s_set) cs.push_back(&data.column(name));
    for (const auto& name : m_set) cm.push_back(&data.column(name));
    for (size_t r = 0; r < data.n_rows(); ++r) {
      Key key;
      key.x = static_cast<int>(cx[r]);
      key.s.reserve(cs.size());
      for (auto* c : cs) key.s.push_back(static_cast<int>((*c)[r]));
      key.m.reserve(cm.size());
      for (auto* c : cm) key.m.push_back(static_cast<int>((*c)[r]));
      auto& hist = t.cells[key];
      if (hist.empty()) hist.assign(t.y_levels, 0);
      ++hist[static_cast<size_t>(cy[r])];
    }
    return t;
  }

  CellTable resample(std::mt19937_64& rng) const {
    CellTable out;
    out.n = n;
    out.y_levels = y_levels;
    long remaining = n;
    long mass_left = n;
    for (const auto& [key, hist] : cells) {
      std::vector<long> redraw(hist.size(), 0);
      bool any = false;
      for (size_t c = 0; c < hist.size(); ++c) {
        if (hist[c] == 0) continue;
        if (remaining <= 0 || mass_left <= 0) break;
        double p = std::clamp(
            static_cast<double>(hist[c]) / static_cast<double>(mass_left),
            0.0, 1.0);
        long draws = std::binomial_distribution<long>(remaining, p)(rng);
        redraw[c] = draws;
        remaining -= draws;
        mass_left -= hist[c];
        if (draws > 0) any = true;
      }
      if (any) out.cells[key] = std::move(redraw);
    }
    return out;
  }
};

struct Arm {
  double sum = 0;
  long count = 0;
};

struct Marginals {
  std::map<std::vector<int>, long> s_count, m_count;
  std::map<std::pair<std::vector<int>, std::vector<int>>, long> sm_count;
  // arms[(s, m)] = (treated, control) outcome sums and counts
  std::map<std::pair<std::vector<int>, std::vector<int>>, std::pair<Arm, Arm>>
      arms;
  long total = 0;

  static Marginals from(const CellTable& t, int x_val, int x_star) {
    Marginals mg;
    for (const auto& [key, hist] : t.cells) {
      long c = 0;
      double sum = 0;
      for (size_t lvl = 0; lvl < hist.size(); ++lvl) {
        c += hist[lvl];
        sum += static_cast<double>(hist[lvl]) * lvl;
      }
      if (c == 0) continue;
      mg.s_count[key.s] += c;
      mg.m_count[key.m] += c;
      mg.sm_count[{key.s, key.m}] += c;
      mg.total += c;
      if (key.x == x_val) {
        auto& arm = mg.arms[{key.s, key.m}].first;
        arm.sum += sum;
        arm.count += c;
      } else if (key.x == x_star) {
        auto& arm = mg.arms[{key.s, key.m}].second;
        arm.sum += sum;
        arm.count += c;
      }
    }
    return mg;
  }

  // Contrast at one mediator configuration, s-weights renormalized over
  // strata supported in both arms. ok=false when nothing has support.
  std::pair<double, double> contrast_at_m(const std::vector<int>& m,
                                          bool& ok) const {
    double value = 0, used = 0;
    for (const auto& [s, sc] : s_count) {
      auto it = arms.find({s, m});
      if (it == arms.end() || it->second.first.count == 0 ||
          it->second.second.count == 0)
        continue;
      double w = static_cast<double>(sc) / total;
      value += w * (it->second.first.sum / it->second.first.count -
                    it->second.second.sum / it->second.second.count);
      used += w;
    }
    ok = used > 0;
    return {ok ? value / used : 0.0, used};
  }
};

struct StratifiedResult {
  double value = 0.0;
  double dropped_mass = 0.0;
  bool ok = false;
};

StratifiedResult stratified_from_cells(const CellTable& t, int x_val,
                                       int x_star, bool joint_weighting) {
  Marginals mg = Marginals::from(t, x_val, x_star);
  if (mg.total == 0) return {};
  StratifiedResult out;

  if (joint_weighting) {
    double value = 0, used = 0;
    for (const auto& [sm, c] : mg.sm_count) {
      auto it = mg.arms.find(sm);
      if (it == mg.arms.end() || it->second.first.count == 0 ||
          it->second.second.count == 0)
        continue;
      double w = static_cast<double>(c) / mg.total;
      value += w * (it->second.first.sum / it->second.first.count -
                    it->second.second.sum / it->second.second.count);
      used += w;
    }
    if (used <= 0) return {};
    out.value = value / used;
    out.dropped_mass = 1.0 - used;
    out.ok = true;
    return out;
  }

  double value = 0, used_m = 0, supported_product_mass = 0;
  for (const auto& [m, mc] : mg.m_count) {
    bool ok = false;
    auto [cde_m, s_mass] = mg.contrast_at_m(m, ok);
    if (!ok) continue;
    double wm = static_cast<double>(mc) / mg.total;
    value += wm * cde_m;
    used_m += wm;
    supported_product_mass += wm * s_mass;
  }
  if (used_m <= 0) return {};
  out.value = value / used_m;
  out.dropped_mass = 1.0 - supported_product_mass;
  out.ok = true;
  return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> require_split(
    const AdjustmentSpec& adj) {
  adj.validate();
  if (!adj.split)
    throw std::invalid_argument(
        "stratified estimation needs the s/m covariate split");
  return *adj.split;
}

}  // namespace

double cde_at_m(const Dataset& data, const std::string& x,
                const std::string& y, int x_val, int x_star,
                const std::vector<int>& m_val, const AdjustmentSpec& adj) {
  auto [s_set, m_set] = require_split(adj);
  if (m_val.size() != m_set.size())
    throw std::invalid_argument("mediator value vector length mismatch");
  CellTable t = CellTable::build(data, x, y, s_set, m_set);
  Marginals mg = Marginals::from(t, x_val, x_star);
  bool ok = false;
  auto [value, mass] = mg.contrast_at_m(m_val, ok);
  (void)mass;
  if (!ok)
    throw std::runtime_error(
        "no adjustment stratum with support in both exposure arms");
  return value;
}

WcdeEstimate wcde_stratified(const Dataset& data, const std::string& x,
                             const std::string& y, int x_val, int x_star,
                             const AdjustmentSpec& adj,
                             const StratifiedOptions& opt) {
  auto [s_set, m_set] = require_split(adj);
  CellTable t = CellTable::build(data, x, y, s_set, m_set);

  auto point = stratified_from_cells(t, x_val, x_star, opt.joint_weighting);
  if (!point.ok)
    throw std::runtime_error(
        "no adjustment stratum with support in both exposure arms");

  WcdeEstimate est;
  est.estimator = "stratified";
  est.value = point.value;
  est.dropped_mass = point.dropped_mass;
  est.n_used = data.n_rows();
  if (point.dropped_mass > 1e-12)
    est.notes.push_back("renormalized over unsupported strata");

  std::mt19937_64 rng(opt.bootstrap_seed);
  std::vector<double> draws;
  draws.reserve(opt.bootstrap_resamples);
  for (int b = 0; b < opt.bootstrap_resamples; ++b) {
    CellTable rt = t.resample(rng);
    auto r = stratified_from_cells(rt, x_val, x_star, opt.joint_weighting);
    if (r.ok) draws.push_back(r.value);
  }
  if (draws.size() >= 10) {
    std::sort(draws.begin(), draws.end());
    auto quantile = [&](double q) {
      double pos = q * (draws.size() - 1);
      size_t lo = static_cast<size_t>(pos);
      size_t hi = std::min(lo + 1, draws.size() - 1);
      double frac = pos - lo;
      return draws[lo] * (1 - frac) + draws[hi] * frac;
    };
    est.ci_low = quantile(0.025);
    est.ci_high = quantile(0.975);
    size_t below = 0, above = 0;
    for (double v : draws) {
      if (v < 0) ++below;
      if (v > 0) ++above;
    }
    double lo_frac = (below + 1.0) / (draws.size() + 1.0);
    double hi_frac = (above + 1.0) / (draws.size() + 1.0);
    est.p_value = std::min(1.0, 2.0 * std::min(lo_frac, hi_frac));
  } else {
    est.ci_low = est.ci_high = est.value;
    est.p_value = 1.0;
    est.notes.push_back("bootstrap failed on nearly all resamples");
  }
  return est;
}

}  // namespace ld3

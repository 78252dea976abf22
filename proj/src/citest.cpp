#include "ld3/citest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

namespace ld3 {

double normal_two_sided_p(double z) {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0) return 1.0;
  boost::math::chi_squared_distribution<double> dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

void CiTest::validate(const CiQuery& q) {
  if (q.a == q.b)
    throw std::invalid_argument("query variables must differ");
  for (const auto& v : q.s)
    if (v == q.a || v == q.b)
      throw std::invalid_argument("conditioning set overlaps query pair");
  if (!(q.alpha > 0.0 && q.alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1)");
}

FisherZTest::FisherZTest(const Dataset& data) : data_(&data) {
  d_ = data.n_cols();
  size_t n = data.n_rows();
  std::vector<double> mean(d_, 0.0);
  for (size_t j = 0; j < d_; ++j) {
    const auto& col = data.column(j);
    double m = 0;
    for (double v : col) m += v;
    mean[j] = m / n;
  }
  cov_.assign(d_ * d_, 0.0);
  for (size_t j = 0; j < d_; ++j) {
    const auto& cj = data.column(j);
    for (size_t k = j; k < d_; ++k) {
      const auto& ck = data.column(k);
      double acc = 0;
      for (size_t r = 0; r < n; ++r)
        acc += (cj[r] - mean[j]) * (ck[r] - mean[k]);
      double c = acc / n;
      cov_[j * d_ + k] = c;
      cov_[k * d_ + j] = c;
    }
  }
}

void FisherZTest::check_column(const std::string& name) const {
  if (data_->info(name).type != ColumnType::Continuous)
    throw std::invalid_argument("column " + name +
                                " is not continuous; Fisher-z needs "
                                "continuous columns");
}

CiDecision FisherZTest::decide(const CiQuery& q) {
  size_t n = data_->n_rows();
  size_t k = q.s.size();
  if (n <= k + 3)
    throw std::invalid_argument("too few rows for conditioning set size " +
                                std::to_string(k));
  check_column(q.a);
  check_column(q.b);
  for (const auto& v : q.s) check_column(v);

  size_t ia = data_->column_index(q.a);
  size_t ib = data_->column_index(q.b);
  std::vector<size_t> is;
  for (const auto& v : q.s) is.push_back(data_->column_index(v));

  double caa = cov_[ia * d_ + ia];
  double cbb = cov_[ib * d_ + ib];
  double cab = cov_[ia * d_ + ib];
  if (!q.s.empty()) {
    // Schur complement of the conditioning block: the 2x2 partial
    // covariance of (a, b) given s.
    Eigen::MatrixXd css(k, k);
    Eigen::MatrixXd cvs(2, k);
    for (size_t i = 0; i < k; ++i) {
      cvs(0, i) = cov_[ia * d_ + is[i]];
      cvs(1, i) = cov_[ib * d_ + is[i]];
      for (size_t j = 0; j < k; ++j) css(i, j) = cov_[is[i] * d_ + is[j]];
    }
    // completeOrthogonalDecomposition tolerates collinear conditioning
    // columns (pseudo-inverse).
    Eigen::MatrixXd sol =
        css.completeOrthogonalDecomposition().solve(cvs.transpose());
    caa -= (cvs.row(0) * sol.col(0))(0, 0);
    cbb -= (cvs.row(1) * sol.col(1))(0, 0);
    cab -= (cvs.row(0) * sol.col(1))(0, 0);
  }

  CiDecision d;
  d.dof_or_n_eff = static_cast<double>(n) - static_cast<double>(k) - 3.0;
  // Residual variance at or below float cancellation noise means the
  // conditioning set determines the variable; the query is unanswerable.
  double floor_a = 1e-10 * std::max(cov_[ia * d_ + ia], 1e-300);
  double floor_b = 1e-10 * std::max(cov_[ib * d_ + ib], 1e-300);
  if (caa <= floor_a || cbb <= floor_b) {
    d.degenerate = true;
    d.independent = true;
    d.p_value = 1.0;
    d.statistic = 0.0;
    return d;
  }
  double r = cab / std::sqrt(caa * cbb);
  constexpr double kClamp = 1.0 - 1e-12;
  r = std::clamp(r, -kClamp, kClamp);
  d.statistic = std::sqrt(d.dof_or_n_eff) * std::atanh(r);
  d.p_value = normal_two_sided_p(d.statistic);
  d.independent = d.p_value > q.alpha;
  return d;
}

ChiSquareTest::ChiSquareTest(const Dataset& data, double min_expected_count)
    : data_(&data), min_expected_(min_expected_count) {}

void ChiSquareTest::check_column(const std::string& name) const {
  if (data_->info(name).type != ColumnType::Categorical)
    throw std::invalid_argument("column " + name +
                                " is not categorical; chi-square needs "
                                "categorical columns");
}

CiDecision ChiSquareTest::decide(const CiQuery& q) {
  if (data_->n_rows() == 0) throw std::invalid_argument("empty data");
  check_column(q.a);
  check_column(q.b);
  for (const auto& v : q.s) check_column(v);

  const auto& ca = data_->column(q.a);
  const auto& cb = data_->column(q.b);
  int la = data_->info(q.a).levels;
  int lb = data_->info(q.b).levels;
  std::vector<const std::vector<double>*> cs;
  std::vector<int> ls;
  for (const auto& v : q.s) {
    cs.push_back(&data_->column(v));
    ls.push_back(data_->info(v).levels);
  }

  // One contingency table per stratum of the conditioning columns.
  std::unordered_map<long long, std::vector<long>> tables;
  size_t n = data_->n_rows();
  for (size_t r = 0; r < n; ++r) {
    long long key = 0;
    for (size_t i = 0; i < cs.size(); ++i)
      key = key * ls[i] + static_cast<long long>((*cs[i])[r]);
    auto& table = tables[key];
    if (table.empty()) table.assign(static_cast<size_t>(la) * lb, 0);
    ++table[static_cast<size_t>(ca[r]) * lb + static_cast<size_t>(cb[r])];
  }

  double stat = 0;
  double dof = 0;
  int used = 0;
  for (auto& [key, table] : tables) {
    std::vector<long> row(la, 0), col(lb, 0);
    long total = 0;
    for (int i = 0; i < la; ++i)
      for (int j = 0; j < lb; ++j) {
        long c = table[static_cast<size_t>(i) * lb + j];
        row[i] += c;
        col[j] += c;
        total += c;
      }
    int ra = 0, rb = 0;
    for (int i = 0; i < la; ++i) ra += row[i] > 0;
    for (int j = 0; j < lb; ++j) rb += col[j] > 0;
    if (ra < 2 || rb < 2) continue;  // nothing to test in this stratum

    bool sparse = false;
    double local = 0;
    for (int i = 0; i < la && !sparse; ++i) {
      if (row[i] == 0) continue;
      for (int j = 0; j < lb; ++j) {
        if (col[j] == 0) continue;
        double expected =
            static_cast<double>(row[i]) * col[j] / static_cast<double>(total);
        if (expected < min_expected_) {
          sparse = true;
          break;
        }
        double obs = table[static_cast<size_t>(i) * lb + j];
        local += (obs - expected) * (obs - expected) / expected;
      }
    }
    if (sparse) continue;
    stat += local;
    dof += (ra - 1) * (rb - 1);
    ++used;
  }

  CiDecision d;
  d.statistic = stat;
  d.dof_or_n_eff = dof;
  if (used == 0 || dof <= 0) {
    d.degenerate = true;
    d.independent = true;
    d.p_value = 1.0;
    return d;
  }
  d.p_value = chi_square_sf(stat, dof);
  d.independent = d.p_value > q.alpha;
  return d;
}

OracleCiTest::OracleCiTest(const Dag& g) : g_(&g) {}

void OracleCiTest::check_column(const std::string& name) const {
  if (!g_->has_node(name))
    throw std::invalid_argument("unknown node name: " + name);
}

CiDecision OracleCiTest::decide(const CiQuery& q) {
  CiDecision d;
  d.independent = d_separated(*g_, q.a, q.b, q.s);
  d.p_value = d.independent ? 1.0 : 0.0;
  d.statistic = d.independent ? 0.0 : 1.0;
  d.dof_or_n_eff = 0.0;
  return d;
}

}  // namespace ld3

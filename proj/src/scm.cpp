#include "ld3/scm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace ld3 {

namespace {

// Parents in name order. Arithmetic and CPT row layout key off this, so a
// model behaves identically however its edges were inserted.
std::vector<int> sorted_parents(const Dag& dag, int v) {
  std::vector<int> ps(dag.parents_of(v));
  std::sort(ps.begin(), ps.end(), [&](int a, int b) {
    return dag.name(a) < dag.name(b);
  });
  return ps;
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Noise streams are keyed by (seed, node name) so dropping a column from the
// observed data leaves every other node's draws untouched.
std::mt19937_64 node_rng(uint64_t seed, const std::string& node) {
  uint64_t mix = seed ^ (fnv1a(node) * 0x9e3779b97f4a7c15ULL);
  mix ^= mix >> 30;
  mix *= 0xbf58476d1ce4e5b9ULL;
  mix ^= mix >> 27;
  mix *= 0x94d049bb133111ebULL;
  mix ^= mix >> 31;
  return std::mt19937_64(mix);
}

}  // namespace

LinearGaussianScm::LinearGaussianScm(
    Dag dag,
    std::map<std::pair<std::string, std::string>, double> edge_coefficients,
    std::map<std::string, double> noise_std)
    : dag_(std::move(dag)) {
  parent_order_.resize(dag_.num_nodes());
  coef_.resize(dag_.num_nodes());
  noise_std_.assign(dag_.num_nodes(), 0.0);
  size_t coef_used = 0;
  for (int v = 0; v < dag_.num_nodes(); ++v) {
    parent_order_[v] = sorted_parents(dag_, v);
    const auto& ps = parent_order_[v];
    coef_[v].resize(ps.size());
    for (size_t i = 0; i < ps.size(); ++i) {
      auto it = edge_coefficients.find({dag_.name(ps[i]), dag_.name(v)});
      if (it == edge_coefficients.end())
        throw std::invalid_argument("missing coefficient for edge " +
                                    dag_.name(ps[i]) + " -> " + dag_.name(v));
      coef_[v][i] = it->second;
      ++coef_used;
    }
    auto nit = noise_std.find(dag_.name(v));
    if (nit == noise_std.end())
      throw std::invalid_argument("missing noise std for " + dag_.name(v));
    if (!(nit->second > 0))
      throw std::invalid_argument("noise std must be positive for " +
                                  dag_.name(v));
    noise_std_[v] = nit->second;
  }
  if (coef_used != edge_coefficients.size())
    throw std::invalid_argument("coefficient given for a non-edge");
}

LinearGaussianScm LinearGaussianScm::random(const Dag& dag, uint64_t seed,
                                            double direct_effect) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::bernoulli_distribution flip(0.5);
  std::map<std::pair<std::string, std::string>, double> coefs;
  for (auto [p, c] : dag.edges()) {
    double b = mag(rng) * (flip(rng) ? 1.0 : -1.0);
    coefs[{dag.name(p), dag.name(c)}] = b;
  }
  if (dag.exposure() && dag.outcome() &&
      dag.has_edge(*dag.exposure(), *dag.outcome()))
    coefs[{dag.name(*dag.exposure()), dag.name(*dag.outcome())}] =
        direct_effect;
  std::map<std::string, double> noise;
  for (const auto& n : dag.nodes()) noise[n] = 1.0;
  return LinearGaussianScm(dag, coefs, noise);
}

double LinearGaussianScm::coefficient(const std::string& parent,
                                      const std::string& child) const {
  int c = dag_.index_of(child);
  int p = dag_.index_of(parent);
  const auto& ps = parent_order_[c];
  for (size_t i = 0; i < ps.size(); ++i)
    if (ps[i] == p) return coef_[c][i];
  throw std::invalid_argument("no edge " + parent + " -> " + child);
}

Dataset LinearGaussianScm::sample(size_t n, uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("need n >= 1");
  std::vector<std::vector<double>> values(dag_.num_nodes());
  for (int v : dag_.topological_order()) {
    auto rng = node_rng(seed, dag_.name(v));
    std::normal_distribution<double> noise(0.0, noise_std_[v]);
    const auto& ps = parent_order_[v];
    auto& col = values[v];
    col.resize(n);
    for (size_t r = 0; r < n; ++r) {
      double acc = noise(rng);
      for (size_t i = 0; i < ps.size(); ++i)
        acc += coef_[v][i] * values[ps[i]][r];
      col[r] = acc;
    }
  }
  Dataset out;
  for (int v = 0; v < dag_.num_nodes(); ++v)
    out.add_column({dag_.name(v), ColumnType::Continuous, 0},
                   std::move(values[v]));
  return out;
}

std::string LinearGaussianScm::to_json() const {
  nlohmann::json j;
  j["kind"] = "linear_gaussian";
  j["dag"] = nlohmann::json::parse(dag_to_json(dag_));
  auto coefs = nlohmann::json::array();
  for (int v = 0; v < dag_.num_nodes(); ++v) {
    const auto& ps = parent_order_[v];
    for (size_t i = 0; i < ps.size(); ++i)
      coefs.push_back({dag_.name(ps[i]), dag_.name(v), coef_[v][i]});
  }
  j["coefficients"] = coefs;
  nlohmann::json noise;
  for (int v = 0; v < dag_.num_nodes(); ++v)
    noise[dag_.name(v)] = noise_std_[v];
  j["noise_std"] = noise;
  return j.dump(2);
}

LinearGaussianScm LinearGaussianScm::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  if (j.at("kind") != "linear_gaussian")
    throw std::invalid_argument("not a linear-Gaussian model");
  Dag dag = dag_from_json(j.at("dag").dump());
  std::map<std::pair<std::string, std::string>, double> coefs;
  for (const auto& e : j.at("coefficients"))
    coefs[{e.at(0).get<std::string>(), e.at(1).get<std::string>()}] =
        e.at(2).get<double>();
  std::map<std::string, double> noise;
  for (auto& [k, v] : j.at("noise_std").items()) noise[k] = v.get<double>();
  return LinearGaussianScm(std::move(dag), std::move(coefs), std::move(noise));
}

DiscreteScm::DiscreteScm(
    Dag dag, std::map<std::string, int> cardinality,
    std::map<std::string, std::vector<std::vector<double>>> cpt)
    : dag_(std::move(dag)) {
  parent_order_.resize(dag_.num_nodes());
  card_.resize(dag_.num_nodes());
  cpt_.resize(dag_.num_nodes());
  for (int v = 0; v < dag_.num_nodes(); ++v) {
    parent_order_[v] = sorted_parents(dag_, v);
    auto cit = cardinality.find(dag_.name(v));
    if (cit == cardinality.end() || cit->second < 2)
      throw std::invalid_argument("cardinality >= 2 required for " +
                                  dag_.name(v));
    card_[v] = cit->second;
  }
  for (int v = 0; v < dag_.num_nodes(); ++v) {
    auto it = cpt.find(dag_.name(v));
    if (it == cpt.end())
      throw std::invalid_argument("missing CPT for " + dag_.name(v));
    size_t rows = 1;
    for (int p : parent_order_[v]) rows *= card_[p];
    if (it->second.size() != rows)
      throw std::invalid_argument("CPT row count mismatch for " +
                                  dag_.name(v));
    for (const auto& row : it->second) {
      if (row.size() != static_cast<size_t>(card_[v]))
        throw std::invalid_argument("CPT row width mismatch for " +
                                    dag_.name(v));
      double sum = 0;
      for (double p : row) {
        if (p < 0) throw std::invalid_argument("negative CPT entry");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("CPT row of " + dag_.name(v) +
                                    " does not sum to 1");
    }
    cpt_[v] = it->second;
  }
}

DiscreteScm DiscreteScm::random(const Dag& dag,
                                const std::map<std::string, int>& cardinality,
                                uint64_t seed) {
  std::map<std::string, std::vector<std::vector<double>>> cpts;
  for (int v = 0; v < dag.num_nodes(); ++v) {
    const std::string& name = dag.name(v);
    int k = cardinality.at(name);
    const auto ps = sorted_parents(dag, v);
    size_t rows = 1;
    for (int p : ps) rows *= cardinality.at(dag.name(p));

    // Quadratic logit scores per output level: intercept plus linear and
    // quadratic terms in each parent's level.
    auto rng = node_rng(seed, name);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<std::vector<double>> lin(k, std::vector<double>(ps.size()));
    std::vector<std::vector<double>> quad(k, std::vector<double>(ps.size()));
    std::vector<double> intercept(k);
    for (int c = 0; c < k; ++c) {
      intercept[c] = unif(rng);
      for (size_t i = 0; i < ps.size(); ++i) {
        lin[c][i] = unif(rng);
        quad[c][i] = unif(rng);
      }
    }

    std::vector<std::vector<double>> table(rows, std::vector<double>(k));
    for (size_t r = 0; r < rows; ++r) {
      size_t rem = r;
      std::vector<int> pl(ps.size());
      for (size_t i = 0; i < ps.size(); ++i) {
        int pc = cardinality.at(dag.name(ps[i]));
        pl[i] = static_cast<int>(rem % pc);
        rem /= pc;
      }
      double zmax = -1e300;
      std::vector<double> logits(k);
      for (int c = 0; c < k; ++c) {
        double z = intercept[c];
        for (size_t i = 0; i < ps.size(); ++i)
          z += lin[c][i] * pl[i] + quad[c][i] * pl[i] * pl[i];
        logits[c] = z;
        zmax = std::max(zmax, z);
      }
      double norm = 0;
      for (int c = 0; c < k; ++c) {
        table[r][c] = std::exp(logits[c] - zmax);
        norm += table[r][c];
      }
      for (int c = 0; c < k; ++c) table[r][c] /= norm;
    }
    cpts[name] = std::move(table);
  }
  return DiscreteScm(dag, cardinality, cpts);
}

int DiscreteScm::cardinality(const std::string& node) const {
  return card_.at(dag_.index_of(node));
}

const std::vector<std::vector<double>>& DiscreteScm::cpt(
    const std::string& node) const {
  return cpt_.at(dag_.index_of(node));
}

size_t DiscreteScm::row_index(int v, const std::vector<int>& state) const {
  size_t idx = 0, stride = 1;
  for (int p : parent_order_[v]) {
    idx += stride * state[p];
    stride *= card_[p];
  }
  return idx;
}

Dataset DiscreteScm::sample(size_t n, uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("need n >= 1");
  auto order = dag_.topological_order();
  std::vector<std::vector<double>> values(dag_.num_nodes(),
                                          std::vector<double>(n));
  std::vector<int> row_state(dag_.num_nodes());
  std::vector<std::mt19937_64> rngs;
  rngs.reserve(dag_.num_nodes());
  for (int v = 0; v < dag_.num_nodes(); ++v)
    rngs.push_back(node_rng(seed, dag_.name(v)));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (size_t r = 0; r < n; ++r) {
    for (int v : order) {
      const auto& probs = cpt_[v][row_index(v, row_state)];
      double u = unif(rngs[v]);
      int level = 0;
      double acc = 0;
      for (int c = 0; c < card_[v]; ++c) {
        acc += probs[c];
        if (u <= acc || c == card_[v] - 1) {
          level = c;
          break;
        }
      }
      row_state[v] = level;
      values[v][r] = level;
    }
  }

  Dataset out;
  for (int v = 0; v < dag_.num_nodes(); ++v)
    out.add_column({dag_.name(v), ColumnType::Categorical, card_[v]},
                   std::move(values[v]));
  return out;
}

std::string DiscreteScm::to_json() const {
  nlohmann::json j;
  j["kind"] = "discrete";
  j["dag"] = nlohmann::json::parse(dag_to_json(dag_));
  nlohmann::json card, cpts;
  for (int v = 0; v < dag_.num_nodes(); ++v) {
    card[dag_.name(v)] = card_[v];
    cpts[dag_.name(v)] = cpt_[v];
  }
  j["cardinality"] = card;
  j["cpt"] = cpts;
  return j.dump(2);
}

DiscreteScm DiscreteScm::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  if (j.at("kind") != "discrete")
    throw std::invalid_argument("not a discrete model");
  Dag dag = dag_from_json(j.at("dag").dump());
  std::map<std::string, int> card;
  for (auto& [k, v] : j.at("cardinality").items()) card[k] = v.get<int>();
  std::map<std::string, std::vector<std::vector<double>>> cpts;
  for (auto& [k, v] : j.at("cpt").items())
    cpts[k] = v.get<std::vector<std::vector<double>>>();
  return DiscreteScm(std::move(dag), std::move(card), std::move(cpts));
}

double true_wcde_linear(const LinearGaussianScm& scm, const std::string& x,
                        const std::string& y) {
  const Dag& g = scm.dag();
  if (!g.has_edge(x, y)) {
    g.index_of(x);  // still validate the names
    g.index_of(y);
    return 0.0;
  }
  return scm.coefficient(x, y);
}

std::vector<std::string> mediator_parents(const Dag& g, const std::string& x,
                                          const std::string& y) {
  int xi = g.index_of(x), yi = g.index_of(y);
  auto de_x = g.descendant_mask(xi);
  std::vector<std::string> out;
  for (int p : g.parents_of(yi))
    if (p != xi && de_x[p]) out.push_back(g.name(p));
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Shared enumeration core for the exact-effect oracles: full-joint walks of
// the model, optionally mutilated by interventions.
struct Enumerator {
  const DiscreteScm& scm;
  const Dag& g;
  int xi, yi;
  std::vector<int> med;  // indices of mediator parents, name-sorted

  Enumerator(const DiscreteScm& s, const std::string& x, const std::string& y)
      : scm(s), g(s.dag()), xi(g.index_of(x)), yi(g.index_of(y)) {
    for (const auto& name : mediator_parents(g, x, y))
      med.push_back(g.index_of(name));

    double joint_states = 1;
    for (int v = 0; v < g.num_nodes(); ++v) joint_states *= s.cardinality(g.name(v));
    double med_states = 1;
    for (int m : med) med_states *= s.cardinality(g.name(m));
    if (joint_states * (med_states + 1) > 1e7)
      throw std::runtime_error("joint state space too large for enumeration");
  }

  int card(int v) const { return scm.cardinality(g.name(v)); }

  template <typename Visit>
  void enumerate(const std::map<int, int>& fixed, Visit&& visit) const {
    auto order = g.topological_order();
    std::vector<int> state(g.num_nodes(), 0);
    size_t total = 1;
    std::vector<int> free_nodes;
    for (int v : order)
      if (!fixed.count(v)) {
        free_nodes.push_back(v);
        total *= card(v);
      }
    for (auto& [v, val] : fixed) state[v] = val;
    for (size_t it = 0; it < total; ++it) {
      size_t rem = it;
      for (int v : free_nodes) {
        state[v] = static_cast<int>(rem % card(v));
        rem /= card(v);
      }
      double p = 1.0;
      for (int v : order) {
        if (fixed.count(v)) continue;
        p *= scm.cpt(g.name(v))[scm.row_index(v, state)][state[v]];
        if (p == 0.0) break;
      }
      if (p > 0.0) visit(state, p);
    }
  }

  std::map<std::vector<int>, double> mediator_marginal() const {
    std::map<std::vector<int>, double> out;
    enumerate({}, [&](const std::vector<int>& state, double p) {
      std::vector<int> key;
      key.reserve(med.size());
      for (int m : med) key.push_back(state[m]);
      out[key] += p;
    });
    return out;
  }

  double mean_y_do(int xv, const std::vector<int>& mv) const {
    std::map<int, int> fixed{{xi, xv}};
    for (size_t i = 0; i < med.size(); ++i) fixed[med[i]] = mv[i];
    double ey = 0, mass = 0;
    enumerate(fixed, [&](const std::vector<int>& state, double p) {
      ey += p * state[yi];
      mass += p;
    });
    return ey / mass;
  }

  void check_levels(int x_val, int x_star, const std::vector<int>* mv) const {
    if (x_val < 0 || x_val >= card(xi) || x_star < 0 || x_star >= card(xi))
      throw std::invalid_argument("exposure level out of range");
    if (!mv) return;
    if (mv->size() != med.size())
      throw std::invalid_argument("mediator value vector length mismatch");
    for (size_t i = 0; i < med.size(); ++i)
      if ((*mv)[i] < 0 || (*mv)[i] >= card(med[i]))
        throw std::invalid_argument("mediator level out of range");
  }
};

}  // namespace

double true_wcde_discrete(const DiscreteScm& scm, const std::string& x,
                          const std::string& y, int x_val, int x_star) {
  Enumerator e(scm, x, y);
  e.check_levels(x_val, x_star, nullptr);
  double wcde = 0;
  for (const auto& [mv, pm] : e.mediator_marginal())
    wcde += pm * (e.mean_y_do(x_val, mv) - e.mean_y_do(x_star, mv));
  return wcde;
}

double true_cde_discrete(const DiscreteScm& scm, const std::string& x,
                         const std::string& y, int x_val, int x_star,
                         const std::vector<int>& m_val) {
  Enumerator e(scm, x, y);
  e.check_levels(x_val, x_star, &m_val);
  return e.mean_y_do(x_val, m_val) - e.mean_y_do(x_star, m_val);
}

}  // namespace ld3

#include "ld3/graph.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ld3 {

Dag::Dag(std::vector<std::string> nodes) {
  for (auto& n : nodes) add_node(n);
}

int Dag::add_node(const std::string& name) {
  if (name.empty()) throw std::invalid_argument("node name must be non-empty");
  if (index_.count(name))
    throw std::invalid_argument("duplicate node name: " + name);
  int id = static_cast<int>(names_.size());
  names_.push_back(name);
  index_[name] = id;
  parents_.emplace_back();
  children_.emplace_back();
  return id;
}

bool Dag::has_node(const std::string& name) const {
  return index_.count(name) > 0;
}

int Dag::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw std::invalid_argument("unknown node name: " + name);
  return it->second;
}

bool Dag::has_edge(int parent, int child) const {
  const auto& ch = children_.at(parent);
  return std::find(ch.begin(), ch.end(), child) != ch.end();
}

bool Dag::has_edge(const std::string& parent, const std::string& child) const {
  return has_edge(index_of(parent), index_of(child));
}

bool Dag::reachable(int from, int to) const {
  if (from == to) return true;
  std::vector<uint8_t> seen(names_.size(), 0);
  std::deque<int> queue{from};
  seen[from] = 1;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int c : children_[v]) {
      if (c == to) return true;
      if (!seen[c]) {
        seen[c] = 1;
        queue.push_back(c);
      }
    }
  }
  return false;
}

void Dag::add_edge(int parent, int child) {
  if (parent < 0 || parent >= num_nodes() || child < 0 || child >= num_nodes())
    throw std::invalid_argument("edge endpoint out of range");
  if (parent == child) throw std::invalid_argument("self-loop rejected");
  if (has_edge(parent, child))
    throw std::invalid_argument("duplicate edge rejected");
  if (reachable(child, parent))
    throw std::invalid_argument("edge would create a cycle: " +
                                names_[parent] + " -> " + names_[child]);
  children_[parent].push_back(child);
  parents_[child].push_back(parent);
  ++num_edges_;
}

void Dag::add_edge(const std::string& parent, const std::string& child) {
  add_edge(index_of(parent), index_of(child));
}

void Dag::designate(const std::string& x, const std::string& y) {
  int xi = index_of(x), yi = index_of(y);
  if (xi == yi) throw std::invalid_argument("exposure and outcome must differ");
  if (reachable(yi, xi))
    throw std::invalid_argument("outcome must not be an ancestor of exposure");
  x_ = xi;
  y_ = yi;
}

std::vector<std::string> Dag::parents_of(const std::string& v) const {
  std::vector<std::string> out;
  for (int p : parents_.at(index_of(v))) out.push_back(names_[p]);
  return out;
}

std::vector<std::pair<int, int>> Dag::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(num_edges_);
  for (int p = 0; p < num_nodes(); ++p)
    for (int c : children_[p]) out.emplace_back(p, c);
  return out;
}

std::vector<uint8_t> Dag::ancestral_mask(const std::vector<int>& seeds) const {
  std::vector<uint8_t> mask(names_.size(), 0);
  std::deque<int> queue;
  for (int s : seeds) {
    if (!mask[s]) {
      mask[s] = 1;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int p : parents_[v]) {
      if (!mask[p]) {
        mask[p] = 1;
        queue.push_back(p);
      }
    }
  }
  return mask;
}

std::vector<uint8_t> Dag::descendant_mask(int v) const {
  std::vector<uint8_t> mask(names_.size(), 0);
  std::deque<int> queue{v};
  mask[v] = 1;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int c : children_[u]) {
      if (!mask[c]) {
        mask[c] = 1;
        queue.push_back(c);
      }
    }
  }
  return mask;
}

std::vector<int> Dag::ancestors_of(int v) const {
  auto mask = ancestral_mask({v});
  std::vector<int> out;
  for (int i = 0; i < num_nodes(); ++i)
    if (mask[i] && i != v) out.push_back(i);
  return out;
}

std::vector<int> Dag::descendants_of(int v) const {
  auto mask = descendant_mask(v);
  std::vector<int> out;
  for (int i = 0; i < num_nodes(); ++i)
    if (mask[i] && i != v) out.push_back(i);
  return out;
}

std::vector<int> Dag::topological_order() const {
  std::vector<int> indeg(names_.size(), 0);
  for (int v = 0; v < num_nodes(); ++v)
    indeg[v] = static_cast<int>(parents_[v].size());
  std::deque<int> queue;
  for (int v = 0; v < num_nodes(); ++v)
    if (indeg[v] == 0) queue.push_back(v);
  std::vector<int> order;
  order.reserve(names_.size());
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    order.push_back(v);
    for (int c : children_[v])
      if (--indeg[c] == 0) queue.push_back(c);
  }
  if (order.size() != names_.size())
    throw std::logic_error("graph is not acyclic");
  return order;
}

Dag Dag::without_node(int v) const {
  Dag out;
  std::vector<int> remap(num_nodes(), -1);
  for (int i = 0; i < num_nodes(); ++i)
    if (i != v) remap[i] = out.add_node(names_[i]);
  for (int p = 0; p < num_nodes(); ++p) {
    if (p == v) continue;
    for (int c : children_[p])
      if (c != v) out.add_edge(remap[p], remap[c]);
  }
  if (x_ && y_ && *x_ != v && *y_ != v)
    out.designate(names_[*x_], names_[*y_]);
  return out;
}

bool d_separated(const Dag& g, int a, int b, const std::vector<int>& s) {
  if (a == b) throw std::invalid_argument("d-separation query needs a != b");
  for (int v : s)
    if (v == a || v == b)
      throw std::invalid_argument("conditioning set overlaps query pair");

  // Ancestral subgraph of {a, b} ∪ s, moralized, with s removed; a and b are
  // d-separated iff they are disconnected in what remains.
  std::vector<int> seeds{a, b};
  seeds.insert(seeds.end(), s.begin(), s.end());
  auto in_anc = g.ancestral_mask(seeds);

  int n = g.num_nodes();
  std::vector<std::vector<int>> adj(n);
  auto link = [&](int u, int v) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  };
  for (int c = 0; c < n; ++c) {
    if (!in_anc[c]) continue;
    const auto& ps = g.parents_of(c);
    for (size_t i = 0; i < ps.size(); ++i) {
      if (!in_anc[ps[i]]) continue;
      link(ps[i], c);
      for (size_t j = i + 1; j < ps.size(); ++j)
        if (in_anc[ps[j]]) link(ps[i], ps[j]);
    }
  }

  std::vector<uint8_t> blocked(n, 0);
  for (int v : s) blocked[v] = 1;
  std::vector<uint8_t> seen(n, 0);
  std::deque<int> queue{a};
  seen[a] = 1;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int u : adj[v]) {
      if (u == b) return false;
      if (!seen[u] && !blocked[u]) {
        seen[u] = 1;
        queue.push_back(u);
      }
    }
  }
  return true;
}

bool d_separated(const Dag& g, const std::string& a, const std::string& b,
                 const std::vector<std::string>& s) {
  std::vector<int> si;
  si.reserve(s.size());
  for (const auto& v : s) si.push_back(g.index_of(v));
  return d_separated(g, g.index_of(a), g.index_of(b), si);
}

Dag random_er_dag(int n_nodes, double edge_prob, uint64_t seed) {
  if (n_nodes < 2) throw std::invalid_argument("need at least two nodes");
  if (edge_prob < 0.0 || edge_prob > 1.0)
    throw std::invalid_argument("edge_prob must be in [0, 1]");

  constexpr int kMaxRetries = 64;
  for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * attempt);

    // Random topological permutation, then independent edge coin flips.
    std::vector<int> perm(n_nodes);
    for (int i = 0; i < n_nodes; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::bernoulli_distribution coin(edge_prob);

    Dag g;
    for (int i = 0; i < n_nodes; ++i) g.add_node("V" + std::to_string(i + 1));
    for (int i = 0; i < n_nodes; ++i)
      for (int j = i + 1; j < n_nodes; ++j)
        if (coin(rng)) g.add_edge(perm[i], perm[j]);

    // Outcome first; its proper descendants are deleted so the outcome is
    // terminal, then the exposure is drawn among the survivors.
    int y = std::uniform_int_distribution<int>(0, n_nodes - 1)(rng);
    auto de = g.descendant_mask(y);
    Dag pruned;
    std::vector<int> remap(n_nodes, -1);
    for (int v = 0; v < n_nodes; ++v)
      if (v == y || !de[v]) remap[v] = pruned.add_node(g.name(v));
    for (auto [p, c] : g.edges())
      if (remap[p] >= 0 && remap[c] >= 0) pruned.add_edge(remap[p], remap[c]);
    if (pruned.num_nodes() < 2) continue;

    std::vector<int> candidates;
    for (int v = 0; v < pruned.num_nodes(); ++v)
      if (v != remap[y]) candidates.push_back(v);
    int x = candidates[std::uniform_int_distribution<size_t>(
        0, candidates.size() - 1)(rng)];
    pruned.designate(pruned.name(x), pruned.name(remap[y]));
    return pruned;
  }
  throw std::runtime_error("random_er_dag: no usable draw after retries");
}

std::string dag_to_json(const Dag& g) {
  nlohmann::json j;
  j["nodes"] = g.nodes();
  auto edges = nlohmann::json::array();
  for (auto [p, c] : g.edges())
    edges.push_back({g.name(p), g.name(c)});
  j["edges"] = edges;
  j["x"] = g.exposure() ? nlohmann::json(g.name(*g.exposure()))
                        : nlohmann::json(nullptr);
  j["y"] = g.outcome() ? nlohmann::json(g.name(*g.outcome()))
                       : nlohmann::json(nullptr);
  return j.dump(2);
}

Dag dag_from_json(const std::string& json_text) {
  auto j = nlohmann::json::parse(json_text);
  Dag g(j.at("nodes").get<std::vector<std::string>>());
  for (const auto& e : j.at("edges"))
    g.add_edge(e.at(0).get<std::string>(), e.at(1).get<std::string>());
  if (j.contains("x") && !j["x"].is_null() && j.contains("y") &&
      !j["y"].is_null())
    g.designate(j["x"].get<std::string>(), j["y"].get<std::string>());
  return g;
}

std::string dag_to_edge_list(const Dag& g) {
  std::ostringstream out;
  std::vector<uint8_t> touched(g.num_nodes(), 0);
  for (auto [p, c] : g.edges()) {
    out << g.name(p) << " -> " << g.name(c) << "\n";
    touched[p] = touched[c] = 1;
  }
  for (int v = 0; v < g.num_nodes(); ++v)
    if (!touched[v]) out << g.name(v) << "\n";
  return out.str();
}

Dag dag_from_edge_list(const std::string& text) {
  Dag g;
  std::istringstream in(text);
  std::string line;
  auto ensure = [&](const std::string& name) {
    if (!g.has_node(name)) g.add_node(name);
  };
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto arrow = line.find("->");
    if (arrow == std::string::npos) {
      auto last = line.find_last_not_of(" \t\r");
      ensure(line.substr(first, last - first + 1));
      continue;
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, e - b + 1);
    };
    std::string p = trim(line.substr(0, arrow));
    std::string c = trim(line.substr(arrow + 2));
    if (p.empty() || c.empty())
      throw std::invalid_argument("malformed edge line: " + line);
    ensure(p);
    ensure(c);
    g.add_edge(p, c);
  }
  return g;
}

}  // namespace ld3

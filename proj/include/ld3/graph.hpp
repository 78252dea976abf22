#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ld3 {

/// Directed acyclic graph over named variables, with an optional designated
/// exposure/outcome pair. Immutable once built (add_edge rejects cycles as
/// they appear, so the graph is a DAG at all times). All query methods are
/// const and safe for concurrent use.
class Dag {
 public:
  Dag() = default;
  explicit Dag(std::vector<std::string> nodes);

  int add_node(const std::string& name);

  /// Inserts parent -> child. Throws std::invalid_argument on unknown
  /// nodes, self-loops, duplicate edges, or edges that would close a cycle.
  void add_edge(const std::string& parent, const std::string& child);
  void add_edge(int parent, int child);

  /// Designates exposure x and outcome y. Requires y not an ancestor of x.
  void designate(const std::string& x, const std::string& y);

  int num_nodes() const { return static_cast<int>(names_.size()); }
  int num_edges() const { return num_edges_; }
  const std::vector<std::string>& nodes() const { return names_; }
  const std::string& name(int i) const { return names_.at(i); }
  bool has_node(const std::string& name) const;
  int index_of(const std::string& name) const;  // throws on unknown name
  bool has_edge(int parent, int child) const;
  bool has_edge(const std::string& parent, const std::string& child) const;

  const std::vector<int>& parents_of(int v) const { return parents_.at(v); }
  const std::vector<int>& children_of(int v) const { return children_.at(v); }
  std::vector<std::string> parents_of(const std::string& v) const;

  /// All edges as (parent, child) index pairs, in insertion order.
  std::vector<std::pair<int, int>> edges() const;

  std::optional<int> exposure() const { return x_; }
  std::optional<int> outcome() const { return y_; }

  /// Ancestors/descendants excluding v itself.
  std::vector<int> ancestors_of(int v) const;
  std::vector<int> descendants_of(int v) const;
  /// Membership masks including v itself (mask[u] != 0 iff u reachable).
  std::vector<uint8_t> ancestral_mask(const std::vector<int>& seeds) const;
  std::vector<uint8_t> descendant_mask(int v) const;

  std::vector<int> topological_order() const;

  /// Copy with one node (and its incident edges) removed. The designated
  /// pair survives unless it names the removed node.
  Dag without_node(int v) const;

 private:
  bool reachable(int from, int to) const;

  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  int num_edges_ = 0;
  std::optional<int> x_;
  std::optional<int> y_;
};

/// True iff every path between a and b is blocked by s (moralization of the
/// ancestral subgraph, then undirected separation). a != b, a,b not in s.
bool d_separated(const Dag& g, int a, int b, const std::vector<int>& s);
bool d_separated(const Dag& g, const std::string& a, const std::string& b,
                 const std::vector<std::string>& s);

/// G(n, p) DAG oriented by a random permutation, with a designated (x, y)
/// such that y has no descendants. Draws whose outcome choice leaves fewer
/// than two usable nodes are retried with a perturbed seed, up to a bound.
Dag random_er_dag(int n_nodes, double edge_prob, uint64_t seed);

/// JSON form {nodes:[], edges:[[p,c]], x:, y:}.
std::string dag_to_json(const Dag& g);
Dag dag_from_json(const std::string& json_text);

/// Edge-list text, one `parent -> child` per line; isolated nodes appear as
/// bare names.
std::string dag_to_edge_list(const Dag& g);
Dag dag_from_edge_list(const std::string& text);

}  // namespace ld3

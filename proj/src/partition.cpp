#include "ld3/partition.hpp"

#include <algorithm>
#include <stdexcept>

namespace ld3 {

const char* to_string(Partition p) {
  switch (p) {
    case Partition::Z1: return "Z1";
    case Partition::Z2NotDeY: return "Z2_not_de_Y";
    case Partition::Z3: return "Z3";
    case Partition::Z4: return "Z4";
    case Partition::Z5: return "Z5";
    case Partition::Z6: return "Z6";
    case Partition::Z7: return "Z7";
    case Partition::Z8: return "Z8";
    case Partition::Z5or7: return "Z5or7";
    case Partition::Z1or3Parent: return "Z1or3_parent";
    case Partition::Z4Parent: return "Z4_parent";
    case Partition::Unresolved: return "Unresolved";
  }
  return "?";
}

Partition partition_from_string(const std::string& s) {
  static const std::map<std::string, Partition> table = {
      {"Z1", Partition::Z1},
      {"Z2_not_de_Y", Partition::Z2NotDeY},
      {"Z3", Partition::Z3},
      {"Z4", Partition::Z4},
      {"Z5", Partition::Z5},
      {"Z6", Partition::Z6},
      {"Z7", Partition::Z7},
      {"Z8", Partition::Z8},
      {"Z5or7", Partition::Z5or7},
      {"Z1or3_parent", Partition::Z1or3Parent},
      {"Z4_parent", Partition::Z4Parent},
      {"Unresolved", Partition::Unresolved},
  };
  auto it = table.find(s);
  if (it == table.end())
    throw std::invalid_argument("unknown partition label: " + s);
  return it->second;
}

namespace {

std::pair<int, int> designated(const Dag& g) {
  if (!g.exposure() || !g.outcome())
    throw std::invalid_argument("graph has no designated exposure/outcome");
  return {*g.exposure(), *g.outcome()};
}

}  // namespace

std::map<std::string, NodeLabel> oracle_partition(const Dag& g,
                                                  const std::string& x,
                                                  const std::string& y) {
  Dag copy = g;
  copy.designate(x, y);
  return oracle_partition(copy);
}

std::map<std::string, NodeLabel> oracle_partition(const Dag& g) {
  auto [x, y] = designated(g);

  auto de_x = g.descendant_mask(x);
  auto de_y = g.descendant_mask(y);
  auto an_x = g.ancestral_mask({x});

  // The x-deleted graph settles whether a node's connection to y is
  // x-mediated (Z7/Z5 tests) and whether it can reach y causally without
  // passing through x (confounder test).
  Dag g_no_x = g.without_node(x);
  auto idx_no_x = [&](int v) { return g_no_x.index_of(g.name(v)); };
  int y_no_x = idx_no_x(y);

  // Confounders proper: ancestors of x that also reach y avoiding x.
  std::vector<uint8_t> confounder(g.num_nodes(), 0);
  std::vector<uint8_t> an_y_no_x(g.num_nodes(), 0);
  {
    auto mask = g_no_x.ancestral_mask({y_no_x});
    for (int v = 0; v < g.num_nodes(); ++v)
      if (v != x) an_y_no_x[v] = mask[idx_no_x(v)];
  }
  for (int v = 0; v < g.num_nodes(); ++v)
    if (v != x && v != y && an_x[v] && an_y_no_x[v]) confounder[v] = 1;

  // Proxies hang off a confounder or mediator without routing through the
  // designated pair; descent through x or y belongs to other partitions.
  auto reach_avoiding_xy = [&](const std::vector<uint8_t>& seeds) {
    std::vector<uint8_t> mask(g.num_nodes(), 0);
    std::vector<int> stack;
    for (int v = 0; v < g.num_nodes(); ++v)
      if (seeds[v]) {
        mask[v] = 1;
        stack.push_back(v);
      }
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      if (v == x || v == y) continue;  // do not continue through the pair
      for (int c : g.children_of(v))
        if (!mask[c] && c != x && c != y) {
          mask[c] = 1;
          stack.push_back(c);
        }
    }
    return mask;
  };
  auto conf_or_proxy = reach_avoiding_xy(confounder);

  // Mediators proper sit on a directed x -> ... -> y route.
  auto an_y = g.ancestral_mask({y});
  std::vector<uint8_t> mediator(g.num_nodes(), 0);
  for (int v = 0; v < g.num_nodes(); ++v)
    if (v != x && v != y && de_x[v] && an_y[v]) mediator[v] = 1;
  auto med_or_proxy = reach_avoiding_xy(mediator);

  std::map<std::string, NodeLabel> labels;
  const std::vector<int> empty;
  for (int v = 0; v < g.num_nodes(); ++v) {
    if (v == x || v == y) continue;
    bool adjacent = g.has_edge(v, y);
    Partition label;
    bool sep_vx = d_separated(g, v, x, empty);
    bool sep_vy = d_separated(g, v, y, empty);
    bool sep_vy_no_x =
        d_separated(g_no_x, idx_no_x(v), y_no_x, std::vector<int>{});
    if (sep_vx && sep_vy) {
      label = Partition::Z8;
    } else if (de_y[v]) {
      label = Partition::Z6;
    } else if (de_x[v] && sep_vy_no_x) {
      label = Partition::Z7;
    } else if (!sep_vx && sep_vy_no_x) {
      label = Partition::Z5;
    } else if (!de_y[v] && sep_vx &&
               (!d_separated(g, v, x, std::vector<int>{y}) || an_y_no_x[v])) {
      // The |y clause is the definitional test; the ancestry clause keeps
      // y-ancestors in Z4 when x shares no path with y at all, where
      // conditioning on y cannot induce the dependence.
      label = Partition::Z4;
    } else if (med_or_proxy[v]) {
      label = Partition::Z3;
    } else if (conf_or_proxy[v]) {
      label = Partition::Z1;
    } else {
      label = Partition::Z2NotDeY;
    }
    labels[g.name(v)] = NodeLabel{label, adjacent};
  }
  return labels;
}

std::vector<std::string> oracle_a_de(const Dag& g) {
  auto [x, y] = designated(g);
  std::vector<std::string> out;
  for (int p : g.parents_of(y))
    if (p != x) out.push_back(g.name(p));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> oracle_a_de(const Dag& g, const std::string& x,
                                     const std::string& y) {
  Dag copy = g;
  copy.designate(x, y);
  return oracle_a_de(copy);
}

SfmProjection sfm_project(const Dag& g) {
  SfmProjection out;
  for (const auto& [name, label] : oracle_partition(g)) {
    if (label.partition == Partition::Z1) out.confounders.push_back(name);
    if (label.partition == Partition::Z3) out.mediators.push_back(name);
  }
  std::sort(out.confounders.begin(), out.confounders.end());
  std::sort(out.mediators.begin(), out.mediators.end());
  return out;
}

SfmProjection sfm_project(const Dag& g, const std::string& x,
                          const std::string& y) {
  Dag copy = g;
  copy.designate(x, y);
  return sfm_project(copy);
}

}  // namespace ld3

#pragma once

#include <map>
#include <string>
#include <vector>

#include "ld3/graph.hpp"

namespace ld3 {

/// Causal partition of a variable relative to the designated (x, y) pair.
/// The first eight values are ground-truth labels; the remaining ones are
/// what the discovery procedure can actually emit (it cannot tell
/// confounders from mediators, nor instruments from exposure descendants).
enum class Partition {
  Z1,          // confounders and their proxies
  Z2NotDeY,    // colliders and their proxies (outcome has no descendants)
  Z3,          // mediators and their proxies
  Z4,          // x-independent ancestors of y (and alike under |y)
  Z5,          // instruments and their proxies
  Z6,          // descendants of y
  Z7,          // descendants of x whose paths to y run through x
  Z8,          // disconnected from both x and y
  Z5or7,       // discovery-time merge of Z5 and Z7
  Z1or3Parent, // confounder/mediator adjacent to y
  Z4Parent,    // Z4 member adjacent to y
  Unresolved,  // survived every screen without qualifying as a parent
};

const char* to_string(Partition p);
Partition partition_from_string(const std::string& s);

struct NodeLabel {
  Partition partition;
  bool adjacent_to_y = false;
};

/// Confounder/mediator split of the graph around the designated pair.
struct SfmProjection {
  std::vector<std::string> confounders;
  std::vector<std::string> mediators;
};

/// Ground-truth labels for every node other than x and y, computed from
/// graph structure. Definitional tests are applied in the order
/// Z8, Z6, Z7, Z5, Z4, Z3, Z1 with Z2 as the final bucket, so every node
/// receives exactly one label.
std::map<std::string, NodeLabel> oracle_partition(const Dag& g);
std::map<std::string, NodeLabel> oracle_partition(const Dag& g,
                                                  const std::string& x,
                                                  const std::string& y);

/// The parents of y minus x, sorted by node order.
std::vector<std::string> oracle_a_de(const Dag& g);
std::vector<std::string> oracle_a_de(const Dag& g, const std::string& x,
                                     const std::string& y);

SfmProjection sfm_project(const Dag& g);
SfmProjection sfm_project(const Dag& g, const std::string& x,
                          const std::string& y);

}  // namespace ld3

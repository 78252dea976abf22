#include "ld3/fixtures.hpp"

#include <stdexcept>

namespace ld3 {

Dag fig_c1(bool with_direct_edge) {
  Dag g({"X", "Y", "Z1", "B1", "B2", "B3", "Z3a", "Z3b", "Z3c", "Z3d", "Z4a",
         "Z4b", "Z5", "M1", "M2", "M3"});
  if (with_direct_edge) g.add_edge("X", "Y");
  g.add_edge("Z1", "X");
  g.add_edge("Z1", "Y");
  g.add_edge("B1", "X");
  g.add_edge("B1", "B3");
  g.add_edge("B2", "Y");
  g.add_edge("B2", "B3");
  g.add_edge("B3", "X");
  g.add_edge("B3", "Y");
  g.add_edge("Z5", "X");
  g.add_edge("X", "Z3a");
  g.add_edge("Z3a", "Z3b");
  g.add_edge("Z3b", "Z3c");
  g.add_edge("Z3c", "Y");
  g.add_edge("X", "Z3d");
  g.add_edge("Z3d", "Y");
  g.add_edge("Z4a", "Z3d");
  g.add_edge("Z4a", "Z4b");
  g.add_edge("Z4b", "Y");
  g.add_edge("M1", "X");
  g.add_edge("M1", "M3");
  g.add_edge("M2", "Y");
  g.add_edge("M2", "M3");
  g.designate("X", "Y");
  return g;
}

Dag fig_d5(bool with_direct_edge) {
  Dag g({"X", "Y", "Z1", "Z3", "Z4", "Z2a", "Z2b", "Z2c", "Z5a", "Z5b", "Z5c",
         "Z7a", "Z7b", "Z7c", "Z8a", "Z8b", "Z8c"});
  if (with_direct_edge) g.add_edge("X", "Y");
  g.add_edge("Z1", "X");
  g.add_edge("Z1", "Y");
  g.add_edge("X", "Z3");
  g.add_edge("Z3", "Y");
  g.add_edge("Z4", "Y");
  g.add_edge("Z4", "Z2a");
  g.add_edge("Z4", "Z2b");
  g.add_edge("Z4", "Z2c");
  g.add_edge("X", "Z2a");
  g.add_edge("X", "Z2b");
  g.add_edge("X", "Z2c");
  g.add_edge("X", "Z7a");
  g.add_edge("X", "Z7b");
  g.add_edge("X", "Z7c");
  g.add_edge("Z5a", "X");
  g.add_edge("Z5b", "X");
  g.add_edge("Z5c", "X");
  g.designate("X", "Y");
  return g;
}

Dag fixture_by_id(const std::string& id, bool with_direct_edge) {
  if (id == "fig_c1") return fig_c1(with_direct_edge);
  if (id == "fig_d5") return fig_d5(with_direct_edge);
  throw std::invalid_argument("unknown fixture id: " + id);
}

bool is_known_fixture(const std::string& id) {
  return id == "fig_c1" || id == "fig_d5";
}

}  // namespace ld3

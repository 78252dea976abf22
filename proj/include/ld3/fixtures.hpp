#pragma once

#include <string>

#include "ld3/graph.hpp"

namespace ld3 {

/// 16-node evaluation graph: four confounders (Z1, B1, B2, B3), a mediator
/// chain (Z3a..Z3c) plus a short mediator (Z3d), an x-independent ancestor
/// chain into y (Z4a, Z4b, M2), an instrument (Z5) with a proxy (M1), and a
/// collider (M3). The direct x -> y edge is optional so the no-direct-effect
/// variant can be built.
Dag fig_c1(bool with_direct_edge = true);

/// 17-node graph with three of everything: colliders (Z2a..c), instruments
/// (Z5a..c), exposure descendants (Z7a..c), disconnected nodes (Z8a..c), and
/// exactly one confounder, mediator, and x-independent parent of y.
Dag fig_d5(bool with_direct_edge = true);

/// Lookup by id ("fig_c1" / "fig_d5"). Throws std::invalid_argument
/// otherwise.
Dag fixture_by_id(const std::string& id, bool with_direct_edge = true);

bool is_known_fixture(const std::string& id);

}  // namespace ld3

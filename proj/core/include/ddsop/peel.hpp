#pragma once

#include "ddsop/filtering.hpp"

namespace ddsop {

// Splits d into two diagrams along exact node u: the returned diagram is
// rooted at u's subproblem (placed = all_down(u), offset extended by t_star(u))
// and contains every path of d through u; d itself becomes the residual,
// containing every path of d avoiding u. Arc values carry over unchanged
// (exact-arc provenance). Redirected and copied arcs are filtered with `ctx`;
// residual nodes that lost in-arcs have their down-states refreshed and their
// out-arcs refiltered. Either side may end up without a root-terminal path
// (check has_terminal_path before use).
//
// Preconditions: u is state-exact, u != terminal, down-states are fresh.
// Throws std::logic_error otherwise.
Diagram peel(Diagram& d, NodeId u, const FilterContext& ctx);

}  // namespace ddsop

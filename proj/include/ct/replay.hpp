#ifndef CT_REPLAY_HPP
#define CT_REPLAY_HPP

#include <optional>
#include <string>

#include "ct/graph.hpp"
#include "ct/trace.hpp"

namespace ct {

/// Re-executes a solver trace against the input graph, checking at every
/// event: fund conservation, seven zlotys paid per red vertex, distinguished
/// tuple invariants (creation funds, non-red complete members, a red member
/// or covering successor at death), and rule precedence for basic rule
/// events. At each component end it checks the identity
/// 7*|X| = 2n + t - s with all funds settled and no debt; at the very end it
/// checks the union of the red sets is a clique transversal of g.
/// Returns std::nullopt on success, otherwise a message naming the first
/// violating event index.
std::optional<std::string> replay_verify(const Trace& trace, const Graph& g);

}  // namespace ct

#endif

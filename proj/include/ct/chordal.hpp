#ifndef CT_CHORDAL_HPP
#define CT_CHORDAL_HPP

#include <optional>
#include <variant>
#include <vector>

#include "ct/graph.hpp"

namespace ct {

/// Perfect elimination ordering: for every vertex, its later neighbors in
/// `order` induce a complete subgraph.
struct Peo {
    std::vector<Vertex> order;
};

/// Clique as a sorted vertex set, pairwise adjacent in the host graph.
using Clique = std::vector<Vertex>;

/// An induced cycle of length >= 4, listed in cycle order.
struct CycleWitness {
    std::vector<Vertex> cycle;
};

/// Witness that a graph is not 4-chordal: either it is not chordal, or some
/// edge lies in no 4-clique.
struct FourChordalWitness {
    std::optional<CycleWitness> hole;                // set if not chordal
    std::optional<std::pair<Vertex, Vertex>> edge;   // set if an edge has no 4-clique
};

/// Chordality test by maximum cardinality search with post-verification of
/// the elimination order. On failure returns an induced cycle of length >= 4.
std::variant<Peo, CycleWitness> is_chordal(const Graph& g);

/// True iff `peo` is a valid perfect elimination ordering of g.
bool verify_peo(const Graph& g, const Peo& peo);

/// All inclusion-wise maximal cliques of a chordal graph, from a valid PEO.
/// Singletons appear only for isolated vertices. Output sorted
/// lexicographically. Throws ContractError on an invalid PEO.
std::vector<Clique> maximal_cliques(const Graph& g, const Peo& peo);

/// True iff g is chordal and every edge lies in some 4-clique.
std::variant<std::monostate, FourChordalWitness> check_four_chordal(const Graph& g);

bool is_four_chordal(const Graph& g);

/// Number of maximal cliques of size exactly 3. Requires g chordal.
int count_maximal_triangles(const Graph& g);

}  // namespace ct

#endif

#ifndef CT_ORACLE_HPP
#define CT_ORACLE_HPP

#include <optional>
#include <vector>

#include "ct/chordal.hpp"
#include "ct/graph.hpp"

namespace ct {

/// Result of the exact minimum clique transversal search.
struct OracleResult {
    int minimum_size = 0;
    std::vector<Vertex> witness;
    long long explored = 0;
    bool cap_exceeded = false;
};

/// Maximal clique enumeration with pivoting. Independent of the PEO-based
/// enumeration in chordal.hpp; works on arbitrary graphs. Output sorted
/// lexicographically, each clique sorted.
std::vector<Clique> bron_kerbosch(const Graph& g);

/// True iff every maximal clique of size >= 2 contains a vertex of `s`;
/// otherwise returns one missed clique.
std::optional<Clique> transversal_gap(const Graph& g, const std::vector<Vertex>& s);

bool is_transversal(const Graph& g, const std::vector<Vertex>& s);

/// Exact minimum clique transversal by iterative deepening over hitting sets
/// of the maximal-clique hypergraph. Branches on the smallest unhit clique;
/// prunes with a disjoint-clique lower bound. If the minimum exceeds
/// `size_cap`, reports cap_exceeded instead of a wrong number.
OracleResult min_transversal_exact(const Graph& g, int size_cap);

}  // namespace ct

#endif

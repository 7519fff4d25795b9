#ifndef CT_GENERATORS_HPP
#define CT_GENERATORS_HPP

#include <cstdint>

#include "ct/graph.hpp"

namespace ct {

/// Small deterministic PRNG (splitmix64). Distribution helpers are
/// hand-rolled so generated graphs are identical across platforms.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, bound).
    uint64_t below(uint64_t bound) { return bound ? next() % bound : 0; }

    /// Uniform in [lo, hi] inclusive.
    int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1))); }

    /// True with probability pct/100.
    bool chance(int pct) { return static_cast<int>(below(100)) < pct; }

private:
    uint64_t state_;
};

Graph complete_graph(int n);

/// The tight lower-bound family: 7k+8 vertices, 2k+2 pairwise disjoint
/// maximal cliques, minimum clique transversal 2k+2. Vertex layout:
///   0..3    a, a', a'', a'''
///   4+7i..  b_i, b'_i, b''_i, c_i, c'_i, c''_i, c'''_i   (i = 0..k-1)
///   7k+4..  d, d', d'', d'''
/// For k = 0 the two end cliques are connected through {a'', a''', d, d'}.
Graph h_graph(int k);

/// n-vertex 4-chordal graph whose minimum clique transversal equals
/// floor(2(n-1)/7): K_n for n in {5,6,7}, otherwise h_graph(k) extended by
/// z = (n-1) mod 7 extra vertices (pendants on the d-clique for z <= 3, a
/// mutually adjacent block joined to d'', d''' for z >= 4).
Graph lower_bound_graph(int n);

/// Seed-deterministic random 4-chordal instance built as a random tree of
/// clique bags. About 20% of bags are maximal 3-cliques whose edges are then
/// covered by fresh 4-clique bags. Always returns a graph passing
/// is_four_chordal.
Graph random_four_chordal(uint64_t seed, int target_nodes, int max_bag);

}  // namespace ct

#endif

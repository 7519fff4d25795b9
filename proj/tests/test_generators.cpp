#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ct/chordal.hpp"
#include "ct/engine.hpp"
#include "ct/generators.hpp"
#include "ct/oracle.hpp"

using namespace ct;

namespace {

bool disjoint(const Clique& a, const Clique& b) {
    for (Vertex v : a)
        if (std::binary_search(b.begin(), b.end(), v)) return false;
    return true;
}

// Largest family of pairwise disjoint cliques among the listed ones.
int max_disjoint_cliques(const std::vector<Clique>& cs) {
    int best = 0;
    for (unsigned mask = 0; mask < (1u << cs.size()); ++mask) {
        bool ok = true;
        int count = 0;
        for (size_t i = 0; i < cs.size() && ok; ++i) {
            if (!(mask & (1u << i))) continue;
            ++count;
            for (size_t j = i + 1; j < cs.size() && ok; ++j)
                if (mask & (1u << j)) ok = disjoint(cs[i], cs[j]);
        }
        if (ok) best = std::max(best, count);
    }
    return best;
}

}  // namespace

TEST_CASE("complete_graph") {
    CHECK(complete_graph(1).n() == 1);
    CHECK(complete_graph(4).m() == 6);
    CHECK(min_transversal_exact(complete_graph(7), 2).minimum_size == 1);
    CHECK_THROWS_AS(complete_graph(0), ContractError);
}

TEST_CASE("h_graph sizes and structure") {
    for (int k = 0; k <= 3; ++k) {
        auto g = h_graph(k);
        CHECK(g.n() == 7 * k + 8);
        CHECK(is_four_chordal(g));
        CHECK(count_maximal_triangles(g) == k);
    }
}

TEST_CASE("h_graph carries 2k+2 pairwise disjoint maximal cliques") {
    for (int k = 0; k <= 2; ++k) {
        auto g = h_graph(k);
        auto cliques = bron_kerbosch(g);
        CHECK(max_disjoint_cliques(cliques) >= 2 * k + 2);
    }
}

TEST_CASE("h_graph minimum transversals") {
    CHECK(min_transversal_exact(h_graph(0), 3).minimum_size == 2);
    CHECK(min_transversal_exact(h_graph(1), 5).minimum_size == 4);
    CHECK(min_transversal_exact(h_graph(2), 7).minimum_size == 6);
}

TEST_CASE("lower_bound_graph hits the bound exactly") {
    CHECK_THROWS_AS(lower_bound_graph(4), ContractError);
    for (int n = 5; n <= 7; ++n) {
        auto g = lower_bound_graph(n);
        CHECK(g.m() == n * (n - 1) / 2);  // complete
    }
    for (int n = 5; n <= 23; ++n) {
        auto g = lower_bound_graph(n);
        CHECK(g.n() == n);
        CHECK(is_four_chordal(g));
        auto res = min_transversal_exact(g, static_cast<int>(bound(n)) + 1);
        CHECK(!res.cap_exceeded);
        CHECK(res.minimum_size == bound(n));
    }
}

TEST_CASE("random_four_chordal is valid and deterministic") {
    for (uint64_t seed : {1ULL, 7ULL, 42ULL, 1234567ULL}) {
        Graph a = random_four_chordal(seed, 12, 6);
        Graph b = random_four_chordal(seed, 12, 6);
        CHECK(a == b);
        CHECK(is_four_chordal(a));
    }
    Graph single = random_four_chordal(1, 1, 5);
    CHECK(single.n() >= 4);
    CHECK(is_four_chordal(single));
    CHECK_THROWS_AS(random_four_chordal(1, 0, 5), ContractError);
    CHECK_THROWS_AS(random_four_chordal(1, 3, 3), ContractError);
}

TEST_CASE("random_four_chordal exercises maximal triangles") {
    int with_triangles = 0;
    for (uint64_t seed = 1; seed <= 40; ++seed) {
        Graph g = random_four_chordal(seed, 14, 6);
        if (count_maximal_triangles(g) > 0) ++with_triangles;
    }
    CHECK(with_triangles >= 10);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ct/engine.hpp"
#include "ct/generators.hpp"
#include "ct/oracle.hpp"
#include "ct/replay.hpp"
#include "helpers.hpp"

using namespace ct;

namespace {

Graph disjoint_union(const Graph& a, const Graph& b) {
    auto edges = a.edges();
    for (auto [u, v] : b.edges()) edges.emplace_back(u + a.n(), v + a.n());
    return Graph(a.n() + b.n(), std::move(edges));
}

long long count_rule(const Trace& tr, const std::string& rule) {
    long long c = 0;
    for (const auto& e : tr.events)
        if (e.kind == "rule" && e.rule == rule) ++c;
    return c;
}

void check_result(const Graph& g, const TransversalResult& res) {
    CHECK(is_transversal(g, res.red));
    if (g.n() >= 5) CHECK(static_cast<long long>(res.red.size()) <= bound(g.n()));
    CHECK(7LL * static_cast<long long>(res.red.size()) == 2LL * res.n + res.t - res.saved);
    auto verdict = replay_verify(res.trace, g);
    CHECK(!verdict.has_value());
    if (verdict) MESSAGE(*verdict);
}

}  // namespace

TEST_CASE("bound values") {
    CHECK(bound(5) == 1);
    CHECK(bound(8) == 2);
    CHECK(bound(4) == 0);
    CHECK(bound(15) == 4);
    CHECK(bound(22) == 6);
    CHECK(bound(60) == 16);
}

TEST_CASE("solve on complete graphs") {
    for (int n : {5, 6, 7}) {
        auto res = solve(complete_graph(n));
        CHECK(res.red.size() == 1);
        check_result(complete_graph(n), res);
    }
    auto res8 = solve(complete_graph(8));
    CHECK(res8.red.size() <= bound(8));
    check_result(complete_graph(8), res8);
}

TEST_CASE("the K4 exception") {
    auto res = solve(complete_graph(4));
    CHECK(res.red.size() == 1);
    CHECK(!res.bound_ok);
    CHECK(is_transversal(complete_graph(4), res.red));
}

TEST_CASE("two K4 components stay within the bound") {
    auto g = disjoint_union(complete_graph(4), complete_graph(4));
    auto res = solve(g);
    CHECK(res.red.size() == 2);
    CHECK(res.bound_ok);
    check_result(g, res);
}

TEST_CASE("edgeless graphs save everything") {
    Graph g(3, {});
    auto res = solve(g);
    CHECK(res.red.empty());
    CHECK(res.saved == 6);
    check_result(g, res);
}

TEST_CASE("solve rejects non-4-chordal input") {
    Graph c4(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    CHECK_THROWS_AS(solve(c4), ContractError);
    CHECK_THROWS_AS(solve(complete_graph(3)), ContractError);
}

TEST_CASE("solve on the extremal family") {
    {
        auto g = h_graph(1);
        auto res = solve(g);
        CHECK(res.red.size() == 4);  // oracle minimum and the bound coincide
        CHECK(res.t == 1);
        CHECK(res.saved == 3);  // 7*4 = 30 + 1 - s
        check_result(g, res);
    }
    {
        auto g = h_graph(0);
        auto res = solve(g);
        CHECK(res.red.size() == 2);
        check_result(g, res);
    }
    {
        auto g = h_graph(2);
        auto res = solve(g);
        CHECK(res.red.size() == 6);
        check_result(g, res);
    }
}

TEST_CASE("solve matches the oracle on lower bound graphs") {
    for (int n = 5; n <= 19; ++n) {
        auto g = lower_bound_graph(n);
        auto res = solve(g);
        CHECK(static_cast<long long>(res.red.size()) == bound(n));
        check_result(g, res);
    }
}

TEST_CASE("two-private leaves open with B5+G3 or two G5s") {
    // Chain of three 4-cliques glued on edges: the leaf-rooted run processes
    // a leaf with two private vertices and no tuples, so B5 then G3 fire.
    Graph g(8, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3},
                {2, 4}, {2, 5}, {3, 4}, {3, 5}, {4, 5},
                {4, 6}, {4, 7}, {5, 6}, {5, 7}, {6, 7}});
    REQUIRE(count_maximal_triangles(g) == 0);
    auto res = solve(g);
    check_result(g, res);
    CHECK(count_rule(res.trace, "B5") + count_rule(res.trace, "G5") >= 1);
    CHECK(count_rule(res.trace, "G3") + count_rule(res.trace, "G5") >= 1);
}

TEST_CASE("triangle driver saves at least t + 2") {
    Rng rng(59);
    int seen = 0;
    for (int trial = 0; trial < 300 && seen < 80; ++trial) {
        Graph g = random_four_chordal(rng.next(), rng.range(2, 16), rng.range(4, 7));
        if (connected_components(g).size() != 1) continue;
        int t = count_maximal_triangles(g);
        if (t < 1) continue;
        ++seen;
        auto res = solve_with_triangle(g);
        CHECK(res.saved >= t + 2);
        long long branches = 0;
        for (const auto& e : res.trace.events)
            if (e.kind == "branch_end") {
                ++branches;
                CHECK(e.a >= 1);
            }
        CHECK(branches >= t + 2);
        check_result(g, res);
    }
    CHECK(seen >= 40);
}

TEST_CASE("no-triangle driver on assorted shapes") {
    // Single clique, two overlapping cliques, chains of 4-cliques.
    auto star = [](int arms) {
        // 4-cliques all sharing the pair {0, 1}.
        std::vector<std::pair<Vertex, Vertex>> edges{{0, 1}};
        int next = 2;
        for (int a = 0; a < arms; ++a) {
            Vertex x = next++, y = next++;
            for (Vertex v : {x, y}) {
                edges.emplace_back(0, v);
                edges.emplace_back(1, v);
            }
            edges.emplace_back(x, y);
        }
        return Graph(next, std::move(edges));
    };
    for (int arms = 2; arms <= 5; ++arms) {
        Graph g = star(arms);
        REQUIRE(count_maximal_triangles(g) == 0);
        auto res = solve_without_triangle(g);
        check_result(g, res);
        CHECK(res.red.size() == 1);  // {0,1} meets every clique
    }
}

TEST_CASE("forcing modes") {
    auto g = h_graph(1);
    CHECK_THROWS_AS(solve(g, SolveMode::thm_b), ContractError);
    auto basic = solve(g, SolveMode::basic);
    CHECK(is_transversal(g, basic.red));
    CHECK(7LL * static_cast<long long>(basic.red.size()) == 2LL * basic.n + basic.t - basic.saved);
    auto ok = replay_verify(basic.trace, g);
    CHECK(!ok.has_value());

    auto g0 = h_graph(0);
    CHECK_THROWS_AS(solve(g0, SolveMode::thm_a), ContractError);
}

TEST_CASE("determinism: identical traces for identical inputs") {
    Graph g = random_four_chordal(99, 12, 6);
    auto a = solve(g);
    auto b = solve(g);
    CHECK(trace_to_jsonl(a.trace) == trace_to_jsonl(b.trace));
}

TEST_CASE("trace serialization round trips") {
    auto res = solve(h_graph(1));
    std::string text = trace_to_jsonl(res.trace);
    Trace back = trace_from_jsonl(text);
    CHECK(trace_to_jsonl(back) == text);
}

TEST_CASE("replay rejects a tampered trace") {
    auto g = h_graph(1);
    auto res = solve(g);
    CHECK(!replay_verify(res.trace, g).has_value());
    Trace broken = res.trace;
    bool tampered = false;
    for (auto& e : broken.events) {
        for (auto& m : e.moves)
            if (m.to == "saved" && m.amount > 0 && !tampered) {
                m.to = "paid";
                tampered = true;
            }
        if (tampered) break;
    }
    REQUIRE(tampered);
    CHECK(replay_verify(broken, g).has_value());
}

TEST_CASE("fuzz: solve stays within the bound and replays cleanly") {
    Rng rng(4242);
    for (int trial = 0; trial < 400; ++trial) {
        uint64_t seed = rng.next();
        Graph g = random_four_chordal(seed, rng.range(1, 18), rng.range(4, 8));
        CAPTURE(seed);
        CAPTURE(g.n());
        TransversalResult res;
        REQUIRE_NOTHROW(res = solve(g));
        CHECK(is_transversal(g, res.red));
        if (g.n() >= 5) CHECK(static_cast<long long>(res.red.size()) <= bound(g.n()));
        auto verdict = replay_verify(res.trace, g);
        CHECK(!verdict.has_value());
        if (verdict) {
            MESSAGE(*verdict);
            break;
        }
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ct/engine.hpp"
#include "ct/oracle.hpp"

// The branch surgeries replace rules B2 and B3 in configurations that a
// solver run reaches only under adversarial tuple placement; these tests
// build the exact configurations by hand and check the zloty flows.

using namespace ct;

namespace {

struct Rig {
    Graph g;
    Ledger ledger;
    Trace trace;
    Engine eng;

    Rig(int n, std::vector<std::vector<Vertex>> bags, std::vector<int> parents,
        std::vector<int> non_maximal = {})
        : g(build_graph(n, bags)), ledger(seed_ledger(n)), trace(), eng(g, ledger, trace) {
        TreeDecomposition td;
        td.nodes.resize(bags.size());
        for (size_t i = 0; i < bags.size(); ++i) {
            auto b = bags[i];
            std::sort(b.begin(), b.end());
            td.nodes[i].bag = b;
            td.nodes[i].parent = parents[i];
            if (parents[i] >= 0) td.nodes[parents[i]].children.push_back(static_cast<int>(i));
        }
        for (size_t i = 0; i < bags.size(); ++i)
            if (parents[i] < 0) td.root = static_cast<int>(i);
        for (int u : non_maximal) td.nodes[u].is_maximal = false;
        eng.load(std::move(td));
    }

    static Graph build_graph(int n, const std::vector<std::vector<Vertex>>& bags) {
        std::vector<std::pair<Vertex, Vertex>> edges;
        for (const auto& b : bags)
            for (size_t i = 0; i < b.size(); ++i)
                for (size_t j = i + 1; j < b.size(); ++j) edges.emplace_back(b[i], b[j]);
        return Graph(n, std::move(edges));
    }

    static Ledger seed_ledger(int n) {
        Ledger ledger;
        ledger.vertex_funds.assign(n, 2);
        ledger.universe = 2LL * n;
        return ledger;
    }

    long long count(const std::string& kind, const std::string& rule) const {
        long long c = 0;
        for (const auto& e : trace.events)
            if (e.kind == kind && e.rule == rule) ++c;
        return c;
    }

    long long branch_saving() const {
        for (const auto& e : trace.events)
            if (e.kind == "branch_end") return e.a;
        return -1;
    }

    void settle() {
        // Discharge leftover anchor tuples, then sweep everything out.
        while (true) {
            auto live = eng.live_tuples();
            if (live.empty()) break;
            Vertex m = live[0]->members[0];
            std::vector<Vertex> sources;
            for (Vertex v = 0; v < g.n(); ++v)
                if (v != m && eng.vertex_alive(v) && eng.vertex_funds(v) > 0) sources.push_back(v);
            eng.endgame_color(m, sources, "test settle");
        }
        eng.teardown_all_remaining("test settle");
        eng.assert_all_done();
        CHECK(ledger.held() == 0);
        CHECK(ledger.debt == 0);
        CHECK(ledger.universe == ledger.paid + ledger.saved);
    }
};

}  // namespace

// Pair partner inside the triple: coloring it settles both tuples.
TEST_CASE("surgery B2.shared") {
    // 0=alpha 1=beta 2=v 3=z; 4,5 parent side; 6,7,8 funders
    Rig rig(9, {{0, 1, 4, 5}, {0, 1, 2, 3}}, {-1, 0});
    rig.eng.introduce_tuple({0, 2, 3}, {6}, "triple alpha,v,z");
    rig.eng.introduce_tuple({2, 3}, {7, 8}, "pair v,z");
    rig.eng.process_branch_as({1}, 1, 0, 1);
    CHECK(rig.count("surgery", "B2.shared") == 1);
    CHECK(rig.branch_saving() >= 1);
    CHECK(rig.eng.red()[3]);
    rig.settle();
}

// Pair partner carries a second tuple: it turns red, the triple remainder
// survives as a pair.
TEST_CASE("surgery B2.partner") {
    // 0=alpha 1=beta 2=v 3=v1 4=v1' 5=v2 6=d; 7..12 spare/funders
    Rig rig(13, {{0, 1, 11, 12},        // parent of the branch
                 {0, 1, 3, 4, 5, 6},    // branch root
                 {2, 3, 4, 5, 6}},      // leaf, private v=2
        {-1, 0, 1});
    rig.eng.introduce_tuple({2, 3, 4}, {7}, "triple v,v1,v1'");
    rig.eng.introduce_tuple({2, 5}, {8, 9}, "pair v,v2");
    rig.eng.introduce_tuple({5, 6}, {10, 11}, "pair v2,d");
    rig.eng.process_branch_as({1, 2}, 1, 0, 1);
    CHECK(rig.count("surgery", "B2.partner") == 1);
    CHECK(rig.eng.red()[5]);
    CHECK(rig.branch_saving() >= 1);
    rig.settle();
}

// Pair partner is an anchor: the anchor and a matched triple mate turn red;
// the freed pair partner later falls to rule G5.
TEST_CASE("surgery B2.anchor") {
    // 0=alpha 1=beta 2=v 3=v1 4=v1' 5=d; 6..11 spare/funders
    Rig rig(12, {{0, 1, 10, 11},        // parent
                 {0, 1, 4, 5},          // branch root
                 {0, 3, 4, 5},          // mid
                 {0, 2, 3, 4, 5}},      // leaf, private v=2
        {-1, 0, 1, 2});
    rig.eng.introduce_tuple({2, 3, 4}, {6}, "triple v,v1,v1'");
    rig.eng.introduce_tuple({0, 2}, {7, 8}, "pair v,alpha");
    rig.eng.introduce_tuple({3, 5}, {9, 10}, "pair v1,d");
    rig.eng.process_branch_as({1, 2, 3}, 1, 0, 1);
    CHECK(rig.count("surgery", "B2.anchor") == 1);
    CHECK(rig.eng.red()[0]);  // the anchor
    CHECK(rig.eng.red()[3]);  // the triple mate
    CHECK(rig.count("rule", "G5") >= 1);
    CHECK(rig.branch_saving() >= 1);
    rig.settle();
}

// Both anchors entangled with the triple and a pair: coloring both settles
// every tuple at exactly fourteen zlotys.
TEST_CASE("surgery B2.anchors2") {
    // 0=alpha 1=beta 2=v 3=c 4=e; 5..10 spare/funders
    Rig rig(11, {{0, 1, 7, 8},          // parent
                 {0, 1, 3, 4},          // branch root
                 {0, 1, 2, 3}},         // leaf, private v=2
        {-1, 0, 1});
    rig.eng.introduce_tuple({1, 2, 3}, {5}, "triple v,c,beta");
    rig.eng.introduce_tuple({0, 2}, {6, 9}, "pair v,alpha");
    rig.eng.introduce_tuple({1, 3}, {10, 7}, "pair c,beta");
    rig.eng.process_branch_as({1, 2}, 1, 0, 1);
    CHECK(rig.count("surgery", "B2.anchors2") == 1);
    CHECK(rig.eng.red()[0]);
    CHECK(rig.eng.red()[1]);
    CHECK(rig.branch_saving() >= 1);
    rig.settle();
}

// Disjoint triples: the loan is taken, the climb meets an anchor whose
// coloring repays it and saves two.
TEST_CASE("surgery B3.debt then anchor") {
    // 0=alpha 1=beta 2=v 3..6=escorts; 7,8 funders; 9,10 parent side
    Rig rig(11, {{0, 1, 9, 10},         // parent
                 {0, 1, 5, 6},          // branch root
                 {0, 3, 4, 5, 6},       // target: escorts plus the anchor
                 {2, 3, 4, 5, 6}},      // leaf, private v=2
        {-1, 0, 1, 2});
    rig.eng.introduce_tuple({2, 3, 4}, {7}, "triple one");
    rig.eng.introduce_tuple({2, 5, 6}, {8}, "triple two");
    rig.eng.process_branch_as({1, 2, 3}, 1, 0, 1);
    CHECK(rig.count("surgery", "B3.debt") == 1);
    CHECK(rig.count("surgery", "B3.debt.anchor") == 1);
    CHECK(rig.eng.red()[0]);
    CHECK(rig.branch_saving() >= 1);
    CHECK(rig.ledger.debt == 0);
    rig.settle();
}

// Disjoint triples with the second anchor among the escorts: the anchors
// become a distinguished pair and the other escorts leave silently.
TEST_CASE("surgery B3.debt then pair") {
    // 0=alpha 1=beta 2=v 3,4,5=plain escorts; 6,7 funders; 8,9 parent side
    Rig rig(10, {{0, 1, 8, 9},          // parent
                 {0, 1, 3, 5},          // branch root
                 {0, 1, 3, 4, 5},       // target: escorts plus alpha
                 {1, 2, 3, 4, 5}},      // leaf, private v=2
        {-1, 0, 1, 2});
    rig.eng.introduce_tuple({2, 3, 4}, {6}, "triple one");
    rig.eng.introduce_tuple({1, 2, 5}, {7}, "triple two holds beta");
    rig.eng.process_branch_as({1, 2, 3}, 1, 0, 1);
    CHECK(rig.count("surgery", "B3.debt") == 1);
    CHECK(rig.count("surgery", "B3.debt.pair") == 1);
    CHECK(rig.branch_saving() >= 1);
    CHECK(rig.ledger.debt == 0);
    bool anchor_pair = false;
    for (const auto* t : rig.eng.live_tuples())
        if (t->members == std::vector<Vertex>{0, 1}) anchor_pair = true;
    CHECK(anchor_pair);
    rig.settle();
}

// Disjoint triples, no anchor in sight: a matched outsider pays the way and
// the escort set shifts by its freed partner.
TEST_CASE("surgery B3.debt stepping through a matched vertex") {
    // 0=alpha 1=beta 2=v 3..6=escorts 7=y 8=y'; 9,10,11,14 funders; 12,13 parent
    Rig rig(15, {{0, 1, 12, 13},            // parent
                 {0, 1, 6, 8},              // branch root
                 {0, 4, 5, 6, 7, 8},        // upper bag: sees y red
                 {3, 4, 5, 6, 7},           // target: escorts plus y
                 {2, 3, 4, 5, 6}},          // leaf, private v=2
        {-1, 0, 1, 2, 3});
    rig.eng.introduce_tuple({2, 3, 4}, {9}, "triple one");
    rig.eng.introduce_tuple({2, 5, 6}, {10}, "triple two");
    rig.eng.introduce_tuple({7, 8}, {11, 14}, "pair y,y'");
    rig.eng.process_branch_as({1, 2, 3, 4}, 1, 0, 1);
    CHECK(rig.count("surgery", "B3.debt") == 1);
    CHECK(rig.count("surgery", "B3.debt.step") == 1);
    CHECK(rig.eng.red()[7]);
    CHECK(rig.count("rule", "G5") >= 1);
    CHECK(rig.branch_saving() >= 1);
    CHECK(rig.ledger.debt == 0);
    rig.settle();
}

// The escort-only bag on the climb is a strict subset of the clique that
// incurred the loan, so it dissolves with its funds.
TEST_CASE("surgery B3.debt salvages a covered bag") {
    // 0=alpha 1=beta 2=v 3..6=escorts; 7,8 funders; 9,10 parent side
    Rig rig(11, {{0, 1, 9, 10},         // parent
                 {0, 1, 5, 6},          // branch root
                 {3, 4, 5, 6},          // exactly the escorts, not maximal
                 {2, 3, 4, 5, 6}},      // leaf, private v=2
        {-1, 0, 1, 2}, {2});
    rig.eng.introduce_tuple({2, 3, 4}, {7}, "triple one");
    rig.eng.introduce_tuple({2, 5, 6}, {8}, "triple two");
    rig.eng.process_branch_as({1, 2, 3}, 1, 0, 1);
    CHECK(rig.count("surgery", "B3.debt") == 1);
    CHECK(rig.count("surgery", "salvage") >= 1);
    CHECK(rig.branch_saving() >= 1);
    CHECK(rig.ledger.debt == 0);
    rig.settle();
}

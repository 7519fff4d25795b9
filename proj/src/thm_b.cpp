#include <algorithm>
#include <optional>

#include "ct/engine.hpp"
#include "ct/oracle.hpp"

namespace ct {
namespace detail {

namespace {

std::vector<Vertex> intersect(const std::vector<Vertex>& a, const std::vector<Vertex>& b) {
    std::vector<Vertex> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<Vertex> subtract(const std::vector<Vertex>& a, const std::vector<Vertex>& b) {
    std::vector<Vertex> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

[[noreturn]] void driver_bug(const std::string& what, Trace& trace) {
    throw BoundMissError("no-triangle driver: " + what, trace);
}

struct WorkState {
    Graph graph;                // full id space; only scope edges present
    std::vector<Vertex> scope;  // vertices this call is responsible for
    TreeDecomposition tree;
    bool tree_valid = false;
    std::vector<Graph>* history = nullptr;  // shared unwind audit log
    Ledger* ledger = nullptr;
    Trace* trace = nullptr;
};

void emit_checked(WorkState& ws, TraceEvent ev) {
    ws.trace->push(std::move(ev));
    if (!ws.ledger->conserved())
        throw ContractError("reduction broke conservation: " + ws.ledger->summary());
}

Peo require_peo(const Graph& g) {
    auto chord = is_chordal(g);
    auto* peo = std::get_if<Peo>(&chord);
    if (!peo) throw ContractError("work graph lost chordality");
    return *peo;
}

void rebuild_tree(WorkState& ws) {
    Peo peo = require_peo(ws.graph);
    ws.tree = clique_tree(ws.graph, peo);
    if (ws.tree.size() >= 3) {
        for (int u = 0; u < ws.tree.size(); ++u) {
            int deg = static_cast<int>(ws.tree.nodes[u].children.size()) +
                      (ws.tree.nodes[u].parent >= 0 ? 1 : 0);
            if (deg >= 2) {
                reroot(ws.tree, u);
                break;
            }
        }
    }
    ws.tree_valid = true;
}

bool is_leaf(const TreeDecomposition& td, int u) {
    return td.nodes[u].children.empty() && u != td.root;
}

int relocate(const TreeDecomposition& td, const std::vector<Vertex>& bag, Trace& trace) {
    for (int u = 0; u < td.size(); ++u)
        if (td.bag(u) == bag) return u;
    throw BoundMissError("no-triangle driver: lost a bag while renicing", trace);
}

Graph drop_edges(const Graph& g, const std::vector<std::pair<Vertex, Vertex>>& gone) {
    auto edges = g.edges();
    auto norm = [](std::pair<Vertex, Vertex> e) {
        if (e.first > e.second) std::swap(e.first, e.second);
        return e;
    };
    std::vector<std::pair<Vertex, Vertex>> dead;
    for (auto e : gone) dead.push_back(norm(e));
    std::sort(dead.begin(), dead.end());
    std::vector<std::pair<Vertex, Vertex>> kept;
    for (auto e : edges)
        if (!std::binary_search(dead.begin(), dead.end(), norm(e))) kept.push_back(e);
    return Graph(g.n(), std::move(kept));
}

std::vector<Vertex> single_color_terminal(WorkState& ws, Vertex v, const std::string& why) {
    Engine eng(ws.graph, *ws.ledger, *ws.trace, &ws.scope);
    std::vector<Vertex> sources;
    for (Vertex w : ws.scope)
        if (w != v && eng.vertex_funds(w) > 0) sources.push_back(w);
    eng.endgame_color(v, sources, why);
    eng.teardown_all_remaining("transversal complete");
    eng.assert_all_done();
    return eng.red_vertices();
}

// Leaf with two or three vertices of its own: renice rooted at the leaf
// clique, run everything below as a branch, then settle the four root
// vertices directly.
std::vector<Vertex> terminal_two_private_leaf(WorkState& ws, int leaf, int parent) {
    const auto leaf_bag = ws.tree.bag(leaf);
    const auto shared = intersect(leaf_bag, ws.tree.bag(parent));
    int k = static_cast<int>(leaf_bag.size() - shared.size());

    TreeDecomposition td = ws.tree;
    reroot(td, leaf);
    auto nd = make_nice(ws.graph, td, nullptr);
    if (nd.bag(nd.root) != leaf_bag) driver_bug("renice moved the root", *ws.trace);
    if (nd.nodes[nd.root].children.size() != 1)
        driver_bug("leaf-rooted decomposition root has several children", *ws.trace);
    int child = nd.nodes[nd.root].children[0];

    Engine eng(ws.graph, *ws.ledger, *ws.trace, &ws.scope);
    eng.load(nd);

    Vertex a, b;
    if (k == 2) {
        a = shared[0];
        b = shared[1];
    } else {
        a = shared[0];
        b = -1;
        for (Vertex w : nd.bag(child))
            if (w != a) {
                b = w;
                break;
            }
    }
    std::vector<int> node_set;
    for (int u = 0; u < nd.size(); ++u)
        if (u != nd.root) node_set.push_back(u);
    eng.process_branch_as(node_set, child, a, b);

    bool hit = false;
    for (Vertex w : leaf_bag)
        if (eng.red()[w]) hit = true;
    if (!hit) {
        Vertex v2 = shared[0];
        std::vector<Vertex> sources;
        for (Vertex w : leaf_bag)
            if (w != v2) sources.push_back(w);
        eng.endgame_color(v2, sources, "leaf clique unhit; shared vertex colored");
    }
    eng.teardown_all_remaining("leaf clique settled");
    eng.assert_all_done();
    return eng.red_vertices();
}

// Single-child chain with a 4-clique leaf and parent: swap both out for a
// fresh 4-clique on two grandparent vertices plus two new ones, run the rest
// as a branch of that graph, then settle the old cliques directly.
std::vector<Vertex> terminal_aux_graph(WorkState& ws, int leaf, int mid, int grand) {
    const auto U = ws.tree.bag(leaf);
    const auto Up = ws.tree.bag(mid);
    const auto Upp = ws.tree.bag(grand);
    Trace& trace = *ws.trace;
    Ledger& ledger = *ws.ledger;
    const int n = ws.graph.n();

    auto shared_cu = intersect(U, Up);  // three vertices
    Vertex v2 = -1;
    for (Vertex w : shared_cu)
        if (!std::binary_search(Upp.begin(), Upp.end(), w)) {
            v2 = w;
            break;
        }
    if (v2 < 0) driver_bug("aux case: child-parent intersection inside grandparent", trace);
    std::vector<Vertex> v34;
    for (Vertex w : shared_cu)
        if (w != v2) v34.push_back(w);

    std::vector<Vertex> x = intersect(Upp, v34);
    for (Vertex w : Upp) {
        if (x.size() >= 2) break;
        if (std::find(x.begin(), x.end(), w) == x.end()) x.push_back(w);
    }
    std::sort(x.begin(), x.end());

    Vertex w1 = n, w2 = n + 1;
    std::vector<Vertex> xprime = x;
    xprime.push_back(w1);
    xprime.push_back(w2);
    std::sort(xprime.begin(), xprime.end());

    // Vertices living only in the two vanishing bags.
    std::vector<Vertex> uu;
    std::set_union(U.begin(), U.end(), Up.begin(), Up.end(), std::back_inserter(uu));
    std::vector<Vertex> dpark;
    for (Vertex w : uu) {
        bool elsewhere = false;
        for (int t = 0; t < ws.tree.size() && !elsewhere; ++t)
            if (t != leaf && t != mid && ws.tree.bag_contains(t, w)) elsewhere = true;
        if (!elsewhere) dpark.push_back(w);
    }

    // Aux graph: every surviving bag plus the fresh 4-clique.
    std::vector<std::pair<Vertex, Vertex>> edges;
    auto add_bag = [&edges](const std::vector<Vertex>& bagv) {
        for (size_t i = 0; i < bagv.size(); ++i)
            for (size_t j = i + 1; j < bagv.size(); ++j) edges.emplace_back(bagv[i], bagv[j]);
    };
    for (int t = 0; t < ws.tree.size(); ++t)
        if (t != leaf && t != mid) add_bag(ws.tree.bag(t));
    add_bag(xprime);
    Graph aux(n + 2, std::move(edges));
    if (!is_four_chordal(aux)) driver_bug("aux graph is not 4-chordal", trace);

    // Grant the two fresh vertices their funds.
    ledger.vertex_funds.resize(n + 2, 0);
    ledger.vertex_funds[w1] = 2;
    ledger.vertex_funds[w2] = 2;
    ledger.universe += 4;
    {
        TraceEvent ev;
        ev.kind = "grant";
        ev.detail = "aux graph vertices enter with two zlotys each";
        ev.moves.push_back(Move{"ext", "v:" + std::to_string(w1), 2});
        ev.moves.push_back(Move{"ext", "v:" + std::to_string(w2), 2});
        emit_checked(ws, std::move(ev));
    }

    // Decomposition of the aux graph: old tree minus the two bags, rooted at
    // the fresh clique grafted onto the grandparent.
    TreeDecomposition s = ws.tree;
    reroot(s, grand);
    {
        auto& kids = s.nodes[grand].children;
        kids.erase(std::find(kids.begin(), kids.end(), mid));
        s.nodes[mid].parent = -2;
        s.nodes[mid].children.clear();
        s.nodes[leaf].parent = -2;
        DecompNode fresh;
        fresh.bag = xprime;
        fresh.parent = -1;
        fresh.children = {grand};
        fresh.is_maximal = true;
        s.nodes.push_back(fresh);
        s.nodes[grand].parent = static_cast<int>(s.nodes.size()) - 1;
        s.root = static_cast<int>(s.nodes.size()) - 1;
    }
    auto nd = make_nice(aux, s, nullptr);
    if (nd.bag(nd.root) != xprime) driver_bug("aux root moved", trace);
    if (nd.nodes[nd.root].children.size() != 1) driver_bug("aux root has several children", trace);

    std::vector<Vertex> aux_scope = ws.scope;
    aux_scope.push_back(w1);
    aux_scope.push_back(w2);
    Engine eng(aux, ledger, trace, &aux_scope);
    eng.load(nd);
    std::vector<int> node_set;
    for (int u = 0; u < nd.size(); ++u)
        if (u != nd.root) node_set.push_back(u);
    eng.process_branch_as(node_set, nd.nodes[nd.root].children[0], x[0], x[1]);

    if (eng.red()[w1] || eng.red()[w2] || eng.vertex_funds(w1) != 2 || eng.vertex_funds(w2) != 2)
        driver_bug("fresh aux vertices were touched", trace);

    // Settle the two vanished cliques of the original graph.
    bool hit = eng.red()[v34[0]] || eng.red()[v34[1]];
    if (!hit) {
        Vertex c = -1;
        for (Vertex w : v34)
            if (std::binary_search(x.begin(), x.end(), w)) {
                c = w;
                break;
            }
        if (c < 0) c = v34[0];
        std::vector<Vertex> colors{c};
        for (const auto* t : eng.live_tuples()) {
            bool covered = false;
            for (Vertex m : t->members)
                if (m == c || eng.red()[m]) covered = true;
            if (!covered) colors.push_back(t->members[0]);
        }
        std::sort(colors.begin(), colors.end());
        colors.erase(std::unique(colors.begin(), colors.end()), colors.end());
        std::vector<Vertex> drain;
        for (Vertex w = 0; w < n; ++w)
            if (eng.vertex_alive(w) && !eng.red()[w] &&
                std::find(colors.begin(), colors.end(), w) == colors.end())
                drain.push_back(w);
        eng.endgame_finale(colors, drain, "old cliques settled through the aux run");
    }

    // The fresh vertices leave with the funds they came with.
    {
        TraceEvent ev;
        ev.kind = "revoke";
        ev.detail = "aux graph vertices leave untouched";
        ev.moves.push_back(Move{"v:" + std::to_string(w1), "ext", 2});
        ev.moves.push_back(Move{"v:" + std::to_string(w2), "ext", 2});
        ledger.vertex_funds[w1] = 0;
        ledger.vertex_funds[w2] = 0;
        ledger.universe -= 4;
        emit_checked(ws, std::move(ev));
    }
    eng.teardown_all_remaining("aux run settled");
    eng.assert_all_done();
    std::vector<Vertex> red;
    for (Vertex w : eng.red_vertices())
        if (w < n) red.push_back(w);
    return red;
}

struct LeafPair {
    int n1 = -1, n2 = -1;      // node ids in the reniced decomposition
    Vertex v1 = -1, v6 = -1;   // the two vanishing private vertices
    std::vector<Vertex> v34;   // the shared pair
};

LeafPair leaf_pair_labels(const TreeDecomposition& td, int u, int u1, int u2, Trace& trace) {
    LeafPair lp;
    auto p1 = subtract(td.bag(u1), td.bag(u));
    auto p2 = subtract(td.bag(u2), td.bag(u));
    if (p1.size() != 1 || p2.size() != 1) driver_bug("leaf sharing broken", trace);
    lp.v1 = p1[0];
    lp.v6 = p2[0];
    lp.v34 = intersect(td.bag(u1), td.bag(u2));
    if (lp.v34.size() != 2) driver_bug("leaf pair does not share two vertices", trace);
    return lp;
}

// Two leaf siblings overlapping in k vertices, k in {0,1,3}: direct savings.
std::vector<Vertex> terminal_sibling_overlap(WorkState& ws, int u, int u1, int u2, int k) {
    Trace& trace = *ws.trace;
    const auto U = ws.tree.bag(u);
    const auto U1 = ws.tree.bag(u1);
    const auto U2 = ws.tree.bag(u2);
    Vertex vp = subtract(U1, U)[0];
    Vertex vpp = subtract(U2, U)[0];

    if (k == 3) {
        auto nd = make_nice(ws.graph, ws.tree, nullptr);
        int n1 = relocate(nd, U1, trace);
        int n2 = relocate(nd, U2, trace);
        Engine eng(ws.graph, *ws.ledger, trace, &ws.scope);
        eng.load(nd);
        eng.introduce_tuple(intersect(U1, U2), {vp, vpp},
                            "sibling leaves share a triangle; both privates leave");
        eng.teardown_node(n1, "leaf absorbed into the shared triple");
        eng.teardown_node(n2, "leaf absorbed into the shared triple");
        eng.process_all_remaining();
        eng.assert_all_done();
        return eng.red_vertices();
    }

    // k in {0, 1}: reroot below a fresh bag covering both shared triples.
    auto wbag = intersect(U, U1);
    for (Vertex w : intersect(U, U2)) wbag.push_back(w);
    std::sort(wbag.begin(), wbag.end());
    wbag.erase(std::unique(wbag.begin(), wbag.end()), wbag.end());
    std::vector<Vertex> set1 = intersect(U, U1), set2 = intersect(U, U2);

    TreeDecomposition td = ws.tree;
    {
        DecompNode fresh;
        fresh.bag = wbag;
        fresh.is_maximal = false;
        fresh.parent = u;
        fresh.children = {u1, u2};
        {
            auto& kids = td.nodes[u].children;
            kids.erase(std::find(kids.begin(), kids.end(), u1));
            kids.erase(std::find(kids.begin(), kids.end(), u2));
        }
        td.nodes.push_back(fresh);
        int wid = td.size() - 1;
        td.nodes[u].children.push_back(wid);
        td.nodes[u1].parent = wid;
        td.nodes[u2].parent = wid;
        reroot(td, wid);
    }
    auto nd = make_nice(ws.graph, td, nullptr);
    int root = nd.root;
    if (nd.bag(root) != wbag) driver_bug("overlap root moved", trace);
    int n1 = relocate(nd, U1, trace);
    int n2 = relocate(nd, U2, trace);

    Engine eng(ws.graph, *ws.ledger, trace, &ws.scope);
    eng.load(nd);
    eng.process_all_except({root, n1, n2});

    // Heavily tupled survivors pay for themselves.
    while (true) {
        Vertex pick = -1;
        for (Vertex w : wbag) {
            if (!eng.vertex_alive(w) || eng.red()[w]) continue;
            auto ts = eng.tuples_with(w);
            int pairs = 0, triples = 0;
            for (int t : ts) (eng.tuple(t).is_pair() ? pairs : triples)++;
            if (triples >= 3 || (pairs >= 1 && ts.size() >= 2)) {
                pick = w;
                break;
            }
        }
        if (pick < 0) break;
        eng.endgame_color(pick, {}, "vertex carries enough tuple funds for its own payment");
    }
    // Triples sharing two vertices collapse into a pair.
    while (true) {
        bool merged = false;
        auto live = eng.live_tuples();
        for (size_t i = 0; i < live.size() && !merged; ++i) {
            if (!live[i]->is_triple()) continue;
            for (size_t j = i + 1; j < live.size() && !merged; ++j) {
                if (!live[j]->is_triple()) continue;
                int shared = 0;
                for (Vertex m : live[i]->members)
                    if (live[j]->has_member(m)) ++shared;
                if (shared >= 2) {
                    eng.merge_triples(live[i]->id, live[j]->id, "triples overlap in two vertices");
                    merged = true;
                }
            }
        }
        if (!merged) break;
    }

    // Smallest red set covering both shared triples and every live tuple.
    std::vector<Vertex> cands;
    for (Vertex w : wbag)
        if (eng.vertex_alive(w) && !eng.red()[w]) cands.push_back(w);
    auto covered = [&](const std::vector<Vertex>& chosen) {
        auto has = [&](const std::vector<Vertex>& set) {
            for (Vertex w : set)
                if (eng.red()[w] || std::find(chosen.begin(), chosen.end(), w) != chosen.end())
                    return true;
            return false;
        };
        if (!has(set1) || !has(set2)) return false;
        for (const auto* t : eng.live_tuples()) {
            bool ok = false;
            for (Vertex m : t->members)
                if (std::find(chosen.begin(), chosen.end(), m) != chosen.end()) ok = true;
            if (!ok) return false;
        }
        return true;
    };
    std::optional<std::vector<Vertex>> best;
    std::vector<std::vector<Vertex>> subsets{{}};
    for (Vertex a : cands) subsets.push_back({a});
    for (size_t i = 0; i < cands.size(); ++i)
        for (size_t j = i + 1; j < cands.size(); ++j) subsets.push_back({cands[i], cands[j]});
    for (size_t i = 0; i < cands.size(); ++i)
        for (size_t j = i + 1; j < cands.size(); ++j)
            for (size_t l = j + 1; l < cands.size(); ++l)
                subsets.push_back({cands[i], cands[j], cands[l]});
    std::stable_sort(subsets.begin(), subsets.end(),
                     [](const auto& a, const auto& b) { return a.size() < b.size(); });
    for (auto& s : subsets)
        if (covered(s)) {
            best = s;
            break;
        }
    if (!best) driver_bug("sibling overlap endgame found no admissible coloring", trace);

    std::vector<Vertex> drain;
    for (Vertex w : ws.scope)
        if (eng.vertex_alive(w) && !eng.red()[w] &&
            std::find(best->begin(), best->end(), w) == best->end())
            drain.push_back(w);
    eng.endgame_finale(*best, drain, "both sibling cliques and all tuples settled");
    eng.teardown_all_remaining("sibling overlap settled");
    eng.assert_all_done();
    return eng.red_vertices();
}

// Two different nodes each with two leaf children (k = 2 everywhere).
std::vector<Vertex> terminal_double_station(WorkState& ws, int u, int u1, int u2, int uh, int uh1,
                                            int uh2) {
    Trace& trace = *ws.trace;
    auto lp = leaf_pair_labels(ws.tree, u, u1, u2, trace);
    auto lph = leaf_pair_labels(ws.tree, uh, uh1, uh2, trace);
    auto nd = make_nice(ws.graph, ws.tree, nullptr);
    int n1 = relocate(nd, ws.tree.bag(u1), trace);
    int n2 = relocate(nd, ws.tree.bag(u2), trace);
    int m1 = relocate(nd, ws.tree.bag(uh1), trace);
    int m2 = relocate(nd, ws.tree.bag(uh2), trace);

    Engine eng(ws.graph, *ws.ledger, trace, &ws.scope);
    eng.load(nd);
    eng.introduce_tuple(lp.v34, {lp.v1, lp.v6}, "first leaf pair folds onto its shared edge");
    eng.teardown_node(n1, "folded leaf");
    eng.teardown_node(n2, "folded leaf");
    eng.introduce_tuple(lph.v34, {lph.v1, lph.v6}, "second leaf pair folds onto its shared edge");
    eng.teardown_node(m1, "folded leaf");
    eng.teardown_node(m2, "folded leaf");
    eng.process_all_remaining();
    eng.assert_all_done();
    return eng.red_vertices();
}

// Root has one leaf child and one non-leaf child; the deepest station folds
// one pair, the root pair is settled by hand under a fresh root.
std::vector<Vertex> terminal_root_station(WorkState& ws, int u, int u1, int u2) {
    Trace& trace = *ws.trace;
    int r = ws.tree.root;
    int rp = -1;
    for (int c : ws.tree.nodes[r].children)
        if (is_leaf(ws.tree, c) && rp < 0) rp = c;
    if (rp < 0) driver_bug("root station without a leaf child", trace);

    auto rp_bag = ws.tree.bag(rp);
    auto shared = intersect(rp_bag, ws.tree.bag(r));
    if (shared.size() != 3) driver_bug("root leaf does not share three vertices", trace);
    Vertex w5 = -1;
    for (Vertex w : ws.tree.bag(r))
        if (!std::binary_search(rp_bag.begin(), rp_bag.end(), w)) {
            w5 = w;
            break;
        }
    std::vector<Vertex> u0bag = shared;
    u0bag.push_back(w5);
    std::sort(u0bag.begin(), u0bag.end());

    auto lp = leaf_pair_labels(ws.tree, u, u1, u2, trace);

    TreeDecomposition td = ws.tree;
    {
        DecompNode fresh;
        fresh.bag = u0bag;
        fresh.is_maximal = false;
        fresh.parent = -1;
        fresh.children = {r, rp};
        auto& kids = td.nodes[r].children;
        kids.erase(std::find(kids.begin(), kids.end(), rp));
        td.nodes.push_back(fresh);
        int wid = td.size() - 1;
        td.nodes[r].parent = wid;
        td.nodes[rp].parent = wid;
        td.root = wid;
    }
    auto nd = make_nice(ws.graph, td, nullptr);
    int root = nd.root;
    int nrp = relocate(nd, rp_bag, trace);
    int n1 = relocate(nd, ws.tree.bag(u1), trace);
    int n2 = relocate(nd, ws.tree.bag(u2), trace);
    if (nd.nodes[nrp].parent != root) driver_bug("root leaf drifted while renicing", trace);

    Engine eng(ws.graph, *ws.ledger, trace, &ws.scope);
    eng.load(nd);
    eng.introduce_tuple(lp.v34, {lp.v1, lp.v6}, "deep leaf pair folds onto its shared edge");
    eng.teardown_node(n1, "folded leaf");
    eng.teardown_node(n2, "folded leaf");
    eng.process_all_except({root, nrp});
    eng.process_node(nrp);
    eng.process_node(root);
    eng.assert_all_done();
    return eng.red_vertices();
}

// Every child of the root is a leaf.
std::vector<Vertex> terminal_star(WorkState& ws) {
    Trace& trace = *ws.trace;
    int r = ws.tree.root;
    std::vector<int> kids = ws.tree.nodes[r].children;
    std::sort(kids.begin(), kids.end());

    if (kids.size() == 2) {
        auto shared = intersect(ws.tree.bag(kids[0]), ws.tree.bag(kids[1]));
        if (shared.size() != 2) driver_bug("star children share wrong count", trace);
        return single_color_terminal(ws, shared[0], "vertex lies in all three cliques");
    }
    if (kids.size() == 3) {
        auto shared = intersect(ws.tree.bag(kids[0]), ws.tree.bag(kids[1]));
        auto third = ws.tree.bag(kids[2]);
        Vertex pick = -1;
        for (Vertex w : shared)
            if (std::binary_search(third.begin(), third.end(), w)) {
                pick = w;
                break;
            }
        if (pick < 0) driver_bug("three-leaf star has no common vertex", trace);
        return single_color_terminal(ws, pick, "vertex lies in all four cliques");
    }

    auto lp = leaf_pair_labels(ws.tree, r, kids[0], kids[1], trace);
    auto lph = leaf_pair_labels(ws.tree, r, kids[2], kids[3], trace);
    auto nd = make_nice(ws.graph, ws.tree, nullptr);
    int n1 = relocate(nd, ws.tree.bag(kids[0]), trace);
    int n2 = relocate(nd, ws.tree.bag(kids[1]), trace);
    int m1 = relocate(nd, ws.tree.bag(kids[2]), trace);
    int m2 = relocate(nd, ws.tree.bag(kids[3]), trace);

    Engine eng(ws.graph, *ws.ledger, trace, &ws.scope);
    eng.load(nd);
    eng.introduce_tuple(lp.v34, {lp.v1, lp.v6}, "first star pair folds onto its shared edge");
    eng.teardown_node(n1, "folded leaf");
    eng.teardown_node(n2, "folded leaf");
    eng.introduce_tuple(lph.v34, {lph.v1, lph.v6}, "second star pair folds onto its shared edge");
    eng.teardown_node(m1, "folded leaf");
    eng.teardown_node(m2, "folded leaf");
    eng.process_all_remaining();
    eng.assert_all_done();
    return eng.red_vertices();
}

}  // namespace

std::vector<Vertex> drive_connected(const Graph& graph, std::vector<Vertex> scope,
                                    std::vector<Graph>& history, Ledger& ledger, Trace& trace) {
    WorkState ws;
    ws.graph = graph;
    ws.scope = std::move(scope);
    ws.history = &history;
    ws.ledger = &ledger;
    ws.trace = &trace;

    std::vector<Vertex> red;
    long long guard = 0;
    const long long guard_cap = 64LL + 8LL * (ws.graph.n() + ws.graph.m()) * (ws.graph.n() + 4);

    while (true) {
        if (++guard > guard_cap) driver_bug("reduction loop exceeded its step cap", trace);

        // A bag-shrink can split the work graph; each piece continues alone.
        {
            Graph live = induced_subgraph(ws.graph, ws.scope);
            auto comps = connected_components(live);
            if (comps.size() > 1) {
                TraceEvent ev;
                ev.kind = "reduction";
                ev.rule = "split_components";
                ev.a = static_cast<long long>(comps.size());
                ev.detail = "work graph fell apart; pieces continue independently";
                emit_checked(ws, std::move(ev));
                for (const auto& comp : comps) {
                    std::vector<Vertex> sub_scope;
                    for (Vertex v : comp) sub_scope.push_back(ws.scope[v]);
                    std::vector<std::pair<Vertex, Vertex>> edges;
                    for (Vertex v : sub_scope)
                        for (Vertex w : ws.graph.neighbors(v))
                            if (v < w) edges.emplace_back(v, w);
                    Graph sub(ws.graph.n(), std::move(edges));
                    auto sub_red = drive_connected(sub, sub_scope, history, ledger, trace);
                    red.insert(red.end(), sub_red.begin(), sub_red.end());
                }
                std::sort(red.begin(), red.end());
                return red;
            }
        }

        Peo peo = require_peo(ws.graph);
        auto all_cliques = maximal_cliques(ws.graph, peo);
        std::vector<Clique> cliques;
        for (auto& c : all_cliques)
            if (c.size() >= 2) cliques.push_back(std::move(c));

        if (cliques.size() <= 2) {
            Vertex pick;
            if (cliques.size() == 1) {
                pick = cliques[0][0];
            } else {
                auto common = intersect(cliques[0], cliques[1]);
                if (common.empty()) driver_bug("two maximal cliques with empty overlap", trace);
                pick = common[0];
            }
            red = single_color_terminal(ws, pick, "at most two maximal cliques");
            break;
        }

        if (!ws.tree_valid) rebuild_tree(ws);
        auto& td = ws.tree;

        // Oversized leaf: shed a private vertex, or an edge into the parent.
        {
            int found = -1;
            for (int u = 0; u < td.size(); ++u)
                if (is_leaf(td, u) && td.bag(u).size() >= 5) {
                    found = u;
                    break;
                }
            if (found >= 0) {
                int parent = td.nodes[found].parent;
                auto priv = subtract(td.bag(found), td.bag(parent));
                ws.history->push_back(ws.graph);
                if (priv.size() >= 2) {
                    Vertex v = priv[0];
                    std::vector<std::pair<Vertex, Vertex>> gone;
                    for (Vertex w : ws.graph.neighbors(v)) gone.emplace_back(v, w);
                    ws.graph = drop_edges(ws.graph, gone);
                    ws.scope.erase(std::find(ws.scope.begin(), ws.scope.end(), v));
                    TraceEvent ev;
                    ev.kind = "reduction";
                    ev.rule = "delete_vertex";
                    ev.vertex = v;
                    ev.detail = "oversized leaf keeps a 4-clique without it";
                    ev.moves.push_back(Move{"v:" + std::to_string(v), "saved", 2});
                    ledger.saved += ledger.vertex_funds[v];
                    ledger.vertex_funds[v] = 0;
                    emit_checked(ws, std::move(ev));
                } else {
                    Vertex v = priv[0];
                    Vertex vp = intersect(td.bag(found), td.bag(parent))[0];
                    ws.graph = drop_edges(ws.graph, {{v, vp}});
                    TraceEvent ev;
                    ev.kind = "reduction";
                    ev.rule = "delete_edge";
                    ev.vertex = v;
                    ev.a = vp;
                    ev.detail = "oversized leaf splits off its private vertex";
                    emit_checked(ws, std::move(ev));
                }
                ws.tree_valid = false;
                continue;
            }
        }

        // Leaf with two or three private vertices: terminal.
        {
            int found = -1;
            for (int u = 0; u < td.size(); ++u)
                if (is_leaf(td, u) &&
                    subtract(td.bag(u), td.bag(td.nodes[u].parent)).size() >= 2) {
                    found = u;
                    break;
                }
            if (found >= 0) {
                red = terminal_two_private_leaf(ws, found, td.nodes[found].parent);
                break;
            }
        }

        // Node whose only child is a leaf.
        {
            int mid = -1;
            for (int u = 0; u < td.size(); ++u)
                if (u != td.root && td.nodes[u].children.size() == 1 &&
                    is_leaf(td, td.nodes[u].children[0])) {
                    mid = u;
                    break;
                }
            if (mid >= 0) {
                int leaf = td.nodes[mid].children[0];
                int grand = td.nodes[mid].parent;
                auto mid_grand = intersect(td.bag(mid), td.bag(grand));
                auto leaf_mid = intersect(td.bag(leaf), td.bag(mid));
                if (mid_grand == leaf_mid) {
                    // Reattach the leaf to the grandparent; one more leaf.
                    auto& kids = td.nodes[mid].children;
                    kids.clear();
                    td.nodes[leaf].parent = grand;
                    td.nodes[grand].children.push_back(leaf);
                    TraceEvent ev;
                    ev.kind = "reduction";
                    ev.rule = "reattach_leaf";
                    ev.node = leaf;
                    ev.detail = "leaf moves to the grandparent; the chain node becomes a leaf";
                    emit_checked(ws, std::move(ev));
                    continue;
                }
                if (td.bag(mid).size() > 4) {
                    Vertex v;
                    bool pp_in_cu = std::includes(leaf_mid.begin(), leaf_mid.end(),
                                                  mid_grand.begin(), mid_grand.end());
                    if (pp_in_cu) {
                        v = subtract(leaf_mid, mid_grand)[0];
                    } else {
                        auto out = subtract(mid_grand, td.bag(leaf));
                        if (out.empty()) driver_bug("chain shrink found no vertex", trace);
                        v = out[0];
                    }
                    // Drop v from the chain bag: edges of v into that bag
                    // survive only if another clique carries them.
                    std::vector<std::pair<Vertex, Vertex>> gone;
                    for (Vertex w : td.bag(mid)) {
                        if (w == v) continue;
                        bool elsewhere = false;
                        for (int t = 0; t < td.size() && !elsewhere; ++t)
                            if (t != mid && td.bag_contains(t, v) && td.bag_contains(t, w))
                                elsewhere = true;
                        if (!elsewhere) gone.emplace_back(v, w);
                    }
                    if (gone.empty()) driver_bug("chain shrink removed no edge", trace);
                    ws.history->push_back(ws.graph);
                    ws.graph = drop_edges(ws.graph, gone);
                    TraceEvent ev;
                    ev.kind = "reduction";
                    ev.rule = "shrink_bag";
                    ev.vertex = v;
                    ev.node = mid;
                    ev.detail = "oversized chain bag drops a vertex";
                    emit_checked(ws, std::move(ev));
                    ws.tree_valid = false;
                    continue;
                }
                red = terminal_aux_graph(ws, leaf, mid, grand);
                break;
            }
        }

        // Stations: nodes with at least two leaf children.
        std::vector<int> stations;
        for (int u = 0; u < td.size(); ++u) {
            int leaves = 0;
            for (int c : td.nodes[u].children) leaves += is_leaf(td, c);
            if (leaves >= 2) stations.push_back(u);
        }
        if (stations.empty()) driver_bug("no station after reductions", trace);

        // Any sibling pair overlapping in other than two vertices is terminal.
        {
            bool done = false;
            for (int u : stations) {
                std::vector<int> leaves;
                for (int c : td.nodes[u].children)
                    if (is_leaf(td, c)) leaves.push_back(c);
                std::sort(leaves.begin(), leaves.end());
                for (size_t i = 0; i < leaves.size() && !done; ++i)
                    for (size_t j = i + 1; j < leaves.size() && !done; ++j) {
                        int k = static_cast<int>(
                            intersect(td.bag(leaves[i]), td.bag(leaves[j])).size());
                        if (k != 2) {
                            red = terminal_sibling_overlap(ws, u, leaves[i], leaves[j], k);
                            done = true;
                        }
                    }
                if (done) break;
            }
            if (done) break;
        }

        auto leaf_children = [&](int u) {
            std::vector<int> out;
            for (int c : td.nodes[u].children)
                if (is_leaf(td, c)) out.push_back(c);
            std::sort(out.begin(), out.end());
            return out;
        };

        if (stations.size() >= 2) {
            auto l1 = leaf_children(stations[0]);
            auto l2 = leaf_children(stations[1]);
            red = terminal_double_station(ws, stations[0], l1[0], l1[1], stations[1], l2[0], l2[1]);
            break;
        }

        bool root_nonleaf_child = false;
        for (int c : td.nodes[td.root].children)
            if (!is_leaf(td, c)) root_nonleaf_child = true;

        if (root_nonleaf_child) {
            // The unique station is the deepest non-leaf node.
            int u = stations[0];
            if (u == td.root) driver_bug("station equals root despite a non-leaf child", trace);
            auto l = leaf_children(u);
            red = terminal_root_station(ws, u, l[0], l[1]);
            break;
        }

        red = terminal_star(ws);
        break;
    }
    return red;
}

std::vector<Vertex> drive_thm_b(const Graph& g0, Ledger& ledger, Trace& trace) {
    std::vector<Vertex> scope(g0.n());
    for (Vertex v = 0; v < g0.n(); ++v) scope[v] = v;
    std::vector<Graph> history;
    auto red = drive_connected(g0, std::move(scope), history, ledger, trace);
    // Every reduction promised that a transversal of the reduced graph is
    // one of the graph it came from; audit each unwind step.
    for (auto it = history.rbegin(); it != history.rend(); ++it)
        if (transversal_gap(*it, red))
            throw BoundMissError("no-triangle driver: reduction unwind broke the transversal",
                                 trace);
    return red;
}

}  // namespace detail
}  // namespace ct

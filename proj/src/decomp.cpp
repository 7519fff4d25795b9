#include "ct/decomp.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace ct {

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

}  // namespace

bool TreeDecomposition::bag_contains(int u, Vertex v) const {
    const auto& b = nodes[u].bag;
    return std::binary_search(b.begin(), b.end(), v);
}

std::vector<Vertex> TreeDecomposition::shared_with_parent(int u) const {
    if (nodes[u].parent < 0) return {};
    return intersect(nodes[u].bag, nodes[nodes[u].parent].bag);
}

std::vector<int> TreeDecomposition::post_order() const {
    std::vector<int> out;
    out.reserve(nodes.size());
    // Iterative DFS, children ascending.
    std::vector<std::pair<int, size_t>> stack{{root, 0}};
    while (!stack.empty()) {
        auto& [u, idx] = stack.back();
        auto kids = nodes[u].children;
        std::sort(kids.begin(), kids.end());
        if (idx < kids.size()) {
            int c = kids[idx++];
            stack.emplace_back(c, 0);
        } else {
            out.push_back(u);
            stack.pop_back();
        }
    }
    return out;
}

std::vector<int> TreeDecomposition::subtree(int u) const {
    std::vector<int> out, stack{u};
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        out.push_back(x);
        for (int c : nodes[x].children) stack.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

TreeDecomposition clique_tree(const Graph& g, const Peo& peo) {
    auto cliques = maximal_cliques(g, peo);
    std::vector<Clique> bags;
    for (auto& c : cliques)
        if (c.size() >= 2) bags.push_back(std::move(c));
    if (bags.empty()) throw ContractError("clique_tree: graph has no edge");
    // maximal_cliques returns lexicographically sorted bags; ids are stable.

    int k = static_cast<int>(bags.size());
    TreeDecomposition td;
    td.nodes.resize(k);
    for (int i = 0; i < k; ++i) td.nodes[i].bag = bags[i];
    td.root = 0;
    if (k == 1) return td;

    // Prim over the clique intersection graph, maximizing |C_a ∩ C_b|.
    // Any maximum-weight spanning tree here is a valid clique tree.
    std::vector<bool> in_tree(k, false);
    std::vector<int> best_w(k, -1), attach(k, -1);
    in_tree[0] = true;
    for (int j = 1; j < k; ++j)
        best_w[j] = static_cast<int>(intersect(bags[0], bags[j]).size());
    for (int j = 1; j < k; ++j) attach[j] = 0;
    for (int step = 1; step < k; ++step) {
        int pick = -1;
        for (int j = 0; j < k; ++j)
            if (!in_tree[j] && (pick == -1 || best_w[j] > best_w[pick])) pick = j;
        if (best_w[pick] <= 0)
            throw ContractError("clique_tree: graph is disconnected");
        in_tree[pick] = true;
        td.nodes[pick].parent = attach[pick];
        td.nodes[attach[pick]].children.push_back(pick);
        for (int j = 0; j < k; ++j)
            if (!in_tree[j]) {
                int w = static_cast<int>(intersect(bags[pick], bags[j]).size());
                if (w > best_w[j]) {
                    best_w[j] = w;
                    attach[j] = pick;
                }
            }
    }
    return td;
}

void reroot(TreeDecomposition& td, int new_root) {
    if (new_root == td.root) return;
    // Collect the path from new_root up to the old root and flip it.
    std::vector<int> path;
    for (int x = new_root; x != -1; x = td.nodes[x].parent) path.push_back(x);
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        int child = path[i], parent = path[i + 1];
        auto& pc = td.nodes[parent].children;
        pc.erase(std::find(pc.begin(), pc.end(), child));
        td.nodes[child].children.push_back(parent);
        td.nodes[parent].parent = child;
    }
    td.nodes[new_root].parent = -1;
    td.root = new_root;
}

namespace {

/// Rebuild with ids in BFS order from the root, children ascending by
/// (bag, old id) so the result is deterministic.
TreeDecomposition compact(const TreeDecomposition& td) {
    TreeDecomposition out;
    std::vector<int> new_id(td.nodes.size(), -1);
    std::vector<int> queue{td.root};
    for (size_t qi = 0; qi < queue.size(); ++qi) {
        int u = queue[qi];
        new_id[u] = static_cast<int>(qi);
        auto kids = td.nodes[u].children;
        std::sort(kids.begin(), kids.end(), [&](int a, int b) {
            return std::make_pair(td.nodes[a].bag, a) < std::make_pair(td.nodes[b].bag, b);
        });
        for (int c : kids) queue.push_back(c);
    }
    out.nodes.resize(queue.size());
    out.root = 0;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
        int u = queue[qi];
        auto& node = out.nodes[qi];
        node.bag = td.nodes[u].bag;
        node.is_maximal = td.nodes[u].is_maximal;
        node.parent = td.nodes[u].parent < 0 ? -1 : new_id[td.nodes[u].parent];
        for (int c : td.nodes[u].children) node.children.push_back(new_id[c]);
        std::sort(node.children.begin(), node.children.end());
    }
    return out;
}

}  // namespace

TreeDecomposition make_nice(const Graph& g, TreeDecomposition td,
                            const std::vector<Vertex>* root_clique) {
    if (root_clique) {
        std::vector<Vertex> c = *root_clique;
        std::sort(c.begin(), c.end());
        if (!g.is_clique(c)) throw ContractError("make_nice: root_clique is not a clique");
        int host = -1;
        for (int u = 0; u < td.size(); ++u) {
            if (std::includes(td.bag(u).begin(), td.bag(u).end(), c.begin(), c.end())) {
                host = u;
                break;
            }
        }
        if (host < 0) throw ContractError("make_nice: no bag contains root_clique");
        reroot(td, host);
        DecompNode r;
        r.bag = c;
        r.parent = -1;
        r.children = {host};
        r.is_maximal = (td.bag(host) == c);
        td.nodes.push_back(r);
        int rid = td.size() - 1;
        td.nodes[host].parent = rid;
        td.root = rid;
    }

    // Subdivide: while a non-root node has bag size >= 5 and at least two
    // vertices not in its parent, insert a parent holding all but the
    // largest private vertex. Processed bottom-up; each insertion strictly
    // decreases the symmetric-difference potential.
    std::vector<int> work = td.post_order();
    long long steps = 0;
    size_t max_bag = 0;
    for (const auto& nd : td.nodes) max_bag = std::max(max_bag, nd.bag.size());
    const long long step_cap = 4LL * g.n() * static_cast<long long>(max_bag * max_bag) + 64;
    for (size_t wi = 0; wi < work.size(); ++wi) {
        int u = work[wi];
        while (true) {
            int p = td.nodes[u].parent;
            if (p < 0 || td.bag(u).size() < 5) break;
            auto priv = subtract(td.bag(u), td.bag(p));
            if (priv.size() < 2) break;
            if (++steps > step_cap)
                throw ContractError("make_nice: subdivision step cap exceeded");
            DecompNode s;
            s.bag = td.bag(u);
            s.bag.erase(std::find(s.bag.begin(), s.bag.end(), priv.back()));
            s.is_maximal = false;
            s.parent = p;
            s.children = {u};
            td.nodes.push_back(s);
            int sid = td.size() - 1;
            auto& pc = td.nodes[p].children;
            *std::find(pc.begin(), pc.end(), u) = sid;
            td.nodes[u].parent = sid;
            u = sid;  // the inserted node may itself need subdividing
        }
    }

    // Contract adjacent equal bags, child into parent.
    bool changed = true;
    while (changed) {
        changed = false;
        for (int u = 0; u < td.size(); ++u) {
            int p = td.nodes[u].parent;
            if (p < 0 || td.bag(u) != td.bag(p)) continue;
            auto& pc = td.nodes[p].children;
            pc.erase(std::find(pc.begin(), pc.end(), u));
            for (int c : td.nodes[u].children) {
                td.nodes[c].parent = p;
                pc.push_back(c);
            }
            td.nodes[u].children.clear();
            td.nodes[u].parent = -2;  // detached; dropped by compact()
            td.nodes[p].is_maximal = td.nodes[p].is_maximal || td.nodes[u].is_maximal;
            changed = true;
        }
    }
    return compact(td);
}

TreeDecomposition nice_decomposition(const Graph& g, const std::vector<Vertex>& root_clique) {
    auto chord = is_chordal(g);
    auto* peo = std::get_if<Peo>(&chord);
    if (!peo) throw ContractError("nice_decomposition: graph not chordal");
    auto cliques = maximal_cliques(g, *peo);
    int t = 0;
    for (const auto& c : cliques)
        if (c.size() == 3) ++t;
    std::vector<Vertex> c = root_clique;
    std::sort(c.begin(), c.end());
    if (t > 0) {
        if (c.size() != 3 ||
            !std::binary_search(cliques.begin(), cliques.end(), c))
            throw ContractError("nice_decomposition: root must be a maximal 3-clique");
    } else {
        if (c.size() < 4 || !g.is_clique(c))
            throw ContractError("nice_decomposition: root must be a clique of size >= 4");
    }
    return make_nice(g, clique_tree(g, *peo), &c);
}

std::vector<std::string> validate_decomposition(const TreeDecomposition& td, const Graph& g) {
    std::vector<std::string> bad;
    auto note = [&](const std::string& s) { bad.push_back(s); };

    if (td.root < 0 || td.root >= td.size()) {
        note("invalid root");
        return bad;
    }
    // Tree shape.
    std::vector<int> seen(td.size(), 0);
    for (int u : td.subtree(td.root)) seen[u] = 1;
    for (int u = 0; u < td.size(); ++u) {
        if (!seen[u]) note("node " + std::to_string(u) + " unreachable from root");
        for (int c : td.nodes[u].children)
            if (td.nodes[c].parent != u) note("parent/child mismatch at " + std::to_string(c));
    }
    // Bags are cliques; edge coverage both ways follows from that plus the
    // per-edge bag search below.
    for (int u = 0; u < td.size(); ++u)
        if (!g.is_clique(td.bag(u))) note("bag of node " + std::to_string(u) + " is not a clique");
    for (auto [a, b] : g.edges()) {
        bool covered = false;
        for (int u = 0; u < td.size() && !covered; ++u)
            covered = td.bag_contains(u, a) && td.bag_contains(u, b);
        if (!covered)
            note("edge (" + std::to_string(a + 1) + "," + std::to_string(b + 1) + ") in no bag");
    }
    // Subtree property per vertex.
    for (Vertex v = 0; v < g.n(); ++v) {
        std::vector<int> holders;
        for (int u = 0; u < td.size(); ++u)
            if (td.bag_contains(u, v)) holders.push_back(u);
        if (holders.empty()) continue;
        std::set<int> holder_set(holders.begin(), holders.end());
        std::vector<int> stack{holders[0]};
        std::set<int> reached{holders[0]};
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            std::vector<int> nbs = td.nodes[x].children;
            if (td.nodes[x].parent >= 0) nbs.push_back(td.nodes[x].parent);
            for (int y : nbs)
                if (holder_set.count(y) && !reached.count(y)) {
                    reached.insert(y);
                    stack.push_back(y);
                }
        }
        if (reached.size() != holders.size())
            note("vertex " + std::to_string(v + 1) + " does not induce a subtree");
    }
    return bad;
}

std::vector<std::string> validate_nice(const TreeDecomposition& td, const Graph& g) {
    auto bad = validate_decomposition(td, g);
    auto note = [&](const std::string& s) { bad.push_back(s); };

    auto chord = is_chordal(g);
    auto* peo = std::get_if<Peo>(&chord);
    if (!peo) {
        note("graph not chordal");
        return bad;
    }
    auto cliques = maximal_cliques(g, *peo);
    bool has_triangle = false;
    for (const auto& c : cliques)
        if (c.size() == 3) has_triangle = true;

    for (int u = 0; u < td.size(); ++u) {
        const auto& bag = td.bag(u);
        int p = td.nodes[u].parent;
        if (p >= 0 && bag == td.bag(p)) note("adjacent duplicate bags at node " + std::to_string(u));
        if (bag.size() < 3) note("bag of node " + std::to_string(u) + " smaller than 3");
        if (bag.size() == 3 && !std::binary_search(cliques.begin(), cliques.end(), bag))
            note("size-3 bag at node " + std::to_string(u) + " is not a maximal clique");
        if (bag.size() >= 5 && p >= 0) {
            auto shared = td.shared_with_parent(u);
            if (shared.size() != bag.size() - 1)
                note("node " + std::to_string(u) + " of size " + std::to_string(bag.size()) +
                     " shares " + std::to_string(shared.size()) + " with parent, expected k-1");
        }
    }
    if (has_triangle) {
        const auto& rb = td.bag(td.root);
        if (rb.size() != 3 || !std::binary_search(cliques.begin(), cliques.end(), rb))
            note("graph has a maximal 3-clique but root bag is not one");
    }
    return bad;
}

std::vector<Branch> find_branches(const TreeDecomposition& td) {
    std::vector<Branch> out;
    std::vector<bool> is_root_of_branch(td.size(), false);
    for (int u = 0; u < td.size(); ++u) {
        if (td.nodes[u].parent < 0) continue;
        if (td.bag(u).size() != 4) continue;
        if (td.shared_with_parent(u).size() != 2) continue;
        bool has_triangle_below = false;
        for (int x : td.subtree(u))
            if (td.bag(x).size() == 3) {
                has_triangle_below = true;
                break;
            }
        if (!has_triangle_below) is_root_of_branch[u] = true;
    }
    for (int u = 0; u < td.size(); ++u) {
        if (!is_root_of_branch[u]) continue;
        bool nested = false;
        for (int a = td.nodes[u].parent; a >= 0; a = td.nodes[a].parent)
            if (is_root_of_branch[a]) {
                nested = true;
                break;
            }
        if (nested) continue;
        Branch b;
        b.root_node = u;
        auto shared = td.shared_with_parent(u);
        b.alpha = shared[0];
        b.beta = shared[1];
        b.node_set = td.subtree(u);
        out.push_back(std::move(b));
    }
    return out;
}

std::string format_decomposition(const TreeDecomposition& td) {
    std::ostringstream out;
    for (int u = 0; u < td.size(); ++u) {
        out << u << " | " << td.nodes[u].parent << " |";
        for (Vertex v : td.bag(u)) out << " " << v + 1;
        out << "\n";
    }
    return out.str();
}

}  // namespace ct

#include "ct/replay.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "ct/engine.hpp"
#include "ct/oracle.hpp"

namespace ct {

namespace {

struct ReplayTuple {
    std::vector<Vertex> members;
    int funds = 0;
    bool alive = false;
};

struct ReplayError {
    std::string msg;
};

struct Checker {
    const Graph& g;
    std::string error;

    // per-component state
    bool in_component = false;
    std::vector<Vertex> vmap;  // local -> global
    Graph cg;                  // component graph, local ids
    long long n_local = 0, t_local = 0;
    std::vector<long long> vertex_funds;
    std::vector<bool> alive, red;
    std::vector<long long> node_funds;
    std::vector<bool> node_alive;
    std::vector<std::pair<int, std::vector<Vertex>>> bags;
    std::map<int, ReplayTuple> tuples;
    long long universe = 0, paid = 0, saved = 0;
    int debt = 0;
    std::vector<long long> branch_saved_stack;

    std::vector<Vertex> red_global;
    bool saw_final = false;
    bool basic_mode = false;

    explicit Checker(const Graph& graph) : g(graph) {}

    [[noreturn]] void fail(int index, const std::string& what) {
        throw ReplayError{"event " + std::to_string(index) + ": " + what};
    }

    long long held() const {
        long long h = 0;
        for (long long f : vertex_funds) h += f;
        for (long long f : node_funds) h += f;
        for (const auto& [id, t] : tuples)
            if (t.alive) h += t.funds;
        return h;
    }

    bool conserved() const { return universe == paid + saved + held() - debt; }

    void ensure_vertex(int idx, const TraceEvent& e) {
        if (idx < 0) fail(e.index, "negative vertex id in move");
        if (idx >= static_cast<int>(vertex_funds.size())) {
            vertex_funds.resize(idx + 1, 0);
            alive.resize(idx + 1, true);
            red.resize(idx + 1, false);
        }
    }

    std::vector<int> tuples_with(Vertex v) const {
        std::vector<int> out;
        for (const auto& [id, t] : tuples)
            if (t.alive && std::binary_search(t.members.begin(), t.members.end(), v))
                out.push_back(id);
        return out;
    }

    bool bag_has(int u, Vertex v) const {
        const auto& b = bags[u].second;
        return std::binary_search(b.begin(), b.end(), v);
    }

    bool red_in_bag_except(int u, Vertex v) const {
        for (Vertex w : bags[u].second)
            if (w != v && red[w]) return true;
        return false;
    }

    std::string first_rule(int u, Vertex v) const {
        const auto& U = bags[u].second;
        if (U.size() >= 4) {
            if (red[v]) return "B1";
            auto tids = tuples_with(v);
            int pairs = 0, triples = 0;
            for (int t : tids) (tuples.at(t).members.size() == 2 ? pairs : triples)++;
            if (tids.size() >= 3) return "G1";
            if (pairs >= 2) return "G2";
            if (pairs >= 1 && triples >= 1) return "B2";
            if (triples >= 2) return "B3";
            if (triples == 1) return "G3";
            if (pairs == 1) {
                const auto& p = tuples.at(tids[0]);
                Vertex partner = p.members[0] == v ? p.members[1] : p.members[0];
                return tuples_with(partner).size() >= 2 ? "G4" : "B4";
            }
            return red_in_bag_except(u, v) ? "G5" : "B5";
        }
        if (U.size() == 3) {
            if (red[v]) return "T1";
            auto tids = tuples_with(v);
            if (tids.size() >= 2) return "T2";
            if (tids.size() == 1) return "T3";
            if (red_in_bag_except(u, v)) return "T4";
            return "T5";
        }
        return "??";
    }

    void close_component(const TraceEvent& e) {
        if (held() != 0) fail(e.index, "funds still held at component end");
        if (debt != 0) fail(e.index, "debt outstanding at component end");
        if (universe != 2 * n_local + t_local)
            fail(e.index, "universe drifted from 2n + t");
        long long x = static_cast<long long>(e.colored.size());
        if (paid != 7 * x) fail(e.index, "paid is not seven per red vertex");
        if (7 * x != 2 * n_local + t_local - saved)
            fail(e.index, "identity 7|X| = 2n + t - s violated");
        std::vector<Vertex> reds;
        for (Vertex v = 0; v < static_cast<Vertex>(red.size()); ++v)
            if (red[v] && v < n_local) reds.push_back(v);
        if (reds != e.colored) fail(e.index, "declared red set does not match replay");
        for (Vertex v : reds) red_global.push_back(vmap[v]);
        in_component = false;
    }

    void open_component(const TraceEvent& e) {
        if (in_component) fail(e.index, "component opened before the previous one closed");
        in_component = true;
        vmap = e.vertex_list;
        cg = induced_subgraph(g, vmap);
        n_local = e.a;
        t_local = e.b;
        if (n_local != cg.n()) fail(e.index, "component size mismatch");
        vertex_funds.assign(n_local, 2);
        alive.assign(n_local, true);
        red.assign(n_local, false);
        node_funds.clear();
        node_alive.clear();
        bags.clear();
        tuples.clear();
        universe = 2 * n_local;
        paid = saved = 0;
        debt = 0;
        branch_saved_stack.clear();
    }

    void apply_moves(const TraceEvent& e) {
        for (const auto& m : e.moves) {
            if (m.amount < 0) fail(e.index, "negative move amount");
            // debit
            if (m.from == "seed" || m.from == "ext") {
                universe += m.amount;
            } else if (m.from == "debt") {
                debt += m.amount;
            } else if (m.from.rfind("v:", 0) == 0) {
                int v = std::stoi(m.from.substr(2));
                ensure_vertex(v, e);
                if (vertex_funds[v] < m.amount) fail(e.index, "vertex overdrawn: " + m.from);
                vertex_funds[v] -= m.amount;
            } else if (m.from.rfind("n:", 0) == 0) {
                int u = std::stoi(m.from.substr(2));
                if (u < 0 || u >= static_cast<int>(node_funds.size()) ||
                    node_funds[u] < m.amount)
                    fail(e.index, "node overdrawn: " + m.from);
                node_funds[u] -= m.amount;
            } else if (m.from.rfind("t:", 0) == 0) {
                int t = std::stoi(m.from.substr(2));
                auto it = tuples.find(t);
                if (it == tuples.end() || !it->second.alive || it->second.funds < m.amount)
                    fail(e.index, "tuple overdrawn: " + m.from);
                it->second.funds -= m.amount;
            } else {
                fail(e.index, "invalid move source " + m.from);
            }
            // credit
            if (m.to == "paid") {
                paid += m.amount;
            } else if (m.to == "saved") {
                saved += m.amount;
            } else if (m.to == "debt") {
                debt -= m.amount;
                if (debt < 0) fail(e.index, "debt repaid below zero");
            } else if (m.to == "ext") {
                universe -= m.amount;
            } else if (m.to.rfind("v:", 0) == 0) {
                int v = std::stoi(m.to.substr(2));
                ensure_vertex(v, e);
                vertex_funds[v] += m.amount;
            } else if (m.to.rfind("n:", 0) == 0) {
                int u = std::stoi(m.to.substr(2));
                if (u < 0 || u >= static_cast<int>(node_funds.size()))
                    fail(e.index, "invalid node credit " + m.to);
                node_funds[u] += m.amount;
            } else if (m.to.rfind("t:", 0) == 0) {
                int t = std::stoi(m.to.substr(2));
                auto it = tuples.find(t);
                if (it == tuples.end() || !it->second.alive)
                    fail(e.index, "credit to missing tuple " + m.to);
                it->second.funds += m.amount;
            } else {
                fail(e.index, "invalid move destination " + m.to);
            }
        }
    }

    void event(const TraceEvent& e) {
        if (e.kind == "component") {
            open_component(e);
            return;
        }
        if (e.kind == "final") {
            saw_final = true;
            basic_mode = (e.detail == "basic");
            std::sort(red_global.begin(), red_global.end());
            if (e.colored != red_global) fail(e.index, "final red set does not match replay");
            return;
        }
        if (!in_component) fail(e.index, "event outside any component");

        if (e.kind == "component_end") {
            close_component(e);
            return;
        }
        if (e.kind == "decomposition") {
            bags = e.bags;
            node_funds.assign(bags.size(), 0);
            node_alive.assign(bags.size(), true);
            apply_moves(e);
            if (!conserved()) fail(e.index, "conservation broken");
            return;
        }
        if (e.kind == "branch_begin") {
            branch_saved_stack.push_back(saved);
            return;
        }
        if (e.kind == "branch_end") {
            if (branch_saved_stack.empty()) fail(e.index, "branch_end without begin");
            long long delta = saved - branch_saved_stack.back();
            branch_saved_stack.pop_back();
            if (debt != 0) fail(e.index, "branch ended in debt");
            if (delta < 1) fail(e.index, "branch saved nothing");
            if (e.a != delta) fail(e.index, "branch saving mismatch");
            return;
        }

        // Rule precedence for basic rules; surgeries must replace the bad
        // rule that would have fired.
        if (e.kind == "rule" && e.rule != "C4") {
            if (e.node < 0 || e.node >= static_cast<int>(bags.size()))
                fail(e.index, "rule on unknown node");
            if (!node_alive[e.node]) fail(e.index, "rule on removed node");
            if (!bag_has(e.node, e.vertex)) fail(e.index, "rule vertex outside bag");
            std::string expect = first_rule(e.node, e.vertex);
            if (expect != e.rule)
                fail(e.index, "rule precedence: expected " + expect + ", got " + e.rule);
        }
        if (e.kind == "surgery" && e.rule.rfind("B2.", 0) == 0) {
            if (first_rule(e.node, e.vertex) != "B2") fail(e.index, "surgery without B2 guard");
        }
        if (e.kind == "surgery" && e.rule == "B3.debt") {
            if (first_rule(e.node, e.vertex) != "B3") fail(e.index, "surgery without B3 guard");
        }
        if (e.kind == "surgery" && e.rule == "B3.shared") {
            if (first_rule(e.node, e.vertex) != "B3") fail(e.index, "surgery without B3 guard");
        }

        // Births registered with zero funds; moves fund them.
        for (const auto& b : e.tuples_created) {
            if (tuples.count(b.id)) fail(e.index, "tuple id reused");
            ReplayTuple t;
            t.members = b.members;
            std::sort(t.members.begin(), t.members.end());
            t.alive = true;
            t.funds = 0;
            tuples[b.id] = t;
        }

        apply_moves(e);

        for (const auto& b : e.tuples_created) {
            auto& t = tuples[b.id];
            int want = t.members.size() == 2 ? 3 : 2;
            if (t.members.size() != 2 && t.members.size() != 3)
                fail(e.index, "tuple of invalid size");
            if (t.funds != want) fail(e.index, "tuple created with wrong funds");
            bool real = true;
            for (Vertex v : t.members) {
                ensure_vertex(v, e);
                if (v >= n_local) real = false;  // aux vertices, adjacency unknown here
                if (red[v]) fail(e.index, "tuple created with a red member");
                if (!alive[v]) fail(e.index, "tuple created with a removed member");
            }
            if (real) {
                if (!cg.is_clique(t.members))
                    fail(e.index, "tuple members not pairwise adjacent");
            }
        }

        long long paid_here = 0;
        for (const auto& m : e.moves)
            if (m.to == "paid") paid_here += m.amount;
        if (paid_here != 7LL * static_cast<long long>(e.colored.size()))
            fail(e.index, "payment is not seven per colored vertex");

        for (Vertex v : e.colored) {
            ensure_vertex(v, e);
            if (red[v]) fail(e.index, "vertex colored twice");
            if (!alive[v]) fail(e.index, "removed vertex colored");
            red[v] = true;
        }

        for (int tid : e.tuples_consumed) {
            auto it = tuples.find(tid);
            if (it == tuples.end() || !it->second.alive) fail(e.index, "dead tuple consumed");
            if (it->second.funds != 0) fail(e.index, "tuple consumed while holding funds");
            bool red_member = false;
            for (Vertex v : it->second.members)
                if (red[v]) red_member = true;
            bool covered = red_member;
            if (!covered)
                for (const auto& b : e.tuples_created) {
                    auto mem = b.members;
                    std::sort(mem.begin(), mem.end());
                    if (std::includes(it->second.members.begin(), it->second.members.end(),
                                      mem.begin(), mem.end()))
                        covered = true;
                }
            if (!covered)
                fail(e.index, "tuple " + std::to_string(tid) +
                                  " died without a red member or covering successor");
            it->second.alive = false;
        }

        for (const auto& [id, t] : tuples) {
            if (!t.alive) continue;
            for (Vertex v : t.members)
                if (red[v]) fail(e.index, "live tuple holds a red member");
        }

        for (Vertex v : e.removed) {
            ensure_vertex(v, e);
            if (!alive[v]) fail(e.index, "vertex removed twice");
            if (vertex_funds[v] != 0) fail(e.index, "vertex removed while funded");
            if (!tuples_with(v).empty()) fail(e.index, "vertex removed inside a live tuple");
            alive[v] = false;
        }

        if (e.kind == "node_removed") {
            if (e.node < 0 || e.node >= static_cast<int>(node_alive.size()))
                fail(e.index, "unknown node removed");
            if (!node_alive[e.node]) fail(e.index, "node removed twice");
            if (node_funds[e.node] != 0) fail(e.index, "node removed while funded");
            node_alive[e.node] = false;
        }

        if (!conserved()) fail(e.index, "conservation broken: " + summary());
        if (debt < 0 || debt > 1) fail(e.index, "debt out of range");
    }

    std::string summary() const {
        std::ostringstream out;
        out << "universe=" << universe << " paid=" << paid << " saved=" << saved
            << " held=" << held() << " debt=" << debt;
        return out.str();
    }
};

}  // namespace

std::optional<std::string> replay_verify(const Trace& trace, const Graph& g) {
    Checker checker(g);
    try {
        for (const auto& e : trace.events) checker.event(e);
        if (checker.in_component) return "trace ended inside a component";
        if (!checker.saw_final) return "trace has no final event";
        std::sort(checker.red_global.begin(), checker.red_global.end());
        if (auto gap = transversal_gap(g, checker.red_global)) {
            return "replayed red set misses a maximal clique";
        }
        long long size = static_cast<long long>(checker.red_global.size());
        if (!checker.basic_mode && g.n() >= 5 && size > bound(g.n()))
            return "replayed red set exceeds the bound";
    } catch (const ReplayError& err) {
        return err.msg;
    }
    return std::nullopt;
}

}  // namespace ct

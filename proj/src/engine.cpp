#include "ct/engine.hpp"

#include <algorithm>
#include <sstream>

namespace ct {

namespace {

std::string vloc(Vertex v) { return "v:" + std::to_string(v); }
std::string nloc(int u) { return "n:" + std::to_string(u); }
std::string tloc(int t) { return "t:" + std::to_string(t); }

[[noreturn]] void engine_bug(const std::string& what) {
    throw ContractError("engine invariant violation: " + what);
}

}  // namespace

Engine::Engine(const Graph& g, Ledger& ledger, Trace& trace, const std::vector<Vertex>* scope)
    : g_(g), ledger_(ledger), trace_(trace) {
    if (scope) {
        vertex_alive_.assign(g.n(), false);
        for (Vertex v : *scope) vertex_alive_[v] = true;
    } else {
        vertex_alive_.assign(g.n(), true);
    }
    red_.assign(g.n(), false);
    doomed_.assign(g.n(), false);
    tuples_of_.assign(g.n(), {});
    if (static_cast<int>(ledger_.vertex_funds.size()) < g.n())
        engine_bug("ledger vertex funds not seeded");
}

void Engine::load(TreeDecomposition dec) {
    dec_ = std::move(dec);
    node_alive_.assign(dec_.size(), true);
    ledger_.node_funds.assign(dec_.size(), 0);
    TraceEvent ev;
    ev.kind = "decomposition";
    for (int u = 0; u < dec_.size(); ++u) {
        ev.bags.emplace_back(dec_.nodes[u].parent, dec_.nodes[u].bag);
        if (dec_.bag(u).size() == 3) {
            if (!dec_.nodes[u].is_maximal) engine_bug("size-3 bag is not a maximal clique");
            ledger_.node_funds[u] = 1;
            ledger_.universe += 1;
            ev.moves.push_back(Move{"seed", nloc(u), 1});
        }
    }
    emit(std::move(ev));
}

std::vector<Vertex> Engine::private_vertices(int u) const {
    int p = dec_.nodes[u].parent;
    if (p < 0 || !node_alive_[p]) return bag(u);
    std::vector<Vertex> out;
    for (Vertex v : bag(u))
        if (!dec_.bag_contains(p, v)) out.push_back(v);
    return out;
}

bool Engine::red_in_bag_except(int u, Vertex v) const {
    // Red status is permanent; bag members removed in earlier steps of this
    // node's processing still count.
    for (Vertex w : bag(u))
        if (w != v && red_[w]) return true;
    return false;
}

std::vector<int> Engine::tuples_with(Vertex v) const { return tuples_of_[v]; }

std::vector<const DistinguishedTuple*> Engine::live_tuples() const {
    std::vector<const DistinguishedTuple*> out;
    for (const auto& t : tuples_)
        if (t.alive) out.push_back(&t);
    return out;
}

int Engine::red_count() const {
    int c = 0;
    for (bool r : red_) c += r;
    return c;
}

std::vector<Vertex> Engine::red_vertices() const {
    std::vector<Vertex> out;
    for (Vertex v = 0; v < static_cast<Vertex>(red_.size()); ++v)
        if (red_[v]) out.push_back(v);
    return out;
}

int Engine::vertex_funds(Vertex v) const { return ledger_.vertex_funds[v]; }

void Engine::check_conservation(const char* where) const {
    if (!ledger_.conserved())
        engine_bug(std::string("conservation broken at ") + where + ": " + ledger_.summary());
    if (ledger_.debt < 0 || ledger_.debt > 1)
        engine_bug(std::string("debt out of range at ") + where);
}

std::string Engine::select_rule(int u, Vertex v) const {
    const auto& U = bag(u);
    if (U.size() >= 4) {
        if (red_[v]) return "B1";
        const auto& tids = tuples_of_[v];
        int pairs = 0, triples = 0;
        for (int t : tids) tuples_[t].is_pair() ? ++pairs : ++triples;
        if (static_cast<int>(tids.size()) >= 3) return "G1";
        if (pairs >= 2) return "G2";
        if (pairs >= 1 && triples >= 1) return "B2";
        if (triples >= 2) return "B3";
        if (triples == 1) return "G3";
        if (pairs == 1) {
            const auto& p = tuples_[tids[0]];
            Vertex partner = p.members[0] == v ? p.members[1] : p.members[0];
            return tuples_of_[partner].size() >= 2 ? "G4" : "B4";
        }
        return red_in_bag_except(u, v) ? "G5" : "B5";
    }
    if (U.size() == 3) {
        if (red_[v]) return "T1";
        const auto& tids = tuples_of_[v];
        if (tids.size() >= 2) return "T2";
        if (tids.size() == 1) return "T3";
        if (red_in_bag_except(u, v)) return "T4";
        return "T5";
    }
    engine_bug("select_rule on bag of size " + std::to_string(U.size()));
}

// ---- fund plumbing ----

void Engine::gather_vertex(Gather& g, Vertex v) {
    int f = ledger_.vertex_funds[v];
    if (f > 0) {
        g.moves_in.push_back(Move{vloc(v), "", f});
        g.total += f;
        ledger_.vertex_funds[v] = 0;
    }
}

void Engine::gather_tuple(Gather& g, int tid, TraceEvent& ev) {
    auto& t = tuples_[tid];
    if (!t.alive) engine_bug("gathering dead tuple");
    if (t.funds > 0) {
        g.moves_in.push_back(Move{tloc(tid), "", t.funds});
        g.total += t.funds;
    }
    ev.tuples_consumed.push_back(tid);
    kill_tuple(tid);
}

void Engine::gather_node(Gather& g, int u) {
    int f = ledger_.node_funds[u];
    if (f > 0) {
        g.moves_in.push_back(Move{nloc(u), "", f});
        g.total += f;
        ledger_.node_funds[u] = 0;
    }
}

void Engine::distribute(TraceEvent& ev, Gather& g, const std::vector<Vertex>& color,
                        const std::vector<TupleBirth>& births, bool repay_debt, int debt_spend) {
    long long need_paid = 7LL * static_cast<long long>(color.size());
    long long birth_total = 0;
    for (const auto& b : births) birth_total += b.funds;
    long long available = g.total + debt_spend;
    if (available < need_paid + birth_total)
        engine_bug("event " + ev.rule + " cannot fund itself: has " + std::to_string(available) +
                   ", needs " + std::to_string(need_paid + birth_total));

    for (Vertex v : color) {
        if (red_[v]) engine_bug("coloring an already red vertex");
        if (!vertex_alive_[v]) engine_bug("coloring a removed vertex");
        red_[v] = true;
        ev.colored.push_back(v);
    }

    struct Dest {
        std::string loc;
        long long amount;
    };
    std::vector<Dest> dests;
    if (need_paid > 0) dests.push_back({"paid", need_paid});
    for (const auto& b : births) {
        int id = new_tuple(b.members, b.funds, b.lineage);
        TupleBirth recorded = b;
        recorded.id = id;
        std::sort(recorded.members.begin(), recorded.members.end());
        ev.tuples_created.push_back(recorded);
        dests.push_back({tloc(id), b.funds});
    }
    long long rest = available - need_paid - birth_total;
    long long repaid = 0;
    if (repay_debt && ledger_.debt > 0 && rest > 0) {
        repaid = std::min<long long>(ledger_.debt, rest);
        dests.push_back({"debt", repaid});
        rest -= repaid;
    }
    if (rest > 0) dests.push_back({"saved", rest});

    // The debt grant, if any, funds the payment first so the loan is visible
    // in the moves.
    std::vector<Move> sources;
    if (debt_spend > 0) sources.push_back(Move{"debt", "", debt_spend});
    sources.insert(sources.end(), g.moves_in.begin(), g.moves_in.end());
    size_t si = 0;
    long long src_left = sources.empty() ? 0 : sources[0].amount;
    for (const auto& d : dests) {
        long long need = d.amount;
        while (need > 0) {
            if (si >= sources.size()) engine_bug("distribute ran out of sources");
            if (src_left == 0) {
                ++si;
                src_left = si < sources.size() ? sources[si].amount : 0;
                continue;
            }
            long long take = std::min(src_left, need);
            ev.moves.push_back(Move{sources[si].from, d.loc, static_cast<int>(take)});
            src_left -= take;
            need -= take;
        }
    }

    ledger_.paid += need_paid;
    ledger_.debt += debt_spend;
    ledger_.debt -= static_cast<int>(repaid);
    ledger_.saved += rest;
    for (Vertex v : color)
        if (!tuples_of_[v].empty()) engine_bug("red vertex left inside a live tuple");
}

int Engine::new_tuple(std::vector<Vertex> members, int funds, int lineage) {
    std::sort(members.begin(), members.end());
    if (members.size() != 2 && members.size() != 3) engine_bug("tuple size");
    if (funds != (members.size() == 2 ? 3 : 2)) engine_bug("tuple creation funds");
    for (Vertex v : members) {
        if (!vertex_alive_[v]) engine_bug("tuple member not alive");
        if (red_[v]) engine_bug("tuple member is red");
    }
    if (!g_.is_clique(members)) engine_bug("tuple members not a clique");
    DistinguishedTuple t;
    t.id = static_cast<int>(tuples_.size());
    t.members = std::move(members);
    t.funds = funds;
    t.lineage = lineage;
    t.alive = true;
    for (Vertex v : t.members) tuples_of_[v].push_back(t.id);
    ledger_.tuple_funds_total += funds;
    tuples_.push_back(std::move(t));
    return static_cast<int>(tuples_.size()) - 1;
}

void Engine::kill_tuple(int tid) {
    auto& t = tuples_[tid];
    ledger_.tuple_funds_total -= t.funds;
    t.funds = 0;
    t.alive = false;
    for (Vertex v : t.members) {
        auto& lst = tuples_of_[v];
        lst.erase(std::find(lst.begin(), lst.end(), tid));
    }
}

void Engine::remove_vertex(Vertex v, TraceEvent& ev) {
    if (!vertex_alive_[v]) engine_bug("vertex removed twice");
    if (ledger_.vertex_funds[v] != 0) engine_bug("vertex removed while holding funds");
    if (!tuples_of_[v].empty()) engine_bug("vertex removed while inside a live tuple");
    vertex_alive_[v] = false;
    ev.removed.push_back(v);
}

void Engine::emit(TraceEvent ev) {
    trace_.push(std::move(ev));
    check_conservation(trace_.events.back().kind.c_str());
}

// ---- rule bodies ----

void Engine::apply_rule(int u, Vertex v, const std::string& rule, BranchCtx* ctx) {
    TraceEvent ev;
    ev.kind = "rule";
    ev.rule = rule;
    ev.node = u;
    ev.vertex = v;
    Gather g;

    if (rule == "B1" || rule == "T1") {
        remove_vertex(v, ev);
    } else if (rule == "G1" || rule == "G2" || rule == "B2" || rule == "T2") {
        gather_vertex(g, v);
        for (int t : std::vector<int>(tuples_of_[v])) gather_tuple(g, t, ev);
        if (rule == "T2") gather_node(g, u);
        distribute(ev, g, {v}, {}, true, 0);
        remove_vertex(v, ev);
    } else if (rule == "B3") {
        std::vector<TupleBirth> births;
        for (int t : tuples_of_[v]) {
            TupleBirth b;
            for (Vertex w : tuples_[t].members)
                if (w != v) b.members.push_back(w);
            b.funds = 3;
            b.lineage = t;
            births.push_back(std::move(b));
        }
        gather_vertex(g, v);
        for (int t : std::vector<int>(tuples_of_[v])) gather_tuple(g, t, ev);
        distribute(ev, g, {}, births, false, 0);
        remove_vertex(v, ev);
    } else if (rule == "G3") {
        int t = tuples_of_[v][0];
        TupleBirth b;
        for (Vertex w : tuples_[t].members)
            if (w != v) b.members.push_back(w);
        b.funds = 3;
        b.lineage = t;
        gather_vertex(g, v);
        gather_tuple(g, t, ev);
        distribute(ev, g, {}, {b}, true, 0);
        remove_vertex(v, ev);
    } else if (rule == "G4" || rule == "B4") {
        int p = tuples_of_[v][0];
        Vertex partner = tuples_[p].members[0] == v ? tuples_[p].members[1] : tuples_[p].members[0];
        gather_vertex(g, v);
        gather_vertex(g, partner);
        for (int t : std::vector<int>(tuples_of_[partner])) gather_tuple(g, t, ev);
        distribute(ev, g, {partner}, {}, true, 0);
        remove_vertex(v, ev);
    } else if (rule == "G5") {
        gather_vertex(g, v);
        distribute(ev, g, {}, {}, true, 0);
        remove_vertex(v, ev);
    } else if (rule == "B5") {
        if (ledger_.vertex_funds[v] != 2) engine_bug("B5 on a defunded vertex");
        TupleBirth b;
        b.members = b5_pick(u, v, ctx);
        b.funds = 2;
        gather_vertex(g, v);
        distribute(ev, g, {}, {b}, false, 0);
        remove_vertex(v, ev);
    } else if (rule == "T3") {
        int t = tuples_of_[v][0];
        Vertex partner = -1;
        for (Vertex w : tuples_[t].members)
            if (w != v) {
                partner = w;
                break;
            }
        gather_vertex(g, v);
        gather_vertex(g, partner);
        for (int tt : std::vector<int>(tuples_of_[partner])) gather_tuple(g, tt, ev);
        gather_node(g, u);
        distribute(ev, g, {partner}, {}, true, 0);
        remove_vertex(v, ev);
    } else if (rule == "T4") {
        gather_vertex(g, v);
        gather_node(g, u);
        distribute(ev, g, {}, {}, true, 0);
        remove_vertex(v, ev);
    } else if (rule == "T5") {
        TupleBirth b;
        for (Vertex w : bag(u))
            if (w != v) b.members.push_back(w);
        b.funds = 3;
        gather_vertex(g, v);
        gather_node(g, u);
        distribute(ev, g, {}, {b}, false, 0);
        remove_vertex(v, ev);
    } else {
        engine_bug("unknown rule " + rule);
    }
    emit(std::move(ev));
}

std::vector<Vertex> Engine::b5_pick(int u, Vertex v, BranchCtx* ctx) const {
    std::vector<Vertex> cands;
    for (Vertex w : bag(u))
        if (w != v && vertex_alive_[w] && !red_[w] && !doomed_[w]) cands.push_back(w);
    auto in_xset = [&](Vertex w) {
        return ctx && std::binary_search(ctx->xset.begin(), ctx->xset.end(), w);
    };
    std::sort(cands.begin(), cands.end(), [&](Vertex a, Vertex b) {
        auto key = [&](Vertex w) { return std::make_tuple(!tuples_of_[w].empty(), in_xset(w), w); };
        return key(a) < key(b);
    });
    if (cands.size() < 3) engine_bug("B5 has fewer than three candidate vertices");
    return {cands[0], cands[1], cands[2]};
}

// ---- node processing ----

void Engine::handle_vertex(int u, Vertex v, BranchCtx* ctx, bool salvage) {
    if (doomed_[v]) {
        TraceEvent ev;
        ev.kind = "teardown";
        ev.node = u;
        ev.vertex = v;
        ev.detail = "scheduled removal; the anchor pair holds the obligation";
        remove_vertex(v, ev);
        emit(std::move(ev));
        return;
    }
    if (salvage) {
        TraceEvent ev;
        ev.kind = "surgery";
        ev.rule = "salvage";
        ev.node = u;
        ev.vertex = v;
        ev.detail = "bag is not a maximal clique; funds released";
        Gather g;
        gather_vertex(g, v);
        distribute(ev, g, {}, {}, true, 0);
        remove_vertex(v, ev);
        emit(std::move(ev));
        return;
    }
    std::string rule = select_rule(u, v);
    if (ctx && ctx->active && (rule == "B2" || rule == "B3") && !branch_goal_met(*ctx)) {
        if (try_branch_surgery(u, v, rule, ctx)) return;
    }
    apply_rule(u, v, rule, ctx);
}

void Engine::process_node(int u, BranchCtx* ctx) {
    if (!node_alive_[u]) engine_bug("processing dead node");
    for (int c : dec_.nodes[u].children)
        if (node_alive_[c]) engine_bug("processing a node with alive children");

    if (ctx && ledger_.debt > 0 && !ctx->xset.empty()) maybe_debt_prestep(u, ctx);

    auto privates = private_vertices(u);
    const bool salvage = salvage_node_ && salvage_node_id_ == u;
    salvage_node_ = false;
    salvage_node_id_ = -1;
    if (salvage && dec_.nodes[u].is_maximal) engine_bug("salvage on a maximal-clique bag");

    if (salvage) {
        for (Vertex v : privates)
            if (vertex_alive_[v]) handle_vertex(u, v, ctx, true);
    } else if (bag(u).size() >= 4) {
        if (privates.size() == 1) {
            handle_vertex(u, privates[0], ctx, false);
        } else {
            // Vertices outside every tuple go first (rules B5/G5), then the
            // rest in ascending order.
            while (true) {
                Vertex pick = -1;
                for (Vertex v : privates)
                    if (vertex_alive_[v] && !red_[v] && !doomed_[v] && tuples_of_[v].empty()) {
                        pick = v;
                        break;
                    }
                if (pick < 0) break;
                handle_vertex(u, pick, ctx, false);
            }
            for (Vertex v : privates)
                if (vertex_alive_[v]) handle_vertex(u, v, ctx, false);
        }
    } else if (bag(u).size() == 3) {
        if (privates.size() == 1) {
            handle_vertex(u, privates[0], ctx, false);
        } else {
            process_case4(u, privates, ctx);
        }
    } else {
        engine_bug("node with bag smaller than 3");
    }

    node_alive_[u] = false;
    TraceEvent ev;
    ev.kind = "node_removed";
    ev.node = u;
    if (ledger_.node_funds[u] > 0) {
        Gather g;
        gather_node(g, u);
        ev.detail = "unspent node fund saved";
        distribute(ev, g, {}, {}, true, 0);
    }
    emit(std::move(ev));
}

void Engine::process_case4(int u, const std::vector<Vertex>& privates, BranchCtx* ctx) {
    Vertex v = privates[0];
    handle_vertex(u, v, ctx, false);

    std::vector<Vertex> others;
    for (Vertex w : bag(u))
        if (w != v) others.push_back(w);

    std::vector<int> pairs_on_others;
    for (int tid : tuples_of_[others[0]]) {
        const auto& t = tuples_[tid];
        if (t.is_pair() && t.members == others) pairs_on_others.push_back(tid);
    }

    if (!pairs_on_others.empty()) {
        // A pair sits on the remaining two vertices. The vertex shared with
        // the parent (or the smaller one) turns red; payment comes from it,
        // the pair, and the other private vertex leaving with it.
        Vertex v2 = -1;
        for (Vertex w : others)
            if (std::find(privates.begin(), privates.end(), w) == privates.end()) v2 = w;
        if (v2 < 0) v2 = others[0];
        TraceEvent ev;
        ev.kind = "rule";
        ev.rule = "C4";
        ev.node = u;
        ev.vertex = v2;
        Gather g;
        gather_vertex(g, v2);
        for (int t : std::vector<int>(tuples_of_[v2])) gather_tuple(g, t, ev);
        for (Vertex w : privates)
            if (w != v && w != v2 && vertex_alive_[w]) gather_vertex(g, w);
        distribute(ev, g, {v2}, {}, true, 0);
        for (Vertex w : privates)
            if (w != v && w != v2 && vertex_alive_[w]) remove_vertex(w, ev);
        if (std::find(privates.begin(), privates.end(), v2) != privates.end() && vertex_alive_[v2])
            remove_vertex(v2, ev);
        emit(std::move(ev));
    } else {
        if (!red_in_bag_except(u, -1)) engine_bug("3-clique bag left unhit in case 4");
        for (Vertex w : privates) {
            if (w == v || !vertex_alive_[w]) continue;
            if (!tuples_of_[w].empty()) engine_bug("case 4 leftover vertex still in a tuple");
            TraceEvent ev;
            ev.kind = "teardown";
            ev.node = u;
            ev.vertex = w;
            ev.detail = "bag already hit; leftover funds saved";
            Gather g;
            gather_vertex(g, w);
            distribute(ev, g, {}, {}, true, 0);
            remove_vertex(w, ev);
            emit(std::move(ev));
        }
    }
}

void Engine::process_all_remaining() { process_all_except({}); }

void Engine::process_all_except(const std::vector<int>& exempt) {
    std::vector<bool> skip(dec_.size(), false);
    for (int u : exempt) skip[u] = true;
    while (true) {
        int pick = -1;
        for (int u = 0; u < dec_.size(); ++u) {
            if (!node_alive_[u] || skip[u]) continue;
            bool ready = true;
            for (int c : dec_.nodes[u].children)
                if (node_alive_[c]) ready = false;
            if (ready) {
                pick = u;
                break;
            }
        }
        if (pick < 0) break;
        process_node(pick, nullptr);
    }
    for (int u = 0; u < dec_.size(); ++u)
        if (node_alive_[u] && !skip[u]) engine_bug("exempt nodes block remaining processing");
}

void Engine::teardown_all_remaining(const std::string& why) {
    TraceEvent ev;
    ev.kind = "teardown";
    ev.detail = why;
    Gather g;
    bool any = false;
    for (Vertex v = 0; v < g_.n(); ++v) {
        if (!vertex_alive_[v]) continue;
        if (!tuples_of_[v].empty()) engine_bug("teardown_all with a live tuple");
        gather_vertex(g, v);
        any = true;
    }
    if (any) {
        distribute(ev, g, {}, {}, true, 0);
        for (Vertex v = 0; v < g_.n(); ++v)
            if (vertex_alive_[v]) remove_vertex(v, ev);
        emit(std::move(ev));
    }
    for (int u = 0; u < dec_.size(); ++u)
        if (node_alive_[u]) teardown_node(u, why);
}

void Engine::assert_all_done() const {
    for (Vertex v = 0; v < g_.n(); ++v)
        if (vertex_alive_[v]) engine_bug("vertex still alive at the end");
    for (int u = 0; u < dec_.size(); ++u)
        if (node_alive_[u]) engine_bug("node still alive at the end");
    for (const auto& t : tuples_)
        if (t.alive) engine_bug("tuple still alive at the end");
    if (ledger_.debt != 0) engine_bug("debt outstanding at the end");
}

// ---- driver primitives ----

void Engine::endgame_color(Vertex v, const std::vector<Vertex>& fund_sources,
                           const std::string& why) {
    TraceEvent ev;
    ev.kind = "endgame";
    ev.rule = "color";
    ev.vertex = v;
    ev.detail = why;
    Gather g;
    gather_vertex(g, v);
    for (int t : std::vector<int>(tuples_of_[v])) gather_tuple(g, t, ev);
    for (Vertex w : fund_sources)
        if (w != v) gather_vertex(g, w);
    distribute(ev, g, {v}, {}, true, 0);
    emit(std::move(ev));
}

void Engine::teardown_vertex(Vertex v, const std::string& why) {
    if (!tuples_of_[v].empty()) engine_bug("teardown of a vertex inside a live tuple");
    TraceEvent ev;
    ev.kind = "teardown";
    ev.vertex = v;
    ev.detail = why;
    Gather g;
    gather_vertex(g, v);
    distribute(ev, g, {}, {}, true, 0);
    remove_vertex(v, ev);
    emit(std::move(ev));
}

void Engine::teardown_node(int u, const std::string& why) {
    if (!node_alive_[u]) engine_bug("teardown of a dead node");
    node_alive_[u] = false;
    TraceEvent ev;
    ev.kind = "node_removed";
    ev.node = u;
    ev.detail = why;
    if (ledger_.node_funds[u] > 0) {
        Gather g;
        gather_node(g, u);
        distribute(ev, g, {}, {}, true, 0);
    }
    emit(std::move(ev));
}

void Engine::introduce_tuple(const std::vector<Vertex>& members, const std::vector<Vertex>& funders,
                             const std::string& why) {
    TraceEvent ev;
    ev.kind = "surgery";
    ev.rule = "introduce";
    ev.detail = why;
    TupleBirth b;
    b.members = members;
    b.funds = members.size() == 2 ? 3 : 2;
    Gather g;
    for (Vertex w : funders) gather_vertex(g, w);
    distribute(ev, g, {}, {b}, true, 0);
    for (Vertex w : funders) remove_vertex(w, ev);
    emit(std::move(ev));
}

void Engine::merge_triples(int t1, int t2, const std::string& why) {
    std::vector<Vertex> shared;
    for (Vertex w : tuples_[t1].members)
        if (tuples_[t2].has_member(w)) shared.push_back(w);
    if (shared.size() < 2) engine_bug("merge_triples on triples sharing fewer than two vertices");
    TraceEvent ev;
    ev.kind = "endgame";
    ev.rule = "merge";
    ev.detail = why;
    TupleBirth b;
    b.members = {shared[0], shared[1]};
    b.funds = 3;
    b.lineage = t1;
    Gather g;
    gather_tuple(g, t1, ev);
    gather_tuple(g, t2, ev);
    distribute(ev, g, {}, {b}, true, 0);
    emit(std::move(ev));
}

void Engine::endgame_finale(const std::vector<Vertex>& colors, const std::vector<Vertex>& drain,
                            const std::string& why) {
    TraceEvent ev;
    ev.kind = "endgame";
    ev.rule = "finale";
    ev.detail = why;
    Gather g;
    for (Vertex v : colors) {
        gather_vertex(g, v);
        for (int t : std::vector<int>(tuples_of_[v])) gather_tuple(g, t, ev);
    }
    for (Vertex w : drain) {
        if (!tuples_of_[w].empty())
            engine_bug("finale drain vertex still in a live tuple");
        gather_vertex(g, w);
    }
    distribute(ev, g, colors, {}, true, 0);
    for (Vertex v : colors)
        if (vertex_alive_[v]) remove_vertex(v, ev);
    for (Vertex w : drain)
        if (vertex_alive_[w]) remove_vertex(w, ev);
    emit(std::move(ev));
}

// ---- branch machinery ----

bool Engine::branch_goal_met(const BranchCtx& ctx) const {
    return ledger_.debt == 0 && ledger_.saved > ctx.saved_at_start;
}

void Engine::process_branch(const Branch& branch) {
    process_branch_as(branch.node_set, branch.root_node, branch.alpha, branch.beta);
}

void Engine::process_branch_as(const std::vector<int>& node_set, int branch_root, Vertex alpha,
                               Vertex beta) {
    Snapshot before = snapshot();
    for (int attempt = 0;; ++attempt) {
        BranchCtx ctx;
        ctx.node_set = node_set;
        std::sort(ctx.node_set.begin(), ctx.node_set.end());
        ctx.in_branch.assign(dec_.size(), false);
        for (int u : ctx.node_set) ctx.in_branch[u] = true;
        ctx.branch_root = branch_root;
        ctx.alpha = alpha;
        ctx.beta = beta;
        ctx.saved_at_start = ledger_.saved;
        ctx.skip_budget = attempt;
        if (run_branch(ctx)) return;
        // One of the deferral depths matches the last collision on the
        // climb; if even the all-plain run fails, the engine is wrong.
        if (ctx.opportunities_seen <= attempt)
            throw BoundMissError("branch saved nothing under every surgery schedule", trace_);
        restore(before);
    }
}

Engine::Snapshot Engine::snapshot() const {
    Snapshot s;
    s.node_alive = node_alive_;
    s.vertex_alive = vertex_alive_;
    s.red = red_;
    s.doomed = doomed_;
    s.tuples = tuples_;
    s.tuples_of = tuples_of_;
    s.ledger = ledger_;
    s.trace_len = trace_.events.size();
    return s;
}

void Engine::restore(const Snapshot& s) {
    node_alive_ = s.node_alive;
    vertex_alive_ = s.vertex_alive;
    red_ = s.red;
    doomed_ = s.doomed;
    tuples_ = s.tuples;
    tuples_of_ = s.tuples_of;
    ledger_ = s.ledger;
    trace_.events.resize(s.trace_len);
    salvage_node_ = false;
    salvage_node_id_ = -1;
}

bool Engine::run_branch(BranchCtx& ctx) {
    {
        TraceEvent ev;
        ev.kind = "branch_begin";
        ev.node = ctx.branch_root;
        ev.detail = "anchors " + std::to_string(ctx.alpha) + "," + std::to_string(ctx.beta);
        emit(std::move(ev));
    }

    // Stipulated order: one leaf first, then the remaining off-path nodes
    // bottom-up, then the path from that leaf up to the branch root.
    int u0 = -1;
    for (int u : ctx.node_set) {
        bool leaf = true;
        for (int c : dec_.nodes[u].children)
            if (node_alive_[c]) leaf = false;
        if (leaf) {
            u0 = u;
            break;
        }
    }
    if (u0 < 0) engine_bug("branch has no leaf");
    std::vector<int> path;
    for (int x = u0; x != ctx.branch_root; x = dec_.nodes[x].parent) path.push_back(x);
    path.push_back(ctx.branch_root);
    std::vector<bool> on_path(dec_.size(), false);
    for (int x : path) on_path[x] = true;

    std::vector<int> order{u0};
    std::vector<bool> planned(dec_.size(), false);
    planned[u0] = true;
    while (true) {
        int pick = -1;
        for (int u : ctx.node_set) {
            if (planned[u] || on_path[u]) continue;
            bool ready = true;
            for (int c : dec_.nodes[u].children)
                if (ctx.in_branch[c] && !planned[c]) ready = false;
            if (ready) {
                pick = u;
                break;
            }
        }
        if (pick < 0) break;
        planned[pick] = true;
        order.push_back(pick);
    }
    for (size_t i = 1; i < path.size(); ++i) order.push_back(path[i]);

    for (int u : order) {
        process_node(u, &ctx);
        if (ctx.active && branch_goal_met(ctx)) {
            ctx.active = false;
            ctx.xset.clear();
        }
    }

    for (Vertex v = 0; v < g_.n(); ++v)
        if (doomed_[v] && vertex_alive_[v]) engine_bug("doomed vertex escaped the branch");

    long long delta = ledger_.saved - ctx.saved_at_start;
    if (ledger_.debt != 0 || delta < 1) return false;
    {
        TraceEvent ev;
        ev.kind = "branch_end";
        ev.node = ctx.branch_root;
        ev.a = delta;
        emit(std::move(ev));
    }
    return true;
}

bool Engine::try_branch_surgery(int u, Vertex v, const std::string& rule, BranchCtx* ctx) {
    bool handled = false;
    if (rule == "B2") surgery_b2(u, v, ctx, handled);
    if (rule == "B3") surgery_b3(u, v, ctx, handled);
    return handled;
}

void Engine::surgery_b2(int u, Vertex v, BranchCtx* ctx, bool& handled) {
    int pair_id = -1, triple_id = -1;
    for (int t : tuples_of_[v]) {
        if (tuples_[t].is_pair())
            pair_id = t;
        else
            triple_id = t;
    }
    Vertex v2 =
        tuples_[pair_id].members[0] == v ? tuples_[pair_id].members[1] : tuples_[pair_id].members[0];
    std::vector<Vertex> tmates;
    for (Vertex w : tuples_[triple_id].members)
        if (w != v) tmates.push_back(w);

    if (tuples_[triple_id].has_member(v2)) {
        // Pair partner also sits in the triple: coloring it kills both
        // tuples with a red member and frees two zlotys.
        TraceEvent ev;
        ev.kind = "surgery";
        ev.rule = "B2.shared";
        ev.node = u;
        ev.vertex = v;
        Gather g;
        gather_vertex(g, v);
        gather_vertex(g, v2);
        for (int t : std::vector<int>(tuples_of_[v2])) gather_tuple(g, t, ev);
        for (int t : std::vector<int>(tuples_of_[v])) gather_tuple(g, t, ev);
        distribute(ev, g, {v2}, {}, true, 0);
        remove_vertex(v, ev);
        emit(std::move(ev));
        handled = true;
        return;
    }
    if (tuples_of_[v2].size() >= 2) {
        // Partner carries another tuple: color it, keep the triple's
        // remainder as a pair, two zlotys come free.
        TraceEvent ev;
        ev.kind = "surgery";
        ev.rule = "B2.partner";
        ev.node = u;
        ev.vertex = v;
        TupleBirth b;
        b.members = tmates;
        b.funds = 3;
        b.lineage = triple_id;
        Gather g;
        gather_vertex(g, v);
        gather_vertex(g, v2);
        for (int t : std::vector<int>(tuples_of_[v2])) gather_tuple(g, t, ev);
        gather_tuple(g, triple_id, ev);
        distribute(ev, g, {v2}, {b}, true, 0);
        remove_vertex(v, ev);
        emit(std::move(ev));
        handled = true;
        return;
    }
    if (v2 != ctx->alpha && v2 != ctx->beta) return;  // unmatched non-anchor: basic rule
    Vertex anchor_a = v2;
    Vertex anchor_b = v2 == ctx->alpha ? ctx->beta : ctx->alpha;

    // Color the anchor together with a matched triple mate whose pair avoids
    // both anchors; the freed pair partner later falls to rule G5 in a bag
    // that contains the red anchor.
    for (Vertex c : tmates) {
        if (c == anchor_a || c == anchor_b) continue;
        auto ct = tuples_of_[c];
        if (ct.size() != 2) continue;
        int pc = ct[0] == triple_id ? ct[1] : ct[0];
        if (!tuples_[pc].is_pair()) continue;
        Vertex d = tuples_[pc].members[0] == c ? tuples_[pc].members[1] : tuples_[pc].members[0];
        if (d == anchor_a || d == anchor_b) continue;
        if (tuples_of_[d].size() != 1) continue;
        if (!dec_.bag_contains(u, d)) continue;
        TraceEvent ev;
        ev.kind = "surgery";
        ev.rule = "B2.anchor";
        ev.node = u;
        ev.vertex = v;
        ev.detail = "anchor and triple mate colored; freed partner saves later";
        Gather g;
        gather_vertex(g, v);
        gather_vertex(g, c);
        gather_vertex(g, anchor_a);
        gather_tuple(g, pair_id, ev);
        gather_tuple(g, triple_id, ev);
        gather_tuple(g, pc, ev);
        distribute(ev, g, {c, anchor_a}, {}, true, 0);
        remove_vertex(v, ev);
        emit(std::move(ev));
        handled = true;
        return;
    }
    if (std::find(tmates.begin(), tmates.end(), anchor_b) != tmates.end()) {
        // Corner: the other anchor sits in the triple and is matched with
        // the remaining mate. Coloring both anchors settles every tuple.
        long long funds = ledger_.vertex_funds[v] + ledger_.vertex_funds[anchor_a] +
                          ledger_.vertex_funds[anchor_b];
        std::vector<int> cease = tuples_of_[v];
        for (Vertex a : {anchor_a, anchor_b})
            for (int t : tuples_of_[a])
                if (std::find(cease.begin(), cease.end(), t) == cease.end()) cease.push_back(t);
        for (int t : cease) funds += tuples_[t].funds;
        if (funds < 14) return;
        TraceEvent ev;
        ev.kind = "surgery";
        ev.rule = "B2.anchors2";
        ev.node = u;
        ev.vertex = v;
        Gather g;
        gather_vertex(g, v);
        gather_vertex(g, anchor_a);
        gather_vertex(g, anchor_b);
        for (int t : cease) gather_tuple(g, t, ev);
        distribute(ev, g, {anchor_a, anchor_b}, {}, true, 0);
        remove_vertex(v, ev);
        emit(std::move(ev));
        handled = true;
    }
}

void Engine::surgery_b3(int u, Vertex v, BranchCtx* ctx, bool& handled) {
    auto tids = tuples_of_[v];
    int t1 = tids[0], t2 = tids[1];
    std::vector<Vertex> shared;
    for (Vertex w : tuples_[t1].members)
        if (w != v && tuples_[t2].has_member(w)) shared.push_back(w);

    if (!shared.empty()) {
        // Both triples share a second vertex: color it, both die with a red
        // member, one zloty comes free.
        Vertex star = shared[0];
        TraceEvent ev;
        ev.kind = "surgery";
        ev.rule = "B3.shared";
        ev.node = u;
        ev.vertex = v;
        Gather g;
        gather_vertex(g, v);
        gather_vertex(g, star);
        for (int t : std::vector<int>(tuples_of_[star])) gather_tuple(g, t, ev);
        for (int t : std::vector<int>(tuples_of_[v])) gather_tuple(g, t, ev);
        distribute(ev, g, {star}, {}, true, 0);
        remove_vertex(v, ev);
        emit(std::move(ev));
        handled = true;
        return;
    }

    std::vector<Vertex> xset;
    for (int t : {t1, t2})
        for (Vertex w : tuples_[t].members)
            if (w != v) xset.push_back(w);
    std::sort(xset.begin(), xset.end());
    // If an escort carries a second tuple, the plain conversion leaves it in
    // two tuples and a good rule fires at its own turn instead.
    // A non-anchor escort carrying a second tuple would fall to a good rule
    // at its own turn, so the plain conversion suffices. Anchors never get a
    // turn inside the branch; extra pairs on them are harmless as long as
    // their funds are left alone.
    for (Vertex x : xset) {
        bool anchor = (x == ctx->alpha || x == ctx->beta);
        if (!anchor && tuples_of_[x].size() != 1) return;
    }
    if (ledger_.debt > 0) return;  // one loan at a time
    ++ctx->opportunities_seen;
    if (ctx->skip_budget > 0) {
        --ctx->skip_budget;
        return;  // not the last collision yet; the plain rule runs here
    }

    TraceEvent ev;
    ev.kind = "surgery";
    ev.rule = "B3.debt";
    ev.node = u;
    ev.vertex = v;
    ev.detail = "six of seven paid; the climb repays";
    Gather g;
    gather_vertex(g, v);
    gather_tuple(g, t1, ev);
    gather_tuple(g, t2, ev);
    distribute(ev, g, {v}, {}, false, 1);
    remove_vertex(v, ev);
    emit(std::move(ev));
    ctx->xset = xset;
    handled = true;
}

void Engine::maybe_debt_prestep(int u, BranchCtx* ctx) {
    for (Vertex x : ctx->xset)
        if (!vertex_alive_[x] || !dec_.bag_contains(u, x)) return;
    int p = dec_.nodes[u].parent;
    bool topmost = (u == ctx->branch_root);
    if (!topmost && p >= 0) {
        bool parent_has = true;
        for (Vertex x : ctx->xset)
            if (!dec_.bag_contains(p, x)) parent_has = false;
        topmost = !parent_has;
    }
    if (!topmost) return;
    debt_prestep(u, ctx);
}

void Engine::debt_prestep(int u, BranchCtx* ctx) {
    // u is the topmost alive node whose bag holds the whole escort set.
    if (red_in_bag_except(u, -1)) return;  // escorts fall to G5 here as is

    const auto X = ctx->xset;
    auto is_anchor = [&](Vertex x) { return x == ctx->alpha || x == ctx->beta; };
    for (Vertex x : X)
        if (!is_anchor(x) && !tuples_of_[x].empty()) return;  // picked up a tuple; audit decides
    int p = dec_.nodes[u].parent;
    Vertex xstar = -1;
    for (Vertex x : X) {
        bool retained = (u == ctx->branch_root) ? is_anchor(x)
                                                : (p >= 0 && dec_.bag_contains(p, x));
        if (!retained) {
            xstar = x;
            break;
        }
    }
    if (xstar < 0) engine_bug("debt target without a private escort");
    if (is_anchor(xstar)) engine_bug("anchor escort turned out private");

    std::vector<Vertex> rest;
    for (Vertex w : bag(u)) {
        if (std::binary_search(X.begin(), X.end(), w)) continue;
        if (!vertex_alive_[w] || red_[w] || doomed_[w]) continue;
        rest.push_back(w);
    }
    if (rest.empty()) {
        // Bag equals the escort set: a proper subset of the clique the debt
        // was incurred in, hence not maximal, hence free to dissolve.
        if (dec_.nodes[u].is_maximal) engine_bug("escort-only bag marked maximal");
        salvage_node_ = true;
        salvage_node_id_ = u;
        return;
    }

    Vertex y = -1;
    for (Vertex a : {ctx->alpha, ctx->beta})
        if (std::find(rest.begin(), rest.end(), a) != rest.end()) {
            y = a;
            break;
        }
    if (y >= 0) {
        Vertex other = (y == ctx->alpha) ? ctx->beta : ctx->alpha;
        bool other_in_x = std::binary_search(X.begin(), X.end(), other);
        if (!other_in_x) {
            // Color the anchor. Every escort later falls to rule G5 inside a
            // bag containing it, so their funds may travel now. Both anchors
            // are outside the escort set here, so every escort is plain.
            for (Vertex x : X)
                if (is_anchor(x)) engine_bug("anchor escort in the colored-anchor case");
            TraceEvent ev;
            ev.kind = "surgery";
            ev.rule = "B3.debt.anchor";
            ev.node = u;
            ev.vertex = y;
            Gather g;
            gather_vertex(g, y);
            for (int t : std::vector<int>(tuples_of_[y])) gather_tuple(g, t, ev);
            for (Vertex x : X) gather_vertex(g, x);
            distribute(ev, g, {y}, {}, true, 0);
            emit(std::move(ev));
            ctx->xset.clear();
            return;
        }
        // The other anchor is itself an escort: pair the anchors; the other
        // escorts leave silently, every bag holding them holds the pair too.
        std::vector<Vertex> drained;
        for (Vertex x : X)
            if (x != other) drained.push_back(x);
        for (Vertex x : drained)
            if (is_anchor(x)) engine_bug("anchor among drained escorts");
        TraceEvent ev;
        ev.kind = "surgery";
        ev.rule = "B3.debt.pair";
        ev.node = u;
        ev.vertex = y;
        TupleBirth b;
        b.members = {std::min(y, other), std::max(y, other)};
        b.funds = 3;
        Gather g;
        for (Vertex x : drained) gather_vertex(g, x);
        distribute(ev, g, {}, {b}, true, 0);
        emit(std::move(ev));
        for (Vertex x : drained) doomed_[x] = true;
        ctx->xset.clear();
        return;
    }

    // No anchor in the bag: color the smallest matched outsider, paying with
    // its pair and the private escort. If the loan survives, the escort set
    // shifts by the freed partner and the climb continues.
    for (Vertex cand : rest) {
        auto ts = tuples_of_[cand];
        if (ts.empty()) continue;
        bool all_pairs = true;
        for (int t : ts)
            if (!tuples_[t].is_pair()) all_pairs = false;
        if (!all_pairs) continue;
        Vertex partner =
            tuples_[ts[0]].members[0] == cand ? tuples_[ts[0]].members[1] : tuples_[ts[0]].members[0];
        TraceEvent ev;
        ev.kind = "surgery";
        ev.rule = "B3.debt.step";
        ev.node = u;
        ev.vertex = cand;
        Gather g;
        gather_vertex(g, cand);
        for (int t : std::vector<int>(ts)) gather_tuple(g, t, ev);
        gather_vertex(g, xstar);
        distribute(ev, g, {cand}, {}, true, 0);
        emit(std::move(ev));
        if (ledger_.debt == 0) {
            ctx->xset.clear();
        } else {
            std::vector<Vertex> next;
            for (Vertex x : X)
                if (x != xstar) next.push_back(x);
            next.push_back(partner);
            std::sort(next.begin(), next.end());
            ctx->xset = next;
        }
        return;
    }
    // No viable pivot; the final branch audit will flag the leftover debt.
}

}  // namespace ct

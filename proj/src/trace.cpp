#include "ct/trace.hpp"

#include <sstream>

#include <json.hpp>

namespace ct {

namespace {

using json = nlohmann::ordered_json;

json event_to_json(const TraceEvent& e) {
    json j;
    j["i"] = e.index;
    j["kind"] = e.kind;
    if (!e.rule.empty()) j["rule"] = e.rule;
    if (e.node >= 0) j["node"] = e.node;
    if (e.vertex >= 0) j["vertex"] = e.vertex;
    if (!e.colored.empty()) j["colored"] = e.colored;
    if (!e.removed.empty()) j["removed"] = e.removed;
    if (!e.tuples_consumed.empty()) j["tuples_consumed"] = e.tuples_consumed;
    if (!e.tuples_created.empty()) {
        json arr = json::array();
        for (const auto& t : e.tuples_created) {
            json tj;
            tj["id"] = t.id;
            tj["members"] = t.members;
            tj["funds"] = t.funds;
            if (t.lineage >= 0) tj["lineage"] = t.lineage;
            arr.push_back(tj);
        }
        j["tuples_created"] = arr;
    }
    if (!e.moves.empty()) {
        json arr = json::array();
        for (const auto& m : e.moves) {
            json mj;
            mj["from"] = m.from;
            mj["to"] = m.to;
            mj["amount"] = m.amount;
            arr.push_back(mj);
        }
        j["moves"] = arr;
    }
    long long saved = 0;
    for (const auto& m : e.moves)
        if (m.to == "saved") saved += m.amount;
    if (saved > 0) j["saved"] = saved;
    if (!e.detail.empty()) j["detail"] = e.detail;
    if (!e.vertex_list.empty()) j["vertices"] = e.vertex_list;
    if (!e.bags.empty()) {
        json arr = json::array();
        for (const auto& [parent, bag] : e.bags) {
            json bj;
            bj["parent"] = parent;
            bj["bag"] = bag;
            arr.push_back(bj);
        }
        j["bags"] = arr;
    }
    if (e.a != 0) j["a"] = e.a;
    if (e.b != 0) j["b"] = e.b;
    return j;
}

TraceEvent event_from_json(const json& j) {
    TraceEvent e;
    e.index = j.at("i").get<int>();
    e.kind = j.at("kind").get<std::string>();
    if (j.contains("rule")) e.rule = j["rule"].get<std::string>();
    if (j.contains("node")) e.node = j["node"].get<int>();
    if (j.contains("vertex")) e.vertex = j["vertex"].get<Vertex>();
    if (j.contains("colored")) e.colored = j["colored"].get<std::vector<Vertex>>();
    if (j.contains("removed")) e.removed = j["removed"].get<std::vector<Vertex>>();
    if (j.contains("tuples_consumed"))
        e.tuples_consumed = j["tuples_consumed"].get<std::vector<int>>();
    if (j.contains("tuples_created"))
        for (const auto& tj : j["tuples_created"]) {
            TupleBirth t;
            t.id = tj.at("id").get<int>();
            t.members = tj.at("members").get<std::vector<Vertex>>();
            t.funds = tj.at("funds").get<int>();
            if (tj.contains("lineage")) t.lineage = tj["lineage"].get<int>();
            e.tuples_created.push_back(std::move(t));
        }
    if (j.contains("moves"))
        for (const auto& mj : j["moves"])
            e.moves.push_back(Move{mj.at("from").get<std::string>(), mj.at("to").get<std::string>(),
                                   mj.at("amount").get<int>()});
    if (j.contains("detail")) e.detail = j["detail"].get<std::string>();
    if (j.contains("vertices")) e.vertex_list = j["vertices"].get<std::vector<Vertex>>();
    if (j.contains("bags"))
        for (const auto& bj : j["bags"])
            e.bags.emplace_back(bj.at("parent").get<int>(), bj.at("bag").get<std::vector<Vertex>>());
    if (j.contains("a")) e.a = j["a"].get<long long>();
    if (j.contains("b")) e.b = j["b"].get<long long>();
    return e;
}

}  // namespace

std::string trace_to_jsonl(const Trace& trace) {
    std::ostringstream out;
    for (const auto& e : trace.events) out << event_to_json(e).dump() << "\n";
    return out.str();
}

Trace trace_from_jsonl(std::string_view text) {
    Trace trace;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        trace.events.push_back(event_from_json(json::parse(line)));
    }
    return trace;
}

}  // namespace ct

#ifndef CT_TRACE_HPP
#define CT_TRACE_HPP

#include <string>
#include <string_view>
#include <vector>

#include "ct/graph.hpp"

namespace ct {

/// One zloty movement. Locations: "v:<id>" vertex, "n:<id>" node,
/// "t:<id>" tuple, "paid", "saved", "debt", "ext" (funds leaving or
/// entering the accounted universe, used only by aux-graph grants).
struct Move {
    std::string from;
    std::string to;
    int amount = 0;
};

struct TupleBirth {
    int id = -1;
    std::vector<Vertex> members;
    int funds = 0;
    int lineage = -1;
};

/// Replayable event. Kinds:
///   component   — begin a component; carries local vertex list and t
///   decomposition — bags of the decomposition now being processed
///   rule        — one basic rule applied (rule = B1..B5, G1..G5, T1..T5)
///   surgery     — branch rule replacement (rule names the variant)
///   endgame     — terminal case wrap-up of the no-triangle driver
///   reduction   — graph or tree reduction step (no funds moved unless listed)
///   node_removed, branch_begin, branch_end, grant, revoke, final
struct TraceEvent {
    int index = -1;
    std::string kind;
    std::string rule;
    int node = -1;
    Vertex vertex = -1;
    std::vector<Vertex> colored;
    std::vector<Vertex> removed;
    std::vector<int> tuples_consumed;
    std::vector<TupleBirth> tuples_created;
    std::vector<Move> moves;
    std::string detail;
    std::vector<Vertex> vertex_list;         // component event
    std::vector<std::pair<int, std::vector<Vertex>>> bags;  // decomposition event: (parent, bag)
    long long a = 0, b = 0;                  // small numeric payload (kind-specific)
};

struct Trace {
    std::vector<TraceEvent> events;

    TraceEvent& push(TraceEvent e) {
        e.index = static_cast<int>(events.size());
        events.push_back(std::move(e));
        return events.back();
    }
};

/// JSON-lines serialization, one event per line, key order fixed so equal
/// traces serialize to identical bytes.
std::string trace_to_jsonl(const Trace& trace);
Trace trace_from_jsonl(std::string_view text);

}  // namespace ct

#endif

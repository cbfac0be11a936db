#include "fanfire/traversal.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>

#include "fanfire/errors.hpp"

namespace fanfire {

namespace {

// Registry and fresh-list payloads stay sorted by serialization, so the
// same set of states always yields the same token bytes.
bool sorted_contains(const json& arr, const std::string& dump) {
    auto it = std::lower_bound(
        arr.begin(), arr.end(), dump,
        [](const json& a, const std::string& d) { return a.dump() < d; });
    return it != arr.end() && it->dump() == dump;
}

void sorted_insert(json& arr, const json& v, const std::string& dump) {
    auto it = std::lower_bound(
        arr.begin(), arr.end(), dump,
        [](const json& a, const std::string& d) { return a.dump() < d; });
    arr.insert(it, v);
}

}  // namespace

PetriNet build_traversal_net() {
    PetriNet net;
    net.places = {
        {"frontier", "state", false},
        {"candidates", "batch", false},
        {"registry", "registry", false},
        {"spawn", "fresh", false},
    };
    net.transitions = {
        {"expand", {{"frontier", "s"}}, {{"candidates", "b"}}, "", "expand"},
        {"dedup",
         {{"candidates", "b"}, {"registry", "r"}},
         {{"registry", "r2"}, {"spawn", "f"}},
         "",
         "dedup"},
        {"split",
         {{"spawn", "f"}},
         {{"frontier", "s"}, {"spawn", "rest"}},
         "nonempty",
         "split"},
        {"drop", {{"spawn", "f"}}, {}, "empty", ""},
    };
    validate_or_throw(net);
    return net;
}

Registry make_traversal_registry(const ExpansionOracle& oracle) {
    Registry reg;
    reg.guards["nonempty"] = [](const BoundTokens& in) {
        return !in.at("f").payload.empty();
    };
    reg.guards["empty"] = [](const BoundTokens& in) {
        return in.at("f").payload.empty();
    };

    reg.actions["expand"] = [&oracle](const BoundTokens& in, const ActionContext& ctx) {
        const json& state = in.at("s").payload;
        json successors = json::array();
        for (json& t : oracle.expand(state, ctx)) successors.push_back(std::move(t));
        json batch{{"source", state}, {"successors", std::move(successors)}};
        return std::map<std::string, TokenValue>{{"b", {"batch", std::move(batch)}}};
    };

    reg.actions["dedup"] = [&oracle](const BoundTokens& in, const ActionContext&) {
        const json& batch = in.at("b").payload;
        json registry = in.at("r").payload;
        json& known = registry.at("known");
        json& pending = registry.at("pending");

        const std::string source = batch.at("source").dump();
        auto waiting = std::find_if(
            pending.begin(), pending.end(),
            [&](const json& s) { return s.dump() == source; });
        if (waiting == pending.end())
            throw Error("internal: expanded a state the registry was not waiting on");
        pending.erase(waiting);

        json fresh = json::array();
        for (const json& raw : batch.at("successors")) {
            json canon = oracle.canonicalize(raw);
            const std::string dump = canon.dump();
            if (sorted_contains(known, dump)) continue;
            sorted_insert(known, canon, dump);
            sorted_insert(pending, canon, dump);
            fresh.push_back(std::move(canon));
        }
        return std::map<std::string, TokenValue>{
            {"r2", {"registry", std::move(registry)}},
            {"f", {"fresh", std::move(fresh)}}};
    };

    reg.actions["split"] = [](const BoundTokens& in, const ActionContext&) {
        const json& list = in.at("f").payload;
        json rest = json::array();
        for (std::size_t i = 1; i < list.size(); ++i) rest.push_back(list[i]);
        return std::map<std::string, TokenValue>{
            {"s", {"state", list.at(0)}}, {"rest", {"fresh", std::move(rest)}}};
    };

    return reg;
}

Marking make_traversal_marking(const ExpansionOracle& oracle) {
    const json origin = oracle.canonicalize(oracle.start());
    Marking m;
    m.add("frontier", {"state", origin});
    m.add("registry",
          {"registry", json{{"known", json::array({origin})},
                            {"pending", json::array({origin})}}});
    return m;
}

TraversalOutcome run_traversal(const ExpansionOracle& oracle, const RunConfig& cfg) {
    const PetriNet net = build_traversal_net();
    const Registry reg = make_traversal_registry(oracle);

    TraversalOutcome out{{}, run(net, make_traversal_marking(oracle), reg, cfg)};

    const Marking& fm = out.run.final_marking;
    for (const char* p : {"frontier", "candidates", "spawn"})
        if (fm.tokens.count(p))
            throw Error(std::string("traversal finished with tokens left on ") + p);
    auto reg_tokens = fm.tokens.find("registry");
    if (reg_tokens == fm.tokens.end() || reg_tokens->second.size() != 1)
        throw Error("traversal finished without exactly one registry token");

    const json& registry = reg_tokens->second.begin()->second.payload;
    if (!registry.at("pending").empty())
        throw Error("traversal finished with unexpanded states");
    for (const json& s : registry.at("known"))
        out.states.emplace_back(s, oracle.orbit_size(s));
    std::sort(out.states.begin(), out.states.end(),
              [](const auto& a, const auto& b) { return a.first.dump() < b.first.dump(); });
    return out;
}

std::vector<std::pair<json, std::uint64_t>> traversal_reference(
    const ExpansionOracle& oracle) {
    const json origin = oracle.canonicalize(oracle.start());
    std::set<std::string> seen = {origin.dump()};
    std::deque<json> work = {origin};
    std::vector<std::pair<json, std::uint64_t>> out;
    out.emplace_back(origin, oracle.orbit_size(origin));
    while (!work.empty()) {
        const json state = std::move(work.front());
        work.pop_front();
        for (const json& raw : oracle.expand(state, ActionContext{})) {
            json canon = oracle.canonicalize(raw);
            if (!seen.insert(canon.dump()).second) continue;
            out.emplace_back(canon, oracle.orbit_size(canon));
            work.push_back(std::move(canon));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first.dump() < b.first.dump(); });
    return out;
}

ojson traversal_states_to_json(
    const std::vector<std::pair<json, std::uint64_t>>& states) {
    ojson out = ojson::array();
    for (const auto& [state, size] : states) {
        ojson row;
        row["state"] = state;
        row["orbit_size"] = size;
        out.push_back(std::move(row));
    }
    return out;
}

ChamberOracle::ChamberOracle(Arrangement arr, std::optional<Group> group)
    : arr_(std::move(arr)), group_(std::move(group)) {
    if (group_ && group_->m != arr_.normals.size())
        throw TypeError("group index count does not match arrangement");
}

json ChamberOracle::start() const {
    const std::size_t m = arr_.normals.size();
    SignVector s(m, 0);
    std::optional<Chamber> found;
    auto walk = [&](auto&& self, std::size_t i) -> void {
        if (found) return;
        if (i == m) {
            if (auto w = feasible(arr_, s)) found = Chamber{s, std::move(*w)};
            return;
        }
        s[i] = 1;
        self(self, i + 1);
        if (found) return;
        s[i] = -1;
        self(self, i + 1);
        s[i] = 0;
    };
    walk(walk, 0);
    if (!found) throw Error("arrangement has no chambers");
    return chamber_to_json(*found);
}

std::vector<json> ChamberOracle::expand(const json& state, const ActionContext&) const {
    const Chamber c = chamber_from_json(state);
    std::vector<json> out;
    for (const auto& [wall, nb] : neighbors(arr_, c)) out.push_back(chamber_to_json(nb));
    return out;
}

json ChamberOracle::canonicalize(const json& state) const {
    if (!group_) return state;
    const Chamber c = chamber_from_json(state);
    SignVector rep = canonical(*group_, c.signs);
    if (rep == c.signs) return state;
    auto w = feasible(arr_, rep);
    if (!w) throw Error("internal: canonical representative names an empty cell");
    return chamber_to_json(Chamber{std::move(rep), std::move(*w)});
}

std::uint64_t ChamberOracle::orbit_size(const json& state) const {
    if (!group_) return 1;
    const SignVector signs =
        sign_vector_from_string(state.at("signs").get<std::string>());
    return fanfire::orbit_size(*group_, signs);
}

}  // namespace fanfire

#include "fanfire/petri.hpp"

#include <algorithm>

#include "fanfire/json_util.hpp"

namespace fanfire {

const Place* PetriNet::find_place(const std::string& id) const {
  for (const auto& p : places)
    if (p.id == id) return &p;
  return nullptr;
}

const Transition* PetriNet::find_transition(const std::string& id) const {
  for (const auto& t : transitions)
    if (t.id == id) return &t;
  return nullptr;
}

const GuardFn& Registry::guard(const std::string& name) const {
  auto it = guards.find(name);
  if (it == guards.end()) throw Error("unknown guard '" + name + "'");
  return it->second;
}

const ActionFn& Registry::action(const std::string& name) const {
  auto it = actions.find(name);
  if (it == actions.end()) throw Error("unknown action '" + name + "'");
  return it->second;
}

TokenId Marking::add(const std::string& place, TokenValue value) {
  TokenId id = next_id++;
  tokens[place].emplace(id, std::move(value));
  return id;
}

void Marking::add_with_id(const std::string& place, TokenId id, TokenValue value) {
  tokens[place].emplace(id, std::move(value));
  if (id >= next_id) next_id = id + 1;
}

bool Marking::erase(const std::string& place, TokenId id) {
  auto it = tokens.find(place);
  if (it == tokens.end()) return false;
  if (it->second.erase(id) == 0) return false;
  if (it->second.empty()) tokens.erase(it);
  return true;
}

const TokenValue* Marking::find(const std::string& place, TokenId id) const {
  auto it = tokens.find(place);
  if (it == tokens.end()) return nullptr;
  auto jt = it->second.find(id);
  return jt == it->second.end() ? nullptr : &jt->second;
}

bool Marking::id_in_use(TokenId id) const {
  for (const auto& [place, toks] : tokens)
    if (toks.count(id)) return true;
  return false;
}

std::size_t Marking::size() const {
  std::size_t n = 0;
  for (const auto& [place, toks] : tokens) n += toks.size();
  return n;
}

std::vector<std::string> validate(const PetriNet& net) {
  std::vector<std::string> errs;
  std::set<std::string> place_ids, transition_ids;
  for (const auto& p : net.places)
    if (!place_ids.insert(p.id).second) errs.push_back("duplicate place '" + p.id + "'");
  for (const auto& t : net.transitions) {
    if (!transition_ids.insert(t.id).second)
      errs.push_back("duplicate transition '" + t.id + "'");
    if (t.inputs.empty())
      errs.push_back("transition '" + t.id + "' has no input arcs");
    std::set<std::string> vars;
    auto check_arc = [&](const Arc& a, bool input) {
      const Place* p = net.find_place(a.place);
      if (!p) {
        errs.push_back("transition '" + t.id + "' references unknown place '" + a.place + "'");
      } else if (input && p->terminal) {
        errs.push_back("terminal place '" + p->id + "' has an outgoing arc to transition '" +
                       t.id + "'");
      }
      if (!vars.insert(a.var).second)
        errs.push_back("transition '" + t.id + "' reuses variable '" + a.var + "'");
    };
    for (const auto& a : t.inputs) check_arc(a, true);
    for (const auto& a : t.outputs) check_arc(a, false);
    if (!t.outputs.empty() && t.action.empty())
      errs.push_back("transition '" + t.id + "' has outputs but no action");
  }
  return errs;
}

void validate_or_throw(const PetriNet& net) {
  auto errs = validate(net);
  if (errs.empty()) return;
  std::string msg = "invalid net:";
  for (const auto& e : errs) msg += " " + e + ";";
  msg.pop_back();
  throw Error(msg);
}

EnabledResult enumerate_bindings(const PetriNet& net, const Marking& m, const Registry& reg,
                                 const std::set<TokenId>* at_least_one_of) {
  EnabledResult out;
  for (const auto& t : net.transitions) {
    // Collect, per input arc, the tokens currently on the arc's place.
    std::vector<const std::map<TokenId, TokenValue>*> pools;
    pools.reserve(t.inputs.size());
    bool possible = true;
    for (const auto& a : t.inputs) {
      auto it = m.tokens.find(a.place);
      if (it == m.tokens.end()) {
        possible = false;
        break;
      }
      pools.push_back(&it->second);
    }
    if (!possible || t.inputs.empty()) continue;

    const GuardFn* g = t.guard.empty() ? nullptr : &reg.guard(t.guard);

    std::vector<TokenId> chosen(t.inputs.size());
    auto emit = [&]() {
      if (at_least_one_of) {
        bool hit = false;
        for (TokenId id : chosen) hit = hit || at_least_one_of->count(id);
        if (!hit) return;
      }
      Binding b{t.id, chosen};
      if (g) {
        BoundTokens bound;
        for (std::size_t k = 0; k < chosen.size(); ++k)
          bound.emplace(t.inputs[k].var, pools[k]->at(chosen[k]));
        try {
          if (!(*g)(bound)) return;
        } catch (const std::exception& e) {
          out.faulted.push_back({std::move(b), e.what()});
          return;
        }
      }
      out.bindings.push_back(std::move(b));
    };
    // Odometer over the pools; the same token may back two arcs' places
    // but can only be bound once per firing.
    auto rec = [&](auto&& self, std::size_t k) -> void {
      if (k == pools.size()) {
        emit();
        return;
      }
      for (const auto& [id, value] : *pools[k]) {
        bool taken = false;
        for (std::size_t j = 0; j < k; ++j) taken = taken || chosen[j] == id;
        if (taken) continue;
        chosen[k] = id;
        self(self, k + 1);
      }
    };
    rec(rec, 0);
  }
  return out;
}

EnabledResult enabled(const PetriNet& net, const Marking& m, const Registry& reg) {
  return enumerate_bindings(net, m, reg);
}

bool is_quiescent(const PetriNet& net, const Marking& m, const Registry& reg) {
  EnabledResult en = enabled(net, m, reg);
  if (!en.faulted.empty()) {
    const auto& f = en.faulted.front();
    throw FaultedTransitionError(f.binding.transition, "guard failed: " + f.message);
  }
  return en.bindings.empty();
}

Marking fire(const PetriNet& net, const Marking& m, const Binding& b,
             const std::map<std::string, TokenValue>& produced) {
  const Transition* t = net.find_transition(b.transition);
  if (!t) throw Error("unknown transition '" + b.transition + "'");
  if (b.tokens.size() != t->inputs.size())
    throw Error("binding for '" + t->id + "' has " + std::to_string(b.tokens.size()) +
                " tokens for " + std::to_string(t->inputs.size()) + " input arcs");
  for (std::size_t k = 0; k < b.tokens.size(); ++k) {
    for (std::size_t j = 0; j < k; ++j)
      if (b.tokens[j] == b.tokens[k])
        throw StaleBindingError("token " + std::to_string(b.tokens[k]) +
                                " bound twice in transition '" + t->id + "'");
    if (!m.find(t->inputs[k].place, b.tokens[k]))
      throw StaleBindingError("token " + std::to_string(b.tokens[k]) + " not on place '" +
                              t->inputs[k].place + "'");
  }
  std::set<std::string> outvars;
  for (const auto& a : t->outputs) outvars.insert(a.var);
  for (const auto& [var, value] : produced)
    if (!outvars.count(var))
      throw TypeError("unexpected output variable '" + var + "' for transition '" + t->id + "'");
  for (const auto& a : t->outputs) {
    auto it = produced.find(a.var);
    if (it == produced.end())
      throw TypeError("missing output variable '" + a.var + "' for transition '" + t->id + "'");
    const Place* p = net.find_place(a.place);
    if (!p) throw Error("transition '" + t->id + "' references unknown place '" + a.place + "'");
    if (it->second.tag != p->accepts)
      throw TypeError("token tagged '" + it->second.tag + "' cannot land on place '" + p->id +
                      "' accepting '" + p->accepts + "'");
  }
  Marking next = m;
  for (std::size_t k = 0; k < b.tokens.size(); ++k) next.erase(t->inputs[k].place, b.tokens[k]);
  for (const auto& a : t->outputs) next.add(a.place, produced.at(a.var));
  return next;
}

namespace {

using jsonu::need;
using jsonu::need_string;
using jsonu::opt_string;

std::vector<Arc> parse_arcs(const json& j, const char* key, const std::string& ctx) {
  const json& v = jsonu::need_array(j, key, ctx);
  std::vector<Arc> arcs;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
      throw ParseError(ctx + ": each arc must be a [place, variable] pair of strings");
    arcs.push_back({e[0].get<std::string>(), e[1].get<std::string>()});
  }
  return arcs;
}

}  // namespace

ojson net_to_json(const PetriNet& net) {
  ojson j;
  j["places"] = ojson::array();
  for (const auto& p : net.places)
    j["places"].push_back({{"id", p.id}, {"accepts", p.accepts}, {"terminal", p.terminal}});
  j["transitions"] = ojson::array();
  for (const auto& t : net.transitions) {
    ojson jt;
    jt["id"] = t.id;
    jt["inputs"] = ojson::array();
    for (const auto& a : t.inputs) jt["inputs"].push_back({a.place, a.var});
    jt["outputs"] = ojson::array();
    for (const auto& a : t.outputs) jt["outputs"].push_back({a.place, a.var});
    jt["guard"] = t.guard;
    jt["action"] = t.action;
    j["transitions"].push_back(std::move(jt));
  }
  return j;
}

PetriNet net_from_json(const json& j) {
  PetriNet net;
  const json& places = need(j, "places", "net");
  if (!places.is_array()) throw ParseError("net: 'places' must be an array");
  for (const auto& jp : places) {
    Place p;
    p.id = need_string(jp, "id", "place");
    p.accepts = need_string(jp, "accepts", "place '" + p.id + "'");
    if (jp.contains("terminal")) {
      if (!jp.at("terminal").is_boolean())
        throw ParseError("place '" + p.id + "': 'terminal' must be a boolean");
      p.terminal = jp.at("terminal").get<bool>();
    }
    net.places.push_back(std::move(p));
  }
  const json& transitions = need(j, "transitions", "net");
  if (!transitions.is_array()) throw ParseError("net: 'transitions' must be an array");
  for (const auto& jt : transitions) {
    Transition t;
    t.id = need_string(jt, "id", "transition");
    const std::string ctx = "transition '" + t.id + "'";
    t.inputs = parse_arcs(jt, "inputs", ctx);
    t.outputs = parse_arcs(jt, "outputs", ctx);
    t.guard = opt_string(jt, "guard", ctx);
    t.action = opt_string(jt, "action", ctx);
    net.transitions.push_back(std::move(t));
  }
  return net;
}

ojson marking_to_json(const Marking& m) {
  ojson j = ojson::object();
  for (const auto& [place, toks] : m.tokens) {
    ojson arr = ojson::array();
    for (const auto& [id, value] : toks)
      arr.push_back({{"id", id}, {"tag", value.tag}, {"payload", ojson(value.payload)}});
    j[place] = std::move(arr);
  }
  return j;
}

Marking marking_from_json(const PetriNet& net, const json& j) {
  if (!j.is_object()) throw ParseError("marking: expected an object keyed by place id");
  Marking m;
  for (const auto& [place, arr] : j.items()) {
    const Place* p = net.find_place(place);
    if (!p) throw ParseError("marking: unknown place '" + place + "'");
    if (!arr.is_array()) throw ParseError("marking: place '" + place + "' must hold an array");
    for (const auto& jt : arr) {
      if (!need(jt, "id", "token").is_number_unsigned())
        throw ParseError("marking: token id on '" + place + "' must be a nonnegative integer");
      TokenId id = jt.at("id").get<TokenId>();
      TokenValue v{need_string(jt, "tag", "token"), need(jt, "payload", "token")};
      if (v.tag != p->accepts)
        throw ParseError("marking: token tagged '" + v.tag + "' on place '" + place +
                         "' accepting '" + p->accepts + "'");
      if (m.id_in_use(id))
        throw ParseError("marking: token id " + std::to_string(id) + " used twice");
      m.add_with_id(place, id, std::move(v));
    }
  }
  return m;
}

}  // namespace fanfire

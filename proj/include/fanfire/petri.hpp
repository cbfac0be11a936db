#pragma once

#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fanfire/errors.hpp"

namespace fanfire {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

using TokenId = std::uint64_t;

// A typed, immutable piece of data sitting on a place.
struct TokenValue {
  std::string tag;
  json payload;

  bool operator==(const TokenValue& o) const {
    return tag == o.tag && payload == o.payload;
  }
};

struct Place {
  std::string id;
  std::string accepts;
  bool terminal = false;
};

// One arc: the place it touches and the variable the token is bound to
// inside guards and actions.
struct Arc {
  std::string place;
  std::string var;
};

struct Transition {
  std::string id;
  std::vector<Arc> inputs;
  std::vector<Arc> outputs;
  std::string guard;   // registry name; "" means always true
  std::string action;  // registry name; "" is only valid with no outputs
};

struct PetriNet {
  std::vector<Place> places;
  std::vector<Transition> transitions;

  const Place* find_place(const std::string& id) const;
  const Transition* find_transition(const std::string& id) const;
};

// What a guard or action sees: the consumed tokens keyed by variable name.
using BoundTokens = std::map<std::string, TokenValue>;

// Handed to actions so long-running ones can poll for cancellation and
// bail out early; outputs of a cancelled run are discarded either way.
struct ActionContext {
  const std::atomic<bool>* cancel = nullptr;

  bool cancel_requested() const {
    return cancel && cancel->load(std::memory_order_relaxed);
  }
};

using GuardFn = std::function<bool(const BoundTokens&)>;
using ActionFn =
    std::function<std::map<std::string, TokenValue>(const BoundTokens&, const ActionContext&)>;

// Guards and actions are referenced by name from transitions and resolved
// here when a run starts.  Nets stay pure data: serializable, replayable.
struct Registry {
  std::map<std::string, GuardFn> guards;
  std::map<std::string, ActionFn> actions;

  const GuardFn& guard(const std::string& name) const;
  const ActionFn& action(const std::string& name) const;
};

struct Marking {
  // place id -> tokens on it, keyed by runtime token id.  Places holding
  // no tokens are absent, so operator== is structural.
  std::map<std::string, std::map<TokenId, TokenValue>> tokens;
  // Next fresh id — bookkeeping, deliberately not part of equality.
  TokenId next_id = 1;

  bool operator==(const Marking& o) const { return tokens == o.tokens; }

  TokenId add(const std::string& place, TokenValue value);
  // Insert under a caller-chosen id (replay); keeps next_id ahead of it.
  void add_with_id(const std::string& place, TokenId id, TokenValue value);
  bool erase(const std::string& place, TokenId id);
  const TokenValue* find(const std::string& place, TokenId id) const;
  bool id_in_use(TokenId id) const;
  std::size_t size() const;
};

struct Binding {
  std::string transition;
  std::vector<TokenId> tokens;  // one per input arc, in arc order

  bool operator==(const Binding&) const = default;
};

struct FaultedBinding {
  Binding binding;
  std::string message;
};

struct EnabledResult {
  std::vector<Binding> bindings;
  std::vector<FaultedBinding> faulted;
};

// Structural checks; empty result means well-formed.
std::vector<std::string> validate(const PetriNet& net);
void validate_or_throw(const PetriNet& net);

// Every binding over the current marking, transitions in net order and
// tokens in ascending-id order, so enumeration order is reproducible.
// With `at_least_one_of`, only bindings touching at least one of those
// ids are produced — the incremental case after tokens were added.
// Bindings whose guard throws are reported in `faulted`, not dropped.
EnabledResult enumerate_bindings(const PetriNet& net, const Marking& m, const Registry& reg,
                                 const std::set<TokenId>* at_least_one_of = nullptr);

EnabledResult enabled(const PetriNet& net, const Marking& m, const Registry& reg);

// True iff no transition can fire.  A faulting guard is not quiescence;
// it propagates as FaultedTransitionError.
bool is_quiescent(const PetriNet& net, const Marking& m, const Registry& reg);

// Value-semantics single firing: returns the successor marking, leaving
// `m` untouched.  `produced` supplies one token value per output variable.
// Guards are not re-evaluated here: tokens are immutable, so a guard that
// held when the binding was found holds forever for those same tokens.
Marking fire(const PetriNet& net, const Marking& m, const Binding& b,
             const std::map<std::string, TokenValue>& produced);

ojson net_to_json(const PetriNet& net);
PetriNet net_from_json(const json& j);
ojson marking_to_json(const Marking& m);
Marking marking_from_json(const PetriNet& net, const json& j);

}  // namespace fanfire

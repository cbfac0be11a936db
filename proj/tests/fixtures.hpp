#pragma once

// Shared test nets.  The fork-join diamond is the smallest net with real
// parallelism: s forks one job into two, f and g run independently, j
// joins them into a single result on the sink.
//
//        .-> a -- f --> l --.
//  i -- s                    j --> out
//        '-> b -- g --> r --'

#include "fanfire/petri.hpp"

namespace fanfire::testing {

inline PetriNet make_fork_join_net() {
  PetriNet net;
  net.places = {
      {"i", "job"}, {"a", "job"}, {"b", "job"},
      {"l", "job"}, {"r", "job"}, {"out", "job"},
  };
  net.transitions = {
      {"s", {{"i", "x"}}, {{"a", "y"}, {"b", "z"}}, "", "fork"},
      {"f", {{"a", "x"}}, {{"l", "y"}}, "", "step"},
      {"g", {{"b", "x"}}, {{"r", "y"}}, "", "step"},
      {"j", {{"l", "x1"}, {"r", "x2"}}, {{"out", "y"}}, "", "join"},
  };
  return net;
}

inline Registry make_fork_join_registry() {
  Registry reg;
  reg.actions["fork"] = [](const BoundTokens& in, const ActionContext&) {
    return std::map<std::string, TokenValue>{{"y", in.at("x")}, {"z", in.at("x")}};
  };
  reg.actions["step"] = [](const BoundTokens& in, const ActionContext&) {
    return std::map<std::string, TokenValue>{{"y", in.at("x")}};
  };
  reg.actions["join"] = [](const BoundTokens& in, const ActionContext&) {
    return std::map<std::string, TokenValue>{{"y", in.at("x1")}};
  };
  return reg;
}

inline TokenValue job(json payload = json::object()) { return {"job", std::move(payload)}; }

}  // namespace fanfire::testing

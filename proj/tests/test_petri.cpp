#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fanfire/petri.hpp"
#include "fixtures.hpp"

using namespace fanfire;
using namespace fanfire::testing;

TEST_CASE("validate accepts the fork-join net") {
  CHECK(validate(make_fork_join_net()).empty());
}

TEST_CASE("validate accepts the empty net") {
  CHECK(validate(PetriNet{}).empty());
}

TEST_CASE("validate names a dangling place") {
  auto net = make_fork_join_net();
  net.transitions[1].outputs[0].place = "x";
  auto errs = validate(net);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].find("'x'") != std::string::npos);
}

TEST_CASE("validate rejects duplicate ids") {
  auto net = make_fork_join_net();
  net.places.push_back({"i", "job"});
  net.transitions.push_back(net.transitions[0]);
  auto errs = validate(net);
  CHECK(errs.size() == 2);
}

TEST_CASE("validate rejects an outgoing arc from a terminal place") {
  auto net = make_fork_join_net();
  net.places[3].terminal = true;  // l feeds j
  auto errs = validate(net);
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].find("terminal") != std::string::npos);
}

TEST_CASE("validate rejects reused variables and missing pieces") {
  auto net = make_fork_join_net();
  net.transitions[0].outputs[1].var = "y";
  CHECK(validate(net).size() == 1);

  net = make_fork_join_net();
  net.transitions.push_back({"src", {}, {{"i", "y"}}, "", "fork"});
  CHECK(validate(net).size() == 1);  // no input arcs

  net = make_fork_join_net();
  net.transitions[0].action = "";
  CHECK(validate(net).size() == 1);  // outputs but no action
}

TEST_CASE("enabled on the fork-join net") {
  auto net = make_fork_join_net();
  auto reg = make_fork_join_registry();

  Marking m;
  SUBCASE("empty marking enables nothing") {
    auto en = enabled(net, m, reg);
    CHECK(en.bindings.empty());
    CHECK(en.faulted.empty());
  }
  SUBCASE("one token on i enables exactly s") {
    auto id = m.add("i", job());
    auto en = enabled(net, m, reg);
    REQUIRE(en.bindings.size() == 1);
    CHECK(en.bindings[0].transition == "s");
    CHECK(en.bindings[0].tokens == std::vector<TokenId>{id});
  }
  SUBCASE("all token pair combinations appear for the join") {
    for (int k = 0; k < 2; ++k) m.add("l", job());
    for (int k = 0; k < 3; ++k) m.add("r", job());
    auto en = enabled(net, m, reg);
    CHECK(en.bindings.size() == 6);
    for (const auto& b : en.bindings) CHECK(b.transition == "j");
  }
}

TEST_CASE("enabled never binds one token to two arcs") {
  PetriNet net;
  net.places = {{"p", "job"}};
  net.transitions = {{"pair", {{"p", "x1"}, {"p", "x2"}}, {}, "", ""}};
  REQUIRE(validate(net).empty());
  Marking m;
  for (int k = 0; k < 3; ++k) m.add("p", job());
  auto en = enabled(net, m, Registry{});
  CHECK(en.bindings.size() == 6);  // ordered pairs of distinct tokens
  for (const auto& b : en.bindings) CHECK(b.tokens[0] != b.tokens[1]);
}

TEST_CASE("guards filter bindings and a throwing guard is reported") {
  PetriNet net;
  net.places = {{"p", "job"}};
  net.transitions = {{"t", {{"p", "x"}}, {}, "positive", ""}};
  Registry reg;
  reg.guards["positive"] = [](const BoundTokens& in) {
    return in.at("x").payload.at("v").get<int>() > 0;
  };

  Marking m;
  m.add("p", job({{"v", 3}}));
  m.add("p", job({{"v", -1}}));
  auto en = enabled(net, m, reg);
  CHECK(en.bindings.size() == 1);
  CHECK(en.faulted.empty());
  CHECK(!is_quiescent(net, m, reg));

  m.add("p", job());  // payload lacks "v": guard throws
  en = enabled(net, m, reg);
  CHECK(en.bindings.size() == 1);
  REQUIRE(en.faulted.size() == 1);
  CHECK(en.faulted[0].binding.transition == "t");
  CHECK_THROWS_AS(is_quiescent(net, m, reg), FaultedTransitionError);
}

TEST_CASE("fire moves tokens and leaves the input marking alone") {
  auto net = make_fork_join_net();
  auto reg = make_fork_join_registry();
  Marking m;
  auto id = m.add("i", job({{"n", 1}}));

  Marking after = fire(net, m, {"s", {id}}, {{"y", job({{"n", 1}})}, {"z", job({{"n", 1}})}});
  CHECK(m.size() == 1);  // value semantics
  CHECK(m.find("i", id) != nullptr);
  CHECK(after.size() == 2);
  CHECK(after.tokens.count("i") == 0);
  CHECK(after.tokens.at("a").size() == 1);
  CHECK(after.tokens.at("b").size() == 1);
}

TEST_CASE("fire joins two tokens into one on the sink") {
  auto net = make_fork_join_net();
  Marking m;
  auto l = m.add("l", job());
  auto r = m.add("r", job());
  Marking after = fire(net, m, {"j", {l, r}}, {{"y", job()}});
  CHECK(after.size() == 1);
  CHECK(after.tokens.at("out").size() == 1);
}

TEST_CASE("fire rejects a consumed token") {
  auto net = make_fork_join_net();
  Marking m;
  auto id = m.add("i", job());
  Marking after = fire(net, m, {"s", {id}}, {{"y", job()}, {"z", job()}});
  CHECK_THROWS_AS(fire(net, after, {"s", {id}}, {{"y", job()}, {"z", job()}}),
                  StaleBindingError);
}

TEST_CASE("fire rejects a token bound to two arcs") {
  auto net = make_fork_join_net();
  Marking m;
  auto l = m.add("l", job());
  CHECK_THROWS_AS(fire(net, m, {"j", {l, l}}, {{"y", job()}}), StaleBindingError);
}

TEST_CASE("fire type-checks its outputs") {
  auto net = make_fork_join_net();
  Marking m;
  auto id = m.add("i", job());
  CHECK_THROWS_AS(fire(net, m, {"s", {id}}, {{"y", {"spam", json{}}}, {"z", job()}}),
                  TypeError);
  CHECK_THROWS_AS(fire(net, m, {"s", {id}}, {{"y", job()}}), TypeError);  // z missing
  CHECK_THROWS_AS(fire(net, m, {"s", {id}}, {{"y", job()}, {"z", job()}, {"w", job()}}),
                  TypeError);
}

TEST_CASE("firing conserves tokens arc for arc") {
  auto net = make_fork_join_net();
  Marking m;
  auto id = m.add("i", job());
  Marking after = fire(net, m, {"s", {id}}, {{"y", job()}, {"z", job()}});
  // one consumed, two produced
  CHECK(after.size() == m.size() - 1 + 2);
}

TEST_CASE("quiescence matches the enabled set") {
  auto net = make_fork_join_net();
  auto reg = make_fork_join_registry();
  Marking m;
  CHECK(is_quiescent(net, m, reg));
  auto id = m.add("i", job());
  CHECK(!is_quiescent(net, m, reg));
  m.erase("i", id);
  m.add("out", job());  // sink has no outgoing transitions
  CHECK(is_quiescent(net, m, reg));
}

TEST_CASE("net round-trips through json") {
  auto net = make_fork_join_net();
  net.places[5].terminal = true;
  auto j = net_to_json(net);
  auto back = net_from_json(json::parse(j.dump()));
  CHECK(net_to_json(back) == j);
  CHECK(back.places[5].terminal);
  CHECK(back.transitions[0].action == "fork");
}

TEST_CASE("net parsing reports broken input") {
  CHECK_THROWS_AS(net_from_json(json::parse("{}")), ParseError);
  CHECK_THROWS_AS(net_from_json(json::parse(R"({"places": 3, "transitions": []})")), ParseError);
  CHECK_THROWS_AS(net_from_json(json::parse(
                      R"({"places": [], "transitions": [{"id": "t", "inputs": [["p"]], "outputs": []}]})")),
                  ParseError);
  CHECK_THROWS_AS(net_from_json(json::parse(
                      R"({"places": [{"id": "p"}], "transitions": []})")),
                  ParseError);
}

TEST_CASE("marking round-trips through json") {
  auto net = make_fork_join_net();
  Marking m;
  m.add("i", job({{"n", 7}}));
  m.add("l", job({{"deep", {{"x", 1}}}}));
  auto j = marking_to_json(m);
  Marking back = marking_from_json(net, json::parse(j.dump()));
  CHECK(back == m);
  CHECK(back.next_id == m.next_id);
}

TEST_CASE("marking parsing rejects bad tokens") {
  auto net = make_fork_join_net();
  CHECK_THROWS_AS(marking_from_json(net, json::parse(R"({"nope": []})")), ParseError);
  CHECK_THROWS_AS(
      marking_from_json(net, json::parse(R"({"i": [{"id": 1, "tag": "spam", "payload": {}}]})")),
      ParseError);
  CHECK_THROWS_AS(
      marking_from_json(
          net, json::parse(
                   R"({"i": [{"id": 1, "tag": "job", "payload": {}}], "l": [{"id": 1, "tag": "job", "payload": {}}]})")),
      ParseError);
}

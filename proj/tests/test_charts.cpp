#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <initializer_list>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fanfire/charts.hpp"
#include "fanfire/errors.hpp"

using namespace fanfire;

namespace {

PolyXY xy(std::initializer_list<std::array<int, 3>> monomials) {
  json arr = json::array();
  for (const auto& m : monomials)
    arr.push_back({{"coeff", std::to_string(m[0])}, {"xexp", m[1]}, {"yexp", m[2]}});
  return polyxy_from_json(arr);
}

// f(x, y) = y^2 - g(x), the graph-squared family where the singular locus
// is exactly the repeated roots of g.
PolyXY hyperelliptic(const PolyQ& g) {
  PolyXY f;
  f.c = {Rat(-1) * g, PolyQ{}, poly_const(Rat(1))};
  return f;
}

// A depth-one tree whose leaf verdicts are spelled out up front.
class ScriptedOracle : public ChartOracle {
 public:
  explicit ScriptedOracle(std::map<std::string, json> leaves)
      : leaves_(std::move(leaves)) {}

  Chart root() const { return {"", 1, json()}; }
  bool codim_reached(const Chart& c) const override { return c.level == 0; }
  Descent descend(const Chart& c, const ActionContext&) const override {
    Descent d;
    for (const auto& [id, v] : leaves_) d.children.push_back({id, 0, json()});
    return d;
  }
  json jacobian(const Chart& c, const ActionContext&) const override {
    return leaves_.at(c.id);
  }

 private:
  std::map<std::string, json> leaves_;
};

// An oracle that spots the problem while still descending.
class EagerWitnessOracle : public ChartOracle {
 public:
  bool codim_reached(const Chart& c) const override { return c.level == 0; }
  Descent descend(const Chart& c, const ActionContext&) const override {
    Descent d;
    d.witness = json{{"seen", "during descent"}};
    return d;
  }
  json jacobian(const Chart&, const ActionContext&) const override {
    return json{{"kind", "smooth"}};
  }
};

std::vector<std::string> all_leaf_paths(unsigned branching, unsigned depth) {
  std::vector<std::string> paths = {""};
  for (unsigned lvl = 0; lvl < depth; ++lvl) {
    std::vector<std::string> next;
    for (const std::string& p : paths)
      for (unsigned k = 0; k < branching; ++k)
        next.push_back(p.empty() ? std::to_string(k) : p + "." + std::to_string(k));
    paths = std::move(next);
  }
  return paths;
}

}  // namespace

TEST_CASE("chart tokens round trip through json") {
  const Chart c{"0.2.1", 3, json{{"x", "1/2"}}};
  CHECK(chart_from_json(chart_to_json(c)) == c);

  const Chart bare{"", 0, json()};
  const json j = chart_to_json(bare);
  CHECK(j.at("payload").is_null());
  CHECK(chart_from_json(j) == bare);

  CHECK_THROWS_AS(chart_from_json(json::array()), ParseError);
  CHECK_THROWS_AS(chart_from_json(json{{"level", 1}}), ParseError);
  CHECK_THROWS_AS(chart_from_json(json{{"id", "0"}, {"level", -1}}), ParseError);
}

TEST_CASE("the smoothness net is well formed") {
  const PetriNet net = build_smoothness_net();
  CHECK(validate(net).empty());
  CHECK(net.places.size() == 3);
  REQUIRE(net.find_place("o") != nullptr);
  CHECK(net.find_place("o")->terminal);
  CHECK_FALSE(net.find_place("i")->terminal);
  CHECK_FALSE(net.find_place("classified")->terminal);
  CHECK(net.transitions.size() == 6);
  CHECK(net.find_transition("Jac") != nullptr);
  CHECK(net.find_transition("desc") != nullptr);
}

TEST_CASE("no roots means nothing to check") {
  const SyntheticOracle oracle(1, 2, 2, 0.0, {"0.0"});
  const SmoothnessReport rep = run_smoothness(oracle, {}, {.workers = 2, .seed = 1});
  CHECK(rep.verdict == Verdict::smooth);
  CHECK(rep.charts_total == 0);
  CHECK(rep.charts_evaluated == 0);
  CHECK(rep.run.final_marking.tokens.empty());
}

TEST_CASE("synthetic trees reject malformed shapes") {
  CHECK_THROWS_AS(SyntheticOracle(0, 0, 2, 1.0, {}), TypeError);
  CHECK_THROWS_AS(SyntheticOracle(0, 9, 2, 1.0, {}), TypeError);
  CHECK_THROWS_AS(SyntheticOracle(0, 2, 13, 1.0, {}), TypeError);
  CHECK_THROWS_AS(SyntheticOracle(0, 2, 2, -1.0, {}), TypeError);
  CHECK_THROWS_AS(SyntheticOracle(0, 2, 2, 20000.0, {}), TypeError);
  CHECK_THROWS_AS(SyntheticOracle(0, 2, 2, 1.0, {"2.0"}), TypeError);
  CHECK_THROWS_AS(SyntheticOracle(0, 2, 2, 1.0, {"0"}), TypeError);
  CHECK_THROWS_AS(SyntheticOracle(0, 2, 2, 1.0, {"0.0.0"}), TypeError);
  CHECK_THROWS_AS(SyntheticOracle(0, 2, 2, 1.0, {"0..1"}), TypeError);

  CHECK_NOTHROW(SyntheticOracle(0, 3, 0, 0.0, {""}));
  CHECK(SyntheticOracle(0, 1, 3, 0.0, {}).total_charts() == 4);
  CHECK(SyntheticOracle(0, 2, 3, 0.0, {}).total_charts() == 15);
  CHECK(SyntheticOracle(0, 3, 0, 0.0, {}).total_charts() == 1);
  CHECK(SyntheticOracle(0, 4, 6, 0.0, {}).total_charts() == 5461);
}

TEST_CASE("synthetic specs parse from json") {
  const json spec{{"seed", 7},
                  {"branching", 2},
                  {"depth", 3},
                  {"cost_ms", 2.5},
                  {"singular_leaves", json::array({"0.1.0"})}};
  const SyntheticOracle oracle = synthetic_from_json(spec);
  CHECK(oracle.total_charts() == 15);
  CHECK(oracle.root().level == 3);

  json missing = spec;
  missing.erase("cost_ms");
  CHECK_THROWS_AS(synthetic_from_json(missing), ParseError);

  json bad_leaf = spec;
  bad_leaf["singular_leaves"] = json::array({3});
  CHECK_THROWS_AS(synthetic_from_json(bad_leaf), ParseError);

  json stray_leaf = spec;
  stray_leaf["singular_leaves"] = json::array({"9.9.9"});
  CHECK_THROWS_AS(synthetic_from_json(stray_leaf), ParseError);

  json huge = spec;
  huge["branching"] = 1000000;
  CHECK_THROWS_AS(synthetic_from_json(huge), ParseError);

  CHECK_THROWS_AS(synthetic_from_json(json::array()), ParseError);
}

TEST_CASE("a tree with no singular leaves comes back smooth") {
  const SyntheticOracle oracle(11, 2, 2, 0.0, {});
  for (int workers : {1, 4}) {
    CAPTURE(workers);
    const SmoothnessReport rep =
        run_smoothness(oracle, {oracle.root()}, {.workers = workers, .seed = 3});
    CHECK(rep.verdict == Verdict::smooth);
    CHECK(rep.witness.is_null());
    CHECK(rep.charts_total == 7);
    CHECK(rep.charts_evaluated == 7);
    CHECK_FALSE(rep.run.cancelled);
    CHECK(rep.run.final_marking.tokens.empty());

    const ojson out = report_to_json(rep);
    CHECK(out.at("verdict") == "smooth");
    CHECK_FALSE(out.contains("witness"));
  }
}

TEST_CASE("a singular leaf cancels the walk") {
  const SyntheticOracle oracle(5, 2, 2, 0.0, {"1.0"});
  for (int workers : {1, 4}) {
    CAPTURE(workers);
    const SmoothnessReport rep =
        run_smoothness(oracle, {oracle.root()}, {.workers = workers, .seed = 9});
    CHECK(rep.verdict == Verdict::singular);
    CHECK(rep.run.cancelled);
    CHECK(rep.run.terminal_place == "o");
    CHECK(rep.witness == json{{"leaf", "1.0"}});
    CHECK(rep.charts_evaluated <= rep.charts_total);

    const ojson out = report_to_json(rep);
    CHECK(out.at("verdict") == "singular");
    CHECK(out.at("witness") == json{{"leaf", "1.0"}});
  }
}

TEST_CASE("every single-leaf placement is found") {
  for (auto [branching, depth] : {std::pair<unsigned, unsigned>{2, 3},
                                  {1, 3},
                                  {2, 0}}) {
    for (const std::string& leaf : all_leaf_paths(branching, depth)) {
      CAPTURE(branching);
      CAPTURE(depth);
      CAPTURE(leaf);
      const SyntheticOracle oracle(1, branching, depth, 0.0, {leaf});
      const SmoothnessReport rep =
          run_smoothness(oracle, {oracle.root()}, {.workers = 2, .seed = 4});
      CHECK(rep.verdict == Verdict::singular);
      CHECK(rep.witness == json{{"leaf", leaf}});
    }
    // The same tree with no singular leaf planted must close clean.
    const SyntheticOracle clean(1, branching, depth, 0.0, {});
    const SmoothnessReport rep =
        run_smoothness(clean, {clean.root()}, {.workers = 2, .seed = 4});
    CHECK(rep.verdict == Verdict::smooth);
    CHECK(rep.charts_evaluated == clean.total_charts());
    CHECK(rep.charts_total == clean.total_charts());
  }
}

TEST_CASE("multiple singular leaves race to the kill switch") {
  const SyntheticOracle oracle(2, 2, 2, 0.0, {"0.0", "1.1"});
  const SmoothnessReport rep =
      run_smoothness(oracle, {oracle.root()}, {.workers = 4, .seed = 8});
  CHECK(rep.verdict == Verdict::singular);
  const std::string leaf = rep.witness.at("leaf").get<std::string>();
  CHECK((leaf == "0.0" || leaf == "1.1"));
  REQUIRE(rep.run.final_marking.tokens.count("o") == 1);
  CHECK(rep.run.final_marking.tokens.at("o").size() == 1);
}

TEST_CASE("a witness found during descent also cancels") {
  const EagerWitnessOracle oracle;
  const SmoothnessReport rep =
      run_smoothness(oracle, {Chart{"", 2, json()}}, {.workers = 2, .seed = 3});
  CHECK(rep.verdict == Verdict::singular);
  CHECK(rep.run.cancelled);
  CHECK(rep.witness == json{{"seen", "during descent"}});
}

TEST_CASE("indeterminate leaves park and the verdict says so") {
  const ScriptedOracle oracle({
      {"a", json{{"kind", "indeterminate"}, {"reason", "left as an exercise"}}},
      {"b", json{{"kind", "smooth"}}},
      {"c", json{{"kind", "smooth"}}},
  });
  const SmoothnessReport rep =
      run_smoothness(oracle, {oracle.root()}, {.workers = 2, .seed = 1});
  CHECK(rep.verdict == Verdict::indeterminate);
  CHECK(rep.witness.is_null());
  CHECK(rep.doubts == std::vector<std::string>{"left as an exercise"});
  CHECK_FALSE(rep.run.cancelled);
  CHECK(rep.charts_total == 4);
  CHECK(rep.charts_evaluated == 4);
  REQUIRE(rep.run.final_marking.tokens.count("classified") == 1);
  CHECK(rep.run.final_marking.tokens.at("classified").size() == 1);

  const ojson out = report_to_json(rep);
  CHECK(out.at("verdict") == "indeterminate");
  CHECK_FALSE(out.contains("witness"));
}

TEST_CASE("a singular leaf beats parked doubt") {
  const ScriptedOracle oracle({
      {"a", json{{"kind", "indeterminate"}, {"reason", "murky"}}},
      {"b", json{{"kind", "singular"}, {"witness", json{{"x", "7"}}}}},
  });
  for (int workers : {1, 4}) {
    CAPTURE(workers);
    const SmoothnessReport rep =
        run_smoothness(oracle, {oracle.root()}, {.workers = workers, .seed = 2});
    CHECK(rep.verdict == Verdict::singular);
    CHECK(rep.witness == json{{"x", "7"}});
  }
}

TEST_CASE("malformed verdicts fault the transition") {
  const ScriptedOracle bogus({{"a", json{{"kind", "bogus"}}}});
  CHECK_THROWS_AS(run_smoothness(bogus, {bogus.root()}, {.workers = 1, .seed = 1}),
                  FaultedTransitionError);

  const ScriptedOracle witnessless({{"a", json{{"kind", "singular"}}}});
  CHECK_THROWS_AS(
      run_smoothness(witnessless, {witnessless.root()}, {.workers = 1, .seed = 1}),
      FaultedTransitionError);
}

TEST_CASE("chart accounting is exact under failure injection") {
  const SyntheticOracle oracle(3, 2, 3, 0.0, {});
  for (std::uint64_t seed : {1, 2, 3}) {
    CAPTURE(seed);
    const SmoothnessReport rep = run_smoothness(
        oracle, {oracle.root()},
        {.workers = 4, .seed = seed, .failure_injection = 0.3, .max_retries = 25});
    CHECK(rep.verdict == Verdict::smooth);
    CHECK(rep.charts_evaluated == 15);
    CHECK(rep.charts_total == 15);
    CHECK(rep.run.stats.per_transition.at("Jac") == 8);
  }
}

TEST_CASE("identical verdicts across worker counts") {
  const SyntheticOracle dirty(6, 3, 2, 0.2, {"2.1"});
  const SyntheticOracle clean(6, 3, 2, 0.2, {});
  for (int workers : {1, 2, 8}) {
    CAPTURE(workers);
    const SmoothnessReport rep =
        run_smoothness(dirty, {dirty.root()}, {.workers = workers, .seed = 7});
    CHECK(rep.verdict == Verdict::singular);
    CHECK(rep.witness == json{{"leaf", "2.1"}});

    const SmoothnessReport ok =
        run_smoothness(clean, {clean.root()}, {.workers = workers, .seed = 7});
    CHECK(ok.verdict == Verdict::smooth);
    CHECK(ok.charts_evaluated == 13);
    CHECK(ok.charts_total == 13);
  }
}

TEST_CASE("smoothness runs replay to their final marking") {
  const PetriNet net = build_smoothness_net();

  const SyntheticOracle dirty(4, 2, 2, 0.0, {"0.1"});
  const Registry dirty_reg = make_smoothness_registry(dirty);
  const Marking dirty_start = make_smoothness_marking({dirty.root()});
  const RunResult cut = run(net, dirty_start, dirty_reg,
                            {.workers = 2, .seed = 5, .trace_enabled = true});
  CHECK(cut.cancelled);
  CHECK(replay(net, dirty_start, dirty_reg, cut.trace) == cut.final_marking);

  const SyntheticOracle clean(4, 2, 2, 0.0, {});
  const Registry clean_reg = make_smoothness_registry(clean);
  const Marking clean_start = make_smoothness_marking({clean.root()});
  const RunResult full = run(net, clean_start, clean_reg,
                             {.workers = 2, .seed = 5, .trace_enabled = true});
  CHECK_FALSE(full.cancelled);
  CHECK(replay(net, clean_start, clean_reg, full.trace) == full.final_marking);
}

TEST_CASE("deterministic runs produce byte-identical traces") {
  const PetriNet net = build_smoothness_net();
  const SyntheticOracle oracle(9, 2, 2, 0.1, {"1.1"});
  const Registry reg = make_smoothness_registry(oracle);
  const Marking start = make_smoothness_marking({oracle.root()});
  const RunConfig cfg{.workers = 1, .seed = 13, .trace_enabled = true};
  const RunResult a = run_deterministic(net, start, reg, cfg);
  const RunResult b = run_deterministic(net, start, reg, cfg);
  CHECK(trace_to_jsonl(a.trace) == trace_to_jsonl(b.trace));
  CHECK(a.final_marking == b.final_marking);
}

TEST_CASE("the circle is smooth") {
  const PlaneCurveOracle oracle(xy({{1, 2, 0}, {1, 0, 2}, {-1, 0, 0}}));
  CHECK(oracle.shear() == 0);
  CHECK(oracle.candidates().empty());
  CHECK(oracle.residual_degree() == 0);

  const SmoothnessReport rep =
      run_smoothness(oracle, {oracle.root()}, {.workers = 1, .seed = 1});
  CHECK(rep.verdict == Verdict::smooth);
  CHECK(rep.charts_total == 1);
  CHECK(rep.charts_evaluated == 1);
}

TEST_CASE("the cusp is singular at the origin") {
  const PlaneCurveOracle oracle(xy({{1, 0, 2}, {-1, 3, 0}}));
  REQUIRE(oracle.candidates() == std::vector<Rat>{Rat(0)});
  CHECK(oracle.residual_degree() == 0);

  for (int workers : {1, 4}) {
    CAPTURE(workers);
    const SmoothnessReport rep =
        run_smoothness(oracle, {oracle.root()}, {.workers = workers, .seed = 2});
    CHECK(rep.verdict == Verdict::singular);
    CHECK(rep.witness.at("x") == "0");
    CHECK(rep.witness.at("shear") == "0");
    CHECK(rep.witness.at("gcd_y") == json::array({"0", "1"}));
  }
}

TEST_CASE("a nodal cubic is singular") {
  const PlaneCurveOracle oracle(xy({{1, 0, 2}, {-1, 3, 0}, {-1, 2, 0}}));
  const SmoothnessReport rep =
      run_smoothness(oracle, {oracle.root()}, {.workers = 1, .seed = 3});
  CHECK(rep.verdict == Verdict::singular);
  CHECK(rep.witness.at("x") == "0");
}

TEST_CASE("a smooth elliptic curve closes clean") {
  const PlaneCurveOracle oracle(xy({{1, 0, 2}, {-1, 3, 0}, {1, 1, 0}}));
  CHECK(oracle.candidates().empty());
  const SmoothnessReport rep =
      run_smoothness(oracle, {oracle.root()}, {.workers = 1, .seed = 4});
  CHECK(rep.verdict == Verdict::smooth);
}

TEST_CASE("crossing lines need a shear first") {
  const PlaneCurveOracle oracle(xy({{1, 1, 1}}));
  CHECK(oracle.shear() == 1);
  const SmoothnessReport rep =
      run_smoothness(oracle, {oracle.root()}, {.workers = 1, .seed = 5});
  CHECK(rep.verdict == Verdict::singular);
  CHECK(rep.witness.at("x") == "0");
  CHECK(rep.witness.at("shear") == "1");
  CHECK(rep.witness.at("gcd_y") == json::array({"0", "1"}));
}

TEST_CASE("irrational singular points are reported honestly") {
  // (y - x^2 + 2)(y + x^2 - 2): singular exactly where x^2 = 2.
  const PlaneCurveOracle oracle(
      xy({{1, 0, 2}, {-1, 4, 0}, {4, 2, 0}, {-4, 0, 0}}));
  CHECK(oracle.candidates().empty());
  CHECK(oracle.residual_degree() == 4);

  const SmoothnessReport rep =
      run_smoothness(oracle, {oracle.root()}, {.workers = 1, .seed = 6});
  CHECK(rep.verdict == Verdict::indeterminate);
  REQUIRE(rep.doubts.size() == 1);
  CHECK(rep.doubts[0].find("degree-4") != std::string::npos);
  CHECK(report_to_json(rep).at("verdict") == "indeterminate");
}

TEST_CASE("degenerate curves are rejected") {
  CHECK_THROWS_AS(PlaneCurveOracle(xy({{1, 0, 2}, {-2, 1, 1}, {1, 2, 0}})),
                  ParseError);  // (y - x)^2
  CHECK_THROWS_AS(PlaneCurveOracle(xy({{1, 2, 0}})), ParseError);  // x^2
  CHECK_THROWS_AS(PlaneCurveOracle(xy({})), ParseError);
  CHECK_THROWS_AS(PlaneCurveOracle(xy({{5, 0, 0}})), ParseError);
}

TEST_CASE("lines and graphs are smooth") {
  const PlaneCurveOracle line(xy({{1, 1, 0}}));
  CHECK(line.shear() == 1);
  CHECK(run_smoothness(line, {line.root()}, {.workers = 1, .seed = 7}).verdict ==
        Verdict::smooth);

  const PlaneCurveOracle parabola(xy({{1, 0, 1}, {-1, 2, 0}}));
  CHECK(parabola.shear() == 0);
  CHECK(run_smoothness(parabola, {parabola.root()}, {.workers = 1, .seed = 7})
            .verdict == Verdict::smooth);
}

TEST_CASE("graph curves match the direct derivative test") {
  std::mt19937_64 rng(20260822);
  for (int trial = 0; trial < 20; ++trial) {
    CAPTURE(trial);
    // Build g with known rational roots so every candidate resolves.
    PolyQ g = poly_const(Rat(1 + long(rng() % 3)));
    const int factors = 1 + int(rng() % 3);
    for (int i = 0; i < factors; ++i) {
      const long root = long(rng() % 7) - 3;
      const int mult = 1 + int(rng() % 2);
      for (int e = 0; e < mult; ++e)
        g = g * poly({Rat(-root), Rat(1)});
    }

    const bool expect_singular = degree(gcd_monic(g, derivative(g))) >= 1;
    const PlaneCurveOracle oracle(hyperelliptic(g));
    CHECK(oracle.residual_degree() == 0);
    const SmoothnessReport rep =
        run_smoothness(oracle, {oracle.root()}, {.workers = 1, .seed = 8});
    CHECK(rep.verdict ==
          (expect_singular ? Verdict::singular : Verdict::smooth));
    if (expect_singular) {
      // The witness must name a repeated root of g.
      const Rat a = rat_from_string(rep.witness.at("x").get<std::string>());
      CHECK(eval(g, a) == 0);
      CHECK(eval(derivative(g), a) == 0);
    }
  }
}

TEST_CASE("the report serializes in a fixed field order") {
  const SyntheticOracle oracle(1, 2, 1, 0.0, {"1"});
  const SmoothnessReport rep =
      run_smoothness(oracle, {oracle.root()}, {.workers = 1, .seed = 1});
  const ojson out = report_to_json(rep);
  std::vector<std::string> keys;
  for (auto it = out.begin(); it != out.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"verdict", "witness", "charts_evaluated",
                                         "charts_total", "wall_ms"});
}

#include "fanfire/charts.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "fanfire/busy.hpp"
#include "fanfire/errors.hpp"
#include "fanfire/hash.hpp"
#include "fanfire/json_util.hpp"

namespace fanfire {

json chart_to_json(const Chart& c) {
    return json{{"id", c.id}, {"level", c.level}, {"payload", c.payload}};
}

Chart chart_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("chart: expected an object");
    Chart c;
    c.id = jsonu::need_string(j, "id", "chart");
    c.level = jsonu::need_unsigned(j, "level", "chart");
    c.payload = j.contains("payload") ? j.at("payload") : json();
    return c;
}

// Tokens on classified are tagged by the key they carry next to "chart":
// "children" (descent output), "witness" (singularity found), "smooth"
// (clean leaf), or "doubt" (indeterminate; no transition consumes these).

PetriNet build_smoothness_net() {
    PetriNet net;
    net.places = {
        {"i", "chart", false},
        {"classified", "classified", false},
        {"o", "verdict", true},
    };
    net.transitions = {
        {"desc", {{"i", "c"}}, {{"classified", "v"}}, "interior", "desc"},
        {"Jac", {{"i", "c"}}, {{"classified", "v"}}, "at_codim", "jac"},
        {"sing", {{"classified", "v"}}, {{"o", "w"}}, "is_singular", "sing"},
        {"sm", {{"classified", "v"}}, {}, "is_smooth", ""},
        {"respawn",
         {{"classified", "v"}},
         {{"i", "c"}, {"classified", "rest"}},
         "has_children",
         "respawn"},
        {"drop", {{"classified", "v"}}, {}, "children_exhausted", ""},
    };
    validate_or_throw(net);
    return net;
}

Registry make_smoothness_registry(const ChartOracle& oracle) {
    Registry reg;
    reg.guards["interior"] = [&oracle](const BoundTokens& in) {
        return !oracle.codim_reached(chart_from_json(in.at("c").payload));
    };
    reg.guards["at_codim"] = [&oracle](const BoundTokens& in) {
        return oracle.codim_reached(chart_from_json(in.at("c").payload));
    };
    reg.guards["is_singular"] = [](const BoundTokens& in) {
        return in.at("v").payload.contains("witness");
    };
    reg.guards["is_smooth"] = [](const BoundTokens& in) {
        return in.at("v").payload.contains("smooth");
    };
    reg.guards["has_children"] = [](const BoundTokens& in) {
        const json& p = in.at("v").payload;
        return p.contains("children") && !p.at("children").empty();
    };
    reg.guards["children_exhausted"] = [](const BoundTokens& in) {
        const json& p = in.at("v").payload;
        return p.contains("children") && p.at("children").empty();
    };

    reg.actions["desc"] = [&oracle](const BoundTokens& in, const ActionContext& ctx) {
        const Chart c = chart_from_json(in.at("c").payload);
        const Descent d = oracle.descend(c, ctx);
        json out;
        if (!d.witness.is_null()) {
            out = json{{"chart", in.at("c").payload}, {"witness", d.witness}};
        } else {
            json kids = json::array();
            for (const Chart& child : d.children) kids.push_back(chart_to_json(child));
            out = json{{"chart", in.at("c").payload}, {"children", std::move(kids)}};
        }
        return std::map<std::string, TokenValue>{{"v", {"classified", std::move(out)}}};
    };

    reg.actions["jac"] = [&oracle](const BoundTokens& in, const ActionContext& ctx) {
        const Chart c = chart_from_json(in.at("c").payload);
        const json verdict = oracle.jacobian(c, ctx);
        const std::string kind = jsonu::need_string(verdict, "kind", "leaf verdict");
        json out;
        if (kind == "singular") {
            if (!verdict.contains("witness"))
                throw Error("a singular leaf verdict must carry a witness");
            out = json{{"chart", in.at("c").payload}, {"witness", verdict.at("witness")}};
        } else if (kind == "smooth") {
            out = json{{"chart", in.at("c").payload}, {"smooth", true}};
        } else if (kind == "indeterminate") {
            out = json{{"chart", in.at("c").payload},
                       {"doubt", jsonu::opt_string(verdict, "reason", "leaf verdict")}};
        } else {
            throw Error("leaf verdict kind '" + kind + "' is not recognized");
        }
        return std::map<std::string, TokenValue>{{"v", {"classified", std::move(out)}}};
    };

    reg.actions["sing"] = [](const BoundTokens& in, const ActionContext&) {
        return std::map<std::string, TokenValue>{{"w", {"verdict", in.at("v").payload}}};
    };

    reg.actions["respawn"] = [](const BoundTokens& in, const ActionContext&) {
        const json& p = in.at("v").payload;
        const json& list = p.at("children");
        json rest = json::array();
        for (std::size_t i = 1; i < list.size(); ++i) rest.push_back(list[i]);
        return std::map<std::string, TokenValue>{
            {"c", {"chart", list.at(0)}},
            {"rest",
             {"classified", json{{"chart", p.at("chart")}, {"children", std::move(rest)}}}}};
    };

    return reg;
}

Marking make_smoothness_marking(const std::vector<Chart>& roots) {
    Marking m;
    for (const Chart& root : roots) m.add("i", {"chart", chart_to_json(root)});
    return m;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::smooth: return "smooth";
        case Verdict::singular: return "singular";
        case Verdict::indeterminate: return "indeterminate";
    }
    throw Error("internal: verdict out of range");
}

SmoothnessReport run_smoothness(const ChartOracle& oracle, const std::vector<Chart>& roots,
                                const RunConfig& cfg) {
    const PetriNet net = build_smoothness_net();
    const Registry reg = make_smoothness_registry(oracle);

    SmoothnessReport rep;
    rep.run = run(net, make_smoothness_marking(roots), reg, cfg);
    rep.wall_ms = rep.run.stats.wall_ms;

    const auto& per = rep.run.stats.per_transition;
    auto fired = [&per](const char* t) -> std::uint64_t {
        auto it = per.find(t);
        return it == per.end() ? 0 : it->second;
    };
    // A chart is evaluated when it leaves i; it exists once placed as a
    // root or peeled off a child list by a respawn firing.
    rep.charts_evaluated = fired("desc") + fired("Jac");
    rep.charts_total = roots.size() + fired("respawn");

    const Marking& fm = rep.run.final_marking;
    if (rep.run.cancelled) {
        auto o = fm.tokens.find("o");
        if (o == fm.tokens.end() || o->second.size() != 1)
            throw Error("internal: cancelled run is missing its terminal token");
        rep.verdict = Verdict::singular;
        rep.witness = o->second.begin()->second.payload.at("witness");
        return rep;
    }

    // Quiescent: i must have drained (the desc/Jac guards partition charts)
    // and anything still on classified can only be parked doubt — every
    // other tag keeps some transition enabled.
    if (fm.tokens.count("i"))
        throw Error("smoothness run went quiescent with charts left on i");
    if (rep.charts_evaluated != rep.charts_total)
        throw Error("internal: chart accounting drifted");

    auto parked = fm.tokens.find("classified");
    if (parked != fm.tokens.end()) {
        for (const auto& [id, tok] : parked->second) {
            if (!tok.payload.contains("doubt"))
                throw Error("internal: a decided chart was left unconsumed");
            rep.doubts.push_back(tok.payload.at("doubt").get<std::string>());
        }
        std::sort(rep.doubts.begin(), rep.doubts.end());
        rep.verdict = Verdict::indeterminate;
    } else {
        rep.verdict = Verdict::smooth;
    }
    return rep;
}

ojson report_to_json(const SmoothnessReport& rep) {
    ojson out;
    out["verdict"] = verdict_name(rep.verdict);
    if (!rep.witness.is_null()) out["witness"] = rep.witness;
    out["charts_evaluated"] = rep.charts_evaluated;
    out["charts_total"] = rep.charts_total;
    out["wall_ms"] = rep.wall_ms;
    return out;
}

namespace {

constexpr unsigned kMaxBranching = 8;
constexpr unsigned kMaxTreeDepth = 12;
constexpr double kMaxCostMs = 10000.0;

// Leaves live at full depth: exactly `depth` single-digit components, each
// below the branching factor.  Depth zero means the root is the only leaf.
bool valid_leaf_path(const std::string& id, unsigned branching, unsigned depth) {
    if (depth == 0) return id.empty();
    unsigned seen = 0;
    std::size_t pos = 0;
    while (true) {
        const std::size_t dot = id.find('.', pos);
        const std::size_t len = (dot == std::string::npos ? id.size() : dot) - pos;
        if (len != 1) return false;
        const char ch = id[pos];
        if (ch < '0' || ch >= char('0' + int(branching))) return false;
        ++seen;
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    return seen == depth;
}

}  // namespace

SyntheticOracle::SyntheticOracle(std::uint64_t seed, unsigned branching, unsigned depth,
                                 double cost_ms, std::set<std::string> singular_leaves)
    : seed_(seed),
      branching_(branching),
      depth_(depth),
      cost_ms_(cost_ms),
      singular_(std::move(singular_leaves)) {
    if (branching_ < 1 || branching_ > kMaxBranching)
        throw TypeError("synthetic tree branching must be between 1 and 8");
    if (depth_ > kMaxTreeDepth)
        throw TypeError("synthetic tree depth must be at most 12");
    if (!(cost_ms_ >= 0.0 && cost_ms_ <= kMaxCostMs))
        throw TypeError("synthetic chart cost must be between 0 and 10000 ms");
    for (const std::string& leaf : singular_)
        if (!valid_leaf_path(leaf, branching_, depth_))
            throw TypeError("'" + leaf + "' does not name a leaf of this tree");
}

Chart SyntheticOracle::root() const { return {"", depth_, json()}; }

bool SyntheticOracle::codim_reached(const Chart& c) const { return c.level == 0; }

double SyntheticOracle::scaled_cost(const std::string& id) const {
    const std::uint64_t h = HashStream(seed_).mix("cost").mix(id).digest();
    const double u = double(h >> 11) * 0x1.0p-53;  // [0, 1)
    return cost_ms_ * (0.5 + u);
}

Descent SyntheticOracle::descend(const Chart& c, const ActionContext& ctx) const {
    if (c.level == 0) throw Error("internal: descend on a leaf chart");
    busy_wait_ms(scaled_cost(c.id), ctx);
    Descent d;
    d.children.reserve(branching_);
    for (unsigned k = 0; k < branching_; ++k) {
        std::string id =
            c.id.empty() ? std::to_string(k) : c.id + "." + std::to_string(k);
        d.children.push_back({std::move(id), c.level - 1, json()});
    }
    return d;
}

json SyntheticOracle::jacobian(const Chart& c, const ActionContext& ctx) const {
    busy_wait_ms(scaled_cost(c.id), ctx);
    if (singular_.count(c.id))
        return json{{"kind", "singular"}, {"witness", json{{"leaf", c.id}}}};
    return json{{"kind", "smooth"}};
}

std::uint64_t SyntheticOracle::total_charts() const {
    std::uint64_t total = 0, layer = 1;
    for (unsigned lvl = 0; lvl <= depth_; ++lvl) {
        total += layer;
        layer *= branching_;
    }
    return total;
}

SyntheticOracle synthetic_from_json(const json& j) {
    const std::string ctx = "synthetic tree";
    if (!j.is_object()) throw ParseError(ctx + ": expected an object");
    const std::uint64_t seed = jsonu::need_unsigned(j, "seed", ctx);
    const std::uint64_t branching = jsonu::need_unsigned(j, "branching", ctx);
    const std::uint64_t depth = jsonu::need_unsigned(j, "depth", ctx);
    if (branching > 1000 || depth > 1000)
        throw ParseError(ctx + ": tree dimensions out of range");
    const double cost = jsonu::need_number(j, "cost_ms", ctx);
    std::set<std::string> leaves;
    for (const json& leaf : jsonu::need_array(j, "singular_leaves", ctx)) {
        if (!leaf.is_string())
            throw ParseError(ctx + ": singular leaves must be path strings");
        leaves.insert(leaf.get<std::string>());
    }
    try {
        return SyntheticOracle(seed, unsigned(branching), unsigned(depth), cost,
                               std::move(leaves));
    } catch (const TypeError& e) {
        throw ParseError(ctx + ": " + e.what());
    }
}

namespace {

// The top y-coefficient of the sheared curve is a nonzero polynomial in
// lambda of degree at most the total degree, which the exponent cap in
// turn bounds; the search below is exhaustive well past that.
constexpr unsigned kMaxShear = 64;

}  // namespace

PlaneCurveOracle::PlaneCurveOracle(PolyXY f) {
    if (is_zero(f))
        throw ParseError("curve: the zero polynomial does not define a curve");
    if (degree_y(f) == 0 && degree(f.c.at(0)) == 0)
        throw ParseError("curve: a nonzero constant does not define a curve");

    PolyXY g = f;
    unsigned lam = 0;
    while (!has_constant_lc_y(g)) {
        ++lam;
        if (lam > kMaxShear) throw Error("internal: shear search failed to terminate");
        g = shear_x(f, Rat(long(lam)));
    }
    lambda_ = Rat(long(lam));
    f_ = std::move(g);
    fx_ = derivative_x(f_);
    fy_ = derivative_y(f_);

    const PolyQ disc = resultant_y(f_, fy_);
    if (is_zero(disc))
        throw ParseError("curve: not squarefree, so every point of a repeated "
                         "component would be singular");
    const PolyQ locus = gcd_monic(resultant_y(f_, fx_), disc);
    if (degree(locus) >= 1) {
        RationalRoots rr = rational_roots(locus);
        candidates_ = std::move(rr.roots);
        residual_ = rr.residual_degree;
    }
}

Chart PlaneCurveOracle::root() const { return {"", 1, json()}; }

bool PlaneCurveOracle::codim_reached(const Chart& c) const { return c.level == 0; }

Descent PlaneCurveOracle::descend(const Chart& c, const ActionContext&) const {
    if (c.level != 1) throw Error("internal: the curve tree descends exactly once");
    Descent d;
    for (std::size_t k = 0; k < candidates_.size(); ++k)
        d.children.push_back({std::to_string(k), 0,
                              json{{"x", rat_to_string(candidates_[k])}}});
    if (residual_ > 0)
        d.children.push_back({"residual", 0, json{{"residual_degree", residual_}}});
    return d;
}

json PlaneCurveOracle::jacobian(const Chart& c, const ActionContext&) const {
    if (c.payload.contains("residual_degree")) {
        const int r = c.payload.at("residual_degree").get<int>();
        return json{{"kind", "indeterminate"},
                    {"reason", "a degree-" + std::to_string(r) +
                                   " factor of the candidate locus resists "
                                   "rational root extraction"}};
    }
    const Rat a = rat_from_string(c.payload.at("x").get<std::string>());
    const PolyQ g =
        gcd_monic(gcd_monic(at_x(f_, a), at_x(fx_, a)), at_x(fy_, a));
    if (degree(g) >= 1) {
        json coeffs = json::array();
        for (const Rat& q : g.c) coeffs.push_back(rat_to_string(q));
        return json{{"kind", "singular"},
                    {"witness", json{{"x", rat_to_string(a)},
                                     {"gcd_y", std::move(coeffs)},
                                     {"shear", rat_to_string(lambda_)}}}};
    }
    return json{{"kind", "smooth"}};
}

}  // namespace fanfire

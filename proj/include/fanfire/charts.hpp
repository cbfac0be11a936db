#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "fanfire/petri.hpp"
#include "fanfire/poly.hpp"
#include "fanfire/runtime.hpp"

namespace fanfire {

// A node of the search tree.  The id is the path from the root ("" at the
// root, "0.2.1" three levels down); level counts the descent steps still
// ahead, so 0 means the leaf test applies.
struct Chart {
    std::string id;
    std::uint64_t level = 0;
    json payload;

    friend bool operator==(const Chart&, const Chart&) = default;
};

json chart_to_json(const Chart& c);
Chart chart_from_json(const json& j);

// What descending into a chart produced: either the child charts (possibly
// none), or — when the oracle can already tell — a singularity witness,
// which wins over any children.
struct Descent {
    std::vector<Chart> children;
    json witness;
};

// Leaf classifications produced by jacobian:
//   {"kind": "smooth"}
//   {"kind": "singular", "witness": ...}
//   {"kind": "indeterminate", "reason": "..."}
class ChartOracle {
public:
    virtual ~ChartOracle() = default;

    virtual bool codim_reached(const Chart& c) const = 0;
    // Expand an interior chart; worker-side, must be pure.
    virtual Descent descend(const Chart& c, const ActionContext& ctx) const = 0;
    // Classify a leaf chart; worker-side, must be pure.
    virtual json jacobian(const Chart& c, const ActionContext& ctx) const = 0;
};

// The tree walk with a kill switch:
//
//   [i] --desc--> [classified] --respawn--> back onto i, one child per firing
//    |                | | \--drop (exhausted child lists)
//    '--Jac----------'  '--sm (smooth leaves, consumed)
//                       '--sing--> [o]   (terminal: cancels the run)
//
// desc fires while a chart is interior, Jac once codim is reached; both
// land tagged tokens on classified, where sing/sm/respawn/drop sort them
// out by tag.  Indeterminate classifications match no tag and stay
// parked, which is the engine-level shape of an indeterminate verdict.
PetriNet build_smoothness_net();
Registry make_smoothness_registry(const ChartOracle& oracle);
Marking make_smoothness_marking(const std::vector<Chart>& roots);

enum class Verdict { smooth, singular, indeterminate };
const char* verdict_name(Verdict v);

struct SmoothnessReport {
    Verdict verdict = Verdict::smooth;
    json witness;  // null unless singular
    std::vector<std::string> doubts;  // reasons, when indeterminate
    std::uint64_t charts_evaluated = 0;  // desc + Jac firings
    std::uint64_t charts_total = 0;      // roots + respawned children
    double wall_ms = 0.0;
    RunResult run;
};

// Runs the net over the given roots until a witness lands on o or the
// tree is exhausted.  No roots means nothing to check: smooth.
SmoothnessReport run_smoothness(const ChartOracle& oracle, const std::vector<Chart>& roots,
                                const RunConfig& cfg);
ojson report_to_json(const SmoothnessReport& rep);

// A complete b-ary tree of the given depth, every chart op busy-waiting
// around cost_ms (scaled per chart by a seeded hash into [0.5, 1.5)), with
// the listed leaf paths reporting singular.  Made for scheduling and
// speedup experiments where the work is fake but the timing is not.
class SyntheticOracle : public ChartOracle {
public:
    SyntheticOracle(std::uint64_t seed, unsigned branching, unsigned depth,
                    double cost_ms, std::set<std::string> singular_leaves);

    Chart root() const;
    bool codim_reached(const Chart& c) const override;
    Descent descend(const Chart& c, const ActionContext& ctx) const override;
    json jacobian(const Chart& c, const ActionContext& ctx) const override;

    std::uint64_t total_charts() const;

private:
    double scaled_cost(const std::string& id) const;

    std::uint64_t seed_;
    unsigned branching_;
    unsigned depth_;
    double cost_ms_;
    std::set<std::string> singular_;
};

// {"seed": 1, "branching": 4, "depth": 6, "cost_ms": 10, "singular_leaves": ["0.1.2.3.0.1"]}
SyntheticOracle synthetic_from_json(const json& j);

// Decides smoothness of the affine curve f(x, y) = 0 exactly over Q.  The
// curve is first sheared (x := x + lambda*y, smallest natural lambda) until
// its top y-coefficient is constant, and must be squarefree.  Candidate
// x-coordinates of singular points are the rational roots of
//
//   R = gcd( Res_y(f, df/dx), Res_y(f, df/dy) )
//
// and become one leaf chart each; a leaf is singular when the specialized
// gcd of f, df/dx, df/dy at its x-coordinate has positive degree, with the
// witness reported in sheared coordinates.  Any part of R that resists
// rational-root extraction becomes an indeterminate leaf: smoothness is
// never claimed past unresolved candidates.
class PlaneCurveOracle : public ChartOracle {
public:
    explicit PlaneCurveOracle(PolyXY f);

    Chart root() const;
    bool codim_reached(const Chart& c) const override;
    Descent descend(const Chart& c, const ActionContext& ctx) const override;
    json jacobian(const Chart& c, const ActionContext& ctx) const override;

    const Rat& shear() const { return lambda_; }
    const std::vector<Rat>& candidates() const { return candidates_; }
    int residual_degree() const { return residual_; }

private:
    PolyXY f_, fx_, fy_;  // sheared curve and its partials
    Rat lambda_;
    std::vector<Rat> candidates_;
    int residual_ = 0;
};

}  // namespace fanfire

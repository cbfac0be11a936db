#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "fanfire/arrangement.hpp"
#include "fanfire/petri.hpp"
#include "fanfire/runtime.hpp"
#include "fanfire/symmetry.hpp"

namespace fanfire {

// A breadth-first closure problem: expand states until nothing new turns up.
// States are JSON values; two states are the same state iff their
// serializations match, and dedup happens on canonical forms, so
// canonicalize() must be a projection (canonical input comes back unchanged,
// byte for byte).
class ExpansionOracle {
public:
    virtual ~ExpansionOracle() = default;

    virtual json start() const = 0;

    // Successors of a canonical state, in a deterministic order.  Runs on
    // worker threads; implementations must be pure.
    virtual std::vector<json> expand(const json& state, const ActionContext& ctx) const = 0;

    // Default: no symmetry, every state is its own canonical form.
    virtual json canonicalize(const json& state) const { return state; }

    // How many raw states the canonical one stands for.
    virtual std::uint64_t orbit_size(const json& state) const {
        (void)state;
        return 1;
    }
};

// The net that drives the closure:
//
//             .--------------------------------------.
//             v                                      |
//   [frontier] --expand--> [candidates] --dedup--> [spawn] --split--+--> frontier
//                               ^          |  ^       |             |
//                        [registry] <------'  '-drop--'             |
//                                                                   |
// expand calls the oracle off to the side; dedup owns the single registry
// token and filters the batch against the known set; split peels fresh
// states back onto the frontier one at a time; drop retires empty lists.
PetriNet build_traversal_net();

// Guards "nonempty"/"empty" and actions "expand"/"dedup"/"split"/"drop".
// The oracle is captured by reference and must outlive the run.
Registry make_traversal_registry(const ExpansionOracle& oracle);

// One state token on the frontier, one registry token already knowing it.
Marking make_traversal_marking(const ExpansionOracle& oracle);

struct TraversalOutcome {
    // (canonical state, orbit size), sorted by state serialization.
    std::vector<std::pair<json, std::uint64_t>> states;
    RunResult run;
};

TraversalOutcome run_traversal(const ExpansionOracle& oracle, const RunConfig& cfg);

// Plain sequential closure, no engine involved; the confluence yardstick.
std::vector<std::pair<json, std::uint64_t>> traversal_reference(
    const ExpansionOracle& oracle);

// [{"state": ..., "orbit_size": ...}, ...] in the result order.
ojson traversal_states_to_json(
    const std::vector<std::pair<json, std::uint64_t>>& states);

// Walks the chamber graph of an arrangement.  With a group, states are the
// lexicographically smallest sign vectors of their orbits; witnesses are
// recomputed for the representative so equal states serialize equally.
class ChamberOracle : public ExpansionOracle {
public:
    explicit ChamberOracle(Arrangement arr, std::optional<Group> group = std::nullopt);

    // The first nonempty cell trying '+' before '-' at every index, so an
    // arrangement with a nonempty all-plus chamber starts there.
    json start() const override;
    std::vector<json> expand(const json& state, const ActionContext& ctx) const override;
    json canonicalize(const json& state) const override;
    std::uint64_t orbit_size(const json& state) const override;

    const Arrangement& arrangement() const { return arr_; }

private:
    Arrangement arr_;
    std::optional<Group> group_;
};

}  // namespace fanfire

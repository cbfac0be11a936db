// fanfire: run the traversal and smoothness workflows from the command line.
//
// Exit codes are a stable contract:
//   0  success; for `smooth`, a smooth verdict
//   1  singular verdict
//   2  unreadable or malformed input (files, flags, environment)
//   3  symmetry validation failed against the arrangement
//   4  indeterminate verdict
//   5  trace corruption during replay
//  10  unexpected engine failure

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fanfire/arrangement.hpp"
#include "fanfire/charts.hpp"
#include "fanfire/errors.hpp"
#include "fanfire/petri.hpp"
#include "fanfire/runtime.hpp"
#include "fanfire/symmetry.hpp"
#include "fanfire/traversal.hpp"

namespace ff = fanfire;
using ff::json;

namespace {

struct CommonOpts {
    int workers = 0;  // 0: resolve from FANFIRE_WORKERS, then core count
    std::uint64_t seed = 0;
    std::string trace_path;
    double inject = 0.0;
    int max_retries = 10;
    std::string out_path;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--workers", c.workers,
                    "Worker threads (default: FANFIRE_WORKERS, then core count)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed,
                    "Engine seed, keying scheduling tie-breaks and failure injection");
    cmd->add_option("--trace", c.trace_path,
                    "Write the firing trace here (JSONL), plus <path>.net.json and "
                    "<path>.marking.json so `replay` can check it");
    cmd->add_option("--inject-failures", c.inject,
                    "Probability of an injected action failure per attempt")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--max-retries", c.max_retries,
                    "Retries per failing action before the run aborts")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", c.out_path, "Result file (default: stdout)");
}

int resolve_workers(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("FANFIRE_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1 || v > 4096)
            throw ff::ParseError(
                std::string("FANFIRE_WORKERS is not a positive worker count: '") + env + "'");
        return int(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

ff::RunConfig make_config(const CommonOpts& c) {
    return {.workers = resolve_workers(c.workers),
            .seed = c.seed,
            .trace_enabled = !c.trace_path.empty(),
            .failure_injection = c.inject,
            .max_retries = c.max_retries};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ff::ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ff::Error("cannot write '" + path + "'");
    out << text;
    out.flush();
    if (!out) throw ff::Error("short write to '" + path + "'");
}

void emit_result(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
}

json parse_json_file(const std::string& path) {
    json j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw ff::ParseError("'" + path + "' is not valid JSON");
    return j;
}

void emit_trace_bundle(const CommonOpts& c, const ff::PetriNet& net,
                       const ff::Marking& initial,
                       const std::vector<ff::FiringRecord>& trace) {
    if (c.trace_path.empty()) return;
    write_file(c.trace_path, ff::trace_to_jsonl(trace));
    write_file(c.trace_path + ".net.json", ff::net_to_json(net).dump(2) + "\n");
    write_file(c.trace_path + ".marking.json",
               ff::marking_to_json(initial).dump(2) + "\n");
}

// Replay re-checks guards but never re-runs actions, so the built-in
// guards can be evaluated structurally from the token payloads alone;
// no oracle state is needed.  Every net this tool emits is covered.
ff::Registry replay_guards() {
    auto single = [](const ff::BoundTokens& in) -> const ff::TokenValue& {
        if (in.size() != 1)
            throw ff::TypeError("built-in guard expects exactly one bound token");
        return in.begin()->second;
    };
    ff::Registry reg;
    reg.guards["nonempty"] = [single](const ff::BoundTokens& in) {
        return !single(in).payload.empty();
    };
    reg.guards["empty"] = [single](const ff::BoundTokens& in) {
        return single(in).payload.empty();
    };
    reg.guards["interior"] = [single](const ff::BoundTokens& in) {
        return ff::chart_from_json(single(in).payload).level != 0;
    };
    reg.guards["at_codim"] = [single](const ff::BoundTokens& in) {
        return ff::chart_from_json(single(in).payload).level == 0;
    };
    reg.guards["is_singular"] = [single](const ff::BoundTokens& in) {
        return single(in).payload.contains("witness");
    };
    reg.guards["is_smooth"] = [single](const ff::BoundTokens& in) {
        return single(in).payload.contains("smooth");
    };
    reg.guards["has_children"] = [single](const ff::BoundTokens& in) {
        const json& p = single(in).payload;
        return p.contains("children") && !p.at("children").empty();
    };
    reg.guards["children_exhausted"] = [single](const ff::BoundTokens& in) {
        const json& p = single(in).payload;
        return p.contains("children") && p.at("children").empty();
    };
    return reg;
}

int cmd_traverse(const std::string& arr_path, const std::string& group_path,
                 const CommonOpts& c) {
    const ff::Arrangement arr = ff::arrangement_from_json(parse_json_file(arr_path));
    std::optional<ff::Group> group;
    if (!group_path.empty()) {
        group = ff::group_from_json(parse_json_file(group_path));
        if (auto bad = ff::validate_symmetry(arr, *group, c.seed)) {
            std::cerr << "symmetry violation: generator " << bad->generator
                      << " maps sign vector " << ff::sign_vector_to_string(bad->s)
                      << " across the feasibility boundary\n";
            return 3;
        }
    }
    const ff::ChamberOracle oracle(arr, std::move(group));
    const ff::TraversalOutcome result = ff::run_traversal(oracle, make_config(c));
    emit_trace_bundle(c, ff::build_traversal_net(), ff::make_traversal_marking(oracle),
                      result.run.trace);
    emit_result(c.out_path, ff::traversal_states_to_json(result.states).dump(2) + "\n");
    return 0;
}

int cmd_smooth(const std::string& spec_path, const CommonOpts& c) {
    const json spec = parse_json_file(spec_path);
    std::unique_ptr<ff::ChartOracle> oracle;
    ff::Chart root;
    if (spec.is_array()) {
        // A list of monomials: the exact plane-curve oracle.
        try {
            auto curve = std::make_unique<ff::PlaneCurveOracle>(ff::polyxy_from_json(spec));
            root = curve->root();
            oracle = std::move(curve);
        } catch (const ff::IndeterminateError& e) {
            std::cerr << "indeterminate: " << e.what() << "\n";
            ff::ojson out;
            out["verdict"] = "indeterminate";
            out["charts_evaluated"] = 0;
            out["charts_total"] = 0;
            out["wall_ms"] = 0.0;
            emit_result(c.out_path, out.dump(2) + "\n");
            return 4;
        }
    } else {
        auto tree = std::make_unique<ff::SyntheticOracle>(ff::synthetic_from_json(spec));
        root = tree->root();
        oracle = std::move(tree);
    }

    const ff::SmoothnessReport rep = ff::run_smoothness(*oracle, {root}, make_config(c));
    emit_trace_bundle(c, ff::build_smoothness_net(), ff::make_smoothness_marking({root}),
                      rep.run.trace);
    for (const std::string& d : rep.doubts) std::cerr << "doubt: " << d << "\n";
    emit_result(c.out_path, ff::report_to_json(rep).dump(2) + "\n");
    switch (rep.verdict) {
        case ff::Verdict::smooth: return 0;
        case ff::Verdict::singular: return 1;
        case ff::Verdict::indeterminate: return 4;
    }
    return 10;
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2.0;
}

int cmd_bench(const std::string& workload_path, std::vector<int> workers, int reps,
              std::uint64_t seed, const std::string& out_path) {
    if (workers.empty()) workers = {1, resolve_workers(0)};
    std::sort(workers.begin(), workers.end());
    workers.erase(std::unique(workers.begin(), workers.end()), workers.end());
    if (workers.front() != 1)
        throw ff::ParseError(
            "the worker list must include 1: speedup is defined against the "
            "1-worker baseline");

    const json spec = parse_json_file(workload_path);
    std::optional<ff::ChamberOracle> chamber;
    std::optional<ff::SyntheticOracle> tree;
    std::function<std::pair<double, std::uint64_t>(int)> measure;
    if (spec.is_object() && spec.contains("normals")) {
        chamber.emplace(ff::arrangement_from_json(spec));
        measure = [&chamber, seed](int w) {
            const auto res = ff::run_traversal(*chamber, {.workers = w, .seed = seed});
            return std::pair{res.run.stats.wall_ms, res.run.stats.total_firings};
        };
    } else {
        tree.emplace(ff::synthetic_from_json(spec));
        measure = [&tree, seed](int w) {
            const auto rep =
                ff::run_smoothness(*tree, {tree->root()}, {.workers = w, .seed = seed});
            return std::pair{rep.run.stats.wall_ms, rep.run.stats.total_firings};
        };
    }

    struct Row {
        int workers;
        int rep;
        double wall_ms;
        std::uint64_t firings;
    };
    std::vector<Row> rows;
    std::vector<double> baseline_walls;
    for (int w : workers)
        for (int rep = 0; rep < reps; ++rep) {
            const auto [wall, firings] = measure(w);
            rows.push_back({w, rep, wall, firings});
            if (w == 1) baseline_walls.push_back(wall);
        }
    const double baseline = median(baseline_walls);

    std::ostringstream csv;
    csv << "workers,rep,wall_ms,firings,speedup\n" << std::fixed;
    csv.precision(3);
    for (const Row& r : rows) {
        const double speedup = r.workers == 1 ? 1.0 : baseline / r.wall_ms;
        csv << r.workers << ',' << r.rep << ',' << r.wall_ms << ',' << r.firings << ','
            << speedup << "\n";
    }
    emit_result(out_path, csv.str());
    return 0;
}

int cmd_replay(const std::string& net_path, const std::string& marking_path,
               const std::string& trace_path, const std::string& out_path) {
    const ff::PetriNet net = ff::net_from_json(parse_json_file(net_path));
    const ff::Marking initial = ff::marking_from_json(net, parse_json_file(marking_path));
    const std::vector<ff::FiringRecord> trace = ff::trace_from_jsonl(read_file(trace_path));

    ff::Registry reg = replay_guards();
    for (const auto& t : net.transitions) {
        if (!t.guard.empty() && !reg.guards.count(t.guard))
            throw ff::ParseError("guard '" + t.guard +
                                 "' is not built in; this net cannot be replayed here");
        // Replay applies the recorded outputs instead of running actions,
        // but the registry must still cover every name the net mentions.
        if (!t.action.empty())
            reg.actions[t.action] = [](const ff::BoundTokens&, const ff::ActionContext&)
                -> std::map<std::string, ff::TokenValue> {
                throw ff::Error("replay never executes actions");
            };
    }

    try {
        const ff::Marking final_marking = ff::replay(net, initial, reg, trace);
        emit_result(out_path, ff::marking_to_json(final_marking).dump(2) + "\n");
    } catch (const ff::TraceCorruptError& e) {
        std::cerr << e.what() << "\n";
        return 5;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "fanfire: a worker-pool Petri-net engine with two workflows — chamber\n"
        "traversal of hyperplane arrangements (with optional symmetry reduction)\n"
        "and tree-of-charts smoothness search with early termination.\n"
        "\n"
        "Traversal starts at the first feasible chamber in sign order, trying '+'\n"
        "before '-' at each hyperplane, and explores wall-neighbors to closure.\n"
        "Worker count: --workers beats FANFIRE_WORKERS beats the core count.\n"
        "\n"
        "Exit codes: 0 ok/smooth, 1 singular, 2 bad input, 3 symmetry violation,\n"
        "4 indeterminate, 5 corrupt trace, 10 engine failure."};
    app.require_subcommand(1);

    std::string arr_path, group_path;
    CommonOpts traverse_opts;
    CLI::App* traverse =
        app.add_subcommand("traverse", "Enumerate chambers, one representative per orbit");
    traverse->add_option("arrangement", arr_path, "Arrangement file: {n, normals}")
        ->required();
    traverse->add_option("--group", group_path,
                         "Symmetry group file: {m, generators: [{sigma, eps}]}; "
                         "validated against the arrangement before the run");
    add_common(traverse, traverse_opts);

    std::string spec_path;
    CommonOpts smooth_opts;
    CLI::App* smooth = app.add_subcommand(
        "smooth", "Decide smoothness: monomial-list file for the exact plane-curve "
                  "oracle, or {seed, branching, depth, cost_ms, singular_leaves} "
                  "for a synthetic tree");
    smooth->add_option("spec", spec_path, "Oracle spec file")->required();
    add_common(smooth, smooth_opts);

    std::string workload_path, bench_out;
    std::vector<int> bench_workers;
    int bench_reps = 3;
    std::uint64_t bench_seed = 0;
    CLI::App* bench = app.add_subcommand(
        "bench", "Measure wall time per worker count; CSV columns "
                 "workers,rep,wall_ms,firings,speedup");
    bench->add_option("workload", workload_path,
                      "Arrangement or synthetic-tree spec file")
        ->required();
    bench->add_option("--workers", bench_workers,
                      "Worker counts, e.g. --workers 1,2,8 (must include 1; "
                      "default: 1 and the resolved count)")
        ->delimiter(',');
    bench->add_option("--reps", bench_reps, "Repetitions per worker count")
        ->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_seed, "Engine seed, constant across rows");
    bench->add_option("--out", bench_out, "CSV file (default: stdout)");

    std::string net_path, marking_path, trace_path, replay_out;
    CLI::App* replay = app.add_subcommand(
        "replay", "Re-check a recorded trace against its net and initial marking");
    replay->add_option("net", net_path, "Net file (<trace>.net.json)")->required();
    replay->add_option("marking", marking_path, "Initial marking file (<trace>.marking.json)")
        ->required();
    replay->add_option("trace", trace_path, "Trace file (JSONL)")->required();
    replay->add_option("--out", replay_out, "Replayed final marking (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (traverse->parsed()) return cmd_traverse(arr_path, group_path, traverse_opts);
        if (smooth->parsed()) return cmd_smooth(spec_path, smooth_opts);
        if (bench->parsed())
            return cmd_bench(workload_path, bench_workers, bench_reps, bench_seed, bench_out);
        if (replay->parsed()) return cmd_replay(net_path, marking_path, trace_path, replay_out);
    } catch (const ff::TraceCorruptError& e) {
        std::cerr << e.what() << "\n";
        return 5;
    } catch (const ff::IndeterminateError& e) {
        std::cerr << "indeterminate: " << e.what() << "\n";
        return 4;
    } catch (const ff::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ff::TypeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ff::CapExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ff::Error& e) {
        std::cerr << "engine failure: " << e.what() << "\n";
        return 10;
    }
    return 2;
}

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fanfire/petri.hpp"

namespace fanfire {

struct RunConfig {
  int workers = 1;
  std::uint64_t seed = 0;
  bool trace_enabled = false;
  // Per action invocation, decided by a stable hash of the binding and
  // attempt number — never by timing — so failure runs are reproducible.
  double failure_injection = 0.0;
  int max_retries = 0;
};

struct ProducedToken {
  std::string place;
  TokenId id;
  TokenValue value;
};

// One committed firing.  Sequence numbers are gapless from 1 in commit
// order; replaying the records in that order from the initial marking
// reproduces the final marking exactly, token ids included.
struct FiringRecord {
  std::uint64_t seq = 0;
  std::string transition;
  std::vector<TokenId> consumed;        // input-arc order
  std::vector<ProducedToken> produced;  // output-arc order
  int worker = 0;
  std::uint64_t duration_ns = 0;
};

struct RunStats {
  std::map<std::string, std::uint64_t> per_transition;
  std::uint64_t total_firings = 0;
  double wall_ms = 0.0;
  std::vector<std::uint64_t> busy_ns;  // one entry per worker
};

struct RunResult {
  Marking final_marking;
  bool cancelled = false;
  std::string terminal_place;  // set iff cancelled
  std::vector<FiringRecord> trace;  // empty unless trace_enabled
  RunStats stats;
};

// Executes the net until quiescence (verdict completed) or until a token
// lands on a terminal place (verdict cancelled: in-flight actions are
// abandoned, their outputs discarded and their consumed tokens restored).
// Consumption is atomic at dispatch, outputs commit atomically at
// completion, failed actions are retried up to max_retries.  Throws
// FaultedTransitionError when an action exhausts its retries, fails
// fatally, or a guard throws.
RunResult run(const PetriNet& net, const Marking& initial, const Registry& reg,
              const RunConfig& cfg);

// Single-threaded, fully reproducible variant: requires workers == 1,
// runs actions inline, resolves every choice among enabled bindings by a
// seed-keyed hash, and pins durations to zero — equal inputs give
// byte-identical traces.
RunResult run_deterministic(const PetriNet& net, const Marking& initial, const Registry& reg,
                            const RunConfig& cfg);

// Applies recorded firings in sequence order using the recorded outputs;
// actions are not re-executed.  Each record must be enabled at its turn
// (tokens present and distinct, guard holding, types matching), otherwise
// TraceCorruptError carries the offending sequence number.
Marking replay(const PetriNet& net, const Marking& initial, const Registry& reg,
               const std::vector<FiringRecord>& trace);

// One record per line, field order fixed:
// seq, transition, consumed, produced, worker, duration_ns.
std::string trace_to_jsonl(const std::vector<FiringRecord>& trace);
std::vector<FiringRecord> trace_from_jsonl(const std::string& text);

ojson stats_to_json(const RunStats& stats);

}  // namespace fanfire

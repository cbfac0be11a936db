#include "fanfire/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <sstream>
#include <thread>
#include <tuple>

#include "fanfire/channel.hpp"
#include "fanfire/hash.hpp"
#include "fanfire/json_util.hpp"

namespace fanfire {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t order_hash(std::uint64_t seed, const Binding& b) {
  HashStream h(seed);
  h.mix("order").mix(b.transition);
  for (TokenId id : b.tokens) h.mix(id);
  return h.digest();
}

bool inject_failure(const RunConfig& cfg, const Binding& b, int attempt) {
  if (cfg.failure_injection <= 0.0) return false;
  if (cfg.failure_injection >= 1.0) return true;
  HashStream h(cfg.seed);
  h.mix("inject").mix(b.transition);
  for (TokenId id : b.tokens) h.mix(id);
  h.mix(static_cast<std::uint64_t>(attempt));
  auto threshold = static_cast<std::uint64_t>(
      cfg.failure_injection * 18446744073709551616.0L);  // p * 2^64
  return h.digest() < threshold;
}

void check_config(const RunConfig& cfg) {
  if (cfg.workers < 1) throw Error("workers must be >= 1");
  if (cfg.failure_injection < 0.0 || cfg.failure_injection > 1.0)
    throw Error("failure_injection must lie in [0, 1]");
  if (cfg.max_retries < 0) throw Error("max_retries must be >= 0");
}

// Resolve every referenced guard and action up front so bad wiring fails
// before any token moves.
void check_registry(const PetriNet& net, const Registry& reg) {
  for (const auto& t : net.transitions) {
    if (!t.guard.empty()) reg.guard(t.guard);
    if (!t.action.empty()) reg.action(t.action);
  }
}

void check_initial(const PetriNet& net, const Marking& m) {
  for (const auto& [place, toks] : m.tokens) {
    const Place* p = net.find_place(place);
    if (!p) throw TypeError("initial marking names unknown place '" + place + "'");
    for (const auto& [id, value] : toks)
      if (value.tag != p->accepts)
        throw TypeError("initial token tagged '" + value.tag + "' on place '" + place +
                        "' accepting '" + p->accepts + "'");
  }
}

BoundTokens bind_values(const Transition& t, const Marking& m, const Binding& b) {
  BoundTokens bound;
  for (std::size_t k = 0; k < t.inputs.size(); ++k)
    bound.emplace(t.inputs[k].var, *m.find(t.inputs[k].place, b.tokens[k]));
  return bound;
}

// Commits a completed action: type-checks the outputs, adds them to the
// marking under fresh ids in output-arc order, and reports any terminal
// place that was hit.  Contract violations by the action (missing, extra
// or mistyped outputs) throw Error; callers turn that into an abort that
// names the transition.
FiringRecord apply_outputs(const PetriNet& net, Marking& m, const Binding& b,
                           const std::map<std::string, TokenValue>& outputs, std::uint64_t seq,
                           int worker, std::uint64_t duration_ns, std::string* terminal_hit) {
  const Transition* t = net.find_transition(b.transition);
  if (outputs.size() != t->outputs.size())
    throw Error("action produced " + std::to_string(outputs.size()) + " outputs for " +
                std::to_string(t->outputs.size()) + " output arcs");
  FiringRecord rec;
  rec.seq = seq;
  rec.transition = t->id;
  rec.consumed = b.tokens;
  rec.worker = worker;
  rec.duration_ns = duration_ns;
  for (const auto& a : t->outputs) {
    auto it = outputs.find(a.var);
    if (it == outputs.end())
      throw Error("action produced no output for variable '" + a.var + "'");
    const Place* p = net.find_place(a.place);
    if (it->second.tag != p->accepts)
      throw Error("action produced a token tagged '" + it->second.tag + "' for place '" + p->id +
                  "' accepting '" + p->accepts + "'");
    TokenId id = m.add(a.place, it->second);
    rec.produced.push_back({a.place, id, it->second});
    if (p->terminal && terminal_hit && terminal_hit->empty()) *terminal_hit = p->id;
  }
  return rec;
}

struct Job {
  std::uint64_t job_id;
  Binding binding;
  BoundTokens inputs;
  std::string action;  // "" produces nothing
  int attempt;
};

struct Outcome {
  std::uint64_t job_id = 0;
  int worker = 0;
  enum class Kind { ok, injected, failed, fatal } kind = Kind::ok;
  std::map<std::string, TokenValue> outputs;
  std::string message;
  std::uint64_t duration_ns = 0;
};

// The coordinator.  It alone touches the marking, the candidate queue and
// the in-flight table, so termination ("queue empty and nothing in
// flight") is read in one consistent glance without locking; workers see
// only immutable job values and the cancellation flag.
class Engine {
 public:
  Engine(const PetriNet& net, const Marking& initial, const Registry& reg, const RunConfig& cfg)
      : net_(net), reg_(reg), cfg_(cfg), marking_(initial) {}

  RunResult run() {
    result_.stats.busy_ns.assign(cfg_.workers, 0);
    auto t0 = Clock::now();
    start_workers();
    seed_candidates();
    for (;;) {
      if (aborted_) break;
      if (!cancelled_) dispatch_all();
      if (inflight_.empty() && (cancelled_ || queue_.empty())) break;
      auto out = outcomes_.pop();
      handle(*out);
    }
    jobs_.close();
    cancel_flag_.store(true, std::memory_order_relaxed);  // hurry abandoned actions along
    for (auto& th : pool_) th.join();
    if (aborted_) throw FaultedTransitionError(abort_transition_, abort_message_);
    result_.final_marking = std::move(marking_);
    result_.cancelled = cancelled_;
    result_.terminal_place = terminal_place_;
    result_.stats.wall_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    return result_;
  }

 private:
  struct InFlight {
    Binding binding;
    int attempt = 0;
    std::vector<std::tuple<std::string, TokenId, TokenValue>> consumed;
  };

  void start_workers() {
    for (int w = 0; w < cfg_.workers; ++w) {
      pool_.emplace_back([this, w] {
        ActionContext ctx{&cancel_flag_};
        while (auto job = jobs_.pop()) {
          Outcome out;
          out.job_id = job->job_id;
          out.worker = w;
          auto start = Clock::now();
          if (inject_failure(cfg_, job->binding, job->attempt)) {
            out.kind = Outcome::Kind::injected;
            out.message = "injected failure";
          } else if (!job->action.empty()) {
            try {
              out.outputs = reg_.action(job->action)(job->inputs, ctx);
            } catch (const IndeterminateError& e) {
              out.kind = Outcome::Kind::fatal;
              out.message = e.what();
            } catch (const std::exception& e) {
              out.kind = Outcome::Kind::failed;
              out.message = e.what();
            }
          }
          out.duration_ns = static_cast<std::uint64_t>(
              std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count());
          outcomes_.push(std::move(out));
        }
      });
    }
  }

  void seed_candidates() { enqueue_batch(enumerate_bindings(net_, marking_, reg_)); }

  void enqueue_batch(EnabledResult en) {
    if (!en.faulted.empty()) {
      const auto& f = en.faulted.front();
      abort_run(f.binding.transition, "guard failed: " + f.message);
      return;
    }
    // FIFO between batches; inside one batch the seed breaks the tie.
    std::sort(en.bindings.begin(), en.bindings.end(), [&](const Binding& x, const Binding& y) {
      auto hx = order_hash(cfg_.seed, x), hy = order_hash(cfg_.seed, y);
      if (hx != hy) return hx < hy;
      return std::tie(x.transition, x.tokens) < std::tie(y.transition, y.tokens);
    });
    for (auto& b : en.bindings) queue_.push_back(std::move(b));
  }

  void dispatch_all() {
    while (!queue_.empty()) {
      Binding b = std::move(queue_.front());
      queue_.pop_front();
      const Transition* t = net_.find_transition(b.transition);
      bool live = true;
      for (std::size_t k = 0; k < b.tokens.size() && live; ++k)
        live = marking_.find(t->inputs[k].place, b.tokens[k]) != nullptr;
      if (!live) continue;  // stale entry; superseded or consumed

      Job job;
      job.job_id = next_job_++;
      job.inputs = bind_values(*t, marking_, b);
      job.action = t->action;
      job.attempt = attempts_[{b.transition, b.tokens}]++;
      InFlight fl;
      fl.binding = b;
      fl.attempt = job.attempt;
      for (std::size_t k = 0; k < b.tokens.size(); ++k) {
        const auto& place = t->inputs[k].place;
        fl.consumed.push_back({place, b.tokens[k], *marking_.find(place, b.tokens[k])});
        marking_.erase(place, b.tokens[k]);
      }
      job.binding = std::move(b);
      inflight_.emplace(job.job_id, std::move(fl));
      jobs_.push(std::move(job));
    }
  }

  void handle(const Outcome& out) {
    auto it = inflight_.find(out.job_id);
    InFlight fl = std::move(it->second);
    inflight_.erase(it);
    result_.stats.busy_ns[out.worker] += out.duration_ns;

    if (cancelled_) {
      // Abandoned action: discard its outputs, put its tokens back so the
      // final marking is exactly the initial one plus committed firings.
      restore(fl, false);
      return;
    }
    switch (out.kind) {
      case Outcome::Kind::ok:
        commit(fl, out);
        break;
      case Outcome::Kind::fatal:
        abort_run(fl.binding.transition, out.message);
        break;
      case Outcome::Kind::injected:
      case Outcome::Kind::failed:
        if (fl.attempt >= cfg_.max_retries) {
          abort_run(fl.binding.transition,
                    "failed after " + std::to_string(fl.attempt + 1) + " attempts: " + out.message);
        } else {
          restore(fl, true);
        }
        break;
    }
  }

  void commit(const InFlight& fl, const Outcome& out) {
    FiringRecord rec;
    try {
      std::string terminal;
      rec = apply_outputs(net_, marking_, fl.binding, out.outputs, seq_ + 1, out.worker,
                          out.duration_ns, &terminal);
      if (!terminal.empty()) {
        cancelled_ = true;
        terminal_place_ = terminal;
        cancel_flag_.store(true, std::memory_order_relaxed);
      }
    } catch (const Error& e) {
      abort_run(fl.binding.transition, e.what());
      return;
    }
    ++seq_;
    result_.stats.per_transition[rec.transition] += 1;
    result_.stats.total_firings += 1;
    std::set<TokenId> fresh;
    for (const auto& p : rec.produced) fresh.insert(p.id);
    if (cfg_.trace_enabled) result_.trace.push_back(std::move(rec));
    if (!cancelled_ && !fresh.empty())
      enqueue_batch(enumerate_bindings(net_, marking_, reg_, &fresh));
  }

  void restore(const InFlight& fl, bool requeue) {
    std::set<TokenId> back;
    for (const auto& [place, id, value] : fl.consumed) {
      marking_.add_with_id(place, id, value);
      back.insert(id);
    }
    if (requeue) enqueue_batch(enumerate_bindings(net_, marking_, reg_, &back));
  }

  void abort_run(const std::string& transition, const std::string& message) {
    aborted_ = true;
    abort_transition_ = transition;
    abort_message_ = message;
    cancel_flag_.store(true, std::memory_order_relaxed);
  }

  const PetriNet& net_;
  const Registry& reg_;
  const RunConfig& cfg_;
  Marking marking_;
  std::deque<Binding> queue_;
  std::map<std::pair<std::string, std::vector<TokenId>>, int> attempts_;
  std::map<std::uint64_t, InFlight> inflight_;
  std::uint64_t next_job_ = 1;
  std::uint64_t seq_ = 0;
  bool cancelled_ = false;
  std::string terminal_place_;
  bool aborted_ = false;
  std::string abort_transition_, abort_message_;
  std::atomic<bool> cancel_flag_{false};
  RunResult result_;
  Channel<Job> jobs_;
  Channel<Outcome> outcomes_;
  std::vector<std::thread> pool_;
};

}  // namespace

RunResult run(const PetriNet& net, const Marking& initial, const Registry& reg,
              const RunConfig& cfg) {
  check_config(cfg);
  validate_or_throw(net);
  check_registry(net, reg);
  check_initial(net, initial);
  Engine engine(net, initial, reg, cfg);
  return engine.run();
}

RunResult run_deterministic(const PetriNet& net, const Marking& initial, const Registry& reg,
                            const RunConfig& cfg) {
  if (cfg.workers != 1) throw Error("run_deterministic requires workers == 1");
  check_config(cfg);
  validate_or_throw(net);
  check_registry(net, reg);
  check_initial(net, initial);

  Marking m = initial;
  RunResult res;
  res.stats.busy_ns.assign(1, 0);
  std::map<std::pair<std::string, std::vector<TokenId>>, int> attempts;
  std::uint64_t seq = 0;
  auto t0 = Clock::now();
  for (;;) {
    EnabledResult en = enabled(net, m, reg);
    if (!en.faulted.empty()) {
      const auto& f = en.faulted.front();
      throw FaultedTransitionError(f.binding.transition, "guard failed: " + f.message);
    }
    if (en.bindings.empty()) break;
    const Binding* best = &en.bindings.front();
    auto best_h = order_hash(cfg.seed, *best);
    for (const auto& b : en.bindings) {
      auto h = order_hash(cfg.seed, b);
      if (std::tie(h, b.transition, b.tokens) <
          std::tie(best_h, best->transition, best->tokens)) {
        best = &b;
        best_h = h;
      }
    }
    const Transition* t = net.find_transition(best->transition);
    int attempt = attempts[{best->transition, best->tokens}]++;
    std::map<std::string, TokenValue> outputs;
    if (inject_failure(cfg, *best, attempt)) {
      if (attempt >= cfg.max_retries)
        throw FaultedTransitionError(
            t->id, "failed after " + std::to_string(attempt + 1) + " attempts: injected failure");
      continue;  // marking untouched; the same binding is retried next round
    }
    if (!t->action.empty()) {
      try {
        outputs = reg.action(t->action)(bind_values(*t, m, *best), ActionContext{});
      } catch (const IndeterminateError& e) {
        throw FaultedTransitionError(t->id, e.what());
      } catch (const std::exception& e) {
        if (attempt >= cfg.max_retries)
          throw FaultedTransitionError(
              t->id, "failed after " + std::to_string(attempt + 1) + " attempts: " + e.what());
        continue;
      }
    }
    for (std::size_t k = 0; k < best->tokens.size(); ++k)
      m.erase(t->inputs[k].place, best->tokens[k]);
    std::string terminal;
    FiringRecord rec;
    try {
      // Durations pinned to zero keep equal-input traces byte-identical.
      rec = apply_outputs(net, m, *best, outputs, seq + 1, 0, 0, &terminal);
    } catch (const Error& e) {
      throw FaultedTransitionError(t->id, e.what());
    }
    ++seq;
    res.stats.per_transition[rec.transition] += 1;
    res.stats.total_firings += 1;
    if (cfg.trace_enabled) res.trace.push_back(std::move(rec));
    if (!terminal.empty()) {
      res.cancelled = true;
      res.terminal_place = terminal;
      break;
    }
  }
  res.final_marking = std::move(m);
  res.stats.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  return res;
}

Marking replay(const PetriNet& net, const Marking& initial, const Registry& reg,
               const std::vector<FiringRecord>& trace) {
  validate_or_throw(net);
  check_registry(net, reg);
  Marking m = initial;
  std::set<TokenId> seen;
  for (const auto& [place, toks] : m.tokens)
    for (const auto& [id, value] : toks) seen.insert(id);

  std::uint64_t expect = 1;
  for (const auto& rec : trace) {
    if (rec.seq != expect)
      throw TraceCorruptError(rec.seq, "expected sequence number " + std::to_string(expect));
    ++expect;
    const Transition* t = net.find_transition(rec.transition);
    if (!t) throw TraceCorruptError(rec.seq, "unknown transition '" + rec.transition + "'");
    if (rec.consumed.size() != t->inputs.size())
      throw TraceCorruptError(rec.seq, "consumed " + std::to_string(rec.consumed.size()) +
                                           " tokens for " + std::to_string(t->inputs.size()) +
                                           " input arcs");
    for (std::size_t k = 0; k < rec.consumed.size(); ++k) {
      for (std::size_t j = 0; j < k; ++j)
        if (rec.consumed[j] == rec.consumed[k])
          throw TraceCorruptError(rec.seq,
                                  "token " + std::to_string(rec.consumed[k]) + " bound twice");
      if (!m.find(t->inputs[k].place, rec.consumed[k]))
        throw TraceCorruptError(rec.seq, "token " + std::to_string(rec.consumed[k]) +
                                             " not on place '" + t->inputs[k].place + "'");
    }
    if (!t->guard.empty()) {
      Binding b{rec.transition, rec.consumed};
      bool held;
      try {
        held = reg.guard(t->guard)(bind_values(*t, m, b));
      } catch (const std::exception& e) {
        throw TraceCorruptError(rec.seq, std::string("guard failed: ") + e.what());
      }
      if (!held) throw TraceCorruptError(rec.seq, "guard rejects the recorded binding");
    }
    if (rec.produced.size() != t->outputs.size())
      throw TraceCorruptError(rec.seq, "produced " + std::to_string(rec.produced.size()) +
                                           " tokens for " + std::to_string(t->outputs.size()) +
                                           " output arcs");
    for (std::size_t k = 0; k < rec.produced.size(); ++k) {
      const auto& p = rec.produced[k];
      if (p.place != t->outputs[k].place)
        throw TraceCorruptError(rec.seq, "produced token " + std::to_string(p.id) + " on '" +
                                             p.place + "' but arc " + std::to_string(k) +
                                             " targets '" + t->outputs[k].place + "'");
      const Place* pl = net.find_place(p.place);
      if (p.value.tag != pl->accepts)
        throw TraceCorruptError(rec.seq, "produced token tagged '" + p.value.tag +
                                             "' on place '" + pl->id + "' accepting '" +
                                             pl->accepts + "'");
      if (seen.count(p.id))
        throw TraceCorruptError(rec.seq, "token id " + std::to_string(p.id) + " reused");
      seen.insert(p.id);
    }
    for (std::size_t k = 0; k < rec.consumed.size(); ++k)
      m.erase(t->inputs[k].place, rec.consumed[k]);
    for (const auto& p : rec.produced) m.add_with_id(p.place, p.id, p.value);
  }
  return m;
}

std::string trace_to_jsonl(const std::vector<FiringRecord>& trace) {
  std::string out;
  for (const auto& r : trace) {
    ojson j;
    j["seq"] = r.seq;
    j["transition"] = r.transition;
    j["consumed"] = r.consumed;
    ojson prod = ojson::array();
    for (const auto& p : r.produced)
      prod.push_back({{"place", p.place},
                      {"id", p.id},
                      {"tag", p.value.tag},
                      {"payload", ojson(p.value.payload)}});
    j["produced"] = std::move(prod);
    j["worker"] = r.worker;
    j["duration_ns"] = r.duration_ns;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<FiringRecord> trace_from_jsonl(const std::string& text) {
  std::vector<FiringRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string ctx = "trace line " + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(ctx + ": " + e.what());
    }
    FiringRecord r;
    r.seq = jsonu::need_unsigned(j, "seq", ctx);
    r.transition = jsonu::need_string(j, "transition", ctx);
    for (const auto& c : jsonu::need_array(j, "consumed", ctx)) {
      if (!c.is_number_unsigned()) throw ParseError(ctx + ": consumed ids must be integers");
      r.consumed.push_back(c.get<TokenId>());
    }
    for (const auto& p : jsonu::need_array(j, "produced", ctx)) {
      ProducedToken pt;
      pt.place = jsonu::need_string(p, "place", ctx);
      pt.id = jsonu::need_unsigned(p, "id", ctx);
      pt.value.tag = jsonu::need_string(p, "tag", ctx);
      pt.value.payload = jsonu::need(p, "payload", ctx);
      r.produced.push_back(std::move(pt));
    }
    const json& w = jsonu::need(j, "worker", ctx);
    if (!w.is_number_integer()) throw ParseError(ctx + ": 'worker' must be an integer");
    r.worker = w.get<int>();
    r.duration_ns = jsonu::need_unsigned(j, "duration_ns", ctx);
    out.push_back(std::move(r));
  }
  return out;
}

ojson stats_to_json(const RunStats& stats) {
  ojson j;
  j["total_firings"] = stats.total_firings;
  j["per_transition"] = ojson::object();
  for (const auto& [id, n] : stats.per_transition) j["per_transition"][id] = n;
  j["wall_ms"] = stats.wall_ms;
  j["busy_ns"] = stats.busy_ns;
  return j;
}

}  // namespace fanfire

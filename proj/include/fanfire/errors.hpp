#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fanfire {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(what) {}
};

// A binding whose tokens are no longer present in the marking.
struct StaleBindingError : Error {
  explicit StaleBindingError(const std::string& what) : Error(what) {}
};

struct TypeError : Error {
  explicit TypeError(const std::string& what) : Error(what) {}
};

// Replay found a firing that is not enabled at its turn.
struct TraceCorruptError : Error {
  TraceCorruptError(std::uint64_t seq, const std::string& what)
      : Error("trace corrupt at seq " + std::to_string(seq) + ": " + what), seq(seq) {}
  std::uint64_t seq;
};

// An action or guard failed beyond recovery; identifies the binding.
struct FaultedTransitionError : Error {
  FaultedTransitionError(std::string transition, const std::string& what)
      : Error("transition '" + transition + "' faulted: " + what),
        transition(std::move(transition)) {}
  std::string transition;
};

struct CapExceededError : Error {
  explicit CapExceededError(const std::string& what) : Error(what) {}
};

// The plane-curve test cannot decide with rational arithmetic alone.
// Never downgraded to a smooth verdict.
struct IndeterminateError : Error {
  explicit IndeterminateError(const std::string& what) : Error(what) {}
};

}  // namespace fanfire

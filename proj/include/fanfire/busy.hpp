#pragma once

#include <chrono>
#include <thread>

#include "fanfire/petri.hpp"

namespace fanfire {

// Burn the given wall-clock time: spin on the clock, yielding the core
// each pass so co-scheduled actions overlap even on few physical cores,
// and poll the cancellation flag so abandoned work winds down early.
inline void busy_wait_ms(double ms, const ActionContext& ctx) {
  auto end = std::chrono::steady_clock::now() +
             std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                 std::chrono::duration<double, std::milli>(ms));
  while (std::chrono::steady_clock::now() < end) {
    if (ctx.cancel_requested()) return;
    std::this_thread::yield();
  }
}

}  // namespace fanfire

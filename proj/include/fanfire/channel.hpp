#pragma once

#include <condition_variable>
#include <mutex>
#include <optional>
#include <queue>

namespace fanfire {

// In-memory message channel between the coordinator and its workers.  All
// cross-thread traffic goes through two of these (jobs out, outcomes
// back); the only other shared state is the cancellation flag.  A
// networked transport would replace this class and nothing else.
template <typename T>
class Channel {
 public:
  void push(T value) {
    {
      std::lock_guard lk(mu_);
      q_.push(std::move(value));
    }
    cv_.notify_one();
  }

  // Blocks until a value is available or the channel is closed and
  // drained; nullopt means no more values will ever arrive.
  std::optional<T> pop() {
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return !q_.empty() || closed_; });
    if (q_.empty()) return std::nullopt;
    T v = std::move(q_.front());
    q_.pop();
    return v;
  }

  void close() {
    {
      std::lock_guard lk(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::queue<T> q_;
  bool closed_ = false;
};

}  // namespace fanfire

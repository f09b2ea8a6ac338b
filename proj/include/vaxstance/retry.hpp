// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vaxstance/error.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <functional>
#include <thread>

namespace vaxstance {

/// Bounded exponential backoff applied only to ErrorKind::kRetryable.
struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  /// Injected so tests can observe delays without sleeping.
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };

  template <typename Fn>
  auto run(Fn&& fn) const -> decltype(fn()) {
    auto delay = initial_backoff;
    for (int attempt = 1;; ++attempt) {
      try {
        return fn();
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kRetryable || attempt >= max_attempts) throw;
        spdlog::warn("attempt {}/{} failed ({}), retrying in {} ms", attempt, max_attempts,
                     e.what(), delay.count());
        sleep(delay);
        delay *= 2;
      }
    }
  }
};

}  // namespace vaxstance

// Copyright 2026 The coopadmm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COOPADMM_PARALLEL_HPP
#define COOPADMM_PARALLEL_HPP

#include "coopadmm/types.hpp"

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/info.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <cstdlib>
#include <memory>
#include <span>
#include <string>

namespace coopadmm {

/// Worker count from COOPADMM_WORKERS if set, else the hardware concurrency.
inline std::size_t default_worker_count()
{
  if (const char * env = std::getenv("COOPADMM_WORKERS"); env != nullptr && *env != '\0') {
    char * end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ParameterError(std::string("COOPADMM_WORKERS must be a positive integer, got '") +
        env + "'");
    }
    return static_cast<std::size_t>(v);
  }
  return static_cast<std::size_t>(std::max(1, tbb::info::default_concurrency()));
}

/**
 * Runs independent index tasks on a fixed-size arena. Tasks must write only to
 * their own output slot; with one worker everything runs inline in order.
 */
class WorkerPool
{
public:
  explicit WorkerPool(std::size_t workers = 0)
      : workers_(workers == 0 ? default_worker_count() : workers)
  {
    if (workers_ > 1) {
      limit_ = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism, workers_);
      arena_ = std::make_unique<tbb::task_arena>(static_cast<int>(workers_));
    }
  }

  std::size_t workers() const noexcept { return workers_; }

  /// Calls fn(order[i]) for every i; an empty `order` means 0..count-1.
  template <class Fn>
  void run(std::size_t count, Fn && fn, std::span<const std::size_t> order = {})
  {
    if (!order.empty() && order.size() != count) {
      throw DimensionError("task order must list every task once");
    }
    const auto task = [&](std::size_t i) { fn(order.empty() ? i : order[i]); };
    if (!arena_ || count < 2) {
      for (std::size_t i = 0; i < count; ++i) { task(i); }
      return;
    }
    arena_->execute([&] {
      tbb::parallel_for(tbb::blocked_range<std::size_t>(0, count, 1),
        [&](const tbb::blocked_range<std::size_t> & r) {
          for (std::size_t i = r.begin(); i != r.end(); ++i) { task(i); }
        });
    });
  }

private:
  std::size_t workers_;
  std::unique_ptr<tbb::global_control> limit_;
  std::unique_ptr<tbb::task_arena> arena_;
};

}  // namespace coopadmm

#endif  // COOPADMM_PARALLEL_HPP

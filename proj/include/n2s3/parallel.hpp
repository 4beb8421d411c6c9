#pragma once

#include <cstddef>
#include <functional>

namespace n2s3 {

/// Worker-thread cap: N2S3_THREADS when set (minimum 1), otherwise the
/// hardware concurrency.
unsigned worker_thread_cap();

/// Runs fn over contiguous chunks [begin, end) covering [0, n). Safe for
/// deterministic output as long as each index writes only its own slot.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace n2s3

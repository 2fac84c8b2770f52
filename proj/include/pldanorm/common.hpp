// pldanorm/common.hpp

// Copyright 2026  pldanorm authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef PLDANORM_COMMON_HPP
#define PLDANORM_COMMON_HPP

#include <Eigen/Dense>

#include <atomic>
#include <charconv>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pldanorm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when an input file or argument fails validation.
class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(const std::string &msg) : std::runtime_error(msg) {}
};

/// Raised when a computation has no valid result for the given state
/// (degenerate statistics, singular matrices from invalid parameters, ...).
class ComputeError : public std::runtime_error {
 public:
  explicit ComputeError(const std::string &msg) : std::runtime_error(msg) {}
};

// splitmix64; used to derive independent per-item RNG seeds from a master
// seed so that results do not depend on how work is scheduled.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Shortest round-trip decimal form of a double. Locale independent, so
/// serialized output is byte-stable across runs.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

constexpr std::size_t kParallelChunk = 64;

inline std::size_t num_chunks(std::size_t n) {
  return (n + kParallelChunk - 1) / kParallelChunk;
}

/// Runs fn(chunk_index, begin, end) over [0, n) split into chunks of
/// kParallelChunk items, using up to num_threads workers.  Chunk boundaries
/// depend only on n, never on the thread count, so per-chunk outputs merged
/// in chunk order are identical for any num_threads.
inline void parallel_chunks(std::size_t n, int num_threads,
                            const std::function<void(std::size_t, std::size_t, std::size_t)> &fn) {
  if (n == 0) return;
  const std::size_t nc = num_chunks(n);
  if (num_threads <= 1 || nc == 1) {
    for (std::size_t c = 0; c < nc; ++c)
      fn(c, c * kParallelChunk, std::min(n, (c + 1) * kParallelChunk));
    return;
  }
  std::vector<std::thread> workers;
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= nc) return;
      fn(c, c * kParallelChunk, std::min(n, (c + 1) * kParallelChunk));
    }
  };
  int nw = std::min<int>(num_threads, static_cast<int>(nc));
  workers.reserve(nw);
  for (int i = 0; i < nw; ++i) workers.emplace_back(work);
  for (auto &w : workers) w.join();
}

}  // namespace pldanorm

#endif  // PLDANORM_COMMON_HPP

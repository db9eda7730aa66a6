#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "corrlab/rng.hpp"

namespace corrlab {

/// Samples per work block; every block owns one RNG substream.
inline constexpr std::size_t kBlockSize = 4096;

struct Execution {
  /// 0 = OpenMP default thread count, 1 = serial reference path.
  int workers = 0;
};

inline std::size_t block_count(std::size_t n_samples) {
  return (n_samples + kBlockSize - 1) / kBlockSize;
}

namespace detail {

template <class Acc, class MakeAcc, class Body>
void run_block(std::size_t b, std::size_t n_samples, const RngStream& root, MakeAcc& make_acc,
               Body& body, std::vector<Acc>& partial) {
  const std::size_t begin = b * kBlockSize;
  const std::size_t count = std::min(kBlockSize, n_samples - begin);
  RngStream rng = root.substream(b);
  Acc acc = make_acc();
  body(acc, rng, begin, count);
  partial[b] = std::move(acc);
}

template <class Acc>
Acc merge_in_order(std::vector<Acc>& partial) {
  Acc total = std::move(partial.front());
  for (std::size_t b = 1; b < partial.size(); ++b) total.merge(partial[b]);
  return total;
}

}  // namespace detail

/// Serial reference: blocks run in order on the calling thread.
template <class MakeAcc, class Body>
auto run_blocks_serial(std::size_t n_samples, const RngStream& root, MakeAcc make_acc, Body body) {
  using Acc = decltype(make_acc());
  const std::size_t blocks = block_count(n_samples);
  if (blocks == 0) return make_acc();
  std::vector<Acc> partial(blocks);
  for (std::size_t b = 0; b < blocks; ++b)
    detail::run_block(b, n_samples, root, make_acc, body, partial);
  return detail::merge_in_order(partial);
}

/// OpenMP path. Blocks map to substreams by index and merge in index order, so
/// the result is bit-identical to run_blocks_serial for any thread count.
template <class MakeAcc, class Body>
auto run_blocks_parallel(std::size_t n_samples, const RngStream& root, MakeAcc make_acc, Body body,
                         int workers) {
  using Acc = decltype(make_acc());
  const std::size_t blocks = block_count(n_samples);
  if (blocks == 0) return make_acc();
  std::vector<Acc> partial(blocks);
  std::exception_ptr failure;
  const auto nblocks = static_cast<std::int64_t>(blocks);
#ifdef _OPENMP
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (std::int64_t b = 0; b < nblocks; ++b) {
    try {
      detail::run_block(static_cast<std::size_t>(b), n_samples, root, make_acc, body, partial);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(corrlab_block_failure)
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  (void)workers;
  if (failure) std::rethrow_exception(failure);
  return detail::merge_in_order(partial);
}

/// Runs `body(acc, rng, first_sample_index, count)` over blocks and merges.
template <class MakeAcc, class Body>
auto run_blocks(std::size_t n_samples, const RngStream& root, MakeAcc make_acc, Body body,
                Execution exec = {}) {
  if (exec.workers == 1) return run_blocks_serial(n_samples, root, std::move(make_acc), std::move(body));
  return run_blocks_parallel(n_samples, root, std::move(make_acc), std::move(body), exec.workers);
}

/// Deterministic index loop; fn(i) must only write to slot i of its output.
template <class Fn>
void parallel_for(std::size_t n, Fn fn, Execution exec = {}) {
  if (exec.workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(n);
#ifdef _OPENMP
  const int threads = exec.workers > 0 ? exec.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(corrlab_loop_failure)
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace corrlab

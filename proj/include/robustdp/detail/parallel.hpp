#ifndef ROBUSTDP_DETAIL_PARALLEL_HPP
#define ROBUSTDP_DETAIL_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace robustdp::detail {

// fn(worker, begin, end) on contiguous chunks of [0, n); rethrows the first
// exception by worker index
template <class Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn&& fn) {
  const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(workers, n));
  if (w == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t k = 0; k < w; ++k) {
    const std::size_t b = n * k / w, e = n * (k + 1) / w;
    pool.emplace_back([&, k, b, e] {
      try {
        fn(k, b, e);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// fn(worker) on `workers` threads
template <class Fn>
void parallel_workers(unsigned workers, Fn&& fn) {
  const unsigned w = std::max(1u, workers);
  if (w == 1) {
    fn(0u);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < w; ++k)
    pool.emplace_back([&, k] {
      try {
        fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace robustdp::detail

#endif

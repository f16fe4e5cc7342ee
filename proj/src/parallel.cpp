#include "mvk/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "mvk/error.hpp"

namespace mvk {

namespace {

std::atomic<std::size_t> g_threads{1};

}  // namespace

std::size_t thread_count() noexcept { return g_threads.load(); }

void set_thread_count(std::size_t n) noexcept { g_threads.store(std::max<std::size_t>(1, n)); }

std::size_t init_threads_from_env() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MVK_THREADS"); env != nullptr && *env != '\0') {
    try {
      const long value = std::stol(env);
      if (value < 1) throw ConfigError("MVK_THREADS must be a positive integer");
      n = static_cast<std::size_t>(value);
    } catch (const std::logic_error&) {
      throw ConfigError(std::string("MVK_THREADS is not an integer: ") + env);
    }
  }
  set_thread_count(n);
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1) {
    if (n > 0) body(0, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  // one slot per range; rethrowing the lowest failed range reports the
  // lowest failing index regardless of how many workers ran
  std::vector<std::exception_ptr> failures(workers);
  auto run = [&](std::size_t slot, std::size_t begin, std::size_t end) {
    try {
      body(begin, end);
    } catch (...) {
      failures[slot] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    if (begin >= n) break;
    pool.emplace_back(run, w, begin, std::min(n, begin + chunk));
  }
  run(0, 0, std::min(n, chunk));
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

}  // namespace mvk

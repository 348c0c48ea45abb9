#include "inrv/alloc.hpp"

#include <atomic>
#include <chrono>

namespace inrv::memory {

namespace {
std::atomic<std::int64_t> g_current{0};
std::atomic<std::int64_t> g_peak{0};
const auto g_start = std::chrono::steady_clock::now();
}  // namespace

std::int64_t current_bytes() { return g_current.load(std::memory_order_relaxed); }

std::int64_t peak_bytes() { return g_peak.load(std::memory_order_relaxed); }

void reset_peak() { g_peak.store(g_current.load(std::memory_order_relaxed), std::memory_order_relaxed); }

double wall_clock_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - g_start).count();
}

namespace detail {

void add(std::int64_t bytes) {
  const auto now = g_current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  auto peak = g_peak.load(std::memory_order_relaxed);
  while (now > peak && !g_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
}

void sub(std::int64_t bytes) { g_current.fetch_sub(bytes, std::memory_order_relaxed); }

}  // namespace detail

}  // namespace inrv::memory

#pragma once

#include <cstdint>

namespace inrv::memory {

// Bytes currently held by live tensor buffers.
std::int64_t current_bytes();

// High-water mark since process start or the last reset_peak().
std::int64_t peak_bytes();

// Starts a fresh accounting window: peak := current.
void reset_peak();

// Seconds since the accounting subsystem was initialized (process start).
double wall_clock_s();

namespace detail {
void add(std::int64_t bytes);
void sub(std::int64_t bytes);
}  // namespace detail

}  // namespace inrv::memory

#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace sgin {

// All volumes, capacities and residuals are integer bit counts. Inputs are
// Mbit-granular and scale exactly at ingestion; feasibility checks are
// zero-tolerance integer comparisons.
using bits_t = std::int64_t;

inline constexpr bits_t kBitsPerMbit = 1'000'000;

inline constexpr bits_t mbits(double m) {
  return static_cast<bits_t>(m * static_cast<double>(kBitsPerMbit) + 0.5);
}

// Sentinel for arcs without a capacity bound (virtual compute return and
// absorption arcs). Kept distinct from any finite capacity so that weights
// and residual accounting stay exact.
inline constexpr bits_t kUnbounded = -1;

inline constexpr double kInfWeight = std::numeric_limits<double>::infinity();

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct construction_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller-bug class: consuming past a residual or releasing past a capacity.
struct capacity_error : std::logic_error {
  using std::logic_error::logic_error;
};

// Deterministic uniform draws. std::uniform_int_distribution is
// implementation-defined, so bounded draws are done by hand to keep
// generated scenarios reproducible byte-for-byte.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(eng_() % span);
  }

  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace sgin

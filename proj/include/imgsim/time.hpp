#pragma once

#include <cmath>
#include <cstdint>

namespace imgsim {

// Simulation time in microseconds. Fixed-point so that event ordering and
// metric comparison are exact across runs and platforms.
using SimTime = std::int64_t;

inline constexpr SimTime kMicrosPerSecond = 1'000'000;
inline constexpr SimTime kSimTimeMax = INT64_MAX;

inline SimTime from_seconds(double s) {
    return static_cast<SimTime>(std::llround(s * 1e6));
}

inline constexpr SimTime from_whole_seconds(std::int64_t s) {
    return s * kMicrosPerSecond;
}

inline constexpr double to_seconds(SimTime t) {
    return static_cast<double>(t) / 1e6;
}

}  // namespace imgsim

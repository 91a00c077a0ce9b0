#pragma once

#include <cstdint>
#include <vector>

namespace qi {

struct FringePoint {
    double phase = 0.0;
    std::uint64_t counts = 0;
    double expected_prob = 0.0;
};

/// Counts recorded on a grid of interferometer phases.
struct FringeScan {
    std::vector<FringePoint> points;
    /// Expected counts per unit detection probability at each point (source rate x windows).
    double exposure = 0.0;
    std::uint64_t windows_per_point = 0;
};

} // namespace qi

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pertlat {

struct CurvePoint {
    double r = 0.0;
    double value = 0.0;
    double stderr_ = 0.0;
};

// An (r, value, stderr) curve with its provenance. Exact curves carry
// stderr = 0. r is strictly increasing.
struct TailCurve {
    std::string law;
    int d = 1;
    int64_t trials = 0;
    uint64_t seed = 0;
    std::string estimator; // exact | monte-carlo
    std::vector<CurvePoint> points;
};

} // namespace pertlat

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lsi/graphs.hpp"

namespace lsi {

/// Outcome of one randomized property battery.
struct BatteryResult {
    std::string name;
    bool passed = true;
    double max_residual = 0.0;  // worst observed value of the checked quantity
    double tolerance = 0.0;
    int cases = 0;
    std::string detail;
};

struct BatteryOptions {
    std::uint64_t seed = 20260101;
    std::optional<int> dims;    // fixes the matrix dimension where the battery draws one
    std::optional<int> trials;  // overrides the battery's default case count
    std::optional<double> tolerance;  // overrides the battery's residual tolerance
};

/// Names accepted by run_battery, in the order the full suite runs them.
const std::vector<std::string>& battery_names();

/// Throws std::invalid_argument for an unknown name.
BatteryResult run_battery(const std::string& name, const BatteryOptions& opts = {});

/// Connected graphs on 3 to 5 vertices used by the pinching-lemma batteries.
std::vector<WeightedGraph> lemma_graphs();

/// Fixed battery of 20 connected graphs on 3 to 5 vertices with uniform measure.
std::vector<std::pair<std::string, WeightedGraph>> sandwich_battery();

}  // namespace lsi

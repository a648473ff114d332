#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "xview/evalkit/report.hpp"

namespace xview::eval {

// Runs the supplied training function once per seed and aggregates the
// resulting reports. A seed whose run throws is recorded as failed with its
// message; the sweep continues. A single-seed sweep is allowed and reports
// zero std for every metric.
SeedReport seed_sweep(const std::vector<std::uint64_t>& seeds,
                      const std::function<SeedEntry(std::uint64_t seed)>& run_seed);

}  // namespace xview::eval

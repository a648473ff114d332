#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xview/evalkit/map.hpp"

namespace xview::eval {

// Per-view metric table plus the ground-aerial gap (ground mAP minus aerial
// mAP, present only when both views are).
struct EvalReport {
    MetricBlock ground;
    MetricBlock aerial;
    std::optional<double> gap;
    int samples = 0;

    void compute_gap();
};

struct SeedEntry {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;  // set when the run failed; failures are recorded, not hidden
    EvalReport test;
    std::optional<double> val_map;   // selected-checkpoint validation mAP
    std::optional<double> test_map;  // view-agnostic test mAP
};

// Aggregate over independently trained seeds: per-metric mean and population
// std over the seeds whose runs succeeded and define the metric.
struct SeedReport {
    std::vector<SeedEntry> entries;

    struct Stat {
        std::string metric;
        std::optional<double> mean;
        std::optional<double> stddev;
        int count = 0;
    };
    std::vector<Stat> stats() const;
};

// Serialization. JSON is the machine format; CSV mirrors the aligned table
// layouts used for reporting.
std::string eval_report_json(const EvalReport& report);
std::string eval_report_csv(const EvalReport& report);
std::string seed_report_json(const SeedReport& report);
std::string seed_report_csv(const SeedReport& report);

}  // namespace xview::eval

#include "xview/evalkit/seed_sweep.hpp"

#include <stdexcept>

namespace xview::eval {

SeedReport seed_sweep(const std::vector<std::uint64_t>& seeds,
                      const std::function<SeedEntry(std::uint64_t seed)>& run_seed) {
    if (seeds.empty()) throw std::invalid_argument("seed_sweep: need at least 1 seed");
    SeedReport report;
    for (std::uint64_t seed : seeds) {
        try {
            SeedEntry entry = run_seed(seed);
            entry.seed = seed;
            entry.ok = true;
            report.entries.push_back(std::move(entry));
        } catch (const std::exception& e) {
            SeedEntry failed;
            failed.seed = seed;
            failed.ok = false;
            failed.error = e.what();
            report.entries.push_back(std::move(failed));
        }
    }
    return report;
}

}  // namespace xview::eval

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xview/numerics/random.hpp"

namespace xview::curr {

// Piecewise paired-sampling probability over training progress: 1 before T1,
// linear decay to 0 on [T1, T2), 0 from T2 on, with T1 = t1 * total_steps and
// T2 = t2 * total_steps. t1 == t2 degenerates to a step function.
struct Schedule {
    double t1 = 1.0 / 3.0;
    double t2 = 2.0 / 3.0;
    std::uint64_t total_steps = 0;

    void validate() const;  // 0 <= t1 <= t2 <= 1, total_steps > 0
};

double p_pair(double t, const Schedule& schedule);

// Sampler state: one seeded stream plus the step counter the schedule reads.
struct SamplerState {
    num::Rng rng;
    std::uint64_t t = 0;
    Schedule schedule;

    SamplerState(std::uint64_t seed, Schedule sched) : rng(seed), schedule(sched) {
        schedule.validate();
    }
};

// Index-level view of a paired dataset: pair i owns flat samples pair_members.
struct PairedIndex {
    std::size_t pair_count = 0;
    // flat index of (ground, aerial) member per pair
    std::vector<std::pair<std::size_t, std::size_t>> members;
    std::size_t flat_count() const { return 2 * pair_count; }
};

// Draws one batch of flat-sample indices, two at a time: with probability
// p_pair(t) a uniform pair contributes both members, otherwise two uniform
// independent flat samples are drawn. Advances t by one per batch.
std::vector<std::size_t> next_batch(SamplerState& state, const PairedIndex& data,
                                    std::size_t batch_size);

struct SweepCell {
    double t1 = 0.0;
    double t2 = 0.0;
    bool ok = false;
    std::string error;
    double val_map = 0.0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    // max - min of val_map over successful cells
    std::optional<double> spread() const;
};

// Trains one run per (t1, t2) grid cell and tabulates the final validation
// mAP. `train_fn` must be deterministic for a fixed cell.
SweepResult sensitivity_sweep(const std::vector<double>& t1_grid,
                              const std::vector<double>& t2_grid,
                              const std::function<double(double t1, double t2)>& train_fn);

std::string sweep_csv(const SweepResult& result);

}  // namespace xview::curr

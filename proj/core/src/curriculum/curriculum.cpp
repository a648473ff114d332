#include "xview/curriculum/curriculum.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace xview::curr {

void Schedule::validate() const {
    if (!(t1 >= 0.0 && t1 <= t2 && t2 <= 1.0)) {
        throw std::invalid_argument("Schedule: need 0 <= t1 <= t2 <= 1");
    }
    if (total_steps == 0) throw std::invalid_argument("Schedule: total_steps must be positive");
}

double p_pair(double t, const Schedule& schedule) {
    schedule.validate();
    const double total = static_cast<double>(schedule.total_steps);
    if (t < 0.0 || t > total) throw std::invalid_argument("p_pair: t out of [0, total_steps]");
    const double T1 = schedule.t1 * total;
    const double T2 = schedule.t2 * total;
    if (t < T1) return 1.0;
    if (t >= T2) return 0.0;
    return (T2 - t) / (T2 - T1);  // T2 > T1 here, since t in [T1, T2)
}

std::vector<std::size_t> next_batch(SamplerState& state, const PairedIndex& data,
                                    std::size_t batch_size) {
    if (data.pair_count == 0) throw std::invalid_argument("next_batch: empty dataset");
    if (data.members.size() != data.pair_count) {
        throw std::invalid_argument("next_batch: malformed pair index");
    }
    if (batch_size < 2 || batch_size % 2 != 0) {
        throw std::invalid_argument("next_batch: batch_size must be even and >= 2");
    }
    const double p = p_pair(static_cast<double>(state.t), state.schedule);
    std::vector<std::size_t> batch;
    batch.reserve(batch_size);
    for (std::size_t slot = 0; slot < batch_size / 2; ++slot) {
        if (state.rng.uniform() < p) {
            const auto& pair = data.members[state.rng.uniform_int(data.pair_count)];
            batch.push_back(pair.first);
            batch.push_back(pair.second);
        } else {
            batch.push_back(state.rng.uniform_int(data.flat_count()));
            batch.push_back(state.rng.uniform_int(data.flat_count()));
        }
    }
    ++state.t;
    return batch;
}

std::optional<double> SweepResult::spread() const {
    std::optional<double> lo, hi;
    for (const auto& cell : cells) {
        if (!cell.ok) continue;
        lo = lo ? std::min(*lo, cell.val_map) : cell.val_map;
        hi = hi ? std::max(*hi, cell.val_map) : cell.val_map;
    }
    if (!lo) return std::nullopt;
    return *hi - *lo;
}

SweepResult sensitivity_sweep(const std::vector<double>& t1_grid,
                              const std::vector<double>& t2_grid,
                              const std::function<double(double, double)>& train_fn) {
    if (t1_grid.empty() || t2_grid.empty()) {
        throw std::invalid_argument("sensitivity_sweep: empty grid");
    }
    SweepResult result;
    for (double t1 : t1_grid) {
        for (double t2 : t2_grid) {
            SweepCell cell;
            cell.t1 = t1;
            cell.t2 = t2;
            try {
                cell.val_map = train_fn(t1, t2);
                cell.ok = true;
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream oss;
    oss << "t1,t2,ok,val_mAP\n";
    char buf[64];
    for (const auto& cell : result.cells) {
        std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%s,", cell.t1, cell.t2,
                      cell.ok ? "yes" : "no");
        oss << buf;
        if (cell.ok) {
            std::snprintf(buf, sizeof(buf), "%.6f", cell.val_map);
            oss << buf;
        } else {
            oss << "NA";
        }
        oss << "\n";
    }
    return oss.str();
}

}  // namespace xview::curr

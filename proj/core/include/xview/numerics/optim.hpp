#pragma once

#include <cstdint>
#include <vector>

#include "xview/numerics/array.hpp"

namespace xview::num {

struct AdamWConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
};

// Adaptive-moment optimizer with decoupled weight decay. Decay is applied
// multiplicatively before the moment update, so it never flows through the
// second-moment normalization.
class AdamW {
public:
    explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

    // Applies one update. `params` and `grads` must be index-aligned; moment
    // buffers are created lazily on the first call and shape-checked after.
    void step(const std::vector<Array*>& params, const std::vector<const Array*>& grads);

    std::uint64_t step_count() const noexcept { return step_; }
    const AdamWConfig& config() const noexcept { return cfg_; }

private:
    AdamWConfig cfg_;
    std::uint64_t step_ = 0;
    std::vector<Array> m_;
    std::vector<Array> v_;
};

}  // namespace xview::num

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "xview/numerics/array.hpp"

namespace xview::num {

struct GradCheckBlock {
    std::string name;
    double max_rel_err = 0.0;
    bool pass = false;
};

struct GradCheckReport {
    std::vector<GradCheckBlock> blocks;
    double tol = 0.0;
    bool all_pass = false;
};

// Central-difference verification of analytic gradients, one block per
// parameter array. `loss_fn` is evaluated twice at the unperturbed point
// first; if the two values differ the function is nondeterministic and an
// std::runtime_error is thrown. Relative error uses the denominator
// max(|analytic|, |numeric|, 1e-6).
GradCheckReport grad_check(const std::function<double(const std::vector<Array>&)>& loss_fn,
                           std::vector<Array> params,
                           const std::vector<Array>& analytic_grads,
                           const std::vector<std::string>& names, double h = 1e-5,
                           double tol = 1e-4);

}  // namespace xview::num

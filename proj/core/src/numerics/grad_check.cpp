#include "xview/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xview::num {

GradCheckReport grad_check(const std::function<double(const std::vector<Array>&)>& loss_fn,
                           std::vector<Array> params, const std::vector<Array>& analytic_grads,
                           const std::vector<std::string>& names, double h, double tol) {
    if (params.size() != analytic_grads.size() || params.size() != names.size()) {
        throw std::invalid_argument("grad_check: params/grads/names count mismatch");
    }
    const double base0 = loss_fn(params);
    const double base1 = loss_fn(params);
    if (base0 != base1) {
        throw std::runtime_error("grad_check: loss_fn is nondeterministic (two evaluations differ)");
    }

    GradCheckReport report;
    report.tol = tol;
    report.all_pass = true;
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (!params[b].same_shape(analytic_grads[b])) {
            throw std::invalid_argument("grad_check: grad shape mismatch for block " + names[b]);
        }
        GradCheckBlock block;
        block.name = names[b];
        for (std::size_t i = 0; i < params[b].size(); ++i) {
            const double orig = params[b][i];
            params[b][i] = orig + h;
            const double up = loss_fn(params);
            params[b][i] = orig - h;
            const double down = loss_fn(params);
            params[b][i] = orig;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = analytic_grads[b][i];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
            block.max_rel_err = std::max(block.max_rel_err, std::abs(analytic - numeric) / denom);
        }
        block.pass = block.max_rel_err < tol;
        report.all_pass = report.all_pass && block.pass;
        report.blocks.push_back(std::move(block));
    }
    return report;
}

}  // namespace xview::num

#include "xview/numerics/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace xview::num {

void AdamW::step(const std::vector<Array*>& params, const std::vector<const Array*>& grads) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("AdamW::step: params/grads count mismatch");
    }
    if (m_.empty()) {
        for (const Array* p : params) {
            m_.push_back(Array::zeros_like(*p));
            v_.push_back(Array::zeros_like(*p));
        }
    }
    if (m_.size() != params.size()) {
        throw std::invalid_argument("AdamW::step: parameter count changed across steps");
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Array& p = *params[i];
        const Array& g = *grads[i];
        if (!p.same_shape(g) || !p.same_shape(m_[i])) {
            throw std::invalid_argument("AdamW::step: shape mismatch at parameter " +
                                        std::to_string(i));
        }
        Array& m = m_[i];
        Array& v = v_[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            p[j] *= 1.0 - cfg_.learning_rate * cfg_.weight_decay;
            m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
            v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            p[j] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
        p.check_finite("AdamW::step");
    }
}

}  // namespace xview::num

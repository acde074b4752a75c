// SPDX-License-Identifier: Apache-2.0

#include "hypersindy/adamw.hpp"

#include "hypersindy/errors.hpp"

#include <cmath>

namespace hypersindy {

AdamW::AdamW(std::vector<Tensor> params, AdamWConfig config)
    : params_(std::move(params)), config_(config) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    vmax_.reserve(params_.size());
    for (const Tensor& p : params_) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
        vmax_.emplace_back(p.size(), 0.0);
    }
}

void AdamW::step() {
    for (const Tensor& p : params_) {
        if (!p.grad_allocated()) {
            throw ContractError("adamw_step before backward: parameter of shape " +
                                p.shape_str() + " has no gradient");
        }
    }
    ++step_count_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
    const double sqrt_bc2 = std::sqrt(bc2);
    const double decay = 1.0 - config_.learning_rate * config_.weight_decay;

    for (std::size_t i = 0; i < params_.size(); ++i) {
        Tensor& p = params_[i];
        auto x = p.data();
        auto g = p.grad();
        auto& m = m_[i];
        auto& v = v_[i];
        auto& vmax = vmax_[i];
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] *= decay;
            m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
            v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
            double denom_v = v[j];
            if (config_.amsgrad) {
                if (v[j] > vmax[j]) vmax[j] = v[j];
                denom_v = vmax[j];
            }
            const double denom = std::sqrt(denom_v) / sqrt_bc2 + config_.epsilon;
            x[j] -= config_.learning_rate * (m[j] / bc1) / denom;
        }
        p.zero_grad();
    }
}

void AdamW::zero_grad() {
    for (Tensor& p : params_) p.zero_grad();
}

} // namespace hypersindy

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hypersindy/tensor.hpp"

#include <cstdint>
#include <vector>

namespace hypersindy {

struct AdamWConfig {
    double learning_rate = 0.005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
    bool amsgrad = true;
};

// Decoupled-weight-decay Adam with the amsgrad max-of-second-moment variant.
// Decay multiplies parameters by (1 - lr * wd) before the moment update; the
// amsgrad maximum is taken over the raw second moment, with bias correction
// applied in the denominator. step() zeroes every parameter gradient after
// applying the update.
class AdamW {
public:
    AdamW(std::vector<Tensor> params, AdamWConfig config = {});

    void step(); // ContractError when a parameter has no gradient buffer
    void zero_grad();

    std::int64_t step_count() const { return step_count_; }
    const AdamWConfig& config() const { return config_; }
    std::size_t param_count() const { return params_.size(); }

    // Exposed for the amsgrad monotonicity tests.
    const std::vector<double>& max_second_moment(std::size_t i) const { return vmax_[i]; }

private:
    std::vector<Tensor> params_;
    AdamWConfig config_;
    std::int64_t step_count_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    std::vector<std::vector<double>> vmax_;
};

} // namespace hypersindy

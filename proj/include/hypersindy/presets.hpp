// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hypersindy/dynamics.hpp"
#include "hypersindy/training.hpp"

#include <string>
#include <vector>

namespace hypersindy {

// A full run description: the data-generating system plus the training
// configuration. This is exactly what the run-config JSON files encode.
struct RunConfig {
    SystemSpec system;
    TrainConfig train;
};

// Published hyperparameter rows, one preset per experiment, plus a tiny
// smoke-test preset. Names: lorenz_sigma{1,5,10}, rossler_sigma{1,5,10},
// rossler_rmse_sigma{5,10}, lotka_volterra, lorenz96_sigma10, tiny_test.
const std::vector<std::string>& preset_names();
RunConfig get_preset(const std::string& name);

// Training configuration used for the coefficient-RMSE experiments.
TrainConfig rmse_preset(SystemName system, double sigma);

// Strict JSON (unknown keys rejected at every level).
RunConfig parse_run_config(const std::string& json_text);
std::string render_run_config(const RunConfig& config);

int table1_threads_from_env();

} // namespace hypersindy

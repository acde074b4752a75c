// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hypersindy/dynamics.hpp"
#include "hypersindy/model.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace hypersindy {

struct TrainConfig {
    SystemName system = SystemName::lorenz;
    LibrarySpec library{3, 3, false};
    int latent_dim = 6;
    double beta_init = 10.0; // warmup target
    std::optional<double> beta_spike;
    std::optional<int> epoch_beta_spike;
    double lambda_init = 0.01;
    std::optional<double> lambda_spike;
    std::optional<int> epoch_lambda_spike;
    int epochs = 999;
    double threshold = 0.05;
    int threshold_interval = 100;
    int stat_size = 250;
    int batch_size = 250;
    double learning_rate = 0.005;
    int hidden_width = 64;
    std::uint64_t seed = 0;

    void validate() const;
    ModelConfig model_config() const;
};

// beta rises linearly from 0.01 at epoch 0 to beta_init at epoch 100, stays
// there, and jumps to beta_spike from epoch_beta_spike onward.
double beta_schedule(const TrainConfig& cfg, int epoch);

// lambda_init before epoch_lambda_spike, lambda_spike from that epoch onward.
double lambda_schedule(const TrainConfig& cfg, int epoch);

// Draw stat_size prior samples, average the raw-unit hypernet coefficients,
// permanently zero mask entries whose mean magnitude is below the threshold.
// Returns the number of entries newly zeroed.
int threshold_update(HyperSindyModel& model, const TrainConfig& cfg, Rng& rng);
int threshold_update(HyperSindyModel& model, const TrainConfig& cfg, std::uint64_t seed);

struct EpochRecord {
    int epoch = 0;
    double reconstruction = 0.0;
    double kl = 0.0;
    double l0 = 0.0;
    double beta = 0.0;
    double lambda = 0.0;
    int active_terms = 0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

// Epoch history CSV: `epoch,recon,kl,l0,beta,lambda,active_terms`.
void write_history_csv(const std::string& path, const TrainHistory& history);

std::pair<HyperSindyModel, TrainHistory> train(const TrainConfig& cfg, const Trajectory& data);

} // namespace hypersindy

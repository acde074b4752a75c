// SPDX-License-Identifier: Apache-2.0

#include "hypersindy/training.hpp"

#include "hypersindy/adamw.hpp"
#include "hypersindy/errors.hpp"
#include "hypersindy/trajectory_io.hpp"

#include <cmath>
#include <fstream>

namespace hypersindy {

void TrainConfig::validate() const {
    library.validate();
    if (latent_dim < 1) throw ConfigError("train: latent_dim must be >= 1");
    if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
    if (beta_init < 0.0 || lambda_init < 0.0) {
        throw ConfigError("train: rates and weights must be nonnegative");
    }
    if (beta_spike && *beta_spike < 0.0) throw ConfigError("train: beta_spike must be >= 0");
    if (lambda_spike && *lambda_spike < 0.0) throw ConfigError("train: lambda_spike must be >= 0");
    if (epoch_beta_spike && (*epoch_beta_spike < 0 || *epoch_beta_spike >= epochs)) {
        throw ConfigError("train: epoch_beta_spike must lie inside [0, epochs)");
    }
    if (epoch_lambda_spike && (*epoch_lambda_spike < 0 || *epoch_lambda_spike >= epochs)) {
        throw ConfigError("train: epoch_lambda_spike must lie inside [0, epochs)");
    }
    if (threshold < 0.0) throw ConfigError("train: threshold must be >= 0");
    if (threshold_interval < 1) throw ConfigError("train: threshold_interval must be >= 1");
    if (stat_size < 1 || batch_size < 1) throw ConfigError("train: sizes must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("train: learning_rate must be positive");
    if (hidden_width < 1) throw ConfigError("train: hidden_width must be >= 1");
}

ModelConfig TrainConfig::model_config() const {
    ModelConfig mc;
    mc.library = library;
    mc.latent_dim = latent_dim;
    mc.hidden_width = hidden_width;
    return mc;
}

double beta_schedule(const TrainConfig& cfg, int epoch) {
    if (epoch < 0 || epoch >= std::max(cfg.epochs, 1)) {
        throw ContractError("beta_schedule: epoch out of range");
    }
    if (cfg.epoch_beta_spike && cfg.beta_spike && epoch >= *cfg.epoch_beta_spike) {
        return *cfg.beta_spike;
    }
    constexpr double warmup_start = 0.01;
    constexpr int warmup_epochs = 100;
    if (epoch >= warmup_epochs) return cfg.beta_init;
    return warmup_start +
           (cfg.beta_init - warmup_start) * static_cast<double>(epoch) / warmup_epochs;
}

double lambda_schedule(const TrainConfig& cfg, int epoch) {
    if (epoch < 0 || epoch >= std::max(cfg.epochs, 1)) {
        throw ContractError("lambda_schedule: epoch out of range");
    }
    if (cfg.epoch_lambda_spike && cfg.lambda_spike && epoch >= *cfg.epoch_lambda_spike) {
        return *cfg.lambda_spike;
    }
    return cfg.lambda_init;
}

int threshold_update(HyperSindyModel& model, const TrainConfig& cfg, Rng& rng) {
    const int l = model.config().term_count();
    const int n = model.config().state_dim();
    const Tensor z = sample_prior(model.config().latent_dim, cfg.stat_size, rng);
    const std::vector<double> coeffs = model.coefficients_nograd(z, /*masked=*/false);
    auto& perm = model.mask().permanent_zero;
    int newly_zeroed = 0;
    for (int j = 0; j < l; ++j) {
        for (int i = 0; i < n; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * n + i;
            double mean = 0.0;
            for (int r = 0; r < cfg.stat_size; ++r) {
                mean += coeffs[static_cast<std::size_t>(r) * l * n + idx];
            }
            mean /= cfg.stat_size;
            if (perm[idx] != 0.0 && std::abs(mean) < cfg.threshold) {
                perm[idx] = 0.0;
                ++newly_zeroed;
            }
        }
    }
    return newly_zeroed;
}

int threshold_update(HyperSindyModel& model, const TrainConfig& cfg, std::uint64_t seed) {
    Rng rng = Rng::derive(seed, streams::prior, 0);
    return threshold_update(model, cfg, rng);
}

void write_history_csv(const std::string& path, const TrainHistory& history) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "epoch,recon,kl,l0,beta,lambda,active_terms\n";
    for (const EpochRecord& r : history.epochs) {
        os << r.epoch << ',' << format_double(r.reconstruction) << ',' << format_double(r.kl)
           << ',' << format_double(r.l0) << ',' << format_double(r.beta) << ','
           << format_double(r.lambda) << ',' << r.active_terms << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

std::pair<HyperSindyModel, TrainHistory> train(const TrainConfig& cfg, const Trajectory& data) {
    cfg.validate();
    if (!data.has_derivatives()) {
        throw ContractError("train: trajectory has no derivative estimates");
    }
    const int rows = static_cast<int>(data.rows());
    if (rows < cfg.batch_size) {
        throw ContractError("train: dataset smaller than one batch");
    }
    const int n = cfg.library.state_dim;
    if (data.dim != n) {
        throw ShapeError("train: trajectory dimension does not match library state_dim");
    }

    HyperSindyModel model = HyperSindyModel::init(cfg.model_config(), cfg.seed);
    model.set_scaling(DataScaling::from_data(cfg.library, data.states, data.derivatives, rows));

    AdamWConfig opt_cfg;
    opt_cfg.learning_rate = cfg.learning_rate;
    AdamW optimizer(model.parameters(), opt_cfg);

    TrainHistory history;
    history.epochs.reserve(static_cast<std::size_t>(cfg.epochs));

    const int batches = rows / cfg.batch_size; // last partial batch dropped
    std::vector<int> order(static_cast<std::size_t>(rows));
    Tensor batch_x = Tensor::zeros({cfg.batch_size, n});
    Tensor batch_dx = Tensor::zeros({cfg.batch_size, n});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double beta = beta_schedule(cfg, epoch);
        const double lambda = lambda_schedule(cfg, epoch);
        Rng shuffle_rng = Rng::derive(cfg.seed, streams::shuffle, static_cast<std::uint64_t>(epoch));
        shuffle_rng.shuffle_indices(order.data(), order.size());
        Rng enc_rng = Rng::derive(cfg.seed, streams::encoder_eps, static_cast<std::uint64_t>(epoch));
        Rng mask_rng = Rng::derive(cfg.seed, streams::mask_eps, static_cast<std::uint64_t>(epoch));

        EpochRecord record;
        record.epoch = epoch;
        record.beta = beta;
        record.lambda = lambda;

        for (int b = 0; b < batches; ++b) {
            auto bx = batch_x.data();
            auto bdx = batch_dx.data();
            for (int r = 0; r < cfg.batch_size; ++r) {
                const int src = order[static_cast<std::size_t>(b) * cfg.batch_size + r];
                for (int i = 0; i < n; ++i) {
                    bx[static_cast<std::size_t>(r) * n + i] =
                        data.states[static_cast<std::size_t>(src) * n + i];
                    bdx[static_cast<std::size_t>(r) * n + i] =
                        data.derivatives[static_cast<std::size_t>(src) * n + i];
                }
            }
            Graph g;
            const auto loss = model.elbo_loss(g, batch_x, batch_dx, beta, lambda, enc_rng,
                                              mask_rng);
            if (!std::isfinite(loss.total.item())) {
                throw TrainingNanError(epoch, loss.reconstruction, loss.kl, loss.l0);
            }
            g.backward(loss.total);
            optimizer.step();
            record.reconstruction += loss.reconstruction;
            record.kl += loss.kl;
            record.l0 += loss.l0;
        }
        record.reconstruction /= batches;
        record.kl /= batches;
        record.l0 /= batches;

        if (epoch > 0 && epoch % cfg.threshold_interval == 0) {
            Rng prior_rng = Rng::derive(cfg.seed, streams::prior, static_cast<std::uint64_t>(epoch));
            threshold_update(model, cfg, prior_rng);
        }
        record.active_terms = model.mask().active_count();
        history.epochs.push_back(record);
    }
    return {std::move(model), std::move(history)};
}

} // namespace hypersindy

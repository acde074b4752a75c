// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hypersindy/library.hpp"
#include "hypersindy/rng.hpp"
#include "hypersindy/tensor.hpp"

#include <cstdint>
#include <vector>

namespace hypersindy {

struct ModelConfig {
    LibrarySpec library;
    int latent_dim = 6;
    int hidden_width = 64;
    int num_hidden = 5;

    int state_dim() const { return library.state_dim; }
    int term_count() const { return library.term_count(); }
    void validate() const;
};

// y = x W + b with W stored (in x out).
struct DenseLayer {
    Tensor weight;
    Tensor bias;
};

// num_hidden ELU layers of uniform width followed by a linear output layer.
struct Mlp {
    std::vector<DenseLayer> hidden;
    DenseLayer output;

    static Mlp create(int in, int width, int out, int num_hidden, Rng& rng,
                      bool zero_output = false);
    Tensor forward(Graph& g, const Tensor& x) const;
    void collect_params(std::vector<Tensor>& out) const;
};

struct EncoderParams {
    Mlp trunk; // input 2n, output width h
    DenseLayer head_mu;
    DenseLayer head_logvar;
};

// Trainable hard-concrete gate per coefficient. permanent_zero holds 1 for
// live entries and 0 for entries forced to zero for the rest of training.
struct SparseMask {
    static constexpr double beta_l0 = 2.0 / 3.0;
    static constexpr double gamma = -0.1;
    static constexpr double zeta = 1.1;

    Tensor log_alpha;                   // l x n
    std::vector<double> permanent_zero; // l x n, values in {0, 1}

    int active_count() const;
};

struct LatentSample {
    Tensor mu;     // b x d
    Tensor logvar; // b x d
    Tensor sigma;  // b x d, exp(logvar / 2)
    Tensor z;      // b x d
};

// Diagonal conditioning of the regression. The model is trained on library
// columns scaled to unit RMS and on per-dimension scaled encoder inputs; the
// loss and every external quantity (predictions, coefficients, thresholds)
// stay in raw data units. This is an exact reparameterization: raw
// coefficients are scaled ones times derivative_scale[i] / library_scale[j].
struct DataScaling {
    std::vector<double> state_scale;      // n
    std::vector<double> derivative_scale; // n
    std::vector<double> library_scale;    // l

    static DataScaling identity(const LibrarySpec& spec);
    // Uncentered per-column RMS over a dataset with derivatives.
    static DataScaling from_data(const LibrarySpec& spec, std::span<const double> states,
                                 std::span<const double> derivatives, int rows);
    void validate(const LibrarySpec& spec) const;
};

// Standard normal draws, shape b x d, in row-major order.
Tensor sample_prior(int d, int b, Rng& rng);
Tensor sample_prior(int d, int b, std::uint64_t seed);

// Closed-form KL(N(mu, diag sigma^2) || N(0, I)), averaged over the batch.
double kl_divergence(const Tensor& mu, const Tensor& sigma);

class HyperSindyModel {
public:
    HyperSindyModel() = default;
    static HyperSindyModel init(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const { return config_; }
    EncoderParams& encoder() { return encoder_; }
    const EncoderParams& encoder() const { return encoder_; }
    Mlp& hypernet() { return hypernet_; }
    const Mlp& hypernet() const { return hypernet_; }
    SparseMask& mask() { return mask_; }
    const SparseMask& mask() const { return mask_; }
    const DataScaling& scaling() const { return scaling_; }
    void set_scaling(DataScaling scaling);

    // Elementwise factor turning hypernet outputs into raw-unit coefficients
    // (l x n row-major).
    std::vector<double> raw_coefficient_factor() const;

    // q(z | x, xdot) with the reparameterization trick; eps ~ N(0, I) comes
    // from `rng` in row-major order.
    LatentSample encode(Graph& g, const Tensor& x, const Tensor& xdot, Rng& rng) const;
    LatentSample encode(Graph& g, const Tensor& x, const Tensor& xdot, std::uint64_t seed) const;
    // Deterministic-noise variant: z = mu + eps * sigma for a given eps.
    LatentSample encode_with_eps(Graph& g, const Tensor& x, const Tensor& xdot,
                                 const Tensor& eps) const;

    // H(z) reshaped to b x l x n.
    Tensor hypernet_coefficients(Graph& g, const Tensor& z) const;

    // One hard-concrete mask sample per batch example (b x l x n); gradients
    // reach log_alpha through unclamped entries only.
    Tensor mask_sample_train(Graph& g, int batch, Rng& rng) const;
    Tensor mask_sample_train(Graph& g, int batch, std::uint64_t seed) const;
    // Deterministic-noise variant taking log(u) - log(1-u) values directly.
    Tensor mask_sample_from_logits(Graph& g, const Tensor& logit_u) const;

    // Deterministic evaluation mask (l x n), permanent zeros applied.
    std::vector<double> mask_eval() const;

    // Sum over live entries of sigmoid(log_alpha - beta_l0 * log(-gamma/zeta)).
    Tensor l0_penalty(Graph& g) const;

    // Theta(x) (coeffs ⊙ mask) for per-example masks and coefficients.
    Tensor predict_derivative(Graph& g, const Tensor& x, const Tensor& coeffs,
                              const Tensor& mask_batch) const;

    struct ElboResult {
        Tensor total;
        double reconstruction = 0.0;
        double kl = 0.0;
        double l0 = 0.0;
    };
    ElboResult elbo_loss(Graph& g, const Tensor& x, const Tensor& xdot, double beta,
                         double lambda, Rng& encoder_rng, Rng& mask_rng) const;
    ElboResult elbo_loss(Graph& g, const Tensor& x, const Tensor& xdot, double beta,
                         double lambda, std::uint64_t seed) const;

    // Raw-unit coefficients for a batch of z, with the evaluation mask
    // applied when `masked`; plain data (no graph), shape b x l x n.
    std::vector<double> coefficients_nograd(const Tensor& z, bool masked) const;

    std::vector<Tensor> parameters();

private:
    ModelConfig config_;
    EncoderParams encoder_;
    Mlp hypernet_;
    SparseMask mask_;
    DataScaling scaling_;
};

} // namespace hypersindy

// SPDX-License-Identifier: Apache-2.0

#include "hypersindy/model.hpp"

#include "hypersindy/errors.hpp"

#include <cmath>

namespace hypersindy {

void ModelConfig::validate() const {
    library.validate();
    if (latent_dim < 1) throw ConfigError("model: latent_dim must be >= 1");
    if (hidden_width < 1) throw ConfigError("model: hidden_width must be >= 1");
    if (num_hidden < 1) throw ConfigError("model: num_hidden must be >= 1");
}

namespace {

// Kaiming-uniform fan-in weights, zero biases.
DenseLayer make_layer(int in, int out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    Tensor w = Tensor::zeros({in, out}, true);
    auto wd = w.data();
    for (std::size_t i = 0; i < wd.size(); ++i) {
        wd[i] = bound * (2.0 * rng.uniform01() - 1.0);
    }
    Tensor b = Tensor::zeros({out}, true);
    return {w, b};
}

Tensor dense_forward(Graph& g, const DenseLayer& layer, const Tensor& x) {
    return g.add(g.matmul(x, layer.weight), layer.bias);
}

} // namespace

Mlp Mlp::create(int in, int width, int out, int num_hidden, Rng& rng, bool zero_output) {
    Mlp mlp;
    int prev = in;
    for (int i = 0; i < num_hidden; ++i) {
        mlp.hidden.push_back(make_layer(prev, width, rng));
        prev = width;
    }
    if (zero_output) {
        mlp.output = {Tensor::zeros({prev, out}, true), Tensor::zeros({out}, true)};
    } else {
        mlp.output = make_layer(prev, out, rng);
    }
    return mlp;
}

Tensor Mlp::forward(Graph& g, const Tensor& x) const {
    Tensor h = x;
    for (const DenseLayer& layer : hidden) {
        h = g.elu(dense_forward(g, layer, h));
    }
    return dense_forward(g, output, h);
}

void Mlp::collect_params(std::vector<Tensor>& out) const {
    for (const DenseLayer& layer : hidden) {
        out.push_back(layer.weight);
        out.push_back(layer.bias);
    }
    out.push_back(output.weight);
    out.push_back(output.bias);
}

int SparseMask::active_count() const {
    int count = 0;
    for (double v : permanent_zero) count += v != 0.0 ? 1 : 0;
    return count;
}

DataScaling DataScaling::identity(const LibrarySpec& spec) {
    DataScaling s;
    s.state_scale.assign(static_cast<std::size_t>(spec.state_dim), 1.0);
    s.derivative_scale.assign(static_cast<std::size_t>(spec.state_dim), 1.0);
    s.library_scale.assign(static_cast<std::size_t>(spec.term_count()), 1.0);
    return s;
}

DataScaling DataScaling::from_data(const LibrarySpec& spec, std::span<const double> states,
                                   std::span<const double> derivatives, int rows) {
    const int n = spec.state_dim;
    const int l = spec.term_count();
    if (rows < 1) throw ContractError("DataScaling::from_data: empty dataset");
    if (states.size() != static_cast<std::size_t>(rows) * n ||
        derivatives.size() != states.size()) {
        throw ShapeError("DataScaling::from_data: buffer sizes do not match rows x state_dim");
    }
    DataScaling s = identity(spec);
    auto rms = [rows](std::span<const double> data, int stride, int col) {
        double sq = 0.0;
        for (int r = 0; r < rows; ++r) {
            const double v = data[static_cast<std::size_t>(r) * stride + col];
            sq += v * v;
        }
        const double value = std::sqrt(sq / rows);
        return value > 0.0 ? value : 1.0;
    };
    for (int i = 0; i < n; ++i) {
        s.state_scale[static_cast<std::size_t>(i)] = rms(states, n, i);
        s.derivative_scale[static_cast<std::size_t>(i)] = rms(derivatives, n, i);
    }
    const std::vector<double> theta = evaluate_library(spec, states, rows);
    for (int j = 0; j < l; ++j) {
        s.library_scale[static_cast<std::size_t>(j)] = rms(theta, l, j);
    }
    return s;
}

void DataScaling::validate(const LibrarySpec& spec) const {
    if (state_scale.size() != static_cast<std::size_t>(spec.state_dim) ||
        derivative_scale.size() != static_cast<std::size_t>(spec.state_dim) ||
        library_scale.size() != static_cast<std::size_t>(spec.term_count())) {
        throw ShapeError("DataScaling: vector lengths do not match the library spec");
    }
    for (const auto* vecs : {&state_scale, &derivative_scale, &library_scale}) {
        for (double v : *vecs) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw DomainError("DataScaling: scales must be positive and finite");
            }
        }
    }
}

Tensor sample_prior(int d, int b, Rng& rng) {
    if (d < 1 || b < 1) throw ContractError("sample_prior: b and d must be >= 1");
    Tensor z = Tensor::zeros({b, d});
    auto data = z.data();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = rng.normal();
    return z;
}

Tensor sample_prior(int d, int b, std::uint64_t seed) {
    Rng rng = Rng::derive(seed, streams::prior, 0);
    return sample_prior(d, b, rng);
}

double kl_divergence(const Tensor& mu, const Tensor& sigma) {
    if (mu.shape() != sigma.shape() || mu.dim() != 2) {
        throw ShapeError("kl_divergence: mu and sigma must both be b x d");
    }
    const int b = mu.shape()[0];
    auto mv = mu.data();
    auto sv = sigma.data();
    double total = 0.0;
    for (std::size_t i = 0; i < mv.size(); ++i) {
        if (sv[i] <= 0.0) throw DomainError("kl_divergence: sigma must be positive");
        const double s2 = sv[i] * sv[i];
        total += -0.5 * (1.0 + std::log(s2) - mv[i] * mv[i] - s2);
    }
    return total / static_cast<double>(b);
}

HyperSindyModel HyperSindyModel::init(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    HyperSindyModel model;
    model.config_ = config;
    const int n = config.state_dim();
    const int l = config.term_count();
    const int d = config.latent_dim;
    const int h = config.hidden_width;

    Rng rng = Rng::derive(seed, streams::init, 0);
    model.encoder_.trunk = Mlp::create(2 * n, h, h, config.num_hidden, rng);
    model.encoder_.head_mu = make_layer(h, d, rng);
    model.encoder_.head_logvar = make_layer(h, d, rng);
    // The hypernetwork output starts at zero so the first predictions are the
    // zero field; the library columns reach thousands on the benchmark
    // attractors and a random initial coefficient matrix produces a loss
    // transient that amsgrad's max-second-moment never forgets.
    model.hypernet_ = Mlp::create(d, h, l * n, config.num_hidden, rng, /*zero_output=*/true);
    model.mask_.log_alpha = Tensor::full({l, n}, 2.2, true);
    model.mask_.permanent_zero.assign(static_cast<std::size_t>(l) * n, 1.0);
    model.scaling_ = DataScaling::identity(config.library);
    return model;
}

void HyperSindyModel::set_scaling(DataScaling scaling) {
    scaling.validate(config_.library);
    scaling_ = std::move(scaling);
}

std::vector<double> HyperSindyModel::raw_coefficient_factor() const {
    const int l = config_.term_count();
    const int n = config_.state_dim();
    std::vector<double> factor(static_cast<std::size_t>(l) * n);
    for (int j = 0; j < l; ++j) {
        for (int i = 0; i < n; ++i) {
            factor[static_cast<std::size_t>(j) * n + i] =
                scaling_.derivative_scale[static_cast<std::size_t>(i)] /
                scaling_.library_scale[static_cast<std::size_t>(j)];
        }
    }
    return factor;
}

LatentSample HyperSindyModel::encode_with_eps(Graph& g, const Tensor& x, const Tensor& xdot,
                                              const Tensor& eps) const {
    const int n = config_.state_dim();
    if (x.dim() != 2 || x.shape()[1] != n) {
        throw ShapeError("encode: x must be b x n, got " + x.shape_str());
    }
    if (xdot.size() == 0) throw ContractError("encode: derivatives are required");
    if (xdot.shape() != x.shape()) {
        throw ShapeError("encode: xdot shape " + xdot.shape_str() + " != x shape " +
                         x.shape_str());
    }
    const int b = x.shape()[0];
    Tensor joint = Tensor::zeros({b, 2 * n});
    auto jd = joint.data();
    auto xd = x.data();
    auto dd = xdot.data();
    for (int r = 0; r < b; ++r) {
        for (int i = 0; i < n; ++i) {
            jd[static_cast<std::size_t>(r) * 2 * n + i] =
                xd[static_cast<std::size_t>(r) * n + i] /
                scaling_.state_scale[static_cast<std::size_t>(i)];
            jd[static_cast<std::size_t>(r) * 2 * n + n + i] =
                dd[static_cast<std::size_t>(r) * n + i] /
                scaling_.derivative_scale[static_cast<std::size_t>(i)];
        }
    }
    Tensor h = encoder_.trunk.forward(g, joint);
    LatentSample sample;
    sample.mu = dense_forward(g, encoder_.head_mu, h);
    sample.logvar = dense_forward(g, encoder_.head_logvar, h);
    sample.sigma = g.exp(g.affine(sample.logvar, 0.5));
    if (eps.shape() != sample.mu.shape()) {
        throw ShapeError("encode: eps must be b x d, got " + eps.shape_str());
    }
    sample.z = g.add(sample.mu, g.multiply(eps, sample.sigma));
    return sample;
}

LatentSample HyperSindyModel::encode(Graph& g, const Tensor& x, const Tensor& xdot,
                                     Rng& rng) const {
    const int b = x.dim() == 2 ? x.shape()[0] : 0;
    Tensor eps = Tensor::zeros({b, config_.latent_dim});
    auto ed = eps.data();
    for (std::size_t i = 0; i < ed.size(); ++i) ed[i] = rng.normal();
    return encode_with_eps(g, x, xdot, eps);
}

LatentSample HyperSindyModel::encode(Graph& g, const Tensor& x, const Tensor& xdot,
                                     std::uint64_t seed) const {
    Rng rng = Rng::derive(seed, streams::encoder_eps, 0);
    return encode(g, x, xdot, rng);
}

Tensor HyperSindyModel::hypernet_coefficients(Graph& g, const Tensor& z) const {
    if (z.dim() != 2 || z.shape()[1] != config_.latent_dim) {
        throw ShapeError("hypernet_coefficients: z must be b x d, got " + z.shape_str());
    }
    const int b = z.shape()[0];
    Tensor flat = hypernet_.forward(g, z);
    return g.reshape(flat, {b, config_.term_count(), config_.state_dim()});
}

Tensor HyperSindyModel::mask_sample_from_logits(Graph& g, const Tensor& logit_u) const {
    const int l = config_.term_count();
    const int n = config_.state_dim();
    if (logit_u.dim() != 3 || logit_u.shape()[1] != l || logit_u.shape()[2] != n) {
        throw ShapeError("mask_sample: logit_u must be b x l x n, got " + logit_u.shape_str());
    }
    Tensor logits = g.add(logit_u, mask_.log_alpha);
    Tensor s = g.sigmoid(g.affine(logits, 1.0 / SparseMask::beta_l0));
    Tensor stretched = g.affine(s, SparseMask::zeta - SparseMask::gamma, SparseMask::gamma);
    Tensor clamped = g.clamp01(stretched);
    Tensor perm = Tensor::from_data({l, n}, mask_.permanent_zero);
    return g.multiply(clamped, perm);
}

Tensor HyperSindyModel::mask_sample_train(Graph& g, int batch, Rng& rng) const {
    if (batch < 1) throw ContractError("mask_sample_train: batch must be >= 1");
    const int l = config_.term_count();
    const int n = config_.state_dim();
    Tensor logit_u = Tensor::zeros({batch, l, n});
    auto lu = logit_u.data();
    for (std::size_t i = 0; i < lu.size(); ++i) {
        double u = rng.uniform_open01();
        if (u >= 1.0) u = std::nextafter(1.0, 0.0);
        lu[i] = std::log(u) - std::log1p(-u);
    }
    return mask_sample_from_logits(g, logit_u);
}

Tensor HyperSindyModel::mask_sample_train(Graph& g, int batch, std::uint64_t seed) const {
    Rng rng = Rng::derive(seed, streams::mask_eps, 0);
    return mask_sample_train(g, batch, rng);
}

std::vector<double> HyperSindyModel::mask_eval() const {
    const auto la = mask_.log_alpha.data();
    std::vector<double> m(la.size());
    for (std::size_t i = 0; i < la.size(); ++i) {
        const double s = 1.0 / (1.0 + std::exp(-la[i]));
        double v = s * (SparseMask::zeta - SparseMask::gamma) + SparseMask::gamma;
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        m[i] = v * mask_.permanent_zero[i];
    }
    return m;
}

Tensor HyperSindyModel::l0_penalty(Graph& g) const {
    const double shift = -SparseMask::beta_l0 * std::log(-SparseMask::gamma / SparseMask::zeta);
    Tensor per_entry = g.sigmoid(g.affine(mask_.log_alpha, 1.0, shift));
    Tensor live = Tensor::from_data({config_.term_count(), config_.state_dim()},
                                    mask_.permanent_zero);
    return g.sum(g.multiply(per_entry, live));
}

Tensor HyperSindyModel::predict_derivative(Graph& g, const Tensor& x, const Tensor& coeffs,
                                           const Tensor& mask_batch) const {
    const int n = config_.state_dim();
    const int l = config_.term_count();
    if (x.dim() != 2 || x.shape()[1] != n) {
        throw ShapeError("predict_derivative: x must be b x n, got " + x.shape_str());
    }
    const int b = x.shape()[0];
    const std::vector<int> want{b, l, n};
    if (coeffs.shape() != want) {
        throw ShapeError("predict_derivative: coeffs must be b x l x n, got " +
                         coeffs.shape_str());
    }
    if (mask_batch.shape() != want) {
        throw ShapeError("predict_derivative: mask must be b x l x n, got " +
                         mask_batch.shape_str());
    }
    std::vector<double> theta_data = evaluate_library(config_.library, x.data(), b);
    for (int r = 0; r < b; ++r) {
        for (int j = 0; j < l; ++j) {
            theta_data[static_cast<std::size_t>(r) * l + j] /=
                scaling_.library_scale[static_cast<std::size_t>(j)];
        }
    }
    Tensor theta = Tensor::from_data({b, 1, l}, std::move(theta_data));
    Tensor masked = g.multiply(coeffs, mask_batch);
    Tensor scaled_pred = g.reshape(g.matmul(theta, masked), {b, n});
    Tensor unscale = Tensor::from_data({n}, scaling_.derivative_scale);
    return g.multiply(scaled_pred, unscale);
}

HyperSindyModel::ElboResult HyperSindyModel::elbo_loss(Graph& g, const Tensor& x,
                                                       const Tensor& xdot, double beta,
                                                       double lambda, Rng& encoder_rng,
                                                       Rng& mask_rng) const {
    if (beta < 0.0 || lambda < 0.0) {
        throw ContractError("elbo_loss: beta and lambda must be nonnegative");
    }
    const int b = x.shape()[0];
    LatentSample latent = encode(g, x, xdot, encoder_rng);
    Tensor coeffs = hypernet_coefficients(g, latent.z);
    Tensor mask = mask_sample_train(g, b, mask_rng);
    Tensor pred = predict_derivative(g, x, coeffs, mask);

    Tensor err = g.subtract(xdot, pred);
    Tensor recon = g.affine(g.sum(g.square(err)), 1.0 / static_cast<double>(b));

    // KL to N(0, I): mean over batch of -0.5 sum_j (1 + logvar - mu^2 - exp(logvar))
    Tensor inner = g.subtract(g.subtract(g.affine(latent.logvar, 1.0, 1.0), g.square(latent.mu)),
                              g.exp(latent.logvar));
    Tensor kl = g.affine(g.sum(inner), -0.5 / static_cast<double>(b));

    Tensor l0 = l0_penalty(g);

    Tensor total = g.add(recon, g.add(g.affine(kl, beta), g.affine(l0, lambda)));
    ElboResult result;
    result.total = total;
    result.reconstruction = recon.item();
    result.kl = kl.item();
    result.l0 = l0.item();
    return result;
}

HyperSindyModel::ElboResult HyperSindyModel::elbo_loss(Graph& g, const Tensor& x,
                                                       const Tensor& xdot, double beta,
                                                       double lambda, std::uint64_t seed) const {
    Rng enc = Rng::derive(seed, streams::encoder_eps, 0);
    Rng mask = Rng::derive(seed, streams::mask_eps, 0);
    return elbo_loss(g, x, xdot, beta, lambda, enc, mask);
}

std::vector<double> HyperSindyModel::coefficients_nograd(const Tensor& z, bool masked) const {
    // Forward under a scratch graph; parameter grads are untouched because no
    // backward pass runs here.
    Graph g;
    Tensor coeffs = hypernet_coefficients(g, z);
    const std::vector<double> factor = raw_coefficient_factor();
    const std::vector<double> m = mask_eval();
    const int b = z.shape()[0];
    const std::size_t ln = factor.size();
    std::vector<double> out(static_cast<std::size_t>(b) * ln);
    auto cd = coeffs.data();
    for (int r = 0; r < b; ++r) {
        for (std::size_t i = 0; i < ln; ++i) {
            double v = cd[static_cast<std::size_t>(r) * ln + i] * factor[i];
            if (masked) v *= m[i];
            out[static_cast<std::size_t>(r) * ln + i] = v;
        }
    }
    return out;
}

std::vector<Tensor> HyperSindyModel::parameters() {
    std::vector<Tensor> params;
    encoder_.trunk.collect_params(params);
    params.push_back(encoder_.head_mu.weight);
    params.push_back(encoder_.head_mu.bias);
    params.push_back(encoder_.head_logvar.weight);
    params.push_back(encoder_.head_logvar.bias);
    hypernet_.collect_params(params);
    params.push_back(mask_.log_alpha);
    return params;
}

} // namespace hypersindy

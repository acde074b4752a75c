// SPDX-License-Identifier: Apache-2.0

#include "hypersindy/checkpoint.hpp"

#include "hypersindy/errors.hpp"
#include "hypersindy/json_writer.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace hypersindy {
namespace {

constexpr const char* kFormatTag = "hypersindy-checkpoint-v1";

void write_layer(JsonWriter& w, const DenseLayer& layer) {
    const int in = layer.weight.shape()[0];
    const int out = layer.weight.shape()[1];
    w.begin_object();
    w.key("weight");
    w.matrix(layer.weight.data(), in, out);
    w.key("bias");
    w.numbers(layer.bias.data());
    w.end_object();
}

void write_mlp(JsonWriter& w, const Mlp& mlp) {
    w.begin_array();
    for (const DenseLayer& layer : mlp.hidden) write_layer(w, layer);
    write_layer(w, mlp.output);
    w.end_array();
}

using nlohmann::json;

const json& need(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ConfigError(std::string("checkpoint: missing key '") + key + "'");
    }
    return *it;
}

std::vector<double> read_vector(const json& j) {
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

std::vector<double> read_matrix(const json& j, int rows, int cols) {
    if (static_cast<int>(j.size()) != rows) {
        throw ConfigError("checkpoint: matrix row count mismatch");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(rows) * cols);
    for (const auto& row : j) {
        if (static_cast<int>(row.size()) != cols) {
            throw ConfigError("checkpoint: matrix column count mismatch");
        }
        for (const auto& v : row) out.push_back(v.get<double>());
    }
    return out;
}

DenseLayer read_layer(const json& j, int in, int out) {
    DenseLayer layer;
    layer.weight = Tensor::from_data({in, out}, read_matrix(need(j, "weight"), in, out), true);
    std::vector<double> bias = read_vector(need(j, "bias"));
    if (static_cast<int>(bias.size()) != out) {
        throw ConfigError("checkpoint: bias length mismatch");
    }
    layer.bias = Tensor::from_data({out}, std::move(bias), true);
    return layer;
}

Mlp read_mlp(const json& j, int in, int width, int out, int num_hidden) {
    if (static_cast<int>(j.size()) != num_hidden + 1) {
        throw ConfigError("checkpoint: mlp layer count mismatch");
    }
    Mlp mlp;
    int prev = in;
    for (int i = 0; i < num_hidden; ++i) {
        mlp.hidden.push_back(read_layer(j[static_cast<std::size_t>(i)], prev, width));
        prev = width;
    }
    mlp.output = read_layer(j[static_cast<std::size_t>(num_hidden)], prev, out);
    return mlp;
}

json optional_to_json_int(const std::optional<int>& v) {
    return v ? json(*v) : json(nullptr);
}

} // namespace

void save_checkpoint(std::ostream& os, const Checkpoint& ckpt) {
    const ModelConfig& mc = ckpt.model.config();
    JsonWriter w(os);
    w.begin_object();
    w.key("format");
    w.value(kFormatTag);

    w.key("system");
    w.begin_object();
    w.key("name");
    w.value(system_to_string(ckpt.system.name));
    w.key("state_dim");
    w.value(ckpt.system.state_dim);
    w.key("parameter_means");
    w.numbers(ckpt.system.parameter_means);
    w.key("noise_scale");
    w.value(ckpt.system.noise_scale);
    w.key("noise_kind");
    w.value(ckpt.system.noise_kind == NoiseKind::parameter_noise ? "parameter_noise"
                                                                 : "state_dependent_diffusion");
    w.end_object();

    const TrainConfig& tc = ckpt.config;
    w.key("train_config");
    w.begin_object();
    w.key("system");
    w.value(system_to_string(tc.system));
    w.key("library");
    w.begin_object();
    w.key("state_dim");
    w.value(tc.library.state_dim);
    w.key("max_degree");
    w.value(tc.library.max_degree);
    w.key("include_constant");
    w.value(tc.library.include_constant);
    w.end_object();
    w.key("latent_dim");
    w.value(tc.latent_dim);
    w.key("beta_init");
    w.value(tc.beta_init);
    w.key("beta_spike");
    if (tc.beta_spike) w.value(*tc.beta_spike); else w.null();
    w.key("epoch_beta_spike");
    if (tc.epoch_beta_spike) w.value(*tc.epoch_beta_spike); else w.null();
    w.key("lambda_init");
    w.value(tc.lambda_init);
    w.key("lambda_spike");
    if (tc.lambda_spike) w.value(*tc.lambda_spike); else w.null();
    w.key("epoch_lambda_spike");
    if (tc.epoch_lambda_spike) w.value(*tc.epoch_lambda_spike); else w.null();
    w.key("epochs");
    w.value(tc.epochs);
    w.key("threshold");
    w.value(tc.threshold);
    w.key("threshold_interval");
    w.value(tc.threshold_interval);
    w.key("stat_size");
    w.value(tc.stat_size);
    w.key("batch_size");
    w.value(tc.batch_size);
    w.key("learning_rate");
    w.value(tc.learning_rate);
    w.key("hidden_width");
    w.value(tc.hidden_width);
    w.key("seed");
    w.value(static_cast<unsigned long long>(tc.seed));
    w.end_object();

    w.key("scaling");
    w.begin_object();
    w.key("state_scale");
    w.numbers(ckpt.model.scaling().state_scale);
    w.key("derivative_scale");
    w.numbers(ckpt.model.scaling().derivative_scale);
    w.key("library_scale");
    w.numbers(ckpt.model.scaling().library_scale);
    w.end_object();

    w.key("encoder");
    w.begin_object();
    w.key("trunk");
    write_mlp(w, ckpt.model.encoder().trunk);
    w.key("head_mu");
    write_layer(w, ckpt.model.encoder().head_mu);
    w.key("head_logvar");
    write_layer(w, ckpt.model.encoder().head_logvar);
    w.end_object();

    w.key("hypernet");
    write_mlp(w, ckpt.model.hypernet());

    const int l = mc.term_count();
    const int n = mc.state_dim();
    w.key("log_alpha");
    w.matrix(ckpt.model.mask().log_alpha.data(), l, n);
    w.key("permanent_zero");
    w.matrix(ckpt.model.mask().permanent_zero, l, n);

    w.end_object();
    os << '\n';
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    save_checkpoint(os, ckpt);
    if (!os) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(std::istream& is) {
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("checkpoint: invalid json: ") + e.what());
    }
    if (need(j, "format").get<std::string>() != kFormatTag) {
        throw ConfigError("checkpoint: unknown format tag");
    }

    Checkpoint ckpt;
    {
        const json& s = need(j, "system");
        ckpt.system.name = system_from_string(need(s, "name").get<std::string>());
        ckpt.system.state_dim = need(s, "state_dim").get<int>();
        ckpt.system.parameter_means = read_vector(need(s, "parameter_means"));
        ckpt.system.noise_scale = need(s, "noise_scale").get<double>();
        const std::string kind = need(s, "noise_kind").get<std::string>();
        if (kind == "parameter_noise") {
            ckpt.system.noise_kind = NoiseKind::parameter_noise;
        } else if (kind == "state_dependent_diffusion") {
            ckpt.system.noise_kind = NoiseKind::state_dependent_diffusion;
        } else {
            throw ConfigError("checkpoint: unknown noise_kind " + kind);
        }
        ckpt.system.validate();
    }
    {
        const json& t = need(j, "train_config");
        TrainConfig& tc = ckpt.config;
        tc.system = system_from_string(need(t, "system").get<std::string>());
        const json& lib = need(t, "library");
        tc.library.state_dim = need(lib, "state_dim").get<int>();
        tc.library.max_degree = need(lib, "max_degree").get<int>();
        tc.library.include_constant = need(lib, "include_constant").get<bool>();
        tc.latent_dim = need(t, "latent_dim").get<int>();
        tc.beta_init = need(t, "beta_init").get<double>();
        if (!need(t, "beta_spike").is_null()) tc.beta_spike = t["beta_spike"].get<double>();
        if (!need(t, "epoch_beta_spike").is_null()) {
            tc.epoch_beta_spike = t["epoch_beta_spike"].get<int>();
        }
        tc.lambda_init = need(t, "lambda_init").get<double>();
        if (!need(t, "lambda_spike").is_null()) tc.lambda_spike = t["lambda_spike"].get<double>();
        if (!need(t, "epoch_lambda_spike").is_null()) {
            tc.epoch_lambda_spike = t["epoch_lambda_spike"].get<int>();
        }
        tc.epochs = need(t, "epochs").get<int>();
        tc.threshold = need(t, "threshold").get<double>();
        tc.threshold_interval = need(t, "threshold_interval").get<int>();
        tc.stat_size = need(t, "stat_size").get<int>();
        tc.batch_size = need(t, "batch_size").get<int>();
        tc.learning_rate = need(t, "learning_rate").get<double>();
        tc.hidden_width = need(t, "hidden_width").get<int>();
        tc.seed = need(t, "seed").get<std::uint64_t>();
        tc.validate();
    }

    const ModelConfig mc = ckpt.config.model_config();
    const int n = mc.state_dim();
    const int l = mc.term_count();
    const int d = mc.latent_dim;
    const int h = mc.hidden_width;

    // Start from an initialized model and overwrite every array.
    ckpt.model = HyperSindyModel::init(mc, 0);
    {
        const json& s = need(j, "scaling");
        DataScaling scaling;
        scaling.state_scale = read_vector(need(s, "state_scale"));
        scaling.derivative_scale = read_vector(need(s, "derivative_scale"));
        scaling.library_scale = read_vector(need(s, "library_scale"));
        ckpt.model.set_scaling(std::move(scaling));
    }
    {
        const json& e = need(j, "encoder");
        ckpt.model.encoder().trunk = read_mlp(need(e, "trunk"), 2 * n, h, h, mc.num_hidden);
        ckpt.model.encoder().head_mu = read_layer(need(e, "head_mu"), h, d);
        ckpt.model.encoder().head_logvar = read_layer(need(e, "head_logvar"), h, d);
    }
    ckpt.model.hypernet() = read_mlp(need(j, "hypernet"), d, h, l * n, mc.num_hidden);
    ckpt.model.mask().log_alpha = Tensor::from_data({l, n}, read_matrix(need(j, "log_alpha"), l, n),
                                                    true);
    ckpt.model.mask().permanent_zero = read_matrix(need(j, "permanent_zero"), l, n);
    for (double v : ckpt.model.mask().permanent_zero) {
        if (v != 0.0 && v != 1.0) {
            throw ConfigError("checkpoint: permanent_zero entries must be 0 or 1");
        }
    }
    return ckpt;
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    return load_checkpoint(is);
}

} // namespace hypersindy

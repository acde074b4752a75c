// SPDX-License-Identifier: Apache-2.0

#include "hypersindy/presets.hpp"

#include "hypersindy/errors.hpp"
#include "hypersindy/json_writer.hpp"

#include <json.hpp>

#include <sstream>

namespace hypersindy {
namespace {

LibrarySpec default_library(SystemName system, int lorenz96_dim = 10) {
    switch (system) {
    case SystemName::lorenz: return {3, 3, false};
    case SystemName::rossler: return {3, 3, true};
    case SystemName::lotka_volterra: return {2, 3, true};
    case SystemName::lorenz96: return {lorenz96_dim, 3, true};
    }
    throw ConfigError("default_library: unknown system");
}

RunConfig make_run(SystemName system, double sigma, int latent_dim, int hidden_width, int epochs,
                   double threshold, std::optional<double> beta_spike,
                   std::optional<int> epoch_beta_spike, std::optional<double> lambda_spike,
                   std::optional<int> epoch_lambda_spike) {
    RunConfig run;
    run.system = SystemSpec::make(system, sigma);
    run.train.system = system;
    run.train.library = default_library(system);
    run.train.latent_dim = latent_dim;
    run.train.hidden_width = hidden_width;
    run.train.epochs = epochs;
    run.train.threshold = threshold;
    run.train.beta_spike = beta_spike;
    run.train.epoch_beta_spike = epoch_beta_spike;
    run.train.lambda_spike = lambda_spike;
    run.train.epoch_lambda_spike = epoch_lambda_spike;
    return run;
}

} // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{
        "lorenz_sigma1",  "lorenz_sigma5",      "lorenz_sigma10",
        "rossler_sigma1", "rossler_sigma5",     "rossler_sigma10",
        "rossler_rmse_sigma5", "rossler_rmse_sigma10",
        "lotka_volterra", "lorenz96_sigma10",   "tiny_test",
    };
    return names;
}

RunConfig get_preset(const std::string& name) {
    if (name == "lorenz_sigma1") {
        return make_run(SystemName::lorenz, 1.0, 6, 64, 999, 0.05, 100.0, 400, 10.0, 400);
    }
    if (name == "lorenz_sigma5") {
        return make_run(SystemName::lorenz, 5.0, 6, 64, 999, 0.05, 400.0, 400, 10.0, 400);
    }
    if (name == "lorenz_sigma10") {
        return make_run(SystemName::lorenz, 10.0, 6, 64, 999, 0.05, 400.0, 400, 10.0, 400);
    }
    if (name == "rossler_sigma1") {
        return make_run(SystemName::rossler, 1.0, 6, 64, 499, 0.01, 100.0, 200, 0.1, 200);
    }
    if (name == "rossler_sigma5") {
        return make_run(SystemName::rossler, 5.0, 6, 64, 600, 0.01, 100.0, 200, 0.1, 300);
    }
    if (name == "rossler_sigma10") {
        return make_run(SystemName::rossler, 10.0, 6, 64, 600, 0.01, 100.0, 200, 1.0, 300);
    }
    if (name == "rossler_rmse_sigma5") {
        return make_run(SystemName::rossler, 5.0, 6, 64, 600, 0.01, 200.0, 200, 0.1, 300);
    }
    if (name == "rossler_rmse_sigma10") {
        return make_run(SystemName::rossler, 10.0, 6, 64, 600, 0.01, 300.0, 200, 1.0, 300);
    }
    if (name == "lotka_volterra") {
        return make_run(SystemName::lotka_volterra, 1.0, 4, 64, 250, 0.1, std::nullopt,
                        std::nullopt, 0.1, 100);
    }
    if (name == "lorenz96_sigma10") {
        return make_run(SystemName::lorenz96, 10.0, 20, 128, 999, 0.05, std::nullopt,
                        std::nullopt, 10.0, 400);
    }
    if (name == "tiny_test") {
        RunConfig run = make_run(SystemName::lotka_volterra, 1.0, 2, 16, 50, 0.1, std::nullopt,
                                 std::nullopt, std::nullopt, std::nullopt);
        run.train.library = {2, 2, true};
        return run;
    }
    throw ConfigError("unknown preset: " + name);
}

TrainConfig rmse_preset(SystemName system, double sigma) {
    const std::string sig = sigma == 1.0 ? "1" : (sigma == 5.0 ? "5" : "10");
    if (system == SystemName::lorenz) {
        return get_preset("lorenz_sigma" + sig).train;
    }
    if (system == SystemName::rossler) {
        if (sigma == 1.0) return get_preset("rossler_sigma1").train;
        return get_preset("rossler_rmse_sigma" + sig).train;
    }
    throw ConfigError("rmse_preset: system must be lorenz or rossler");
}

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* key : allowed) {
            if (it.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError(std::string("config: unknown key '") + it.key() + "' in " + where);
        }
    }
}

const json& need(const json& j, const char* key, const char* where) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ConfigError(std::string("config: missing key '") + key + "' in " + where);
    }
    return *it;
}

} // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid json: ") + e.what());
    }
    reject_unknown_keys(j, {"system", "library", "train"}, "root");

    RunConfig run;
    {
        const json& s = need(j, "system", "root");
        reject_unknown_keys(s, {"name", "sigma", "state_dim"}, "system");
        const SystemName name = system_from_string(need(s, "name", "system").get<std::string>());
        const double sigma = need(s, "sigma", "system").get<double>();
        int dim = 10;
        if (s.contains("state_dim")) dim = s["state_dim"].get<int>();
        run.system = SystemSpec::make(name, sigma, dim);
        run.train.system = name;
    }
    {
        const json& lib = need(j, "library", "root");
        reject_unknown_keys(lib, {"max_degree", "include_constant"}, "library");
        run.train.library.state_dim = run.system.state_dim;
        run.train.library.max_degree = need(lib, "max_degree", "library").get<int>();
        run.train.library.include_constant =
            need(lib, "include_constant", "library").get<bool>();
    }
    {
        const json& t = need(j, "train", "root");
        reject_unknown_keys(t,
                            {"latent_dim", "beta_init", "beta_spike", "epoch_beta_spike",
                             "lambda_init", "lambda_spike", "epoch_lambda_spike", "epochs",
                             "threshold", "threshold_interval", "stat_size", "batch_size",
                             "learning_rate", "hidden_width", "seed"},
                            "train");
        TrainConfig& tc = run.train;
        tc.latent_dim = need(t, "latent_dim", "train").get<int>();
        tc.beta_init = need(t, "beta_init", "train").get<double>();
        if (t.contains("beta_spike") && !t["beta_spike"].is_null()) {
            tc.beta_spike = t["beta_spike"].get<double>();
        }
        if (t.contains("epoch_beta_spike") && !t["epoch_beta_spike"].is_null()) {
            tc.epoch_beta_spike = t["epoch_beta_spike"].get<int>();
        }
        tc.lambda_init = need(t, "lambda_init", "train").get<double>();
        if (t.contains("lambda_spike") && !t["lambda_spike"].is_null()) {
            tc.lambda_spike = t["lambda_spike"].get<double>();
        }
        if (t.contains("epoch_lambda_spike") && !t["epoch_lambda_spike"].is_null()) {
            tc.epoch_lambda_spike = t["epoch_lambda_spike"].get<int>();
        }
        tc.epochs = need(t, "epochs", "train").get<int>();
        tc.threshold = need(t, "threshold", "train").get<double>();
        tc.threshold_interval = need(t, "threshold_interval", "train").get<int>();
        tc.stat_size = need(t, "stat_size", "train").get<int>();
        tc.batch_size = need(t, "batch_size", "train").get<int>();
        tc.learning_rate = need(t, "learning_rate", "train").get<double>();
        tc.hidden_width = need(t, "hidden_width", "train").get<int>();
        tc.seed = need(t, "seed", "train").get<std::uint64_t>();
        tc.validate();
    }
    return run;
}

std::string render_run_config(const RunConfig& config) {
    std::ostringstream os;
    JsonWriter w(os);
    w.begin_object();
    w.key("system");
    w.begin_object();
    w.key("name");
    w.value(system_to_string(config.system.name));
    w.key("sigma");
    w.value(config.system.noise_scale);
    if (config.system.name == SystemName::lorenz96) {
        w.key("state_dim");
        w.value(config.system.state_dim);
    }
    w.end_object();
    w.key("library");
    w.begin_object();
    w.key("max_degree");
    w.value(config.train.library.max_degree);
    w.key("include_constant");
    w.value(config.train.library.include_constant);
    w.end_object();
    w.key("train");
    w.begin_object();
    const TrainConfig& tc = config.train;
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
    w.end_object();
    os << '\n';
    return os.str();
}

} // namespace hypersindy

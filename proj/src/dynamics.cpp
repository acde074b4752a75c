// SPDX-License-Identifier: Apache-2.0

#include "hypersindy/dynamics.hpp"

#include "hypersindy/errors.hpp"
#include "hypersindy/rng.hpp"

#include <cmath>

namespace hypersindy {
namespace {

bool finite_row(std::span<const double> row) {
    for (double v : row) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void lorenz_field(std::span<const double> p, std::span<const double> s, std::span<double> out) {
    const double omega = p[0], rho = p[1], beta = p[2];
    out[0] = omega * (s[1] - s[0]);
    out[1] = s[0] * (rho - s[2]) - s[1];
    out[2] = s[0] * s[1] - beta * s[2];
}

void rossler_field(std::span<const double> p, std::span<const double> s, std::span<double> out) {
    const double a = p[0], b = p[1], c = p[2];
    out[0] = -s[1] - s[2];
    out[1] = s[0] + a * s[1];
    out[2] = b + s[2] * (s[0] - c);
}

void lotka_volterra_field(std::span<const double>, std::span<const double> s,
                          std::span<double> out) {
    out[0] = s[0] - s[0] * s[1];
    out[1] = -s[1] + s[0] * s[1];
}

// Cyclic Lorenz-96 with one forcing value per coordinate.
void lorenz96_field(std::span<const double> f, std::span<const double> s, std::span<double> out) {
    const int n = static_cast<int>(s.size());
    for (int i = 0; i < n; ++i) {
        const int ip1 = (i + 1) % n;
        const int im1 = (i - 1 + n) % n;
        const int im2 = (i - 2 + n) % n;
        out[i] = f[i] + s[ip1] * s[im1] - s[im2] * s[im1] - s[i];
    }
}

} // namespace

SystemName system_from_string(const std::string& name) {
    if (name == "lorenz") return SystemName::lorenz;
    if (name == "rossler") return SystemName::rossler;
    if (name == "lotka_volterra") return SystemName::lotka_volterra;
    if (name == "lorenz96") return SystemName::lorenz96;
    throw ConfigError("unknown system: " + name);
}

std::string system_to_string(SystemName name) {
    switch (name) {
    case SystemName::lorenz: return "lorenz";
    case SystemName::rossler: return "rossler";
    case SystemName::lotka_volterra: return "lotka_volterra";
    case SystemName::lorenz96: return "lorenz96";
    }
    return "?";
}

SystemSpec SystemSpec::make(SystemName name, double sigma, int lorenz96_dim) {
    SystemSpec spec;
    spec.name = name;
    spec.noise_scale = sigma;
    switch (name) {
    case SystemName::lorenz:
        spec.state_dim = 3;
        spec.parameter_means = {10.0, 28.0, 8.0 / 3.0};
        break;
    case SystemName::rossler:
        spec.state_dim = 3;
        spec.parameter_means = {0.2, 0.2, 5.7};
        break;
    case SystemName::lotka_volterra:
        spec.state_dim = 2;
        spec.parameter_means = {};
        spec.noise_kind = NoiseKind::state_dependent_diffusion;
        break;
    case SystemName::lorenz96:
        spec.state_dim = lorenz96_dim;
        spec.parameter_means.assign(static_cast<std::size_t>(lorenz96_dim), 8.0);
        break;
    }
    spec.validate();
    return spec;
}

void SystemSpec::validate() const {
    if (noise_scale < 0.0) throw ConfigError("system: noise_scale must be >= 0");
    switch (name) {
    case SystemName::lorenz:
    case SystemName::rossler:
        if (state_dim != 3) throw ConfigError("system: state_dim must be 3");
        break;
    case SystemName::lotka_volterra:
        if (state_dim != 2) throw ConfigError("lotka_volterra: state_dim must be 2");
        if (noise_kind != NoiseKind::state_dependent_diffusion) {
            throw ConfigError("lotka_volterra: expects state_dependent_diffusion noise");
        }
        break;
    case SystemName::lorenz96:
        if (state_dim < 4) throw ConfigError("lorenz96: state_dim must be >= 4");
        break;
    }
    if (name != SystemName::lotka_volterra && noise_kind != NoiseKind::parameter_noise) {
        throw ConfigError("state_dependent_diffusion is only defined for lotka_volterra");
    }
}

void eval_vector_field(const SystemSpec& spec, std::span<const double> params,
                       std::span<const double> state, std::span<double> out) {
    if (state.size() != static_cast<std::size_t>(spec.state_dim) || out.size() != state.size()) {
        throw ShapeError("eval_vector_field: state size does not match system");
    }
    switch (spec.name) {
    case SystemName::lorenz: lorenz_field(params, state, out); break;
    case SystemName::rossler: rossler_field(params, state, out); break;
    case SystemName::lotka_volterra: lotka_volterra_field(params, state, out); break;
    case SystemName::lorenz96: lorenz96_field(params, state, out); break;
    }
}

void lv_diffusion(std::span<const double> state, double scale, std::span<double> out) {
    out[0] = scale * (0.25 * state[0] - 0.09 * state[1]);
    out[1] = scale * (-0.09 * state[0] + 0.25 * state[1]);
}

Trajectory simulate_rde(const SystemSpec& spec, std::span<const double> x0, double dt, int steps,
                        std::uint64_t seed) {
    spec.validate();
    if (spec.noise_kind != NoiseKind::parameter_noise) {
        throw ContractError("simulate_rde: system must use parameter noise");
    }
    if (dt <= 0.0) throw ContractError("simulate_rde: dt must be positive");
    if (steps < 1) throw ContractError("simulate_rde: steps must be >= 1");
    if (x0.size() != static_cast<std::size_t>(spec.state_dim)) {
        throw ShapeError("simulate_rde: x0 size does not match system dimension");
    }

    const int n = spec.state_dim;
    Trajectory traj;
    traj.dt = dt;
    traj.dim = n;
    traj.seed = seed;
    traj.system = spec;
    traj.states.resize(static_cast<std::size_t>(steps + 1) * n);
    std::copy(x0.begin(), x0.end(), traj.states.begin());

    Rng rng = Rng::derive(seed, streams::simulation, 0);
    std::vector<double> params(spec.parameter_means);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

    for (int t = 0; t < steps; ++t) {
        if (spec.noise_scale > 0.0) {
            for (std::size_t j = 0; j < params.size(); ++j) {
                params[j] = rng.normal(spec.parameter_means[j], spec.noise_scale);
            }
        }
        const double* s = traj.states.data() + static_cast<std::size_t>(t) * n;
        double* next = traj.states.data() + static_cast<std::size_t>(t + 1) * n;
        std::span<const double> state(s, static_cast<std::size_t>(n));

        eval_vector_field(spec, params, state, k1);
        for (int i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
        eval_vector_field(spec, params, tmp, k2);
        for (int i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
        eval_vector_field(spec, params, tmp, k3);
        for (int i = 0; i < n; ++i) tmp[i] = s[i] + dt * k3[i];
        eval_vector_field(spec, params, tmp, k4);
        for (int i = 0; i < n; ++i) {
            next[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if (!finite_row({next, static_cast<std::size_t>(n)})) {
            throw DivergenceError("simulate_rde: non-finite state", static_cast<std::size_t>(t + 1));
        }
    }
    return traj;
}

Trajectory simulate_sde(const SystemSpec& spec, std::span<const double> x0, double dt, int steps,
                        std::uint64_t seed) {
    spec.validate();
    if (spec.name != SystemName::lotka_volterra) {
        throw ContractError("simulate_sde: only lotka_volterra has an SDE form here");
    }
    if (dt <= 0.0) throw ContractError("simulate_sde: dt must be positive");
    if (steps < 1) throw ContractError("simulate_sde: steps must be >= 1");
    if (x0.size() != 2) throw ShapeError("simulate_sde: x0 must have 2 entries");

    Trajectory traj;
    traj.dt = dt;
    traj.dim = 2;
    traj.seed = seed;
    traj.system = spec;
    traj.states.resize(static_cast<std::size_t>(steps + 1) * 2);
    std::copy(x0.begin(), x0.end(), traj.states.begin());

    Rng rng = Rng::derive(seed, streams::simulation, 0);
    const double sqrt_dt = std::sqrt(dt);
    double drift[2], diff[2];

    for (int t = 0; t < steps; ++t) {
        const double* s = traj.states.data() + static_cast<std::size_t>(t) * 2;
        double* next = traj.states.data() + static_cast<std::size_t>(t + 1) * 2;
        lotka_volterra_field({}, {s, 2}, drift);
        lv_diffusion({s, 2}, spec.noise_scale, diff);
        for (int i = 0; i < 2; ++i) {
            next[i] = s[i] + drift[i] * dt + diff[i] * sqrt_dt * rng.normal();
        }
        if (!finite_row({next, 2})) {
            throw DivergenceError("simulate_sde: non-finite state", static_cast<std::size_t>(t + 1));
        }
    }
    return traj;
}

Trajectory estimate_derivatives(const Trajectory& traj) {
    const std::size_t m = traj.rows();
    if (m < 3) throw ContractError("estimate_derivatives: need at least 3 rows");
    Trajectory out = traj;
    const int n = traj.dim;
    out.derivatives.assign(traj.states.size(), 0.0);
    const double dt = traj.dt;
    for (int i = 0; i < n; ++i) {
        out.derivatives[static_cast<std::size_t>(i)] =
            (traj.states[static_cast<std::size_t>(n) + i] - traj.states[static_cast<std::size_t>(i)]) / dt;
        for (std::size_t r = 1; r + 1 < m; ++r) {
            const double forward = traj.states[(r + 1) * static_cast<std::size_t>(n) + i];
            const double backward = traj.states[(r - 1) * static_cast<std::size_t>(n) + i];
            out.derivatives[r * static_cast<std::size_t>(n) + i] = (forward - backward) / (2.0 * dt);
        }
        const std::size_t last = m - 1;
        out.derivatives[last * static_cast<std::size_t>(n) + i] =
            (traj.states[last * static_cast<std::size_t>(n) + i] -
             traj.states[(last - 1) * static_cast<std::size_t>(n) + i]) /
            dt;
    }
    return out;
}

Split split_from_string(const std::string& split) {
    if (split == "train") return Split::train;
    if (split == "test") return Split::test;
    throw ConfigError("unknown split: " + split);
}

std::vector<double> dataset_initial_condition(const SystemSpec& spec, Split split) {
    switch (spec.name) {
    case SystemName::lorenz:
    case SystemName::rossler:
        return split == Split::train ? std::vector<double>{0.0, 1.0, 1.05}
                                     : std::vector<double>{-1.0, 2.0, 0.5};
    case SystemName::lotka_volterra:
        return split == Split::train ? std::vector<double>{4.0, 2.0}
                                     : std::vector<double>{2.1, 1.0};
    case SystemName::lorenz96: {
        if (spec.state_dim == 10 && split == Split::test) {
            // Published rounded values.
            return {7.8, 8.7, 8.5, 6.0, 9.9, 9.5, 7.5, 6.9, 6.9, 8.7};
        }
        std::vector<double> x0(static_cast<std::size_t>(spec.state_dim), 8.0);
        x0[0] = split == Split::train ? 8.01 : 7.8;
        return x0;
    }
    }
    throw ConfigError("dataset_initial_condition: unknown system");
}

Trajectory make_dataset(const SystemSpec& spec, Split split, std::uint64_t seed, int steps,
                        double dt) {
    const std::vector<double> x0 = dataset_initial_condition(spec, split);
    Trajectory traj = spec.noise_kind == NoiseKind::state_dependent_diffusion
                          ? simulate_sde(spec, x0, dt, steps, seed)
                          : simulate_rde(spec, x0, dt, steps, seed);
    return estimate_derivatives(traj);
}

} // namespace hypersindy

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hypersindy {

enum class SystemName { lorenz, rossler, lotka_volterra, lorenz96 };

SystemName system_from_string(const std::string& name); // ConfigError on unknown
std::string system_to_string(SystemName name);

enum class NoiseKind { parameter_noise, state_dependent_diffusion };

// Benchmark system description. noise_scale is the sigma of the per-step
// parameter draws for the parameter-noise systems, and a multiplier on the
// fixed state-dependent diffusion functions for Lotka-Volterra.
struct SystemSpec {
    SystemName name = SystemName::lorenz;
    int state_dim = 3;
    std::vector<double> parameter_means;
    double noise_scale = 0.0;
    NoiseKind noise_kind = NoiseKind::parameter_noise;

    static SystemSpec make(SystemName name, double sigma, int lorenz96_dim = 10);
    void validate() const;
    int parameter_count() const { return static_cast<int>(parameter_means.size()); }
};

// Deterministic vector field with explicit parameter values (the per-step
// draws for the stochastic systems, or the means for sigma = 0).
void eval_vector_field(const SystemSpec& spec, std::span<const double> params,
                       std::span<const double> state, std::span<double> out);

// Lotka-Volterra diffusion functions sigma_x, sigma_y scaled by `scale`.
void lv_diffusion(std::span<const double> state, double scale, std::span<double> out);

struct Trajectory {
    double dt = 0.0;
    int dim = 0;
    std::vector<double> states;      // rows x dim, row-major
    std::vector<double> derivatives; // empty or rows x dim
    std::uint64_t seed = 0;
    SystemSpec system;

    std::size_t rows() const { return dim == 0 ? 0 : states.size() / static_cast<std::size_t>(dim); }
    bool has_derivatives() const { return !derivatives.empty(); }
    std::span<const double> state_row(std::size_t r) const {
        return {states.data() + r * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    std::span<const double> derivative_row(std::size_t r) const {
        return {derivatives.data() + r * static_cast<std::size_t>(dim),
                static_cast<std::size_t>(dim)};
    }
};

// Parameter-noise simulation: per step, draw each stochastic parameter from
// Normal(mean, sigma), hold it fixed, and advance one classical RK4 step of
// the deterministic field. Returns steps+1 states. DivergenceError with the
// step index when the state leaves the finite range.
Trajectory simulate_rde(const SystemSpec& spec, std::span<const double> x0, double dt, int steps,
                        std::uint64_t seed);

// Euler-Maruyama for the Lotka-Volterra SDE:
// x_{t+1} = x_t + drift(x_t) dt + diffusion(x_t) sqrt(dt) xi, xi ~ N(0, I).
Trajectory simulate_sde(const SystemSpec& spec, std::span<const double> x0, double dt, int steps,
                        std::uint64_t seed);

// Finite differences without smoothing: second-order central differences on
// interior rows, first-order one-sided at both ends. Needs >= 3 rows.
Trajectory estimate_derivatives(const Trajectory& traj);

enum class Split { train, test };
Split split_from_string(const std::string& split);

std::vector<double> dataset_initial_condition(const SystemSpec& spec, Split split);

// Standard dataset: 10000 steps at dt = 0.01 from the per-system initial
// condition, with derivatives estimated.
Trajectory make_dataset(const SystemSpec& spec, Split split, std::uint64_t seed,
                        int steps = 10000, double dt = 0.01);

} // namespace hypersindy

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hypersindy/dynamics.hpp"
#include "hypersindy/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hypersindy {

// Sampled coefficient matrices and their elementwise statistics (population
// standard deviation, divisor s). All values are in raw data units.
struct CoefficientEnsemble {
    int l = 0;
    int n = 0;
    int s = 0;
    std::vector<double> samples; // s x l x n
    std::vector<double> mean;    // l x n
    std::vector<double> stddev;  // l x n

    void compute_stats();
};

// Draw s prior samples, push them through the hypernetwork, apply the
// deterministic evaluation mask, and collect statistics.
CoefficientEnsemble sample_coefficients(const HyperSindyModel& model, int s, std::uint64_t seed);

// || true - pred ||_F / || true ||_F over all l*n entries.
double coefficient_rmse(std::span<const double> truth, std::span<const double> pred);

enum class GenMode { sample, mean };
GenMode gen_mode_from_string(const std::string& mode);

// Integrate the discovered vector field with RK4. In sample mode a fresh
// z ~ N(0, I) is drawn each step and its coefficient matrix held fixed within
// the step; in mean mode the ensemble-mean matrix (stat-size prior draws from
// a fixed internal stream, independent of `seed`) is used throughout.
Trajectory generate_trajectory(const HyperSindyModel& model, std::span<const double> x0, double dt,
                               int steps, std::uint64_t seed, GenMode mode,
                               int mean_stat_size = 250);

// First two Kramers-Moyal coefficients on a uniform grid over the observed
// range. drift_i(b) = mean(dx_i)/dt and diffusion_i(b) = mean(dx_i^2)/(2 dt)
// over transitions starting in bin b. Bins below min_count report no
// estimate.
struct KmField {
    int dim = 0;
    int bins_per_dim = 0;
    int min_count = 50;
    double dt = 0.0;
    std::vector<double> lo, hi;      // per-dimension grid range
    std::vector<int> count;          // bins^dim cells, row-major over dims
    std::vector<double> drift;       // cells x dim
    std::vector<double> diffusion;   // cells x dim

    std::size_t cells() const { return count.size(); }
    bool well_populated(std::size_t cell) const {
        return count[cell] >= min_count;
    }
    std::vector<double> cell_center(std::size_t cell) const;
};

KmField km_estimate(const Trajectory& traj, int bins_per_dim, int min_count = 50);
// Accumulates transitions from several independent trajectories into one
// field (no cross-trajectory transitions).
KmField km_estimate(std::span<const Trajectory> trajs, int bins_per_dim, int min_count = 50);

void write_km_csv(const std::string& path, const KmField& field);

// Sequentially thresholded ridge regression. Support only shrinks within a
// call; ridge = 0 with singular normal equations raises DomainError.
std::vector<double> stlsq(std::span<const double> theta, int rows, int l,
                          std::span<const double> xdot, int n, double threshold, double ridge,
                          int iters);

struct EsindyConfig {
    int n_models = 100;
    double subsample_frac = 1.0; // bootstrap resampling fraction
    double threshold = 0.1;
    double ridge = 1e-6;
    int iters = 10;
};

CoefficientEnsemble esindy(const Trajectory& data, const LibrarySpec& library,
                           const EsindyConfig& cfg, std::uint64_t seed);

// Ground-truth coefficient means and standard deviations for the benchmark
// systems, placed in canonical library order.
struct GroundTruthEquations {
    std::vector<double> mean;   // l x n
    std::vector<double> stddev; // l x n
};
GroundTruthEquations ground_truth(const SystemSpec& spec, const LibrarySpec& library);

void write_coefficient_csv(const std::string& path, const LibrarySpec& library,
                           const CoefficientEnsemble& ensemble);

struct MethodScore {
    double mean_rmse_avg = 0.0;
    double mean_rmse_spread = 0.0; // population std across seeds
    double std_rmse_avg = 0.0;
    double std_rmse_spread = 0.0;
};

struct Table1Result {
    SystemName system;
    double sigma = 0.0;
    int n_seeds = 0;
    MethodScore hypersindy;
    MethodScore esindy;
    std::vector<double> hs_mean_rmse, hs_std_rmse, es_mean_rmse, es_std_rmse; // per seed
};

// Per seed: perturb the train initial condition with N(0, 0.5^2) draws,
// simulate, train a model with the published preset, fit the E-SINDy
// baseline on the same data, and score both against the ground truth.
// Runs fan out over up to `threads` workers.
Table1Result table1_experiment(SystemName system, double sigma, int n_seeds, std::uint64_t seed,
                               int threads = 0);

void write_table1_json(const std::string& path, const Table1Result& result);

} // namespace hypersindy

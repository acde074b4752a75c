// SPDX-License-Identifier: Apache-2.0

#include "hypersindy/evaluation.hpp"

#include "hypersindy/errors.hpp"
#include "hypersindy/json_writer.hpp"
#include "hypersindy/kernels.hpp"
#include "hypersindy/presets.hpp"
#include "hypersindy/trajectory_io.hpp"
#include "hypersindy/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <thread>

namespace hypersindy {

void CoefficientEnsemble::compute_stats() {
    const std::size_t ln = static_cast<std::size_t>(l) * n;
    mean.assign(ln, 0.0);
    stddev.assign(ln, 0.0);
    for (int r = 0; r < s; ++r) {
        for (std::size_t i = 0; i < ln; ++i) {
            mean[i] += samples[static_cast<std::size_t>(r) * ln + i];
        }
    }
    for (std::size_t i = 0; i < ln; ++i) mean[i] /= s;
    for (int r = 0; r < s; ++r) {
        for (std::size_t i = 0; i < ln; ++i) {
            const double d = samples[static_cast<std::size_t>(r) * ln + i] - mean[i];
            stddev[i] += d * d;
        }
    }
    for (std::size_t i = 0; i < ln; ++i) stddev[i] = std::sqrt(stddev[i] / s);
}

CoefficientEnsemble sample_coefficients(const HyperSindyModel& model, int s, std::uint64_t seed) {
    if (s < 1) throw ContractError("sample_coefficients: s must be >= 1");
    CoefficientEnsemble ens;
    ens.l = model.config().term_count();
    ens.n = model.config().state_dim();
    ens.s = s;
    Rng rng = Rng::derive(seed, streams::prior, 0);
    const Tensor z = sample_prior(model.config().latent_dim, s, rng);
    ens.samples = model.coefficients_nograd(z, /*masked=*/true);
    ens.compute_stats();
    return ens;
}

double coefficient_rmse(std::span<const double> truth, std::span<const double> pred) {
    if (truth.size() != pred.size()) {
        throw ShapeError("coefficient_rmse: size mismatch");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = truth[i] - pred[i];
        num += d * d;
        den += truth[i] * truth[i];
    }
    if (den <= 0.0) throw DomainError("coefficient_rmse: zero norm of true coefficients");
    return std::sqrt(num) / std::sqrt(den);
}

GenMode gen_mode_from_string(const std::string& mode) {
    if (mode == "sample") return GenMode::sample;
    if (mode == "mean") return GenMode::mean;
    throw ConfigError("unknown generation mode: " + mode);
}

namespace {

// Polynomial vector field from a fixed raw-unit coefficient matrix.
void library_field(const LibrarySpec& lib, std::span<const double> coeffs,
                   std::span<const double> state, std::vector<double>& theta_row,
                   std::span<double> out) {
    const int l = lib.term_count();
    const int n = lib.state_dim;
    evaluate_library(lib, state, 1, theta_row);
    for (int i = 0; i < n; ++i) out[i] = 0.0;
    for (int j = 0; j < l; ++j) {
        const double t = theta_row[static_cast<std::size_t>(j)];
        for (int i = 0; i < n; ++i) {
            out[i] += t * coeffs[static_cast<std::size_t>(j) * n + i];
        }
    }
}

} // namespace

Trajectory generate_trajectory(const HyperSindyModel& model, std::span<const double> x0, double dt,
                               int steps, std::uint64_t seed, GenMode mode, int mean_stat_size) {
    if (dt <= 0.0) throw ContractError("generate_trajectory: dt must be positive");
    if (steps < 1) throw ContractError("generate_trajectory: steps must be >= 1");
    const LibrarySpec& lib = model.config().library;
    const int n = lib.state_dim;
    if (x0.size() != static_cast<std::size_t>(n)) {
        throw ShapeError("generate_trajectory: x0 size does not match the model");
    }
    const int l = lib.term_count();

    Trajectory traj;
    traj.dt = dt;
    traj.dim = n;
    traj.seed = seed;
    traj.states.resize(static_cast<std::size_t>(steps + 1) * n);
    std::copy(x0.begin(), x0.end(), traj.states.begin());

    // Mean-mode coefficients come from a fixed internal stream so the result
    // does not depend on the seed argument.
    constexpr std::uint64_t kMeanEnsembleSeed = 0x5ca1ab1e;
    std::vector<double> coeffs(static_cast<std::size_t>(l) * n);
    if (mode == GenMode::mean) {
        const CoefficientEnsemble ens =
            sample_coefficients(model, mean_stat_size, kMeanEnsembleSeed);
        coeffs = ens.mean;
    }

    Rng rng = Rng::derive(seed, streams::generate, 0);
    std::vector<double> theta_row(static_cast<std::size_t>(l));
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

    for (int t = 0; t < steps; ++t) {
        if (mode == GenMode::sample) {
            Tensor z = sample_prior(model.config().latent_dim, 1, rng);
            coeffs = model.coefficients_nograd(z, /*masked=*/true);
        }
        const double* s = traj.states.data() + static_cast<std::size_t>(t) * n;
        double* next = traj.states.data() + static_cast<std::size_t>(t + 1) * n;
        const std::span<const double> state(s, static_cast<std::size_t>(n));

        library_field(lib, coeffs, state, theta_row, k1);
        for (int i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
        library_field(lib, coeffs, tmp, theta_row, k2);
        for (int i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
        library_field(lib, coeffs, tmp, theta_row, k3);
        for (int i = 0; i < n; ++i) tmp[i] = s[i] + dt * k3[i];
        library_field(lib, coeffs, tmp, theta_row, k4);
        bool finite = true;
        for (int i = 0; i < n; ++i) {
            next[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            finite = finite && std::isfinite(next[i]);
        }
        if (!finite) {
            throw DivergenceError("generate_trajectory: non-finite state",
                                  static_cast<std::size_t>(t + 1));
        }
    }
    return traj;
}

std::vector<double> KmField::cell_center(std::size_t cell) const {
    std::vector<double> center(static_cast<std::size_t>(dim));
    std::size_t rest = cell;
    for (int i = dim - 1; i >= 0; --i) {
        const std::size_t b = rest % static_cast<std::size_t>(bins_per_dim);
        rest /= static_cast<std::size_t>(bins_per_dim);
        const double width = (hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]) /
                             bins_per_dim;
        center[static_cast<std::size_t>(i)] =
            lo[static_cast<std::size_t>(i)] + (static_cast<double>(b) + 0.5) * width;
    }
    return center;
}

KmField km_estimate(std::span<const Trajectory> trajs, int bins_per_dim, int min_count) {
    if (trajs.empty()) throw ContractError("km_estimate: no trajectories");
    if (bins_per_dim < 1) throw ContractError("km_estimate: bins_per_dim must be >= 1");
    const int n = trajs[0].dim;
    const double dt = trajs[0].dt;
    std::size_t total_steps = 0;
    for (const Trajectory& t : trajs) {
        if (t.dim != n || t.dt != dt) {
            throw ContractError("km_estimate: trajectories disagree on dim or dt");
        }
        if (t.rows() < 2) throw ContractError("km_estimate: trajectory too short");
        total_steps += t.rows() - 1;
    }
    if (total_steps < 1000) {
        throw ContractError("km_estimate: need at least 1000 transitions");
    }

    KmField field;
    field.dim = n;
    field.bins_per_dim = bins_per_dim;
    field.min_count = min_count;
    field.dt = dt;
    field.lo.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    field.hi.assign(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
    for (const Trajectory& t : trajs) {
        for (std::size_t r = 0; r < t.rows(); ++r) {
            for (int i = 0; i < n; ++i) {
                const double v = t.states[r * static_cast<std::size_t>(n) + i];
                field.lo[static_cast<std::size_t>(i)] =
                    std::min(field.lo[static_cast<std::size_t>(i)], v);
                field.hi[static_cast<std::size_t>(i)] =
                    std::max(field.hi[static_cast<std::size_t>(i)], v);
            }
        }
    }

    std::size_t cells = 1;
    for (int i = 0; i < n; ++i) cells *= static_cast<std::size_t>(bins_per_dim);
    field.count.assign(cells, 0);
    field.drift.assign(cells * static_cast<std::size_t>(n), 0.0);
    field.diffusion.assign(cells * static_cast<std::size_t>(n), 0.0);

    std::vector<double> width(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double span = field.hi[static_cast<std::size_t>(i)] -
                            field.lo[static_cast<std::size_t>(i)];
        width[static_cast<std::size_t>(i)] = span > 0.0 ? span / bins_per_dim : 1.0;
    }

    for (const Trajectory& t : trajs) {
        const std::size_t m = t.rows();
        for (std::size_t r = 0; r + 1 < m; ++r) {
            std::size_t cell = 0;
            for (int i = 0; i < n; ++i) {
                const double v = t.states[r * static_cast<std::size_t>(n) + i];
                int b = static_cast<int>((v - field.lo[static_cast<std::size_t>(i)]) /
                                         width[static_cast<std::size_t>(i)]);
                b = std::clamp(b, 0, bins_per_dim - 1);
                cell = cell * static_cast<std::size_t>(bins_per_dim) + static_cast<std::size_t>(b);
            }
            ++field.count[cell];
            for (int i = 0; i < n; ++i) {
                const double dx = t.states[(r + 1) * static_cast<std::size_t>(n) + i] -
                                  t.states[r * static_cast<std::size_t>(n) + i];
                field.drift[cell * static_cast<std::size_t>(n) + i] += dx;
                field.diffusion[cell * static_cast<std::size_t>(n) + i] += dx * dx;
            }
        }
    }
    for (std::size_t c = 0; c < cells; ++c) {
        if (field.count[c] == 0) continue;
        for (int i = 0; i < n; ++i) {
            field.drift[c * static_cast<std::size_t>(n) + i] /= field.count[c] * dt;
            field.diffusion[c * static_cast<std::size_t>(n) + i] /= field.count[c] * 2.0 * dt;
        }
    }
    return field;
}

KmField km_estimate(const Trajectory& traj, int bins_per_dim, int min_count) {
    return km_estimate(std::span<const Trajectory>(&traj, 1), bins_per_dim, min_count);
}

void write_km_csv(const std::string& path, const KmField& field) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    for (int i = 1; i <= field.dim; ++i) os << "bin_center_" << i << ',';
    os << "count";
    for (int i = 1; i <= field.dim; ++i) os << ",drift_" << i;
    for (int i = 1; i <= field.dim; ++i) os << ",diff_" << i;
    os << '\n';
    for (std::size_t c = 0; c < field.cells(); ++c) {
        if (!field.well_populated(c)) continue;
        const auto center = field.cell_center(c);
        for (double v : center) os << format_double(v) << ',';
        os << field.count[c];
        for (int i = 0; i < field.dim; ++i) {
            os << ',' << format_double(field.drift[c * static_cast<std::size_t>(field.dim) + i]);
        }
        for (int i = 0; i < field.dim; ++i) {
            os << ','
               << format_double(field.diffusion[c * static_cast<std::size_t>(field.dim) + i]);
        }
        os << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

namespace {

// Cholesky solve of (G + ridge I) x = b restricted to `active` indices.
// Returns false when the factorization hits a nonpositive pivot.
bool solve_active(const std::vector<double>& gram, int l, double ridge,
                  const std::vector<int>& active, std::span<const double> rhs,
                  std::vector<double>& solution) {
    const int k = static_cast<int>(active.size());
    std::vector<double> a(static_cast<std::size_t>(k) * k);
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) {
            a[static_cast<std::size_t>(r) * k + c] =
                gram[static_cast<std::size_t>(active[static_cast<std::size_t>(r)]) * l +
                     active[static_cast<std::size_t>(c)]];
        }
        a[static_cast<std::size_t>(r) * k + r] += ridge;
    }
    // In-place Cholesky.
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c <= r; ++c) {
            double sum = a[static_cast<std::size_t>(r) * k + c];
            for (int p = 0; p < c; ++p) {
                sum -= a[static_cast<std::size_t>(r) * k + p] *
                       a[static_cast<std::size_t>(c) * k + p];
            }
            if (r == c) {
                if (sum <= 0.0) return false;
                a[static_cast<std::size_t>(r) * k + c] = std::sqrt(sum);
            } else {
                a[static_cast<std::size_t>(r) * k + c] =
                    sum / a[static_cast<std::size_t>(c) * k + c];
            }
        }
    }
    std::vector<double> y(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) {
        double sum = rhs[static_cast<std::size_t>(active[static_cast<std::size_t>(r)])];
        for (int p = 0; p < r; ++p) sum -= a[static_cast<std::size_t>(r) * k + p] * y[static_cast<std::size_t>(p)];
        y[static_cast<std::size_t>(r)] = sum / a[static_cast<std::size_t>(r) * k + r];
    }
    solution.assign(static_cast<std::size_t>(k), 0.0);
    for (int r = k - 1; r >= 0; --r) {
        double sum = y[static_cast<std::size_t>(r)];
        for (int p = r + 1; p < k; ++p) {
            sum -= a[static_cast<std::size_t>(p) * k + r] * solution[static_cast<std::size_t>(p)];
        }
        solution[static_cast<std::size_t>(r)] = sum / a[static_cast<std::size_t>(r) * k + r];
    }
    return true;
}

} // namespace

std::vector<double> stlsq(std::span<const double> theta, int rows, int l,
                          std::span<const double> xdot, int n, double threshold, double ridge,
                          int iters) {
    if (iters < 1) throw ContractError("stlsq: iters must be >= 1");
    if (theta.size() != static_cast<std::size_t>(rows) * l ||
        xdot.size() != static_cast<std::size_t>(rows) * n) {
        throw ShapeError("stlsq: buffer sizes do not match rows x l / rows x n");
    }
    // Gram matrix and right-hand sides.
    std::vector<double> gram(static_cast<std::size_t>(l) * l, 0.0);
    kernels::active().matmul_tn(theta.data(), theta.data(), gram.data(),
                                static_cast<std::size_t>(l), static_cast<std::size_t>(rows),
                                static_cast<std::size_t>(l), false);
    std::vector<double> rhs(static_cast<std::size_t>(l) * n, 0.0);
    kernels::active().matmul_tn(theta.data(), xdot.data(), rhs.data(), static_cast<std::size_t>(l),
                                static_cast<std::size_t>(rows), static_cast<std::size_t>(n),
                                false);

    std::vector<double> coeffs(static_cast<std::size_t>(l) * n, 0.0);
    std::vector<double> column_rhs(static_cast<std::size_t>(l));
    for (int col = 0; col < n; ++col) {
        std::vector<int> active(static_cast<std::size_t>(l));
        for (int j = 0; j < l; ++j) active[static_cast<std::size_t>(j)] = j;
        for (int j = 0; j < l; ++j) {
            column_rhs[static_cast<std::size_t>(j)] = rhs[static_cast<std::size_t>(j) * n + col];
        }
        std::vector<double> solution;
        for (int it = 0; it < iters && !active.empty(); ++it) {
            if (!solve_active(gram, l, ridge, active, column_rhs, solution)) {
                throw DomainError("stlsq: singular normal equations (increase ridge)");
            }
            std::vector<int> surviving;
            for (std::size_t k = 0; k < active.size(); ++k) {
                if (std::abs(solution[k]) >= threshold) {
                    surviving.push_back(active[k]);
                }
            }
            if (surviving.size() == active.size()) break; // support stable
            active = std::move(surviving);
        }
        if (!active.empty()) {
            if (!solve_active(gram, l, ridge, active, column_rhs, solution)) {
                throw DomainError("stlsq: singular normal equations (increase ridge)");
            }
            for (std::size_t k = 0; k < active.size(); ++k) {
                coeffs[static_cast<std::size_t>(active[k]) * n + col] = solution[k];
            }
        }
    }
    return coeffs;
}

CoefficientEnsemble esindy(const Trajectory& data, const LibrarySpec& library,
                           const EsindyConfig& cfg, std::uint64_t seed) {
    if (cfg.n_models < 2) throw ContractError("esindy: n_models must be >= 2");
    if (!data.has_derivatives()) throw ContractError("esindy: trajectory has no derivatives");
    const int rows = static_cast<int>(data.rows());
    const int l = library.term_count();
    const int n = library.state_dim;
    const int take = std::max(1, static_cast<int>(std::llround(cfg.subsample_frac * rows)));

    const std::vector<double> theta_full = evaluate_library(library, data.states, rows);

    CoefficientEnsemble ens;
    ens.l = l;
    ens.n = n;
    ens.s = cfg.n_models;
    ens.samples.resize(static_cast<std::size_t>(cfg.n_models) * l * n);

    std::vector<double> theta(static_cast<std::size_t>(take) * l);
    std::vector<double> xdot(static_cast<std::size_t>(take) * n);
    for (int rep = 0; rep < cfg.n_models; ++rep) {
        Rng rng = Rng::derive(seed, streams::bootstrap, static_cast<std::uint64_t>(rep));
        for (int r = 0; r < take; ++r) {
            const std::size_t src = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(rows)));
            std::copy_n(theta_full.begin() + static_cast<std::ptrdiff_t>(src) * l, l,
                        theta.begin() + static_cast<std::ptrdiff_t>(r) * l);
            std::copy_n(data.derivatives.begin() + static_cast<std::ptrdiff_t>(src) * n, n,
                        xdot.begin() + static_cast<std::ptrdiff_t>(r) * n);
        }
        const auto coeffs = stlsq(theta, take, l, xdot, n, cfg.threshold, cfg.ridge, cfg.iters);
        std::copy(coeffs.begin(), coeffs.end(),
                  ens.samples.begin() + static_cast<std::ptrdiff_t>(rep) * l * n);
    }
    ens.compute_stats();
    return ens;
}

GroundTruthEquations ground_truth(const SystemSpec& spec, const LibrarySpec& library) {
    const int l = library.term_count();
    const int n = library.state_dim;
    GroundTruthEquations gt;
    gt.mean.assign(static_cast<std::size_t>(l) * n, 0.0);
    gt.stddev.assign(static_cast<std::size_t>(l) * n, 0.0);
    const double sigma = spec.noise_scale;

    auto put = [&](std::vector<int> exponents, int dim, double mean, double stddev = 0.0) {
        const int j = term_index(library, exponents);
        gt.mean[static_cast<std::size_t>(j) * n + dim] = mean;
        gt.stddev[static_cast<std::size_t>(j) * n + dim] = stddev;
    };

    switch (spec.name) {
    case SystemName::lorenz:
        // xdot = omega (y - x): both terms carry the omega draw.
        put({1, 0, 0}, 0, -10.0, sigma);
        put({0, 1, 0}, 0, 10.0, sigma);
        // ydot = rho x - xz - y: only the rho term is noisy.
        put({1, 0, 0}, 1, 28.0, sigma);
        put({1, 0, 1}, 1, -1.0);
        put({0, 1, 0}, 1, -1.0);
        // zdot = xy - beta z: only the beta term is noisy.
        put({1, 1, 0}, 2, 1.0);
        put({0, 0, 1}, 2, -8.0 / 3.0, sigma);
        break;
    case SystemName::rossler:
        put({0, 1, 0}, 0, -1.0);
        put({0, 0, 1}, 0, -1.0);
        put({1, 0, 0}, 1, 1.0);
        put({0, 1, 0}, 1, 0.2, sigma); // a
        put({0, 0, 0}, 2, 0.2, sigma); // b
        put({1, 0, 1}, 2, 1.0);
        put({0, 0, 1}, 2, -5.7, sigma); // c
        break;
    case SystemName::lotka_volterra:
        // Drift only; the diffusion is not representable as coefficient noise.
        put({1, 0}, 0, 1.0);
        put({1, 1}, 0, -1.0);
        put({0, 1}, 1, -1.0);
        put({1, 1}, 1, 1.0);
        break;
    case SystemName::lorenz96:
        for (int i = 0; i < n; ++i) {
            auto exp_of = [&](std::initializer_list<int> idx) {
                std::vector<int> e(static_cast<std::size_t>(n), 0);
                for (int k : idx) e[static_cast<std::size_t>((k + n) % n)] += 1;
                return e;
            };
            put(exp_of({}), i, 8.0, sigma); // forcing constant
            put(exp_of({i + 1, i - 1}), i, 1.0);
            put(exp_of({i - 2, i - 1}), i, -1.0);
            put(exp_of({i}), i, -1.0);
        }
        break;
    }
    return gt;
}

void write_coefficient_csv(const std::string& path, const LibrarySpec& library,
                           const CoefficientEnsemble& ensemble) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    const auto terms = build_library(library);
    os << "term";
    for (int i = 1; i <= ensemble.n; ++i) os << ",mean_x" << i << ",std_x" << i;
    os << '\n';
    for (int j = 0; j < ensemble.l; ++j) {
        os << terms[static_cast<std::size_t>(j)].display();
        for (int i = 0; i < ensemble.n; ++i) {
            os << ',' << format_double(ensemble.mean[static_cast<std::size_t>(j) * ensemble.n + i])
               << ','
               << format_double(ensemble.stddev[static_cast<std::size_t>(j) * ensemble.n + i]);
        }
        os << '\n';
    }
    if (!os) throw IoError("write failed: " + path);
}

namespace {

struct SeedOutcome {
    double hs_mean = 0.0, hs_std = 0.0, es_mean = 0.0, es_std = 0.0;
};

SeedOutcome run_table1_seed(SystemName system, double sigma, std::uint64_t base_seed, int index) {
    const SystemSpec spec = SystemSpec::make(system, sigma);
    TrainConfig cfg = rmse_preset(system, sigma);
    cfg.seed = Rng::derive(base_seed, streams::experiment, static_cast<std::uint64_t>(index))
                   .next_u64();

    // Each run perturbs the published train initial condition.
    Rng ic_rng = Rng::derive(base_seed, streams::experiment,
                             0x10000ULL + static_cast<std::uint64_t>(index));
    std::vector<double> x0 = dataset_initial_condition(spec, Split::train);
    for (double& v : x0) v += ic_rng.normal(0.0, 0.5);

    const Trajectory traj =
        estimate_derivatives(simulate_rde(spec, x0, 0.01, 10000, cfg.seed));

    const auto [model, history] = train(cfg, traj);
    const CoefficientEnsemble hs = sample_coefficients(model, cfg.stat_size, cfg.seed);

    EsindyConfig es_cfg;
    const CoefficientEnsemble es = esindy(traj, cfg.library, es_cfg, cfg.seed);

    const GroundTruthEquations gt = ground_truth(spec, cfg.library);
    SeedOutcome out;
    out.hs_mean = coefficient_rmse(gt.mean, hs.mean);
    out.hs_std = coefficient_rmse(gt.stddev, hs.stddev);
    out.es_mean = coefficient_rmse(gt.mean, es.mean);
    out.es_std = coefficient_rmse(gt.stddev, es.stddev);
    return out;
}

void mean_spread(const std::vector<double>& xs, double& mean, double& spread) {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    spread = 0.0;
    for (double x : xs) spread += (x - mean) * (x - mean);
    spread = std::sqrt(spread / static_cast<double>(xs.size()));
}

} // namespace

int table1_threads_from_env() {
    if (const char* env = std::getenv("SSL_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

Table1Result table1_experiment(SystemName system, double sigma, int n_seeds, std::uint64_t seed,
                               int threads) {
    if (system != SystemName::lorenz && system != SystemName::rossler) {
        throw ConfigError("table1_experiment: system must be lorenz or rossler");
    }
    if (sigma != 1.0 && sigma != 5.0 && sigma != 10.0) {
        throw ConfigError("table1_experiment: sigma must be 1, 5 or 10");
    }
    if (n_seeds < 1) throw ContractError("table1_experiment: n_seeds must be >= 1");
    if (threads <= 0) threads = table1_threads_from_env();
    threads = std::min(threads, n_seeds);

    std::vector<SeedOutcome> outcomes(static_cast<std::size_t>(n_seeds));
    std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n_seeds));
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int index = next.fetch_add(1);
                if (index >= n_seeds) break;
                try {
                    outcomes[static_cast<std::size_t>(index)] =
                        run_table1_seed(system, sigma, seed, index);
                } catch (...) {
                    failures[static_cast<std::size_t>(index)] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }

    Table1Result result;
    result.system = system;
    result.sigma = sigma;
    result.n_seeds = n_seeds;
    for (const SeedOutcome& o : outcomes) {
        result.hs_mean_rmse.push_back(o.hs_mean);
        result.hs_std_rmse.push_back(o.hs_std);
        result.es_mean_rmse.push_back(o.es_mean);
        result.es_std_rmse.push_back(o.es_std);
    }
    mean_spread(result.hs_mean_rmse, result.hypersindy.mean_rmse_avg,
                result.hypersindy.mean_rmse_spread);
    mean_spread(result.hs_std_rmse, result.hypersindy.std_rmse_avg,
                result.hypersindy.std_rmse_spread);
    mean_spread(result.es_mean_rmse, result.esindy.mean_rmse_avg, result.esindy.mean_rmse_spread);
    mean_spread(result.es_std_rmse, result.esindy.std_rmse_avg, result.esindy.std_rmse_spread);
    return result;
}

void write_table1_json(const std::string& path, const Table1Result& result) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    JsonWriter w(os);
    w.begin_object();
    w.key("system");
    w.value(system_to_string(result.system));
    w.key("sigma");
    w.value(result.sigma);
    w.key("n_seeds");
    w.value(result.n_seeds);
    auto write_method = [&](const char* name, const MethodScore& m, const std::vector<double>& mr,
                            const std::vector<double>& sr) {
        w.key(name);
        w.begin_object();
        w.key("mean");
        w.begin_object();
        w.key("value");
        w.value(m.mean_rmse_avg);
        w.key("spread");
        w.value(m.mean_rmse_spread);
        w.key("per_seed");
        w.numbers(mr);
        w.end_object();
        w.key("std");
        w.begin_object();
        w.key("value");
        w.value(m.std_rmse_avg);
        w.key("spread");
        w.value(m.std_rmse_spread);
        w.key("per_seed");
        w.numbers(sr);
        w.end_object();
        w.end_object();
    };
    write_method("hypersindy", result.hypersindy, result.hs_mean_rmse, result.hs_std_rmse);
    write_method("esindy", result.esindy, result.es_mean_rmse, result.es_std_rmse);
    w.end_object();
    os << '\n';
    if (!os) throw IoError("write failed: " + path);
}

} // namespace hypersindy

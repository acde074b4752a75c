// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hypersindy/errors.hpp"
#include "hypersindy/evaluation.hpp"
#include "hypersindy/presets.hpp"

#include <cmath>

using namespace hypersindy;

namespace {

ModelConfig lorenz_config() {
    ModelConfig cfg;
    cfg.library = {3, 3, false};
    cfg.latent_dim = 6;
    cfg.hidden_width = 32;
    return cfg;
}

} // namespace

TEST_CASE("coefficient rmse contract") {
    const std::vector<double> truth{2.0, 0.0, 0.0};
    SUBCASE("identical matrices score zero") {
        CHECK(coefficient_rmse(truth, truth) == doctest::Approx(0.0));
    }
    SUBCASE("published example") {
        const std::vector<double> pred{1.0, 0.0, 0.0};
        CHECK(coefficient_rmse(truth, pred) == doctest::Approx(0.5));
    }
    SUBCASE("zero prediction scores one") {
        const std::vector<double> pred{0.0, 0.0, 0.0};
        CHECK(coefficient_rmse(truth, pred) == doctest::Approx(1.0));
    }
    SUBCASE("zero true norm is a domain error") {
        const std::vector<double> zero{0.0, 0.0};
        const std::vector<double> pred{1.0, 0.0};
        CHECK_THROWS_AS(coefficient_rmse(zero, pred), DomainError);
    }
    SUBCASE("scale covariance over 100 random matrices") {
        Rng rng(12);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> t(12), p(12);
            for (auto& v : t) v = 4.0 * rng.uniform01() - 2.0;
            for (auto& v : p) v = 4.0 * rng.uniform01() - 2.0;
            const double c = 0.1 + 10.0 * rng.uniform01();
            std::vector<double> tc(t), pc(p);
            for (auto& v : tc) v *= c;
            for (auto& v : pc) v *= c;
            CHECK(coefficient_rmse(tc, pc) ==
                  doctest::Approx(coefficient_rmse(t, p)).epsilon(1e-10));
        }
    }
}

TEST_CASE("stlsq recovery") {
    Rng rng(9);
    const LibrarySpec lib{2, 2, true}; // 1, x1, x2, x1^2, x1*x2, x2^2
    const int l = lib.term_count();
    const int rows = 400;
    std::vector<double> states(static_cast<std::size_t>(rows) * 2);
    for (auto& v : states) v = 4.0 * rng.uniform01() - 2.0;
    const auto theta = evaluate_library(lib, states, rows);

    // Exact data from two active terms per dimension.
    std::vector<double> truth(static_cast<std::size_t>(l) * 2, 0.0);
    truth[1 * 2 + 0] = 1.5;  // x1 -> dim 0
    truth[4 * 2 + 0] = -2.0; // x1*x2 -> dim 0
    truth[2 * 2 + 1] = 0.7;  // x2 -> dim 1
    truth[3 * 2 + 1] = 1.1;  // x1^2 -> dim 1
    std::vector<double> xdot(static_cast<std::size_t>(rows) * 2, 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int j = 0; j < l; ++j) {
            for (int i = 0; i < 2; ++i) {
                xdot[static_cast<std::size_t>(r) * 2 + i] +=
                    theta[static_cast<std::size_t>(r) * l + j] *
                    truth[static_cast<std::size_t>(j) * 2 + i];
            }
        }
    }

    SUBCASE("noiseless support recovery within 1e-8") {
        const auto fit = stlsq(theta, rows, l, xdot, 2, 0.1, 0.0, 10);
        for (std::size_t i = 0; i < truth.size(); ++i) {
            CHECK(fit[i] == doctest::Approx(truth[i]).epsilon(1e-8));
        }
    }
    SUBCASE("zero threshold and ridge give the plain least-squares solution") {
        const auto fit = stlsq(theta, rows, l, xdot, 2, 0.0, 0.0, 1);
        // Residual must be orthogonal to every library column.
        for (int j = 0; j < l; ++j) {
            for (int i = 0; i < 2; ++i) {
                double dot = 0.0;
                for (int r = 0; r < rows; ++r) {
                    double resid = xdot[static_cast<std::size_t>(r) * 2 + i];
                    for (int k = 0; k < l; ++k) {
                        resid -= theta[static_cast<std::size_t>(r) * l + k] *
                                 fit[static_cast<std::size_t>(k) * 2 + i];
                    }
                    dot += theta[static_cast<std::size_t>(r) * l + j] * resid;
                }
                CHECK(std::abs(dot) < 1e-6);
            }
        }
    }
    SUBCASE("threshold above every coefficient zeroes the matrix") {
        const auto fit = stlsq(theta, rows, l, xdot, 2, 1e6, 0.0, 3);
        for (double v : fit) CHECK(v == 0.0);
    }
    SUBCASE("singular normal equations without ridge raise") {
        // Duplicate column makes the Gram matrix singular.
        std::vector<double> theta_dup(static_cast<std::size_t>(rows) * 2);
        for (int r = 0; r < rows; ++r) {
            theta_dup[static_cast<std::size_t>(r) * 2] = theta[static_cast<std::size_t>(r) * l + 1];
            theta_dup[static_cast<std::size_t>(r) * 2 + 1] =
                theta[static_cast<std::size_t>(r) * l + 1];
        }
        CHECK_THROWS_AS(stlsq(theta_dup, rows, 2, xdot, 2, 0.0, 0.0, 1), DomainError);
        CHECK_NOTHROW(stlsq(theta_dup, rows, 2, xdot, 2, 0.0, 1e-8, 1));
    }
    SUBCASE("support never revives within a call") {
        // With a moderate threshold the support after each refit can only
        // shrink; verify the final support is a subset of the first-pass
        // above-threshold set.
        const auto first = stlsq(theta, rows, l, xdot, 2, 0.0, 0.0, 1);
        const auto fit = stlsq(theta, rows, l, xdot, 2, 0.3, 0.0, 10);
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (fit[i] != 0.0) CHECK(std::abs(first[i]) >= 0.3);
        }
    }
}

TEST_CASE("esindy ensembles") {
    const LibrarySpec lib{2, 2, true};
    SUBCASE("identical replicate data gives zero spread") {
        // All rows equal: every bootstrap draw sees the same regression.
        Trajectory flat;
        flat.dt = 0.01;
        flat.dim = 2;
        for (int r = 0; r < 64; ++r) {
            flat.states.insert(flat.states.end(), {1.5, 2.0});
            flat.derivatives.insert(flat.derivatives.end(), {0.3, -0.7});
        }
        EsindyConfig cfg;
        cfg.n_models = 8;
        cfg.ridge = 1e-6;
        cfg.threshold = 0.0;
        const auto ens = esindy(flat, lib, cfg, 5);
        for (double v : ens.stddev) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("noiseless identifiable system: ensemble mean within 1e-6") {
        // States from a short deterministic Lotka-Volterra path with exact
        // analytic derivatives.
        const auto spec = SystemSpec::make(SystemName::lotka_volterra, 0.0);
        Trajectory traj = simulate_sde(spec, std::vector<double>{1.4, 0.9}, 0.01, 800, 1);
        traj.derivatives.resize(traj.states.size());
        for (std::size_t r = 0; r < traj.rows(); ++r) {
            std::vector<double> out(2);
            eval_vector_field(spec, {}, traj.state_row(r), out);
            traj.derivatives[r * 2] = out[0];
            traj.derivatives[r * 2 + 1] = out[1];
        }
        EsindyConfig cfg;
        cfg.n_models = 20;
        cfg.threshold = 0.1;
        cfg.ridge = 1e-10;
        const auto ens = esindy(traj, lib, cfg, 7);
        const auto gt = ground_truth(spec, lib);
        for (std::size_t i = 0; i < gt.mean.size(); ++i) {
            CHECK(ens.mean[i] == doctest::Approx(gt.mean[i]).epsilon(1e-6));
        }
    }
    SUBCASE("n_models below two is rejected") {
        Trajectory flat;
        flat.dt = 0.01;
        flat.dim = 2;
        flat.states = {1.0, 1.0, 1.0, 1.0};
        flat.derivatives = {0.0, 0.0, 0.0, 0.0};
        EsindyConfig cfg;
        cfg.n_models = 1;
        CHECK_THROWS_AS(esindy(flat, lib, cfg, 0), ContractError);
    }
}

TEST_CASE("sample_coefficients statistics") {
    auto model = HyperSindyModel::init(lorenz_config(), 6);
    // Nontrivial coefficients.
    Rng wrng(17);
    for (double& v : model.hypernet().output.weight.data()) v = 0.2 * (wrng.uniform01() - 0.5);
    for (double& v : model.hypernet().output.bias.data()) v = wrng.uniform01() - 0.5;

    SUBCASE("single sample has zero spread") {
        const auto ens = sample_coefficients(model, 1, 3);
        for (double v : ens.stddev) CHECK(v == 0.0);
    }
    SUBCASE("permanent zeros have zero mean and spread") {
        model.mask().permanent_zero[5] = 0.0;
        const auto ens = sample_coefficients(model, 50, 3);
        CHECK(ens.mean[5] == 0.0);
        CHECK(ens.stddev[5] == 0.0);
        for (int r = 0; r < ens.s; ++r) {
            CHECK(ens.samples[static_cast<std::size_t>(r) * ens.mean.size() + 5] == 0.0);
        }
    }
    SUBCASE("statistics converge as O(1/sqrt(s))") {
        const int s = 512;
        const auto small = sample_coefficients(model, s, 11);
        const auto big = sample_coefficients(model, 2 * s, 11);
        for (std::size_t i = 0; i < small.mean.size(); ++i) {
            const double tol =
                3.0 * (big.stddev[i] + 1e-12) * (1.0 / std::sqrt(static_cast<double>(s)) +
                                                 1.0 / std::sqrt(2.0 * static_cast<double>(s)));
            CHECK(std::abs(small.mean[i] - big.mean[i]) <= tol);
        }
    }
}

TEST_CASE("generate_trajectory modes") {
    auto model = HyperSindyModel::init(lorenz_config(), 6);
    const std::vector<double> x0{0.0, 1.0, 1.05};

    SUBCASE("all-zero coefficients give a constant trajectory") {
        const auto traj = generate_trajectory(model, x0, 0.01, 50, 1, GenMode::sample);
        for (std::size_t r = 0; r < traj.rows(); ++r) {
            CHECK(traj.state_row(r)[0] == 0.0);
            CHECK(traj.state_row(r)[1] == 1.0);
            CHECK(traj.state_row(r)[2] == 1.05);
        }
    }
    SUBCASE("mean mode ignores the seed") {
        Rng wrng(3);
        for (double& v : model.hypernet().output.bias.data()) {
            v = 0.01 * (wrng.uniform01() - 0.5);
        }
        const auto a = generate_trajectory(model, x0, 0.01, 50, 1, GenMode::mean);
        const auto b = generate_trajectory(model, x0, 0.01, 50, 999, GenMode::mean);
        CHECK(a.states == b.states);
    }
    SUBCASE("sample mode is seed-deterministic") {
        Rng wrng(3);
        for (double& v : model.hypernet().output.bias.data()) {
            v = 0.01 * (wrng.uniform01() - 0.5);
        }
        const auto a = generate_trajectory(model, x0, 0.01, 50, 7, GenMode::sample);
        const auto b = generate_trajectory(model, x0, 0.01, 50, 7, GenMode::sample);
        CHECK(a.states == b.states);
        const auto c = generate_trajectory(model, x0, 0.01, 50, 8, GenMode::sample);
        CHECK(a.states != c.states);
    }
}

TEST_CASE("km_estimate on a deterministic linear drift") {
    // 200 Euler segments of xdot = -x from spread-out starts; drift estimates
    // in well-populated central bins match -x within 5 percent.
    std::vector<Trajectory> segs;
    Rng rng(4);
    for (int k = 0; k < 200; ++k) {
        Trajectory t;
        t.dt = 0.01;
        t.dim = 1;
        double x = -2.0 + 4.0 * rng.uniform01();
        t.states.push_back(x);
        for (int step = 0; step < 500; ++step) {
            x = x + 0.01 * (-x);
            t.states.push_back(x);
        }
        segs.push_back(std::move(t));
    }
    const KmField field = km_estimate(segs, 20, 200);
    int checked = 0;
    for (std::size_t c = 0; c < field.cells(); ++c) {
        if (!field.well_populated(c)) continue;
        const double center = field.cell_center(c)[0];
        if (std::abs(center) < 0.4) continue; // relative error blows up at the sink
        CHECK(field.drift[c] == doctest::Approx(-center).epsilon(0.05));
        CHECK(std::abs(field.diffusion[c]) < 0.05 * center * center + 1e-4);
        ++checked;
    }
    CHECK(checked >= 8);
}

TEST_CASE("km_estimate on a pure random walk") {
    Trajectory t;
    t.dt = 0.01;
    t.dim = 1;
    Rng rng(11);
    double x = 0.0;
    t.states.push_back(x);
    const int steps = 100000;
    for (int step = 0; step < steps; ++step) {
        x += std::sqrt(0.01) * rng.normal();
        t.states.push_back(x);
    }
    const KmField field = km_estimate(t, 20, 200);
    for (std::size_t c = 0; c < field.cells(); ++c) {
        if (!field.well_populated(c)) continue;
        // Var(dx) = 2 dt D2 - (drift dt)^2; bound the drift by 3 sigma-hat.
        const double var_dx =
            2.0 * t.dt * field.diffusion[c] - std::pow(field.drift[c] * t.dt, 2);
        const double sigma_hat = std::sqrt(std::max(var_dx, 0.0)) / t.dt;
        CHECK(std::abs(field.drift[c]) <=
              3.0 * sigma_hat / std::sqrt(static_cast<double>(field.count[c])) + 1e-9);
        CHECK(field.diffusion[c] == doctest::Approx(0.5).epsilon(0.10));
    }
}

TEST_CASE("km bins below the minimum count are flagged absent") {
    Trajectory t;
    t.dt = 0.01;
    t.dim = 1;
    Rng rng(2);
    double x = 0.0;
    t.states.push_back(x);
    for (int step = 0; step < 2000; ++step) {
        x += std::sqrt(0.01) * rng.normal();
        t.states.push_back(x);
    }
    const KmField field = km_estimate(t, 10, 1000000);
    for (std::size_t c = 0; c < field.cells(); ++c) {
        CHECK(!field.well_populated(c));
    }
    CHECK_THROWS_AS(km_estimate(std::span<const Trajectory>{}, 10, 1), ContractError);
}

TEST_CASE("km drift and diffusion match the lotka-volterra field in aggregate") {
    // Segmented Euler-Maruyama data at reduced diffusion; aggregate relative
    // error over well-populated bins (normalized Frobenius, the same metric
    // shape used for coefficients).
    const auto spec = SystemSpec::make(SystemName::lotka_volterra, 0.65);
    std::vector<Trajectory> segs;
    int seed = 0;
    while (static_cast<int>(segs.size()) < 50 && seed < 400) {
        try {
            Trajectory t = simulate_sde(spec, std::vector<double>{1.2, 0.8}, 0.01, 2000,
                                        static_cast<std::uint64_t>(seed));
            double lo = 1e300, hi = -1e300;
            for (double v : t.states) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (lo > 0.05 && hi < 15.0) segs.push_back(std::move(t));
        } catch (const DivergenceError&) {
        }
        ++seed;
    }
    REQUIRE(static_cast<int>(segs.size()) == 50);
    const KmField field = km_estimate(segs, 20, 200);

    double drift_num = 0.0, drift_den = 0.0, diff_num = 0.0, diff_den = 0.0;
    int populated = 0;
    for (std::size_t c = 0; c < field.cells(); ++c) {
        if (!field.well_populated(c)) continue;
        ++populated;
        const auto center = field.cell_center(c);
        std::vector<double> drift_true(2), diff_coef(2);
        eval_vector_field(spec, {}, center, drift_true);
        lv_diffusion(center, spec.noise_scale, diff_coef);
        for (int i = 0; i < 2; ++i) {
            const double de = field.drift[c * 2 + static_cast<std::size_t>(i)] - drift_true[static_cast<std::size_t>(i)];
            drift_num += de * de;
            drift_den += drift_true[static_cast<std::size_t>(i)] * drift_true[static_cast<std::size_t>(i)];
            const double ft = diff_coef[static_cast<std::size_t>(i)] * diff_coef[static_cast<std::size_t>(i)] / 2.0;
            const double fe = field.diffusion[c * 2 + static_cast<std::size_t>(i)] - ft;
            diff_num += fe * fe;
            diff_den += ft * ft;
        }
    }
    REQUIRE(populated >= 20);
    INFO("drift rel ", std::sqrt(drift_num / drift_den), " diff rel ",
         std::sqrt(diff_num / diff_den));
    CHECK(std::sqrt(drift_num / drift_den) < 0.15);
    CHECK(std::sqrt(diff_num / diff_den) < 0.25);
}

TEST_CASE("ground truth placements for the benchmark systems") {
    SUBCASE("lorenz") {
        const auto spec = SystemSpec::make(SystemName::lorenz, 2.5);
        const LibrarySpec lib{3, 3, false};
        const auto gt = ground_truth(spec, lib);
        const int n = 3;
        auto at = [&](std::initializer_list<int> e, int dim) {
            return static_cast<std::size_t>(term_index(lib, std::vector<int>(e))) * n +
                   static_cast<std::size_t>(dim);
        };
        CHECK(gt.mean[at({1, 0, 0}, 0)] == -10.0);
        CHECK(gt.mean[at({0, 1, 0}, 0)] == 10.0);
        CHECK(gt.mean[at({1, 0, 0}, 1)] == 28.0);
        CHECK(gt.mean[at({1, 0, 1}, 1)] == -1.0);
        CHECK(gt.mean[at({0, 1, 0}, 1)] == -1.0);
        CHECK(gt.mean[at({1, 1, 0}, 2)] == 1.0);
        CHECK(gt.mean[at({0, 0, 1}, 2)] == doctest::Approx(-8.0 / 3.0));
        // Noise appears only where sampled parameters multiply terms.
        CHECK(gt.stddev[at({1, 0, 0}, 0)] == 2.5);
        CHECK(gt.stddev[at({0, 1, 0}, 0)] == 2.5);
        CHECK(gt.stddev[at({1, 0, 0}, 1)] == 2.5);
        CHECK(gt.stddev[at({1, 0, 1}, 1)] == 0.0);
        CHECK(gt.stddev[at({0, 1, 0}, 1)] == 0.0);
        CHECK(gt.stddev[at({1, 1, 0}, 2)] == 0.0);
        CHECK(gt.stddev[at({0, 0, 1}, 2)] == 2.5);
        int nonzero_mean = 0;
        for (double v : gt.mean) nonzero_mean += v != 0.0 ? 1 : 0;
        CHECK(nonzero_mean == 7);
    }
    SUBCASE("lorenz96 rows") {
        const auto spec = SystemSpec::make(SystemName::lorenz96, 10.0);
        const LibrarySpec lib{10, 3, true};
        const auto gt = ground_truth(spec, lib);
        int nonzero = 0;
        for (double v : gt.mean) nonzero += v != 0.0 ? 1 : 0;
        CHECK(nonzero == 40); // 4 terms per equation
        const int n = 10;
        std::vector<int> e(10, 0);
        const std::size_t const_row = static_cast<std::size_t>(term_index(lib, e));
        for (int i = 0; i < n; ++i) {
            CHECK(gt.mean[const_row * n + static_cast<std::size_t>(i)] == 8.0);
            CHECK(gt.stddev[const_row * n + static_cast<std::size_t>(i)] == 10.0);
        }
    }
}

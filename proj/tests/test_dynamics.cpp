// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hypersindy/dynamics.hpp"
#include "hypersindy/errors.hpp"
#include "hypersindy/rng.hpp"

#include <cmath>
#include <vector>

using namespace hypersindy;

TEST_CASE("lorenz vector field at the dataset initial condition") {
    const auto spec = SystemSpec::make(SystemName::lorenz, 0.0);
    const std::vector<double> x0{0.0, 1.0, 1.05};
    std::vector<double> out(3);
    eval_vector_field(spec, spec.parameter_means, x0, out);
    CHECK(out[0] == doctest::Approx(10.0));
    CHECK(out[1] == doctest::Approx(-1.0));
    CHECK(out[2] == doctest::Approx(-2.8));
}

TEST_CASE("lorenz96 equilibrium at all-eights with fixed forcing") {
    const auto spec = SystemSpec::make(SystemName::lorenz96, 0.0);
    const std::vector<double> x0(10, 8.0);
    std::vector<double> out(10);
    eval_vector_field(spec, spec.parameter_means, x0, out);
    for (double v : out) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("same seed gives bit-identical trajectories") {
    const auto spec = SystemSpec::make(SystemName::lorenz, 5.0);
    const std::vector<double> x0{0.0, 1.0, 1.05};
    const auto a = simulate_rde(spec, x0, 0.01, 200, 42);
    const auto b = simulate_rde(spec, x0, 0.01, 200, 42);
    CHECK(a.states == b.states);
    const auto c = simulate_rde(spec, x0, 0.01, 200, 43);
    CHECK(a.states != c.states);
}

TEST_CASE("sigma zero reduces to deterministic integration") {
    const auto noisy = SystemSpec::make(SystemName::lorenz, 0.0);
    const std::vector<double> x0{0.0, 1.0, 1.05};
    const auto a = simulate_rde(noisy, x0, 0.01, 100, 1);
    const auto b = simulate_rde(noisy, x0, 0.01, 100, 999);
    CHECK(a.states == b.states); // no draws consumed when sigma = 0
}

TEST_CASE("rk4 order sanity: half-step agreement within 1e-5 over 100 steps") {
    const auto spec = SystemSpec::make(SystemName::lorenz, 0.0);
    const std::vector<double> x0{0.0, 1.0, 1.05};
    auto end_state_diff = [&](double dt, int steps) {
        const auto coarse = simulate_rde(spec, x0, dt, steps, 0);
        const auto fine = simulate_rde(spec, x0, dt / 2.0, 2 * steps, 0);
        double max_diff = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double d = std::abs(coarse.states[static_cast<std::size_t>(steps) * 3 + i] -
                                      fine.states[static_cast<std::size_t>(2 * steps) * 3 + i]);
            max_diff = std::max(max_diff, d);
        }
        return max_diff;
    };
    CHECK(end_state_diff(0.005, 100) < 1e-5);
    // Fourth-order convergence: halving dt shrinks the defect by about 16x.
    const double coarse_defect = end_state_diff(0.01, 100);
    const double fine_defect = end_state_diff(0.005, 200);
    CHECK(coarse_defect / fine_defect > 8.0);
    CHECK(coarse_defect / fine_defect < 40.0);
}

TEST_CASE("lotka-volterra drift and diffusion values") {
    const auto spec = SystemSpec::make(SystemName::lotka_volterra, 1.0);
    std::vector<double> out(2);
    const std::vector<double> fixed_point{1.0, 1.0};
    eval_vector_field(spec, {}, fixed_point, out);
    CHECK(out[0] == doctest::Approx(0.0));
    CHECK(out[1] == doctest::Approx(0.0));

    std::vector<double> diff(2);
    lv_diffusion(fixed_point, 1.0, diff);
    CHECK(diff[0] == doctest::Approx(0.16));
    CHECK(diff[1] == doctest::Approx(0.16));
}

TEST_CASE("zero diffusion matches the deterministic Euler path of the drift") {
    auto spec = SystemSpec::make(SystemName::lotka_volterra, 0.0);
    const std::vector<double> x0{1.5, 0.75};
    const double dt = 0.01;
    const int steps = 50;
    const auto traj = simulate_sde(spec, x0, dt, steps, 7);
    std::vector<double> state = x0;
    std::vector<double> drift(2);
    for (int t = 0; t < steps; ++t) {
        eval_vector_field(spec, {}, state, drift);
        state[0] += drift[0] * dt;
        state[1] += drift[1] * dt;
    }
    CHECK(traj.states[static_cast<std::size_t>(steps) * 2] == doctest::Approx(state[0]));
    CHECK(traj.states[static_cast<std::size_t>(steps) * 2 + 1] == doctest::Approx(state[1]));
}

TEST_CASE("derivative estimation") {
    SUBCASE("linear ramp") {
        Trajectory traj;
        traj.dt = 1.0;
        traj.dim = 1;
        traj.states = {0.0, 1.0, 2.0};
        const auto out = estimate_derivatives(traj);
        CHECK(out.derivatives == std::vector<double>{1.0, 1.0, 1.0});
    }
    SUBCASE("central difference is exact for quadratics") {
        Trajectory traj;
        traj.dt = 0.01;
        traj.dim = 1;
        traj.states = {0.0, 0.01 * 0.01, 0.02 * 0.02};
        const auto out = estimate_derivatives(traj);
        CHECK(out.derivatives[1] == doctest::Approx(0.02).epsilon(1e-12));
    }
    SUBCASE("constant states have zero derivatives") {
        Trajectory traj;
        traj.dt = 0.5;
        traj.dim = 2;
        traj.states = {3.0, -1.0, 3.0, -1.0, 3.0, -1.0, 3.0, -1.0};
        const auto out = estimate_derivatives(traj);
        for (double v : out.derivatives) CHECK(v == 0.0);
    }
    SUBCASE("too few rows") {
        Trajectory traj;
        traj.dt = 1.0;
        traj.dim = 1;
        traj.states = {0.0, 1.0};
        CHECK_THROWS_AS(estimate_derivatives(traj), ContractError);
    }
    SUBCASE("linearity") {
        Rng rng(3);
        Trajectory x, y;
        x.dt = y.dt = 0.1;
        x.dim = y.dim = 2;
        for (int i = 0; i < 20; ++i) {
            x.states.push_back(rng.normal());
            x.states.push_back(rng.normal());
            y.states.push_back(rng.normal());
            y.states.push_back(rng.normal());
        }
        const double a = 1.7, b = -0.6;
        Trajectory combo = x;
        for (std::size_t i = 0; i < combo.states.size(); ++i) {
            combo.states[i] = a * x.states[i] + b * y.states[i];
        }
        const auto dx = estimate_derivatives(x);
        const auto dy = estimate_derivatives(y);
        const auto dc = estimate_derivatives(combo);
        for (std::size_t i = 0; i < dc.derivatives.size(); ++i) {
            CHECK(dc.derivatives[i] ==
                  doctest::Approx(a * dx.derivatives[i] + b * dy.derivatives[i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("make_dataset uses the published initial conditions and sizes") {
    SUBCASE("lorenz train split") {
        const auto spec = SystemSpec::make(SystemName::lorenz, 0.0);
        const auto traj = make_dataset(spec, Split::train, 0, 100);
        CHECK(traj.rows() == 101);
        CHECK(traj.state_row(0)[0] == 0.0);
        CHECK(traj.state_row(0)[1] == 1.0);
        CHECK(traj.state_row(0)[2] == 1.05);
        CHECK(traj.has_derivatives());
    }
    SUBCASE("lotka_volterra test split") {
        const auto spec = SystemSpec::make(SystemName::lotka_volterra, 0.5);
        const auto traj = make_dataset(spec, Split::test, 3, 100);
        CHECK(traj.state_row(0)[0] == 2.1);
        CHECK(traj.state_row(0)[1] == 1.0);
    }
    SUBCASE("lorenz96 initial conditions") {
        const auto spec = SystemSpec::make(SystemName::lorenz96, 0.0);
        const auto train_ic = dataset_initial_condition(spec, Split::train);
        CHECK(train_ic[0] == 8.01);
        for (int i = 1; i < 10; ++i) CHECK(train_ic[static_cast<std::size_t>(i)] == 8.0);
        const auto test_ic = dataset_initial_condition(spec, Split::test);
        CHECK(test_ic == std::vector<double>{7.8, 8.7, 8.5, 6.0, 9.9, 9.5, 7.5, 6.9, 6.9, 8.7});
    }
    SUBCASE("full-length dataset has 10001 rows") {
        const auto spec = SystemSpec::make(SystemName::lorenz, 0.0);
        const auto traj = make_dataset(spec, Split::train, 0);
        CHECK(traj.rows() == 10001);
    }
}

TEST_CASE("divergence reports the failing step") {
    // A huge forcing noise drives lorenz96 to overflow quickly.
    auto spec = SystemSpec::make(SystemName::lorenz96, 1e150);
    const std::vector<double> x0(10, 8.0);
    try {
        simulate_rde(spec, x0, 0.01, 1000, 0);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.step() >= 1);
    }
}

TEST_CASE("contract checks") {
    const auto lorenz = SystemSpec::make(SystemName::lorenz, 1.0);
    const std::vector<double> x0{0.0, 1.0, 1.05};
    CHECK_THROWS_AS(simulate_rde(lorenz, x0, -0.1, 10, 0), ContractError);
    CHECK_THROWS_AS(simulate_rde(lorenz, x0, 0.01, 0, 0), ContractError);
    CHECK_THROWS_AS(simulate_rde(lorenz, std::vector<double>{1.0}, 0.01, 10, 0), ShapeError);
    const auto lv = SystemSpec::make(SystemName::lotka_volterra, 1.0);
    CHECK_THROWS_AS(simulate_rde(lv, std::vector<double>{1.0, 1.0}, 0.01, 10, 0), ContractError);
    CHECK_THROWS_AS(simulate_sde(lorenz, x0, 0.01, 10, 0), ContractError);
    CHECK_THROWS_AS(system_from_string("henon"), ConfigError);
    CHECK_THROWS_AS(split_from_string("validation"), ConfigError);
}

// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: simulate benchmark systems, train models, evaluate
// coefficient recovery, generate trajectories from trained models, estimate
// Kramers-Moyal fields, and run the multi-seed RMSE experiment.
//
// Exit codes: 0 success, 1 internal/IO error, 2 usage or configuration error,
// 3 training aborted on non-finite loss, 4 evaluation domain error,
// 5 generation divergence.

#include <CLI11.hpp>

#include "hypersindy/checkpoint.hpp"
#include "hypersindy/errors.hpp"
#include "hypersindy/evaluation.hpp"
#include "hypersindy/json_writer.hpp"
#include "hypersindy/kernels.hpp"
#include "hypersindy/presets.hpp"
#include "hypersindy/trajectory_io.hpp"
#include "hypersindy/training.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace hypersindy;

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

// Sparse equation display: one line per state dimension, terms hidden when
// permanently zeroed or below a small display magnitude.
void print_equations(std::ostream& os, const HyperSindyModel& model,
                     const CoefficientEnsemble& ensemble) {
    constexpr double display_threshold = 0.01;
    const auto terms = build_library(model.config().library);
    const auto mask = model.mask_eval();
    const int n = ensemble.n;
    for (int i = 0; i < n; ++i) {
        os << "dx" << (i + 1) << "/dt =";
        bool any = false;
        for (int j = 0; j < ensemble.l; ++j) {
            const std::size_t idx = static_cast<std::size_t>(j) * n + i;
            const double mean = ensemble.mean[idx];
            if (mask[idx] == 0.0 || std::abs(mean) < display_threshold) continue;
            char buf[96];
            std::snprintf(buf, sizeof(buf), " %+.3f (\xC2\xB1%.3f)", mean, ensemble.stddev[idx]);
            os << buf;
            if (terms[static_cast<std::size_t>(j)].degree() > 0) {
                os << "*" << terms[static_cast<std::size_t>(j)].display();
            }
            any = true;
        }
        if (!any) os << " 0";
        os << '\n';
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Stochastic governing-equation discovery via a variational "
                 "hypernetwork with a trainable sparsity mask"};
    app.require_subcommand(1);

    // ------------------------------------------------------------ simulate
    auto* sim = app.add_subcommand("simulate", "Simulate a benchmark system to CSV");
    std::string sim_system, sim_split = "train", sim_out;
    double sim_sigma = 0.0, sim_dt = 0.01;
    int sim_steps = 10000, sim_dim = 10;
    std::uint64_t sim_seed = 0;
    sim->add_option("--system", sim_system, "lorenz|rossler|lotka_volterra|lorenz96")->required();
    sim->add_option("--sigma", sim_sigma, "noise scale");
    sim->add_option("--split", sim_split, "train|test initial condition");
    sim->add_option("--steps", sim_steps, "number of integration steps");
    sim->add_option("--dt", sim_dt, "timestep");
    sim->add_option("--seed", sim_seed, "random seed");
    sim->add_option("--state-dim", sim_dim, "lorenz96 dimension");
    sim->add_option("--out", sim_out, "output CSV path")->required();
    sim->callback([&] {
        const SystemSpec spec = SystemSpec::make(system_from_string(sim_system), sim_sigma, sim_dim);
        const Trajectory traj =
            make_dataset(spec, split_from_string(sim_split), sim_seed, sim_steps, sim_dt);
        write_trajectory_csv(sim_out, traj);
        std::cout << "wrote " << traj.rows() << " rows to " << sim_out << '\n';
    });

    // --------------------------------------------------------------- train
    auto* tr = app.add_subcommand("train", "Train a model on a trajectory CSV");
    std::string tr_config, tr_preset, tr_data, tr_out, tr_history;
    std::int64_t tr_seed = -1;
    tr->add_option("--config", tr_config, "run-config JSON path");
    tr->add_option("--preset", tr_preset, "built-in preset name");
    tr->add_option("--data", tr_data, "trajectory CSV with derivatives")->required();
    tr->add_option("--out", tr_out, "checkpoint JSON path")->required();
    tr->add_option("--history", tr_history, "history CSV path (default: <out>_history.csv)");
    tr->add_option("--seed", tr_seed, "override the config seed");
    tr->callback([&] {
        if (tr_config.empty() == tr_preset.empty()) {
            throw ConfigError("train: exactly one of --config / --preset is required");
        }
        RunConfig run = tr_config.empty() ? get_preset(tr_preset)
                                          : parse_run_config(read_file(tr_config));
        if (tr_seed >= 0) run.train.seed = static_cast<std::uint64_t>(tr_seed);
        const Trajectory data = read_trajectory_csv(tr_data);
        auto [model, history] = train(run.train, data);

        Checkpoint ckpt{run.system, run.train, std::move(model)};
        save_checkpoint(tr_out, ckpt);
        if (tr_history.empty()) {
            tr_history = tr_out + "_history.csv";
        }
        write_history_csv(tr_history, history);

        const CoefficientEnsemble ens =
            sample_coefficients(ckpt.model, run.train.stat_size, run.train.seed);
        std::cout << "discovered equations (mean \xC2\xB1 std over " << ens.s << " samples):\n";
        print_equations(std::cout, ckpt.model, ens);
    });

    // ---------------------------------------------------------------- eval
    auto* ev = app.add_subcommand("eval", "Score a checkpoint against ground truth");
    std::string ev_ckpt, ev_truth, ev_out, ev_coeffs;
    double ev_sigma = 1.0;
    int ev_samples = 250;
    std::uint64_t ev_seed = 0;
    ev->add_option("--checkpoint", ev_ckpt, "checkpoint JSON")->required();
    ev->add_option("--truth-system", ev_truth, "system name for the ground truth")->required();
    ev->add_option("--sigma", ev_sigma, "noise scale of the ground truth");
    ev->add_option("--samples", ev_samples, "coefficient samples");
    ev->add_option("--seed", ev_seed, "sampling seed");
    ev->add_option("--out", ev_out, "summary JSON path")->required();
    ev->add_option("--coeffs-out", ev_coeffs, "coefficient CSV (default: <out>_coefficients.csv)");
    ev->callback([&] {
        const Checkpoint ckpt = load_checkpoint(ev_ckpt);
        const SystemSpec truth_spec = SystemSpec::make(
            system_from_string(ev_truth), ev_sigma, ckpt.config.library.state_dim);
        if (truth_spec.state_dim != ckpt.config.library.state_dim) {
            throw ConfigError("eval: checkpoint library does not match the truth system");
        }
        const CoefficientEnsemble ens = sample_coefficients(ckpt.model, ev_samples, ev_seed);
        const GroundTruthEquations gt = ground_truth(truth_spec, ckpt.config.library);
        const double mean_rmse = coefficient_rmse(gt.mean, ens.mean);
        const double std_rmse = coefficient_rmse(gt.stddev, ens.stddev);

        if (ev_coeffs.empty()) ev_coeffs = ev_out + "_coefficients.csv";
        write_coefficient_csv(ev_coeffs, ckpt.config.library, ens);
        std::ofstream os(ev_out, std::ios::binary);
        if (!os) throw IoError("cannot open for writing: " + ev_out);
        JsonWriter w(os);
        w.begin_object();
        w.key("truth_system");
        w.value(ev_truth);
        w.key("sigma");
        w.value(ev_sigma);
        w.key("samples");
        w.value(ev_samples);
        w.key("mean_rmse");
        w.value(mean_rmse);
        w.key("std_rmse");
        w.value(std_rmse);
        w.end_object();
        os << '\n';
        std::cout << "mean_rmse " << format_double(mean_rmse) << " std_rmse "
                  << format_double(std_rmse) << '\n';
        print_equations(std::cout, ckpt.model, ens);
    });

    // ------------------------------------------------------------ generate
    auto* gen = app.add_subcommand("generate", "Integrate the discovered dynamics");
    std::string gen_ckpt, gen_mode = "sample", gen_out;
    std::vector<double> gen_x0;
    double gen_dt = 0.01;
    int gen_steps = 10000;
    std::uint64_t gen_seed = 0;
    gen->add_option("--checkpoint", gen_ckpt, "checkpoint JSON")->required();
    gen->add_option("--x0", gen_x0, "initial state (one value per dimension)")
        ->required()
        ->expected(-1);
    gen->add_option("--steps", gen_steps, "number of RK4 steps");
    gen->add_option("--dt", gen_dt, "timestep");
    gen->add_option("--mode", gen_mode, "sample|mean");
    gen->add_option("--seed", gen_seed, "random seed (sample mode)");
    gen->add_option("--out", gen_out, "output CSV path")->required();
    gen->callback([&] {
        const Checkpoint ckpt = load_checkpoint(gen_ckpt);
        const int n = ckpt.config.library.state_dim;
        if (static_cast<int>(gen_x0.size()) != n) {
            throw ConfigError("generate: --x0 needs exactly " + std::to_string(n) + " values");
        }
        const Trajectory traj = generate_trajectory(ckpt.model, gen_x0, gen_dt, gen_steps,
                                                    gen_seed, gen_mode_from_string(gen_mode));
        write_trajectory_csv(gen_out, traj);
        std::cout << "wrote " << traj.rows() << " rows to " << gen_out << '\n';
    });

    // ---------------------------------------------------------------- km
    auto* km = app.add_subcommand("km", "Kramers-Moyal drift/diffusion estimates");
    std::vector<std::string> km_data;
    std::string km_out;
    int km_bins = 20, km_min_count = 50;
    km->add_option("--data", km_data, "trajectory CSV (repeatable for segments)")
        ->required()
        ->expected(-1);
    km->add_option("--bins", km_bins, "bins per dimension");
    km->add_option("--min-count", km_min_count, "minimum transitions per reported bin");
    km->add_option("--out", km_out, "output CSV path")->required();
    km->callback([&] {
        std::vector<Trajectory> trajs;
        trajs.reserve(km_data.size());
        for (const std::string& path : km_data) trajs.push_back(read_trajectory_csv(path));
        const KmField field = km_estimate(trajs, km_bins, km_min_count);
        write_km_csv(km_out, field);
        std::size_t reported = 0;
        for (std::size_t cell = 0; cell < field.cells(); ++cell) {
            reported += field.well_populated(cell) ? 1 : 0;
        }
        std::cout << "wrote " << reported << " bins to " << km_out << '\n';
    });

    // ------------------------------------------------------------- table1
    auto* t1 = app.add_subcommand("table1", "Multi-seed coefficient-RMSE experiment");
    std::string t1_system, t1_out;
    double t1_sigma = 1.0;
    int t1_seeds = 10;
    std::uint64_t t1_seed = 0;
    t1->add_option("--system", t1_system, "lorenz|rossler")->required();
    t1->add_option("--sigma", t1_sigma, "noise scale: 1, 5 or 10");
    t1->add_option("--seeds", t1_seeds, "number of independent runs")
        ->check(CLI::PositiveNumber);
    t1->add_option("--base-seed", t1_seed, "seed for the experiment stream");
    t1->add_option("--out", t1_out, "summary JSON path")->required();
    t1->callback([&] {
        const Table1Result result =
            table1_experiment(system_from_string(t1_system), t1_sigma, t1_seeds, t1_seed);
        write_table1_json(t1_out, result);
        std::cout << "hypersindy mean " << format_double(result.hypersindy.mean_rmse_avg)
                  << " \xC2\xB1 " << format_double(result.hypersindy.mean_rmse_spread)
                  << " | esindy mean " << format_double(result.esindy.mean_rmse_avg) << " \xC2\xB1 "
                  << format_double(result.esindy.mean_rmse_spread) << '\n';
    });

    // ------------------------------------------------------------- presets
    auto* pr = app.add_subcommand("presets", "Write the built-in run configs as JSON files");
    std::string pr_dir = ".";
    pr->add_option("--dir", pr_dir, "output directory");
    pr->callback([&] {
        for (const std::string& name : preset_names()) {
            const std::string path = (std::filesystem::path(pr_dir) / (name + ".json")).string();
            std::ofstream os(path, std::ios::binary);
            if (!os) throw IoError("cannot open for writing: " + path);
            os << render_run_config(get_preset(name));
        }
        std::cout << "wrote " << preset_names().size() << " presets to " << pr_dir << '\n';
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const hypersindy::TrainingNanError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const hypersindy::DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 5;
    } catch (const hypersindy::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const hypersindy::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const hypersindy::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

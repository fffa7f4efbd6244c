/*
 Copyright 2026 The mjls Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "mjls/cli.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mjls/chain_estimation.hpp"
#include "mjls/errors.hpp"
#include "mjls/exact_analysis.hpp"
#include "mjls/experiment.hpp"
#include "mjls/model_generation.hpp"
#include "mjls/serialization.hpp"
#include "mjls/simulation.hpp"
#include "mjls/trace_io.hpp"

namespace mjls
{
    namespace
    {
        struct ModelSource
        {
            std::string model_file;
            int modes = 2;
            int state_dim = 2;
            int input_dim = 2;
            std::uint64_t seed = 1;

            void add_to(CLI::App &cmd)
            {
                cmd.add_option("--model", model_file, "Model JSON file (otherwise a random model is drawn)")
                    ->check(CLI::ExistingFile);
                cmd.add_option("--modes", modes, "Number of modes Ns")->check(CLI::PositiveNumber);
                cmd.add_option("--state-dim", state_dim, "State dimension d")->check(CLI::PositiveNumber);
                cmd.add_option("--input-dim", input_dim, "Input dimension k")->check(CLI::PositiveNumber);
                cmd.add_option("--seed", seed, "Master seed");
            }

            JumpLinearModel load() const
            {
                if (!model_file.empty())
                {
                    return load_model(model_file);
                }
                return generate_random_model(modes, state_dim, input_dim, derive_seed(seed, {0}));
            }
        };

        struct EstimationFlags
        {
            std::size_t trajectories = 500;
            std::size_t rollout = 150;
            double radius = 0.05;
            std::string transition = "known";
            std::string perturbation = "shared";

            void add_to(CLI::App &cmd)
            {
                cmd.add_option("--trajectories", trajectories, "Rollouts per gradient estimate (m)")
                    ->check(CLI::PositiveNumber);
                cmd.add_option("--rollout", rollout, "Rollout length (l)")->check(CLI::PositiveNumber);
                cmd.add_option("--radius", radius, "Smoothing radius (r)")->check(CLI::PositiveNumber);
                cmd.add_option("--transition", transition, "Transition matrix used by rollouts")
                    ->check(CLI::IsMember({"known", "estimated"}));
                cmd.add_option("--perturbation", perturbation, "Perturbation structure of the estimator")
                    ->check(CLI::IsMember({"shared", "independent"}));
            }
        };

        std::optional<double> parse_eta(const std::string &text)
        {
            if (text.empty() || text == "auto")
            {
                return std::nullopt;
            }
            std::size_t used = 0;
            double v = 0.0;
            try
            {
                v = std::stod(text, &used);
            }
            catch (const std::exception &)
            {
                used = 0;
            }
            if (used != text.size() || !(v > 0.0))
            {
                throw InvalidArgument("--eta must be a positive number or \"auto\"");
            }
            return v;
        }

        std::string matrix_text(const Matrix &m)
        {
            std::string s = "[";
            for (Eigen::Index r = 0; r < m.rows(); ++r)
            {
                s += r == 0 ? "[" : ", [";
                for (Eigen::Index c = 0; c < m.cols(); ++c)
                {
                    s += (c == 0 ? "" : ", ") + format_double(m(r, c));
                }
                s += "]";
            }
            return s + "]";
        }

        void write_or_print(const std::string &path, const std::string &text, std::ostream &out)
        {
            if (path.empty())
            {
                out << text;
                return;
            }
            std::ofstream f(path, std::ios::binary);
            if (!f)
            {
                throw InvalidArgument("cannot write " + path);
            }
            f << text;
        }

        int cmd_generate(const ModelSource &src, const std::string &out_path, std::ostream &out)
        {
            const auto model = src.load();
            write_or_print(out_path, model_to_json(model) + "\n", out);
            return kExitOk;
        }

        int cmd_solve(const ModelSource &src, const std::string &out_path, std::ostream &out)
        {
            const auto model = src.load();
            const auto are = solve_coupled_are(model);
            const double cost = exact_cost(model, are.gain);
            for (int i = 0; i < model.num_modes(); ++i)
            {
                out << "K*[" << i << "] = " << matrix_text(are.gain[i]) << '\n';
            }
            for (int i = 0; i < model.num_modes(); ++i)
            {
                out << "P*[" << i << "] = " << matrix_text(are.value.value[static_cast<std::size_t>(i)]) << '\n';
            }
            out << "C(K*) = " << format_double(cost) << '\n';
            if (!out_path.empty())
            {
                write_or_print(out_path, policy_to_json(are.gain) + "\n", out);
            }
            return kExitOk;
        }

        struct OptimizeFlags
        {
            std::string method = "ngd";
            std::string eta = "auto";
            std::size_t iterations = 100;
            double tolerance = 1e-8;
            std::string policy_file;
            bool timing = false;
            unsigned workers = 1;
        };

        int cmd_optimize(const ModelSource &src, const EstimationFlags &est, const OptimizeFlags &f,
                         const std::string &out_path, std::ostream &out)
        {
            OptimizerConfig cfg;
            cfg.method = parse_method(f.method);
            cfg.step_size = parse_eta(f.eta);
            cfg.max_iterations = f.iterations;
            cfg.stop_tolerance = f.tolerance;
            cfg.transition_source = parse_transition_source(est.transition);
            cfg.record_wall_time = f.timing;
            if (is_model_free(cfg.method))
            {
                EstimationConfig ec;
                ec.trajectories = est.trajectories;
                ec.rollout_length = est.rollout;
                ec.radius = est.radius;
                ec.perturbation = parse_perturbation_structure(est.perturbation);
                ec.seed = derive_seed(src.seed, {1});
                ec.workers = f.workers;
                cfg.estimation = ec;
            }
            cfg.validate();

            const auto model = src.load();
            GainSchedule k0 = zero_policy(model);
            if (!f.policy_file.empty())
            {
                std::ifstream in(f.policy_file, std::ios::binary);
                std::ostringstream buf;
                buf << in.rdbuf();
                k0 = policy_from_json(buf.str());
                validate_policy(model, k0);
            }
            const auto result = optimize(model, k0, cfg);
            std::ostringstream csv;
            write_trace_csv(csv, result.trace);
            write_or_print(out_path, csv.str(), out);
            if (!out_path.empty())
            {
                const auto &last = result.trace.rows.back();
                out << "status " << to_string(result.status) << ", iterations " << last.iteration << ", step size "
                    << format_double(result.step_size) << ", final normalized gap "
                    << format_double(last.normalized_gap) << '\n';
            }
            if (result.status == RunStatus::diverged)
            {
                throw NumericalError(result.message);
            }
            return kExitOk;
        }

        struct ExperimentFlags
        {
            std::vector<std::string> methods;
            std::size_t repetitions = 15;
            std::string manifest;
            bool single_size = false;
            unsigned workers = 0;
        };

        int cmd_experiment(const ModelSource &src, const EstimationFlags &est, const OptimizeFlags &f,
                           const ExperimentFlags &ef, const CLI::App &cmd, const std::string &out_path,
                           std::ostream &out)
        {
            ExperimentConfig cfg;
            if (!ef.manifest.empty())
            {
                cfg = load_manifest_config(ef.manifest);
            }
            else
            {
                if (ef.single_size)
                {
                    cfg.sizes = {{src.modes, src.state_dim, src.input_dim}};
                }
                cfg.repetitions = ef.repetitions;
                if (!ef.methods.empty())
                {
                    cfg.methods.clear();
                    for (const auto &m : ef.methods)
                    {
                        cfg.methods.push_back(default_method_settings(parse_method(m)));
                    }
                }
                if (cmd.count("--eta") > 0)
                {
                    const auto eta = parse_eta(f.eta);
                    for (auto &m : cfg.methods)
                    {
                        m.step_size = eta;
                    }
                }
                cfg.max_iterations = f.iterations;
                cfg.stop_tolerance = f.tolerance;
                cfg.trajectories = est.trajectories;
                cfg.rollout_length = est.rollout;
                cfg.radius = est.radius;
                cfg.perturbation = parse_perturbation_structure(est.perturbation);
                cfg.transition_source = parse_transition_source(est.transition);
                cfg.master_seed = src.seed;
                cfg.record_wall_time = f.timing;
            }
            cfg.output_dir = out_path.empty() ? std::filesystem::path("runs") : std::filesystem::path(out_path);
            cfg.workers = ef.workers;
            cfg.validate();

            const auto result = run_experiment(cfg);
            for (const auto &c : result.cells)
            {
                out << c.size.label() << ' ' << to_string(c.method) << ": " << c.succeeded << " ok, " << c.failed
                    << " failed";
                if (!c.mean.rows.empty())
                {
                    out << ", mean normalized gap at iteration " << c.mean.rows.back().iteration << " = "
                        << format_double(c.mean.rows.back().normalized_gap);
                }
                out << '\n';
            }
            out << "manifest: " << result.manifest_path.string() << '\n';
            return kExitOk;
        }

        struct ChainFlags
        {
            std::size_t trials = 100;
            double eps = 0.1;
            double delta = 0.05;
            double constant = 1.0;
            std::size_t length = 0;
        };

        int cmd_estimate_chain(const ModelSource &src, const ChainFlags &f, std::ostream &out)
        {
            const auto model = src.load();
            const auto params = estimate_pseudo_spectral_params(model.transitions, &model.initial_modes);
            std::size_t n = f.length;
            if (n == 0)
            {
                n = required_chain_length({f.eps, f.delta, model.num_modes(), params.pi_star, params.gamma_ps,
                                           params.mu_over_pi_norm, f.constant});
            }
            std::size_t covered = 0;
            double error_sum = 0.0;
            double error_max = 0.0;
            for (std::size_t t = 0; t < f.trials; ++t)
            {
                Rng rng(derive_seed(src.seed, {2, t}));
                const auto modes = sample_mode_chain(model.transitions, model.initial_modes, n, rng);
                const auto est = estimate_transition_matrix(modes, model.num_modes());
                const double err = max_row_sum_norm(model.transitions - est.transitions);
                covered += err < f.eps ? 1 : 0;
                error_sum += err;
                error_max = std::max(error_max, err);
            }
            out << "pi_star " << format_double(params.pi_star) << '\n'
                << "gamma_ps " << format_double(params.gamma_ps) << '\n'
                << "mu_over_pi_norm " << format_double(params.mu_over_pi_norm) << '\n'
                << "chain_length " << n << '\n'
                << "trials " << f.trials << '\n'
                << "covered " << covered << " (" << format_double(static_cast<double>(covered) / f.trials)
                << " with ||P - P_hat||_inf < " << format_double(f.eps) << ")\n"
                << "mean_error " << format_double(error_sum / f.trials) << '\n'
                << "max_error " << format_double(error_max) << '\n';
            return kExitOk;
        }
    } // namespace

    int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
    {
        CLI::App app{"Policy optimization for Markovian jump linear systems", "mjls"};
        app.set_version_flag("--version", std::string(library_version()));
        app.require_subcommand(1);

        ModelSource src;
        EstimationFlags est;
        OptimizeFlags opt;
        ExperimentFlags exp;
        ChainFlags chain;
        std::string out_path;

        auto *generate = app.add_subcommand("generate", "Draw a random model and write it as JSON");
        src.add_to(*generate);
        generate->add_option("--out", out_path, "Output file (default: stdout)");

        auto *solve = app.add_subcommand("solve", "Print K* and C(K*) of a model");
        src.add_to(*solve);
        solve->add_option("--out", out_path, "Also write K* as policy JSON");

        auto *optimize_cmd = app.add_subcommand("optimize", "Run one optimization and write its trace CSV");
        src.add_to(*optimize_cmd);
        est.add_to(*optimize_cmd);
        optimize_cmd->add_option("--method", opt.method, "gd, ngd, mf-gd or mf-ngd")
            ->check(CLI::IsMember({"gd", "ngd", "mf-gd", "mf-ngd"}));
        optimize_cmd->add_option("--eta", opt.eta, "Step size, or \"auto\"");
        optimize_cmd->add_option("--iterations", opt.iterations, "Maximum number of updates");
        optimize_cmd->add_option("--tolerance", opt.tolerance, "Stop once ||K_{t+1} - K_t||_max < tolerance")
            ->check(CLI::PositiveNumber);
        optimize_cmd->add_option("--policy", opt.policy_file, "Initial policy JSON (default: K0 = 0)")
            ->check(CLI::ExistingFile);
        optimize_cmd->add_option("--workers", opt.workers, "Threads for gradient estimation")
            ->check(CLI::PositiveNumber);
        optimize_cmd->add_flag("--timing", opt.timing, "Record wall-clock time in the trace");
        optimize_cmd->add_option("--out", out_path, "Trace CSV file (default: stdout)");

        auto *experiment = app.add_subcommand("experiment", "Run every method over random models of each size");
        src.add_to(*experiment);
        est.add_to(*experiment);
        experiment->add_option("--method", exp.methods, "Methods to run (repeatable; default: all four)")
            ->delimiter(',')
            ->check(CLI::IsMember({"gd", "ngd", "mf-gd", "mf-ngd"}));
        experiment->add_option("--eta", opt.eta, "Step size for every method, or \"auto\"");
        experiment->add_option("--iterations", opt.iterations, "Maximum number of updates");
        experiment->add_option("--tolerance", opt.tolerance, "Policy-change stop tolerance")->check(CLI::PositiveNumber);
        experiment->add_option("--repetitions", exp.repetitions, "Models per size")->check(CLI::PositiveNumber);
        experiment->add_option("--manifest", exp.manifest, "Rerun the configuration stored in this manifest.json")
            ->check(CLI::ExistingFile);
        experiment->add_option("--workers", exp.workers, "Parallel runs (default: hardware concurrency)");
        experiment->add_flag("--timing", opt.timing, "Record wall-clock time in the traces");
        experiment->add_option("--out", out_path, "Output directory (default: runs)");

        auto *estimate_chain = app.add_subcommand("estimate-chain", "Check transition-matrix estimation coverage");
        src.add_to(*estimate_chain);
        estimate_chain->add_option("--trials", chain.trials, "Independent chains")->check(CLI::PositiveNumber);
        estimate_chain->add_option("--eps", chain.eps, "Target ||P - P_hat||_inf");
        estimate_chain->add_option("--delta", chain.delta, "Failure probability");
        estimate_chain->add_option("--constant", chain.constant, "Constant c of the length formula");
        estimate_chain->add_option("--length", chain.length, "Chain length (default: from the formula)");

        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::CallForHelp &e)
        {
            return app.exit(e, out, err);
        }
        catch (const CLI::CallForAllHelp &e)
        {
            return app.exit(e, out, err);
        }
        catch (const CLI::CallForVersion &e)
        {
            return app.exit(e, out, err);
        }
        catch (const CLI::ParseError &e)
        {
            err << "mjls: " << e.what() << '\n';
            return kExitUsage;
        }

        try
        {
            if (generate->parsed())
            {
                return cmd_generate(src, out_path, out);
            }
            if (solve->parsed())
            {
                return cmd_solve(src, out_path, out);
            }
            if (optimize_cmd->parsed())
            {
                return cmd_optimize(src, est, opt, out_path, out);
            }
            if (experiment->parsed())
            {
                exp.single_size = experiment->count("--modes") + experiment->count("--state-dim") +
                                      experiment->count("--input-dim") >
                                  0;
                return cmd_experiment(src, est, opt, exp, *experiment, out_path, out);
            }
            return cmd_estimate_chain(src, chain, out);
        }
        catch (const InvalidArgument &e)
        {
            err << "mjls: " << e.what() << '\n';
            return kExitUsage;
        }
        catch (const std::exception &e)
        {
            err << "mjls: " << e.what() << '\n';
            return kExitNumerical;
        }
    }

} // namespace mjls

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

#include "mjls/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "mjls/errors.hpp"
#include "mjls/exact_analysis.hpp"
#include "mjls/model_generation.hpp"
#include "mjls/trace_io.hpp"

#ifndef MJLS_VERSION
#define MJLS_VERSION "0.0.0"
#endif

namespace mjls
{
    namespace
    {
        using json = nlohmann::ordered_json;

        struct RunOutcome
        {
            OptimizationTrace trace;
            bool failed = false;
            std::string reason;
        };

        // One (size, repetition) task: a model and one outcome per configured method.
        struct Task
        {
            std::size_t size_index = 0;
            std::size_t repetition = 0;
            std::vector<RunOutcome> outcomes;
        };

        std::filesystem::path run_path(const ExperimentConfig &cfg, const SystemSize &size, Method m, std::size_t rep)
        {
            return cfg.output_dir / size.label() / std::string(to_string(m)) / ("run" + std::to_string(rep) + ".csv");
        }

        OptimizerConfig optimizer_config(const ExperimentConfig &cfg, const MethodSettings &ms, std::uint64_t seed)
        {
            OptimizerConfig oc;
            oc.method = ms.method;
            oc.step_size = ms.step_size;
            oc.max_iterations = cfg.max_iterations;
            oc.stop_tolerance = cfg.stop_tolerance;
            oc.transition_source = cfg.transition_source;
            oc.chain = cfg.chain;
            oc.record_wall_time = cfg.record_wall_time;
            if (is_model_free(ms.method))
            {
                EstimationConfig ec;
                ec.trajectories = cfg.trajectories;
                ec.rollout_length = cfg.rollout_length;
                ec.radius = cfg.radius;
                ec.perturbation = cfg.perturbation;
                ec.seed = seed;
                oc.estimation = ec;
            }
            return oc;
        }

        void run_task(const ExperimentConfig &cfg, Task &task)
        {
            const SystemSize &size = cfg.sizes[task.size_index];
            const std::uint64_t seed = run_seed(cfg.master_seed, task.size_index, task.repetition);
            task.outcomes.assign(cfg.methods.size(), {});

            JumpLinearModel model;
            double c_star = 0.0;
            try
            {
                model = generate_random_model(size.modes, size.state_dim, size.input_dim, derive_seed(seed, {0}));
                c_star = exact_cost(model, solve_coupled_are(model).gain);
            }
            catch (const Error &e)
            {
                for (auto &o : task.outcomes)
                {
                    o.failed = true;
                    o.reason = std::string("model setup: ") + e.what();
                }
                return;
            }
            const GainSchedule k0 = zero_policy(model);

            for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
            {
                const MethodSettings &ms = cfg.methods[mi];
                RunOutcome &out = task.outcomes[mi];
                // Both model-free methods see the same rollout randomness.
                const OptimizerConfig oc = optimizer_config(cfg, ms, derive_seed(seed, {1}));
                try
                {
                    auto result = optimize(model, k0, oc, c_star);
                    out.trace = std::move(result.trace);
                    if (result.status == RunStatus::diverged)
                    {
                        out.failed = true;
                        out.reason = result.message;
                    }
                }
                catch (const Error &e)
                {
                    out.failed = true;
                    out.reason = e.what();
                }
                const auto path = run_path(cfg, size, ms.method, task.repetition);
                std::filesystem::create_directories(path.parent_path());
                write_trace_csv(path, out.trace);
            }
        }

        json size_to_json(const SystemSize &s)
        {
            return json::array({s.modes, s.state_dim, s.input_dim});
        }

        SystemSize size_from_json(const json &j)
        {
            if (!j.is_array() || j.size() != 3)
            {
                throw InvalidArgument("size must be [Ns, d, k]");
            }
            return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
        }

        void write_text(const std::filesystem::path &path, const std::string &text)
        {
            std::ofstream out(path, std::ios::binary);
            if (!out)
            {
                throw InvalidArgument("cannot write " + path.string());
            }
            out << text;
        }
    } // namespace

    std::string_view library_version() { return MJLS_VERSION; }

    std::string SystemSize::label() const
    {
        return std::to_string(modes) + "x" + std::to_string(state_dim) + "x" + std::to_string(input_dim);
    }

    MethodSettings default_method_settings(Method method)
    {
        return {method, std::nullopt};
    }

    void ExperimentConfig::validate() const
    {
        if (sizes.empty())
        {
            throw InvalidArgument("experiment needs at least one system size");
        }
        for (const auto &s : sizes)
        {
            if (s.modes < 1 || s.state_dim < 1 || s.input_dim < 1)
            {
                throw InvalidArgument("system sizes must be positive");
            }
        }
        if (repetitions < 1)
        {
            throw InvalidArgument("repetitions must be at least 1");
        }
        if (methods.empty())
        {
            throw InvalidArgument("experiment needs at least one method");
        }
        for (std::size_t i = 0; i < methods.size(); ++i)
        {
            for (std::size_t j = i + 1; j < methods.size(); ++j)
            {
                if (methods[i].method == methods[j].method)
                {
                    throw InvalidArgument("method listed twice: " + std::string(to_string(methods[i].method)));
                }
            }
        }
        for (const auto &m : methods)
        {
            optimizer_config(*this, m, 0).validate();
        }
        if (output_dir.empty())
        {
            throw InvalidArgument("output directory must be set");
        }
    }

    std::uint64_t run_seed(std::uint64_t master, std::size_t size_index, std::size_t rep)
    {
        return derive_seed(master, {size_index, rep});
    }

    const CellSummary *ExperimentResult::find(const SystemSize &size, Method method) const
    {
        for (const auto &c : cells)
        {
            if (c.size == size && c.method == method)
            {
                return &c;
            }
        }
        return nullptr;
    }

    ExperimentResult run_experiment(const ExperimentConfig &cfg)
    {
        cfg.validate();
        std::filesystem::create_directories(cfg.output_dir);

        std::vector<Task> tasks;
        for (std::size_t s = 0; s < cfg.sizes.size(); ++s)
        {
            for (std::size_t r = 0; r < cfg.repetitions; ++r)
            {
                tasks.push_back({s, r, {}});
            }
        }

        const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        const unsigned n = std::min<unsigned>(cfg.workers == 0 ? hw : cfg.workers, static_cast<unsigned>(tasks.size()));
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker = [&] {
            for (std::size_t t = next++; t < tasks.size(); t = next++)
            {
                try
                {
                    run_task(cfg, tasks[t]);
                }
                catch (...)
                {
                    std::lock_guard lock(error_mutex);
                    if (!first_error)
                    {
                        first_error = std::current_exception();
                    }
                }
            }
        };
        if (n <= 1)
        {
            worker();
        }
        else
        {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < n; ++w)
            {
                pool.emplace_back(worker);
            }
            for (auto &t : pool)
            {
                t.join();
            }
        }
        if (first_error)
        {
            std::rethrow_exception(first_error);
        }

        ExperimentResult result;
        json seeds = json::array();
        std::string overloaded;
        for (std::size_t s = 0; s < cfg.sizes.size(); ++s)
        {
            const SystemSize &size = cfg.sizes[s];
            for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
            {
                const Method m = cfg.methods[mi].method;
                CellSummary cell{size, m, 0, 0, {}};
                std::vector<OptimizationTrace> ok;
                for (const auto &task : tasks)
                {
                    if (task.size_index != s)
                    {
                        continue;
                    }
                    const RunOutcome &o = task.outcomes[mi];
                    if (o.failed)
                    {
                        ++cell.failed;
                        result.failures.push_back({size, m, task.repetition, o.reason});
                    }
                    else
                    {
                        ++cell.succeeded;
                        ok.push_back(o.trace);
                    }
                }
                const auto dir = cfg.output_dir / size.label() / std::string(to_string(m));
                std::filesystem::create_directories(dir);
                if (!ok.empty())
                {
                    cell.mean = mean_trace(ok);
                    write_trace_csv(dir / "mean.csv", cell.mean);
                }
                if (2 * cell.failed > cell.failed + cell.succeeded && overloaded.empty())
                {
                    overloaded = size.label() + "/" + std::string(to_string(m));
                }
                result.cells.push_back(std::move(cell));
            }
            for (std::size_t r = 0; r < cfg.repetitions; ++r)
            {
                seeds.push_back({{"size", size_to_json(size)},
                                 {"repetition", r},
                                 {"seed", run_seed(cfg.master_seed, s, r)}});
            }
        }

        json failures = json::array();
        for (const auto &f : result.failures)
        {
            failures.push_back({{"size", size_to_json(f.size)},
                                {"method", std::string(to_string(f.method))},
                                {"repetition", f.repetition},
                                {"reason", f.reason}});
        }
        json manifest = json::object();
        manifest["config"] = json::parse(experiment_config_to_json(cfg));
        manifest["seeds"] = {{"master", cfg.master_seed}, {"runs", std::move(seeds)}};
        manifest["failures"] = std::move(failures);
        manifest["version"] = std::string(library_version());
        result.manifest_path = cfg.output_dir / "manifest.json";
        write_text(result.manifest_path, manifest.dump(2) + "\n");

        if (!overloaded.empty())
        {
            throw NumericalError("more than half the runs failed in cell " + overloaded);
        }
        return result;
    }

    std::string experiment_config_to_json(const ExperimentConfig &cfg, int indent)
    {
        json sizes = json::array();
        for (const auto &s : cfg.sizes)
        {
            sizes.push_back(size_to_json(s));
        }
        json methods = json::array();
        for (const auto &m : cfg.methods)
        {
            json entry = {{"method", std::string(to_string(m.method))}};
            entry["step_size"] = m.step_size ? json(*m.step_size) : json(nullptr);
            methods.push_back(std::move(entry));
        }
        json chain = {{"eps", cfg.chain.eps},
                      {"delta", cfg.chain.delta},
                      {"constant", cfg.chain.constant},
                      {"pilot_length", cfg.chain.pilot_length}};
        chain["length_override"] = cfg.chain.length_override ? json(*cfg.chain.length_override) : json(nullptr);
        json doc = {{"sizes", std::move(sizes)},
                    {"repetitions", cfg.repetitions},
                    {"methods", std::move(methods)},
                    {"max_iterations", cfg.max_iterations},
                    {"stop_tolerance", cfg.stop_tolerance},
                    {"trajectories", cfg.trajectories},
                    {"rollout_length", cfg.rollout_length},
                    {"radius", cfg.radius},
                    {"perturbation", std::string(to_string(cfg.perturbation))},
                    {"transition_source", std::string(to_string(cfg.transition_source))},
                    {"chain", std::move(chain)},
                    {"master_seed", cfg.master_seed},
                    {"record_wall_time", cfg.record_wall_time}};
        return doc.dump(indent);
    }

    ExperimentConfig experiment_config_from_json(const std::string &text)
    {
        json doc;
        try
        {
            doc = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            throw InvalidArgument(std::string("malformed experiment config: ") + e.what());
        }
        try
        {
            ExperimentConfig cfg;
            cfg.sizes.clear();
            for (const auto &s : doc.at("sizes"))
            {
                cfg.sizes.push_back(size_from_json(s));
            }
            cfg.repetitions = doc.at("repetitions").get<std::size_t>();
            cfg.methods.clear();
            for (const auto &m : doc.at("methods"))
            {
                MethodSettings ms{parse_method(m.at("method").get<std::string>()), std::nullopt};
                if (!m.at("step_size").is_null())
                {
                    ms.step_size = m.at("step_size").get<double>();
                }
                cfg.methods.push_back(ms);
            }
            cfg.max_iterations = doc.at("max_iterations").get<std::size_t>();
            cfg.stop_tolerance = doc.at("stop_tolerance").get<double>();
            cfg.trajectories = doc.at("trajectories").get<std::size_t>();
            cfg.rollout_length = doc.at("rollout_length").get<std::size_t>();
            cfg.radius = doc.at("radius").get<double>();
            cfg.perturbation = parse_perturbation_structure(doc.at("perturbation").get<std::string>());
            cfg.transition_source = parse_transition_source(doc.at("transition_source").get<std::string>());
            const json &chain = doc.at("chain");
            cfg.chain.eps = chain.at("eps").get<double>();
            cfg.chain.delta = chain.at("delta").get<double>();
            cfg.chain.constant = chain.at("constant").get<double>();
            cfg.chain.pilot_length = chain.at("pilot_length").get<std::size_t>();
            if (!chain.at("length_override").is_null())
            {
                cfg.chain.length_override = chain.at("length_override").get<std::size_t>();
            }
            cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
            cfg.record_wall_time = doc.at("record_wall_time").get<bool>();
            return cfg;
        }
        catch (const json::exception &e)
        {
            throw InvalidArgument(std::string("experiment config: ") + e.what());
        }
    }

    ExperimentConfig load_manifest_config(const std::filesystem::path &manifest)
    {
        std::ifstream in(manifest, std::ios::binary);
        if (!in)
        {
            throw InvalidArgument("cannot open " + manifest.string());
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        json doc;
        try
        {
            doc = json::parse(buf.str());
        }
        catch (const json::parse_error &e)
        {
            throw InvalidArgument(std::string("malformed manifest: ") + e.what());
        }
        if (!doc.is_object() || !doc.contains("config"))
        {
            throw InvalidArgument("manifest has no \"config\" entry");
        }
        return experiment_config_from_json(doc.at("config").dump());
    }

} // namespace mjls

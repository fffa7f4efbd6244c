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

#ifndef MJLS_EXPERIMENT_HPP
#define MJLS_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mjls/policy_optimizer.hpp"

namespace mjls
{
    std::string_view library_version();

    struct SystemSize
    {
        int modes = 2;
        int state_dim = 2;
        int input_dim = 2;

        // Directory name, e.g. "2x2x2".
        std::string label() const;
        bool operator==(const SystemSize &) const = default;
    };

    struct MethodSettings
    {
        Method method = Method::ngd;
        std::optional<double> step_size; // nullopt: theoretical step size
    };

    // Step size the harness uses for `method` unless told otherwise.
    MethodSettings default_method_settings(Method method);

    struct ExperimentConfig
    {
        std::vector<SystemSize> sizes{{2, 2, 2}, {4, 4, 4}, {6, 6, 6}};
        std::size_t repetitions = 15;
        std::vector<MethodSettings> methods{default_method_settings(Method::gd), default_method_settings(Method::ngd),
                                            default_method_settings(Method::mf_gd),
                                            default_method_settings(Method::mf_ngd)};
        std::size_t max_iterations = 100;
        double stop_tolerance = 1e-8;
        std::size_t trajectories = 500;
        std::size_t rollout_length = 150;
        double radius = 0.05;
        PerturbationStructure perturbation = PerturbationStructure::shared;
        TransitionSource transition_source = TransitionSource::known;
        ChainEstimationSettings chain;
        std::uint64_t master_seed = 1;
        std::filesystem::path output_dir = "runs";
        unsigned workers = 0; // 0: hardware concurrency
        bool record_wall_time = false;

        void validate() const;
    };

    // Seed of repetition `rep` of size number `size_index`; every method of that cell shares the model.
    std::uint64_t run_seed(std::uint64_t master, std::size_t size_index, std::size_t rep);

    struct RunFailure
    {
        SystemSize size;
        Method method = Method::ngd;
        std::size_t repetition = 0;
        std::string reason;
    };

    struct CellSummary
    {
        SystemSize size;
        Method method = Method::ngd;
        std::size_t succeeded = 0;
        std::size_t failed = 0;
        OptimizationTrace mean;
    };

    struct ExperimentResult
    {
        std::vector<CellSummary> cells;
        std::vector<RunFailure> failures;
        std::filesystem::path manifest_path;

        const CellSummary *find(const SystemSize &size, Method method) const;
    };

    /**
     * For each size and repetition a random model is drawn and every method
     * is run from K0 = 0. Writes, below cfg.output_dir:
     *
     *   <size>/<method>/run<j>.csv   one trace per repetition j (partial if it failed)
     *   <size>/<method>/mean.csv     mean over successful runs
     *   manifest.json                {config, seeds, failures, version}
     *
     * Throws NumericalError after writing everything if more than half the
     * runs of some (size, method) cell failed.
     */
    ExperimentResult run_experiment(const ExperimentConfig &cfg);

    std::string experiment_config_to_json(const ExperimentConfig &cfg, int indent = 2);
    ExperimentConfig experiment_config_from_json(const std::string &text);

    // Config recorded in a manifest.json written by run_experiment.
    ExperimentConfig load_manifest_config(const std::filesystem::path &manifest);

} // namespace mjls

#endif // MJLS_EXPERIMENT_HPP

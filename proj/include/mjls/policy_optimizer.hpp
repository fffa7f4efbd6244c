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

#ifndef MJLS_POLICY_OPTIMIZER_HPP
#define MJLS_POLICY_OPTIMIZER_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mjls/chain_estimation.hpp"
#include "mjls/cost_oracle.hpp"
#include "mjls/gradient_estimation.hpp"
#include "mjls/model.hpp"

namespace mjls
{
    enum class Method
    {
        gd,
        ngd,
        mf_gd,
        mf_ngd,
    };

    std::string_view to_string(Method m);
    // Accepts "gd", "ngd", "mf-gd", "mf-ngd"; throws InvalidArgument otherwise.
    Method parse_method(std::string_view name);
    bool is_model_free(Method m);
    bool is_natural(Method m);

    enum class TransitionSource
    {
        known,
        estimated,
    };

    std::string_view to_string(TransitionSource s);
    TransitionSource parse_transition_source(std::string_view name);

    /**
     * The model constants the step-size formulas need: max-over-modes
     * spectral norms of R and B, Lambda_min(Q), and mu. Model-free runs are
     * handed these as prior bounds; the oracle itself never reveals them.
     */
    struct ModelBounds
    {
        double r_max = 0.0;
        double b_max = 0.0;
        double q_min = 0.0;
        double mu = 0.0;

        static ModelBounds of(const JumpLinearModel &model);
    };

    // 1 / eta_grad with alpha = C0 (see the .cpp for the formula).
    double compute_gd_stepsize(const ModelBounds &bounds, double initial_cost);
    double compute_gd_stepsize(const JumpLinearModel &model, double initial_cost);

    // 1 / (2 (||R|| + ||B||^2 C0 / mu)).
    double compute_ngd_stepsize(const ModelBounds &bounds, double initial_cost);
    double compute_ngd_stepsize(const JumpLinearModel &model, double initial_cost);

    // K_i - eta G_i.
    GainSchedule gd_step(const GainSchedule &policy, const ModeMatrices &gradient, double step_size);

    // K_i - eta G_i chi_i^{-1}; throws SingularCorrelation if lambda_min(chi_i) <= 1e-10.
    GainSchedule ngd_step(const GainSchedule &policy, const ModeMatrices &gradient,
                          const BlockCorrelation &correlation, double step_size);

    // Phase that replaces the true chain with an estimate before the model-free loop.
    struct ChainEstimationSettings
    {
        double eps = 0.1;
        double delta = 0.05;
        double constant = 1.0;
        // Chain observed first to estimate pi_star and gamma_ps for the length formula.
        std::size_t pilot_length = 10'000;
        // Skip the formula and observe exactly this many modes.
        std::optional<std::size_t> length_override;
    };

    struct OptimizerConfig
    {
        Method method = Method::ngd;
        std::optional<double> step_size; // nullopt: "auto"
        std::size_t max_iterations = 100;
        double stop_tolerance = 1e-8; // on ||K_{t+1} - K_t||_max
        std::optional<EstimationConfig> estimation;
        TransitionSource transition_source = TransitionSource::known;
        ChainEstimationSettings chain;
        double divergence_factor = 1e3;
        bool record_wall_time = true;

        void validate() const;
    };

    struct TraceRow
    {
        std::size_t iteration = 0;
        double cost = 0.0;
        double normalized_gap = 0.0;
        double grad_norm = 0.0; // Frobenius norm of the gradient that produced this iterate
        double step_norm = 0.0; // ||K_t - K_{t-1}||_max
        double wall_time_s = 0.0;
        double diverged_count = 0.0;
    };

    struct OptimizationTrace
    {
        std::vector<TraceRow> rows;
    };

    enum class RunStatus
    {
        converged,
        max_iterations,
        diverged,
    };

    std::string_view to_string(RunStatus s);

    struct OptimizationResult
    {
        OptimizationTrace trace;
        GainSchedule policy;
        RunStatus status = RunStatus::max_iterations;
        double step_size = 0.0;
        std::optional<ChainEstimate> chain;
        std::string message;
    };

    // Instrumentation for model-free runs: exact cost of a policy (infinity when
    // not stabilizing) and C(K*) for the normalized gap.
    struct CostReporter
    {
        std::function<double(const GainSchedule &)> cost;
        double optimal_cost = 0.0;
    };

    /**
     * Runs the configured method from K0 until the policy change drops below
     * the stop tolerance or max_iterations updates were made. Row t of the
     * trace describes K_t (row 0 is K0). Model-free methods simulate the model
     * through a SimulatedOracle; the update path only sees that oracle.
     *
     * Throws NotStabilizing if a model-based run starts from a non-stabilizing
     * K0 and SingularCorrelation from a natural-gradient step. A run whose
     * reported cost exceeds divergence_factor * C(K0) stops with status
     * diverged and keeps its partial trace.
     */
    OptimizationResult optimize(const JumpLinearModel &model, const GainSchedule &initial_policy,
                                const OptimizerConfig &config, std::optional<double> optimal_cost = std::nullopt);

    // Model-free loop against an arbitrary oracle. `bounds` is required only for an auto step size.
    OptimizationResult optimize_model_free(CostOracle &oracle, const GainSchedule &initial_policy,
                                           const OptimizerConfig &config, const CostReporter &reporter,
                                           const std::optional<ModelBounds> &bounds);

} // namespace mjls

#endif // MJLS_POLICY_OPTIMIZER_HPP

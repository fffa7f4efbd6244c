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

#include "mjls/policy_optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "mjls/errors.hpp"
#include "mjls/exact_analysis.hpp"
#include "mjls/model_generation.hpp"
#include "mjls/simulation.hpp"

namespace mjls
{
    namespace
    {
        constexpr double kInf = std::numeric_limits<double>::infinity();

        class Stopwatch
        {
        public:
            explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}

            double seconds() const
            {
                if (!enabled_)
                {
                    return 0.0;
                }
                return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
            }

        private:
            bool enabled_;
            std::chrono::steady_clock::time_point start_;
        };

        double normalized_gap(double cost, double optimal)
        {
            return (cost - optimal) / optimal;
        }

        double cost_or_infinity(const JumpLinearModel &model, const GainSchedule &policy)
        {
            if (!policy.gains.front().allFinite())
            {
                return kInf;
            }
            try
            {
                return exact_cost(model, policy);
            }
            catch (const NotStabilizing &)
            {
                return kInf;
            }
        }

        double auto_step_size(Method method, const ModelBounds &bounds, double initial_cost)
        {
            return is_natural(method) ? compute_ngd_stepsize(bounds, initial_cost)
                                      : compute_gd_stepsize(bounds, initial_cost);
        }

        GainSchedule apply_update(Method method, const GainSchedule &policy, const ModeMatrices &gradient,
                                  const BlockCorrelation &correlation, double eta)
        {
            return is_natural(method) ? ngd_step(policy, gradient, correlation, eta) : gd_step(policy, gradient, eta);
        }

        // Appends row t for a freshly produced iterate and decides whether to stop.
        bool record_iterate(OptimizationResult &result, std::size_t t, double cost, double optimal, double grad_norm,
                            double step_norm, double seconds, double diverged, double abort_cost, double tolerance)
        {
            result.trace.rows.push_back({t, cost, normalized_gap(cost, optimal), grad_norm, step_norm, seconds, diverged});
            if (!(cost <= abort_cost))
            {
                result.status = RunStatus::diverged;
                result.message = "reported cost exceeded the divergence threshold at iteration " + std::to_string(t);
                return true;
            }
            if (step_norm < tolerance)
            {
                result.status = RunStatus::converged;
                return true;
            }
            return false;
        }

        ChainEstimate estimate_chain_from(const CostOracle &oracle, const ChainEstimationSettings &settings,
                                          std::uint64_t seed)
        {
            const int ns = oracle.num_modes();
            std::size_t length = 0;
            if (settings.length_override)
            {
                length = *settings.length_override;
            }
            else
            {
                // pi_star and gamma_ps come from a pilot estimate; ||mu/pi|| uses its
                // upper bound 1/sqrt(pi_star) since the initial distribution is hidden.
                Rng pilot_rng(derive_seed(seed, {0}));
                const auto pilot = oracle.observe_mode_chain(std::max<std::size_t>(settings.pilot_length, 2), pilot_rng);
                const auto pilot_est = estimate_transition_matrix(pilot, ns);
                const auto params = estimate_pseudo_spectral_params(pilot_est.transitions);
                ChainLengthInputs in;
                in.eps = settings.eps;
                in.delta = settings.delta;
                in.num_states = ns;
                in.pi_star = params.pi_star;
                in.gamma_ps = params.gamma_ps;
                in.mu_over_pi_norm = 1.0 / std::sqrt(params.pi_star);
                in.constant = settings.constant;
                length = required_chain_length(in);
            }
            Rng rng(derive_seed(seed, {1}));
            const auto modes = oracle.observe_mode_chain(std::max<std::size_t>(length, 2), rng);
            return estimate_transition_matrix(modes, ns);
        }
    } // namespace

    std::string_view to_string(Method m)
    {
        switch (m)
        {
        case Method::gd:
            return "gd";
        case Method::ngd:
            return "ngd";
        case Method::mf_gd:
            return "mf-gd";
        case Method::mf_ngd:
            return "mf-ngd";
        }
        return "?";
    }

    Method parse_method(std::string_view name)
    {
        for (Method m : {Method::gd, Method::ngd, Method::mf_gd, Method::mf_ngd})
        {
            if (to_string(m) == name)
            {
                return m;
            }
        }
        throw InvalidArgument("unknown method '" + std::string(name) + "' (expected gd, ngd, mf-gd or mf-ngd)");
    }

    bool is_model_free(Method m) { return m == Method::mf_gd || m == Method::mf_ngd; }

    bool is_natural(Method m) { return m == Method::ngd || m == Method::mf_ngd; }

    std::string_view to_string(TransitionSource s)
    {
        return s == TransitionSource::known ? "known" : "estimated";
    }

    TransitionSource parse_transition_source(std::string_view name)
    {
        if (name == "known")
        {
            return TransitionSource::known;
        }
        if (name == "estimated")
        {
            return TransitionSource::estimated;
        }
        throw InvalidArgument("unknown transition source '" + std::string(name) + "' (expected known or estimated)");
    }

    std::string_view to_string(RunStatus s)
    {
        switch (s)
        {
        case RunStatus::converged:
            return "converged";
        case RunStatus::max_iterations:
            return "max_iterations";
        case RunStatus::diverged:
            return "diverged";
        }
        return "?";
    }

    ModelBounds ModelBounds::of(const JumpLinearModel &model)
    {
        return {tuple_norm::max_spectral(model.R), tuple_norm::max_spectral(model.B),
                min_eigenvalue_over_modes(model.Q), mu_parameter(model)};
    }

    /*
     * alpha = C0
     * xi = ((1 + ||B||^2) alpha / mu + ||R||) / Lambda_min(Q) - 1
     * eta_grad = 2 (||R|| + ||B||^2 (1 + (2 xi / ||B||) (alpha / mu))) alpha / Lambda_min(Q)
     *
     * With B = 0 the xi / ||B|| term is dropped.
     */
    double compute_gd_stepsize(const ModelBounds &b, double initial_cost)
    {
        if (!std::isfinite(initial_cost) || !(initial_cost > 0.0))
        {
            throw InvalidArgument("step size needs a finite positive initial cost");
        }
        if (!(b.mu > 0.0) || !(b.q_min > 0.0))
        {
            throw InvalidArgument("step size needs mu > 0 and Lambda_min(Q) > 0");
        }
        const double alpha = initial_cost;
        const double b2 = b.b_max * b.b_max;
        const double xi = ((1.0 + b2) / b.mu * alpha + b.r_max) / b.q_min - 1.0;
        const double coupling = b.b_max > 0.0 ? b2 * (1.0 + (2.0 * xi / b.b_max) * (alpha / b.mu)) : 0.0;
        const double eta_grad = 2.0 * (b.r_max + coupling) * (alpha / b.q_min);
        return 1.0 / eta_grad;
    }

    double compute_gd_stepsize(const JumpLinearModel &model, double initial_cost)
    {
        return compute_gd_stepsize(ModelBounds::of(model), initial_cost);
    }

    double compute_ngd_stepsize(const ModelBounds &b, double initial_cost)
    {
        if (!std::isfinite(initial_cost) || !(initial_cost > 0.0))
        {
            throw InvalidArgument("step size needs a finite positive initial cost");
        }
        if (!(b.mu > 0.0))
        {
            throw InvalidArgument("step size needs mu > 0");
        }
        return 1.0 / (2.0 * (b.r_max + b.b_max * b.b_max * initial_cost / b.mu));
    }

    double compute_ngd_stepsize(const JumpLinearModel &model, double initial_cost)
    {
        return compute_ngd_stepsize(ModelBounds::of(model), initial_cost);
    }

    GainSchedule gd_step(const GainSchedule &policy, const ModeMatrices &gradient, double step_size)
    {
        if (gradient.size() != policy.gains.size())
        {
            throw InvalidArgument("gradient must have one block per mode");
        }
        GainSchedule next = policy;
        for (std::size_t i = 0; i < gradient.size(); ++i)
        {
            if (gradient[i].rows() != policy.gains[i].rows() || gradient[i].cols() != policy.gains[i].cols())
            {
                throw InvalidArgument("gradient block has wrong dimensions");
            }
            next.gains[i] -= step_size * gradient[i];
        }
        return next;
    }

    GainSchedule ngd_step(const GainSchedule &policy, const ModeMatrices &gradient,
                          const BlockCorrelation &correlation, double step_size)
    {
        if (gradient.size() != policy.gains.size() || correlation.blocks.size() != policy.gains.size())
        {
            throw InvalidArgument("gradient and correlation must have one block per mode");
        }
        ModeMatrices preconditioned(gradient.size());
        for (std::size_t i = 0; i < gradient.size(); ++i)
        {
            const Matrix &chi = correlation.blocks[i];
            if (chi.rows() != gradient[i].cols() || chi.cols() != gradient[i].cols())
            {
                throw InvalidArgument("correlation block has wrong dimensions");
            }
            const Matrix sym = 0.5 * (chi + chi.transpose());
            if (!sym.allFinite() || !(min_symmetric_eigenvalue(sym) > 1e-10))
            {
                throw SingularCorrelation(static_cast<int>(i));
            }
            // G chi^{-1} = (chi^{-1} G')' for symmetric chi.
            preconditioned[i] = sym.llt().solve(gradient[i].transpose()).transpose();
        }
        return gd_step(policy, preconditioned, step_size);
    }

    void OptimizerConfig::validate() const
    {
        if (step_size && !(*step_size > 0.0))
        {
            throw InvalidArgument("step size must be positive");
        }
        if (!(stop_tolerance > 0.0))
        {
            throw InvalidArgument("stop tolerance must be positive");
        }
        if (is_model_free(method))
        {
            if (!estimation)
            {
                throw InvalidArgument("model-free methods need an estimation config");
            }
            estimation->validate();
        }
        if (!(divergence_factor > 1.0))
        {
            throw InvalidArgument("divergence factor must exceed 1");
        }
    }

    OptimizationResult optimize(const JumpLinearModel &model, const GainSchedule &initial_policy,
                                const OptimizerConfig &config, std::optional<double> optimal_cost)
    {
        config.validate();
        model.validate();
        validate_policy(model, initial_policy);
        const double c_star = optimal_cost ? *optimal_cost : exact_cost(model, solve_coupled_are(model).gain);

        if (is_model_free(config.method))
        {
            SimulatedOracle oracle(model);
            CostReporter reporter{[&model](const GainSchedule &k) { return cost_or_infinity(model, k); }, c_star};
            return optimize_model_free(oracle, initial_policy, config, reporter, ModelBounds::of(model));
        }

        const Stopwatch clock(config.record_wall_time);
        const double c0 = exact_cost(model, initial_policy); // throws NotStabilizing
        const double eta = config.step_size ? *config.step_size
                                            : auto_step_size(config.method, ModelBounds::of(model), c0);
        const double abort_cost = config.divergence_factor * c0;

        OptimizationResult result;
        result.step_size = eta;
        result.policy = initial_policy;
        result.trace.rows.push_back({0, c0, normalized_gap(c0, c_star), 0.0, 0.0, clock.seconds(), 0.0});

        for (std::size_t t = 1; t <= config.max_iterations; ++t)
        {
            const auto grad = exact_gradient(model, result.policy);
            GainSchedule next = apply_update(config.method, result.policy, grad.gradient, grad.correlation, eta);
            const double step = tuple_norm::max_spectral(difference(next.gains, result.policy.gains));
            const double cost = cost_or_infinity(model, next);
            const bool stop = record_iterate(result, t, cost, c_star, tuple_norm::frobenius(grad.gradient), step,
                                             clock.seconds(), 0.0, abort_cost, config.stop_tolerance);
            if (result.status == RunStatus::diverged)
            {
                // Keep the last stabilizing policy.
                break;
            }
            result.policy = std::move(next);
            if (stop)
            {
                break;
            }
        }
        return result;
    }

    OptimizationResult optimize_model_free(CostOracle &oracle, const GainSchedule &initial_policy,
                                           const OptimizerConfig &config, const CostReporter &reporter,
                                           const std::optional<ModelBounds> &bounds)
    {
        config.validate();
        if (!is_model_free(config.method))
        {
            throw InvalidArgument("optimize_model_free needs mf-gd or mf-ngd");
        }
        initial_policy.validate_shape(oracle.num_modes(), oracle.input_dim(), oracle.state_dim());
        const Stopwatch clock(config.record_wall_time);
        const EstimationConfig &est_cfg = *config.estimation;

        OptimizationResult result;
        result.policy = initial_policy;

        if (config.transition_source == TransitionSource::estimated)
        {
            result.chain = estimate_chain_from(oracle, config.chain, derive_seed(est_cfg.seed, {2}));
            oracle.drive_modes_with(result.chain->transitions);
        }

        double eta = 0.0;
        if (config.step_size)
        {
            eta = *config.step_size;
        }
        else
        {
            if (!bounds)
            {
                throw InvalidArgument("an auto step size needs model bounds");
            }
            const auto c0_hat = estimate_cost(oracle, initial_policy, est_cfg.trajectories, est_cfg.rollout_length,
                                              derive_seed(est_cfg.seed, {3}));
            eta = auto_step_size(config.method, *bounds, c0_hat.mean);
        }
        result.step_size = eta;

        const double c0 = reporter.cost(initial_policy);
        const double abort_cost = config.divergence_factor * c0;
        result.trace.rows.push_back(
            {0, c0, normalized_gap(c0, reporter.optimal_cost), 0.0, 0.0, clock.seconds(), 0.0});

        for (std::size_t t = 1; t <= config.max_iterations; ++t)
        {
            EstimationConfig iteration_cfg = est_cfg;
            iteration_cfg.seed = derive_seed(est_cfg.seed, {1, t});
            const auto est = estimate_gradient_and_correlation(oracle, result.policy, iteration_cfg);
            const double diverged = static_cast<double>(est.diverged_count);
            if (est.used_trajectories == 0)
            {
                result.trace.rows.push_back({t, kInf, kInf, kInf, 0.0, clock.seconds(), diverged});
                result.status = RunStatus::diverged;
                result.message = "every perturbed rollout diverged at iteration " + std::to_string(t);
                break;
            }
            GainSchedule next = apply_update(config.method, result.policy, est.gradient, est.correlation, eta);
            const double step = tuple_norm::max_spectral(difference(next.gains, result.policy.gains));
            const double cost = reporter.cost(next);
            const bool stop = record_iterate(result, t, cost, reporter.optimal_cost, tuple_norm::frobenius(est.gradient),
                                             step, clock.seconds(), diverged, abort_cost, config.stop_tolerance);
            if (result.status == RunStatus::diverged)
            {
                break;
            }
            result.policy = std::move(next);
            if (stop)
            {
                break;
            }
        }
        return result;
    }

} // namespace mjls

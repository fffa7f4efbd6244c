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

#include "mjls/gradient_estimation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "mjls/errors.hpp"

namespace mjls
{
    namespace
    {
        // Trajectories per partial sum. Fixed, so the floating-point reduction
        // order never depends on the worker count.
        constexpr std::size_t kBlockSize = 256;

        struct PartialSum
        {
            ModeMatrices weighted_perturbations; // sum_i U_i * C_hat_{i,w} (before the D factor)
            ModeMatrices correlation;
            std::size_t diverged = 0;
            std::size_t used = 0;
        };

        template <typename BlockFn>
        void for_each_block(std::size_t num_blocks, unsigned workers, BlockFn fn)
        {
            const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(num_blocks)));
            if (n == 1)
            {
                for (std::size_t b = 0; b < num_blocks; ++b)
                {
                    fn(b);
                }
                return;
            }
            std::atomic<std::size_t> next{0};
            std::vector<std::exception_ptr> errors(n);
            std::vector<std::thread> pool;
            pool.reserve(n);
            for (unsigned w = 0; w < n; ++w)
            {
                pool.emplace_back([&, w] {
                    try
                    {
                        for (std::size_t b = next++; b < num_blocks; b = next++)
                        {
                            fn(b);
                        }
                    }
                    catch (...)
                    {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto &t : pool)
            {
                t.join();
            }
            for (auto &e : errors)
            {
                if (e)
                {
                    std::rethrow_exception(e);
                }
            }
        }

        void check_policy(const CostOracle &oracle, const GainSchedule &policy)
        {
            policy.validate_shape(oracle.num_modes(), oracle.input_dim(), oracle.state_dim());
        }
    } // namespace

    std::string_view to_string(PerturbationStructure s)
    {
        return s == PerturbationStructure::shared ? "shared" : "independent";
    }

    PerturbationStructure parse_perturbation_structure(std::string_view name)
    {
        if (name == "shared")
        {
            return PerturbationStructure::shared;
        }
        if (name == "independent")
        {
            return PerturbationStructure::independent;
        }
        throw InvalidArgument("unknown perturbation structure '" + std::string(name) +
                              "' (expected shared or independent)");
    }

    void EstimationConfig::validate() const
    {
        if (trajectories < 1)
        {
            throw InvalidArgument("number of trajectories must be positive");
        }
        if (rollout_length < 1)
        {
            throw InvalidArgument("rollout length must be positive");
        }
        if (!(radius > 0.0) || !std::isfinite(radius))
        {
            throw InvalidArgument("smoothing radius must be positive");
        }
        if (perturbation_dim && *perturbation_dim < 1)
        {
            throw InvalidArgument("perturbation dimension must be positive");
        }
    }

    Matrix sample_perturbation(Eigen::Index rows, Eigen::Index cols, double radius, Rng &rng)
    {
        if (!(radius > 0.0))
        {
            throw InvalidArgument("perturbation radius must be positive");
        }
        Matrix u = standard_normal_matrix(rows, cols, rng);
        double n = u.norm();
        while (n == 0.0)
        {
            u = standard_normal_matrix(rows, cols, rng);
            n = u.norm();
        }
        return u * (radius / n);
    }

    GradientEstimate estimate_gradient_and_correlation(const CostOracle &oracle, const GainSchedule &policy,
                                                       const EstimationConfig &config)
    {
        config.validate();
        check_policy(oracle, policy);

        const int ns = oracle.num_modes();
        const int d = oracle.state_dim();
        const int k = oracle.input_dim();
        const auto nsz = static_cast<std::size_t>(ns);
        const double r2 = config.radius * config.radius;
        const bool shared = config.perturbation == PerturbationStructure::shared;
        const auto natural_dim = static_cast<std::size_t>(k * d) * (shared ? 1 : nsz);
        const double dim = static_cast<double>(config.perturbation_dim.value_or(natural_dim));

        const std::size_t m = config.trajectories;
        const std::size_t num_blocks = (m + kBlockSize - 1) / kBlockSize;
        std::vector<PartialSum> partials(num_blocks);

        for_each_block(num_blocks, config.workers, [&](std::size_t block) {
            auto sim = oracle.clone();
            PartialSum sum;
            sum.weighted_perturbations.assign(nsz, Matrix::Zero(k, d));
            sum.correlation.assign(nsz, Matrix::Zero(d, d));

            ModeMatrices perturbed(nsz);
            ModeMatrices u(nsz);
            ModeMatrices traj_corr(nsz, Matrix::Zero(d, d));
            std::vector<double> traj_cost(nsz);
            Vector input(k);

            const std::size_t first = block * kBlockSize;
            const std::size_t last = std::min(m, first + kBlockSize);
            for (std::size_t i = first; i < last; ++i)
            {
                Rng rng(derive_seed(config.seed, {i}));
                if (shared)
                {
                    u.assign(nsz, sample_perturbation(k, d, config.radius, rng));
                }
                else
                {
                    const Matrix joint = sample_perturbation(k, d * ns, config.radius, rng);
                    for (std::size_t w = 0; w < nsz; ++w)
                    {
                        u[w] = joint.middleCols(static_cast<Eigen::Index>(w) * d, d);
                    }
                }
                for (std::size_t w = 0; w < nsz; ++w)
                {
                    perturbed[w] = policy.gains[w] + u[w];
                    traj_corr[w].setZero();
                    traj_cost[w] = 0.0;
                }

                sim->reset(rng);
                bool diverged = false;
                for (std::size_t t = 0; t < config.rollout_length; ++t)
                {
                    const auto w = static_cast<std::size_t>(sim->mode());
                    const Vector &x = sim->state();
                    traj_corr[w].noalias() += x * x.transpose();
                    input.noalias() = -perturbed[w] * x;
                    const auto res = sim->step(input);
                    traj_cost[w] += res.stage_cost;
                    if (res.diverged)
                    {
                        diverged = true;
                        break;
                    }
                }
                if (diverged)
                {
                    ++sum.diverged;
                    continue;
                }
                ++sum.used;
                double total = 0.0;
                for (double c : traj_cost)
                {
                    total += c;
                }
                for (std::size_t w = 0; w < nsz; ++w)
                {
                    const double credited = shared ? traj_cost[w] : total;
                    if (credited != 0.0)
                    {
                        sum.weighted_perturbations[w] += (credited / r2) * u[w];
                    }
                    sum.correlation[w] += traj_corr[w];
                }
            }
            partials[block] = std::move(sum);
        });

        GradientEstimate est;
        est.gradient.assign(nsz, Matrix::Zero(k, d));
        est.correlation.blocks.assign(nsz, Matrix::Zero(d, d));
        for (const auto &p : partials)
        {
            for (std::size_t w = 0; w < nsz; ++w)
            {
                est.gradient[w] += p.weighted_perturbations[w];
                est.correlation.blocks[w] += p.correlation[w];
            }
            est.diverged_count += p.diverged;
            est.used_trajectories += p.used;
        }
        if (est.used_trajectories > 0)
        {
            const double inv = 1.0 / static_cast<double>(est.used_trajectories);
            for (std::size_t w = 0; w < nsz; ++w)
            {
                est.gradient[w] *= dim * inv;
                est.correlation.blocks[w] *= inv;
            }
        }
        else
        {
            for (std::size_t w = 0; w < nsz; ++w)
            {
                est.gradient[w].setConstant(std::numeric_limits<double>::quiet_NaN());
                est.correlation.blocks[w].setConstant(std::numeric_limits<double>::quiet_NaN());
            }
        }
        return est;
    }

    CostEstimate estimate_cost(const CostOracle &oracle, const GainSchedule &policy, std::size_t trajectories,
                               std::size_t rollout_length, std::uint64_t seed)
    {
        if (trajectories < 1 || rollout_length < 1)
        {
            throw InvalidArgument("estimate_cost: trajectories and rollout length must be positive");
        }
        check_policy(oracle, policy);
        auto sim = oracle.clone();
        Vector input(oracle.input_dim());
        double sum = 0.0;
        double sum_sq = 0.0;
        std::size_t used = 0;
        CostEstimate out;
        for (std::size_t i = 0; i < trajectories; ++i)
        {
            Rng rng(derive_seed(seed, {i}));
            sim->reset(rng);
            double total = 0.0;
            bool diverged = false;
            for (std::size_t t = 0; t < rollout_length; ++t)
            {
                input.noalias() = -policy[sim->mode()] * sim->state();
                const auto res = sim->step(input);
                total += res.stage_cost;
                if (res.diverged)
                {
                    diverged = true;
                    break;
                }
            }
            if (diverged)
            {
                ++out.diverged_count;
                continue;
            }
            sum += total;
            sum_sq += total * total;
            ++used;
        }
        if (used == 0)
        {
            out.mean = std::numeric_limits<double>::infinity();
            out.standard_error = std::numeric_limits<double>::infinity();
            return out;
        }
        const double n = static_cast<double>(used);
        out.mean = sum / n;
        const double var = used > 1 ? std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1.0)) : 0.0;
        out.standard_error = std::sqrt(var / n);
        return out;
    }

} // namespace mjls

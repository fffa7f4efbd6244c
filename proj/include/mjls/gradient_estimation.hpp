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

#ifndef MJLS_GRADIENT_ESTIMATION_HPP
#define MJLS_GRADIENT_ESTIMATION_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "mjls/cost_oracle.hpp"
#include "mjls/policy.hpp"
#include "mjls/random.hpp"

// Zeroth-order estimation of the policy gradient and the state correlation
// from rollouts of a CostOracle. Nothing here sees the model matrices.
namespace mjls
{
    enum class PerturbationStructure
    {
        // One U_i added to every mode's gain; cost is credited to the mode it is incurred in.
        shared,
        // Independent U_{i,w} per mode, jointly uniform on the product sphere of radius r;
        // every mode's perturbation is weighted by the whole trajectory cost.
        independent,
    };

    std::string_view to_string(PerturbationStructure s);
    PerturbationStructure parse_perturbation_structure(std::string_view name);

    struct EstimationConfig
    {
        std::size_t trajectories = 500;   // m
        std::size_t rollout_length = 150; // l
        double radius = 0.05;             // r, Frobenius norm of each perturbation
        PerturbationStructure perturbation = PerturbationStructure::shared;
        // Dimension D in the D / r^2 scale factor; defaults to k * d (shared)
        // or Ns * k * d (independent).
        std::optional<std::size_t> perturbation_dim;
        std::uint64_t seed = 0;
        // Worker threads; results do not depend on this value.
        unsigned workers = 1;

        void validate() const;
    };

    struct GradientEstimate
    {
        ModeMatrices gradient;        // k x d per mode
        BlockCorrelation correlation; // d x d per mode
        std::size_t diverged_count = 0;
        std::size_t used_trajectories = 0;
    };

    // Uniform draw from the sphere ||U||_F = radius in R^{rows x cols}.
    Matrix sample_perturbation(Eigen::Index rows, Eigen::Index cols, double radius, Rng &rng);

    /**
     * For each of m trajectories: draw U_i on the sphere, run K + U_i (the same
     * U_i added to every mode's gain) for l steps from a fresh reset, and
     * accumulate, per mode w(t) visited at step t,
     *
     *   C_hat_{i,w} += U_i c_t / r^2,   X_hat_{i,w} += x_t x_t'.
     *
     * gradient_w = D * mean_i C_hat_{i,w},  correlation_w = mean_i X_hat_{i,w}.
     *
     * With PerturbationStructure::independent the tuple (U_{i,1}, ..., U_{i,Ns})
     * is drawn on the sphere of radius r in R^{Ns k d} and
     * C_hat_{i,w} = U_{i,w} (sum_t c_t) / r^2.
     *
     * Trajectory i uses the stream derive_seed(seed, {i}), and partial sums are
     * reduced in trajectory order, so the result is independent of `workers`.
     * Trajectories that hit the oracle's overflow guard are left out of both
     * means and counted in diverged_count.
     */
    GradientEstimate estimate_gradient_and_correlation(const CostOracle &oracle, const GainSchedule &policy,
                                                       const EstimationConfig &config);

    struct CostEstimate
    {
        double mean = 0.0;
        double standard_error = 0.0;
        std::size_t diverged_count = 0;
    };

    // Monte-Carlo estimate of C^l(K) from `trajectories` unperturbed rollouts.
    CostEstimate estimate_cost(const CostOracle &oracle, const GainSchedule &policy, std::size_t trajectories,
                               std::size_t rollout_length, std::uint64_t seed);

} // namespace mjls

#endif // MJLS_GRADIENT_ESTIMATION_HPP

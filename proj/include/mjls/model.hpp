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

#ifndef MJLS_MODEL_HPP
#define MJLS_MODEL_HPP

#include "mjls/policy.hpp"

namespace mjls
{
    /**
     * Zero-mean Gaussian initial state with covariance Sigma0, rejection
     * sampled so that ||x0|| <= norm_bound.
     */
    struct InitialStateDistribution
    {
        Matrix covariance;
        double norm_bound = 0.0;

        // Default bound used when a model does not specify one: 10 * sqrt(trace Sigma0).
        static double default_norm_bound(const Matrix &covariance);
    };

    /**
     * Discrete-time Markovian jump linear system
     *
     *   x_{t+1} = A_{w(t)} x_t + B_{w(t)} u_t,   Pr[w(t+1) = j | w(t) = i] = P(i, j)
     *
     * with stage cost x' Q_{w(t)} x + u' R_{w(t)} u. Modes are 0-based.
     */
    struct JumpLinearModel
    {
        ModeMatrices A; // d x d
        ModeMatrices B; // d x k
        ModeMatrices Q; // d x d, symmetric positive definite
        ModeMatrices R; // k x k, symmetric positive definite
        Matrix transitions;   // Ns x Ns, row-stochastic
        Vector initial_modes; // pi0, strictly positive
        InitialStateDistribution initial_state;

        int num_modes() const { return static_cast<int>(A.size()); }
        int state_dim() const { return A.empty() ? 0 : static_cast<int>(A.front().rows()); }
        int input_dim() const { return B.empty() ? 0 : static_cast<int>(B.front().cols()); }

        // Throws InvalidArgument when any structural invariant is violated.
        void validate() const;
    };

    GainSchedule zero_policy(const JumpLinearModel &model);

    // Throws InvalidArgument unless the policy has one finite k x d gain per mode.
    void validate_policy(const JumpLinearModel &model, const GainSchedule &policy);

    // Lambda_min(Q): the smallest eigenvalue over all modes.
    double min_eigenvalue_over_modes(const ModeMatrices &m);

    // Closed-loop matrices Gamma_i = A_i - B_i K_i.
    ModeMatrices closed_loop(const JumpLinearModel &model, const GainSchedule &policy);

    // Throws InvalidArgument unless every row is nonnegative and sums to 1 within tol.
    void require_row_stochastic(const Matrix &transitions, double tol);

} // namespace mjls

#endif // MJLS_MODEL_HPP

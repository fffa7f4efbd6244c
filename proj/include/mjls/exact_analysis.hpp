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

#ifndef MJLS_EXACT_ANALYSIS_HPP
#define MJLS_EXACT_ANALYSIS_HPP

#include <cstddef>
#include <optional>

#include "mjls/model.hpp"

/**
 * Model-based ground truth for a jump linear system under a gain schedule K.
 *
 * Notation: Gamma_i = A_i - B_i K_i, E_i(P) = sum_j p_ij P_j.
 *
 *   F_K(V)_j = sum_i p_ij Gamma_i V_i Gamma_i'          (second-moment propagation)
 *   P_i      = Q_i + K_i' R_i K_i + Gamma_i' E_i(P) Gamma_i   (value of K)
 *   X_i(0)   = pi0_i Sigma0,  X(t+1) = F_K(X(t)),  chi_i = sum_t X_i(t)
 *   C(K)     = tr((sum_i pi0_i P_i) Sigma0) = <Q + K'RK, chi>
 *   grad_i   = 2 L_i chi_i,  L_i = (R_i + B_i' E_i(P) B_i) K_i - B_i' E_i(P) A_i
 *
 * Everything that requires a stabilizing policy checks rho(F_K) < 1 first
 * and throws NotStabilizing otherwise.
 */
namespace mjls
{
    struct SolverTolerance
    {
        // Iterations stop once ||dP||_max <= stop * max(1, ||P||_max) and the
        // update has reached the rounding floor.
        double stop = 1e-11;
        std::size_t max_iterations = 10'000'000;
    };

    struct CouplingSolution
    {
        ModeMatrices value;
        std::size_t iterations = 0;
    };

    struct GradientSchedule
    {
        ModeMatrices gradient; // k x d per mode
        ModeMatrices L;        // L_i(K), k x d per mode
        BlockCorrelation correlation; // chi_K used in the product
    };

    struct AreSolution
    {
        CouplingSolution value;
        GainSchedule gain; // K*
    };

    // E(V)_i = sum_j p_ij V_j.
    ModeMatrices expected_next(const Matrix &transitions, const ModeMatrices &values);

    ModeMatrices apply_FK(const JumpLinearModel &model, const GainSchedule &policy, const ModeMatrices &V);

    // Matrix of F_K acting on (vec V_1, ..., vec V_Ns): block (j, i) = p_ij kron(Gamma_i, Gamma_i).
    Matrix mss_operator_matrix(const JumpLinearModel &model, const GainSchedule &policy);

    // rho(F_K); the policy is mean-square stabilizing iff this is < 1.
    double mss_spectral_radius(const JumpLinearModel &model, const GainSchedule &policy);

    CouplingSolution solve_coupled_lyapunov(const JumpLinearModel &model, const GainSchedule &policy,
                                            const SolverTolerance &tol = {});

    // max_i ||P_i - (Q_i + K_i'R_iK_i + Gamma_i' E_i(P) Gamma_i)||_max (entrywise).
    double coupled_lyapunov_residual(const JumpLinearModel &model, const GainSchedule &policy,
                                     const ModeMatrices &value);

    double exact_cost(const JumpLinearModel &model, const GainSchedule &policy);

    // tr((sum_i pi0_i P_i) Sigma0) for an already solved value.
    double cost_from_value(const JumpLinearModel &model, const ModeMatrices &value);

    // <Q + K'RK, chi> = sum_i tr((Q_i + K_i'R_iK_i) chi_i).
    double cost_from_correlation(const JumpLinearModel &model, const GainSchedule &policy,
                                 const BlockCorrelation &correlation);

    /**
     * chi_K. Without a horizon this is the infinite sum (policy must be
     * stabilizing); with horizon l it is the truncated sum over t = 0..l.
     */
    BlockCorrelation state_correlation(const JumpLinearModel &model, const GainSchedule &policy,
                                       std::optional<std::size_t> horizon = std::nullopt);

    // C^l(K): expected cost of the first l stages (t = 0..l-1). Valid for any K.
    double finite_horizon_cost(const JumpLinearModel &model, const GainSchedule &policy, std::size_t horizon);

    // C(K) - C^l(K) = <P^K, X(l)>, evaluated without cancellation. Nonnegative;
    // when X(t) becomes negligible before t = l the returned value is an upper bound.
    double cost_truncation_error(const JumpLinearModel &model, const GainSchedule &policy, std::size_t horizon);

    GradientSchedule exact_gradient(const JumpLinearModel &model, const GainSchedule &policy);

    // Riccati value iteration from P = Q; K*_i = (R_i + B_i'E_iB_i)^{-1} B_i'E_iA_i.
    AreSolution solve_coupled_are(const JumpLinearModel &model, const SolverTolerance &tol = {.stop = 1e-11,
                                                                                            .max_iterations = 1'000'000});

    double coupled_riccati_residual(const JumpLinearModel &model, const ModeMatrices &value);

    // Rollout length after which the truncated cost is within eps of C(K):
    // l >= d C(K)^2 sum_i(||Q_i|| + ||R_i|| ||K_i||^2) / (eps mu Lambda_min(Q)^2).
    double cost_truncation_horizon(const JumpLinearModel &model, const GainSchedule &policy, double eps);

    // Same for the correlation: l >= d C(K)^2 / (eps mu Lambda_min(Q)^2).
    double correlation_truncation_horizon(const JumpLinearModel &model, const GainSchedule &policy, double eps);

} // namespace mjls

#endif // MJLS_EXACT_ANALYSIS_HPP

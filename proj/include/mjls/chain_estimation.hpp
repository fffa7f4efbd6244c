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

#ifndef MJLS_CHAIN_ESTIMATION_HPP
#define MJLS_CHAIN_ESTIMATION_HPP

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace mjls
{
    struct ChainEstimate
    {
        Eigen::MatrixXd transitions;      // P_hat, row-stochastic
        Eigen::VectorXd visits;           // N_i
        Eigen::MatrixXd transition_counts; // N_ij
        std::size_t samples_used = 0;
    };

    /**
     * Empirical transition matrix from one observed chain w(0..n-1):
     * p_hat_ij = N_ij / N_i, counting pairs (w(t), w(t+1)) for t = 0..n-2.
     * Rows of unvisited modes are uniform.
     */
    ChainEstimate estimate_transition_matrix(std::span<const int> modes, int num_modes);

    struct ChainLengthInputs
    {
        double eps = 0.1;   // target ||P - P_hat||_inf, in (0, 2)
        double delta = 0.05; // failure probability, in (0, 1)
        int num_states = 2;
        double pi_star = 0.5;  // min stationary probability, in (0, 1]
        double gamma_ps = 1.0; // pseudo-spectral gap, > 0
        double mu_over_pi_norm = 1.0; // ||mu / pi||_{2,pi} >= 1
        double constant = 1.0;        // universal constant c
    };

    /**
     * n = ceil(c * max(n1, n2)) with
     *   n1 = max(Ns, ln(1 / (eps delta))) / (eps^2 pi_star)
     *   n2 = ln(Ns ||mu/pi||_{2,pi} / delta) / (gamma_ps pi_star)
     */
    std::size_t required_chain_length(const ChainLengthInputs &in);

    struct PseudoSpectralParams
    {
        Eigen::VectorXd stationary;
        double pi_star = 0.0;
        double gamma_ps = 0.0;
        double mu_over_pi_norm = 1.0;
    };

    /**
     * Stationary distribution, pi_star and gamma_ps = max_{1<=k<=max_power}
     * gap((M*)^k M^k) / k, where M* is the time reversal. mu_over_pi_norm is
     * computed for `initial` when given, otherwise for mu = pi (value 1).
     * Throws NonErgodic if the rows of P^t do not converge to a common limit.
     */
    PseudoSpectralParams estimate_pseudo_spectral_params(const Eigen::MatrixXd &transitions,
                                                         const Eigen::VectorXd *initial = nullptr,
                                                         int max_power = 50);

    // Matrix infinity norm: max row sum of absolute values.
    double max_row_sum_norm(const Eigen::MatrixXd &m);

} // namespace mjls

#endif // MJLS_CHAIN_ESTIMATION_HPP

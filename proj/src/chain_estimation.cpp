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

#include "mjls/chain_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "mjls/errors.hpp"
#include "mjls/model.hpp"

namespace mjls
{
    ChainEstimate estimate_transition_matrix(std::span<const int> modes, int num_modes)
    {
        if (num_modes < 1)
        {
            throw InvalidArgument("number of modes must be positive");
        }
        if (modes.size() < 2)
        {
            throw InvalidArgument("transition estimation needs at least two observations");
        }
        ChainEstimate est;
        est.visits = Eigen::VectorXd::Zero(num_modes);
        est.transition_counts = Eigen::MatrixXd::Zero(num_modes, num_modes);
        for (std::size_t t = 0; t + 1 < modes.size(); ++t)
        {
            const int i = modes[t];
            const int j = modes[t + 1];
            if (i < 0 || i >= num_modes || j < 0 || j >= num_modes)
            {
                throw InvalidArgument("mode index out of range: " + std::to_string(i < 0 || i >= num_modes ? i : j));
            }
            est.visits(i) += 1.0;
            est.transition_counts(i, j) += 1.0;
        }
        est.transitions.resize(num_modes, num_modes);
        for (int i = 0; i < num_modes; ++i)
        {
            if (est.visits(i) > 0.0)
            {
                est.transitions.row(i) = est.transition_counts.row(i) / est.visits(i);
            }
            else
            {
                est.transitions.row(i).setConstant(1.0 / num_modes);
            }
        }
        est.samples_used = modes.size();
        return est;
    }

    std::size_t required_chain_length(const ChainLengthInputs &in)
    {
        if (!(in.eps > 0.0 && in.eps < 2.0))
        {
            throw InvalidArgument("eps must lie in (0, 2)");
        }
        if (!(in.delta > 0.0 && in.delta < 1.0))
        {
            throw InvalidArgument("delta must lie in (0, 1)");
        }
        if (!(in.pi_star > 0.0 && in.pi_star <= 1.0))
        {
            throw InvalidArgument("pi_star must lie in (0, 1]");
        }
        if (!(in.gamma_ps > 0.0))
        {
            throw InvalidArgument("pseudo-spectral gap must be positive");
        }
        if (in.num_states < 1 || !(in.mu_over_pi_norm > 0.0) || !(in.constant > 0.0))
        {
            throw InvalidArgument("num_states, ||mu/pi|| and c must be positive");
        }
        const double ns = static_cast<double>(in.num_states);
        const double n1 = std::max(ns, std::log(1.0 / (in.eps * in.delta))) / (in.eps * in.eps * in.pi_star);
        const double n2 = std::log(ns * in.mu_over_pi_norm / in.delta) / (in.gamma_ps * in.pi_star);
        return static_cast<std::size_t>(std::ceil(in.constant * std::max(n1, n2)));
    }

    double max_row_sum_norm(const Eigen::MatrixXd &m)
    {
        return m.cwiseAbs().rowwise().sum().maxCoeff();
    }

    PseudoSpectralParams estimate_pseudo_spectral_params(const Eigen::MatrixXd &transitions,
                                                         const Eigen::VectorXd *initial, int max_power)
    {
        require_row_stochastic(transitions, 1e-9);
        const auto n = transitions.rows();
        if (max_power < 1)
        {
            throw InvalidArgument("max_power must be at least 1");
        }

        // Rows of P^(2^60) must agree: irreducible and aperiodic.
        Eigen::MatrixXd limit = transitions;
        for (int s = 0; s < 60; ++s)
        {
            limit = (limit * limit).eval();
        }
        for (Eigen::Index i = 1; i < n; ++i)
        {
            if ((limit.row(i) - limit.row(0)).cwiseAbs().maxCoeff() > 1e-9)
            {
                throw NonErgodic("transition matrix is not ergodic: rows of P^t do not converge");
            }
        }

        Eigen::EigenSolver<Eigen::MatrixXd> es(transitions.transpose());
        const auto &values = es.eigenvalues();
        Eigen::Index unit = 0;
        int near_one = 0;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            if (std::abs(values(i) - 1.0) < 1e-9)
            {
                ++near_one;
                unit = i;
            }
        }
        if (near_one != 1)
        {
            throw NonErgodic("transition matrix has " + std::to_string(near_one) + " unit eigenvalues");
        }
        Eigen::VectorXd pi = es.eigenvectors().col(unit).real();
        pi /= pi.sum();
        if (pi.minCoeff() <= 0.0)
        {
            throw NonErgodic("stationary distribution is not strictly positive");
        }

        PseudoSpectralParams out;
        out.stationary = pi;
        out.pi_star = pi.minCoeff();

        // Time reversal M*(i, j) = pi_j M(j, i) / pi_i.
        Eigen::MatrixXd reversal(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            for (Eigen::Index j = 0; j < n; ++j)
            {
                reversal(i, j) = pi(j) * transitions(j, i) / pi(i);
            }
        }
        const Eigen::VectorXd sqrt_pi = pi.cwiseSqrt();
        Eigen::MatrixXd forward_power = Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd reversal_power = Eigen::MatrixXd::Identity(n, n);
        double best = 0.0;
        for (int k = 1; k <= max_power; ++k)
        {
            forward_power = (forward_power * transitions).eval();
            reversal_power = (reversal_power * reversal).eval();
            const Eigen::MatrixXd product = reversal_power * forward_power;
            // product is self-adjoint in L2(pi); D^{1/2} product D^{-1/2} is symmetric.
            Eigen::MatrixXd sym = sqrt_pi.asDiagonal() * product * sqrt_pi.cwiseInverse().asDiagonal();
            sym = 0.5 * (sym + sym.transpose()).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym_es(sym, Eigen::EigenvaluesOnly);
            const Eigen::VectorXd ev = sym_es.eigenvalues(); // ascending
            const double second = n > 1 ? ev(n - 2) : 0.0;
            best = std::max(best, (1.0 - second) / k);
        }
        out.gamma_ps = best;

        if (initial != nullptr)
        {
            if (initial->size() != n)
            {
                throw InvalidArgument("initial distribution must have one entry per state");
            }
            out.mu_over_pi_norm = std::sqrt((initial->array().square() / pi.array()).sum());
        }
        return out;
    }

} // namespace mjls

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

#include "mjls/exact_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "mjls/errors.hpp"
#include "mjls/model_generation.hpp"

namespace mjls
{
    namespace
    {
        // Terms below this fraction of the running sum no longer change it in double precision.
        constexpr double kNegligibleTerm = 1e-17;

        void require_stabilizing(const JumpLinearModel &model, const GainSchedule &policy)
        {
            const double rho = mss_spectral_radius(model, policy);
            if (!(rho < 1.0))
            {
                throw NotStabilizing(rho);
            }
        }

        ModeMatrices symmetrized(ModeMatrices m)
        {
            for (auto &x : m)
            {
                x = 0.5 * (x + x.transpose()).eval();
            }
            return m;
        }

        /**
         * Iterates value <- update(value) until the update is below tol.stop
         * (relative to the value's magnitude) and has stopped shrinking, or is
         * exactly at machine precision.
         */
        template <typename Update>
        CouplingSolution iterate_to_fixed_point(ModeMatrices value, Update update, const SolverTolerance &tol,
                                                const char *what)
        {
            double previous_delta = std::numeric_limits<double>::infinity();
            for (std::size_t it = 1; it <= tol.max_iterations; ++it)
            {
                ModeMatrices next = update(value);
                const double delta = tuple_norm::max_abs_entry(difference(next, value));
                const double scale = std::max(1.0, tuple_norm::max_abs_entry(next));
                if (!std::isfinite(delta))
                {
                    throw NoConvergence(std::string(what) + ": iteration diverged");
                }
                value = std::move(next);
                if (delta <= 1e-15 * scale || (delta <= tol.stop * scale && delta >= previous_delta))
                {
                    return {std::move(value), it};
                }
                previous_delta = delta;
            }
            throw NoConvergence(std::string(what) + ": no convergence after " + std::to_string(tol.max_iterations) +
                                " iterations");
        }

        ModeMatrices initial_correlation(const JumpLinearModel &model)
        {
            ModeMatrices x0(static_cast<std::size_t>(model.num_modes()));
            for (int i = 0; i < model.num_modes(); ++i)
            {
                x0[static_cast<std::size_t>(i)] = model.initial_modes(i) * model.initial_state.covariance;
            }
            return x0;
        }

        double tuple_trace(const ModeMatrices &m)
        {
            double t = 0.0;
            for (const auto &x : m)
            {
                t += x.trace();
            }
            return t;
        }

        double tuple_inner(const ModeMatrices &a, const ModeMatrices &b)
        {
            double s = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i)
            {
                s += (a[i].transpose() * b[i]).trace();
            }
            return s;
        }

        // Q_i + K_i' R_i K_i.
        ModeMatrices stage_weights(const JumpLinearModel &model, const GainSchedule &policy)
        {
            ModeMatrices w(model.Q.size());
            for (std::size_t i = 0; i < w.size(); ++i)
            {
                w[i] = model.Q[i] + policy.gains[i].transpose() * model.R[i] * policy.gains[i];
            }
            return w;
        }

        ModeMatrices propagate(const Matrix &transitions, const ModeMatrices &gamma, const ModeMatrices &v)
        {
            const auto ns = gamma.size();
            ModeMatrices out(ns, Matrix::Zero(gamma.front().rows(), gamma.front().rows()));
            for (std::size_t i = 0; i < ns; ++i)
            {
                const Matrix moved = gamma[i] * v[i] * gamma[i].transpose();
                for (std::size_t j = 0; j < ns; ++j)
                {
                    const double p = transitions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                    if (p != 0.0)
                    {
                        out[j] += p * moved;
                    }
                }
            }
            return out;
        }
    } // namespace

    ModeMatrices expected_next(const Matrix &transitions, const ModeMatrices &values)
    {
        const auto ns = values.size();
        ModeMatrices out(ns, Matrix::Zero(values.front().rows(), values.front().cols()));
        for (std::size_t i = 0; i < ns; ++i)
        {
            for (std::size_t j = 0; j < ns; ++j)
            {
                const double p = transitions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (p != 0.0)
                {
                    out[i] += p * values[j];
                }
            }
        }
        return out;
    }

    ModeMatrices apply_FK(const JumpLinearModel &model, const GainSchedule &policy, const ModeMatrices &V)
    {
        const auto gamma = closed_loop(model, policy);
        if (V.size() != gamma.size())
        {
            throw InvalidArgument("apply_FK: V must have one matrix per mode");
        }
        return propagate(model.transitions, gamma, V);
    }

    Matrix mss_operator_matrix(const JumpLinearModel &model, const GainSchedule &policy)
    {
        const auto gamma = closed_loop(model, policy);
        const int ns = model.num_modes();
        const int d = model.state_dim();
        const int b = d * d;
        Matrix op = Matrix::Zero(ns * b, ns * b);
        for (int i = 0; i < ns; ++i)
        {
            const Matrix &g = gamma[static_cast<std::size_t>(i)];
            Matrix kron(b, b);
            for (int r = 0; r < d; ++r)
            {
                for (int c = 0; c < d; ++c)
                {
                    kron.block(r * d, c * d, d, d) = g(r, c) * g;
                }
            }
            for (int j = 0; j < ns; ++j)
            {
                const double p = model.transitions(i, j);
                if (p != 0.0)
                {
                    op.block(j * b, i * b, b, b) = p * kron;
                }
            }
        }
        return op;
    }

    double mss_spectral_radius(const JumpLinearModel &model, const GainSchedule &policy)
    {
        const Matrix op = mss_operator_matrix(model, policy);
        if (op.rows() == 1)
        {
            return std::abs(op(0, 0));
        }
        Eigen::EigenSolver<Matrix> es(op, false);
        if (es.info() != Eigen::Success)
        {
            throw NoConvergence("mss_spectral_radius: eigenvalue computation failed");
        }
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }

    CouplingSolution solve_coupled_lyapunov(const JumpLinearModel &model, const GainSchedule &policy,
                                            const SolverTolerance &tol)
    {
        require_stabilizing(model, policy);
        const auto gamma = closed_loop(model, policy);
        const auto weights = stage_weights(model, policy);
        auto update = [&](const ModeMatrices &p) {
            const ModeMatrices e = expected_next(model.transitions, p);
            ModeMatrices next(p.size());
            for (std::size_t i = 0; i < p.size(); ++i)
            {
                next[i] = weights[i] + gamma[i].transpose() * e[i] * gamma[i];
            }
            return next;
        };
        auto sol = iterate_to_fixed_point(model.Q, update, tol, "coupled Lyapunov");
        sol.value = symmetrized(std::move(sol.value));
        return sol;
    }

    double coupled_lyapunov_residual(const JumpLinearModel &model, const GainSchedule &policy,
                                     const ModeMatrices &value)
    {
        const auto gamma = closed_loop(model, policy);
        const auto weights = stage_weights(model, policy);
        const ModeMatrices e = expected_next(model.transitions, value);
        double res = 0.0;
        for (std::size_t i = 0; i < value.size(); ++i)
        {
            const Matrix rhs = weights[i] + gamma[i].transpose() * e[i] * gamma[i];
            res = std::max(res, (value[i] - rhs).cwiseAbs().maxCoeff());
        }
        return res;
    }

    double cost_from_value(const JumpLinearModel &model, const ModeMatrices &value)
    {
        Matrix weighted = Matrix::Zero(model.state_dim(), model.state_dim());
        for (int i = 0; i < model.num_modes(); ++i)
        {
            weighted += model.initial_modes(i) * value[static_cast<std::size_t>(i)];
        }
        return (weighted * model.initial_state.covariance).trace();
    }

    double exact_cost(const JumpLinearModel &model, const GainSchedule &policy)
    {
        return cost_from_value(model, solve_coupled_lyapunov(model, policy).value);
    }

    double cost_from_correlation(const JumpLinearModel &model, const GainSchedule &policy,
                                 const BlockCorrelation &correlation)
    {
        return tuple_inner(stage_weights(model, policy), correlation.blocks);
    }

    BlockCorrelation state_correlation(const JumpLinearModel &model, const GainSchedule &policy,
                                       std::optional<std::size_t> horizon)
    {
        if (!horizon)
        {
            require_stabilizing(model, policy);
        }
        const auto gamma = closed_loop(model, policy);
        ModeMatrices term = initial_correlation(model);
        ModeMatrices acc = term;
        const std::size_t last = horizon.value_or(std::numeric_limits<std::size_t>::max());
        for (std::size_t t = 1; t <= last; ++t)
        {
            term = propagate(model.transitions, gamma, term);
            const double term_trace = tuple_trace(term);
            if (!std::isfinite(term_trace))
            {
                throw NoConvergence("state_correlation: second moments overflowed");
            }
            for (std::size_t i = 0; i < acc.size(); ++i)
            {
                acc[i] += term[i];
            }
            if (term_trace <= kNegligibleTerm * tuple_trace(acc))
            {
                break;
            }
        }
        return {symmetrized(std::move(acc))};
    }

    double finite_horizon_cost(const JumpLinearModel &model, const GainSchedule &policy, std::size_t horizon)
    {
        if (horizon == 0)
        {
            return 0.0;
        }
        return cost_from_correlation(model, policy, state_correlation(model, policy, horizon - 1));
    }

    double cost_truncation_error(const JumpLinearModel &model, const GainSchedule &policy, std::size_t horizon)
    {
        const auto value = solve_coupled_lyapunov(model, policy).value;
        const auto gamma = closed_loop(model, policy);
        ModeMatrices term = initial_correlation(model);
        const double total = tuple_inner(value, term);
        double tail = total;
        for (std::size_t t = 1; t <= horizon; ++t)
        {
            term = propagate(model.transitions, gamma, term);
            tail = tuple_inner(value, term);
            if (tail <= 1e-30 * total)
            {
                break;
            }
        }
        return std::max(tail, 0.0);
    }

    GradientSchedule exact_gradient(const JumpLinearModel &model, const GainSchedule &policy)
    {
        const auto value = solve_coupled_lyapunov(model, policy).value;
        const auto chi = state_correlation(model, policy);
        const ModeMatrices e = expected_next(model.transitions, value);

        GradientSchedule g;
        g.gradient.resize(value.size());
        g.L.resize(value.size());
        for (std::size_t i = 0; i < value.size(); ++i)
        {
            const Matrix &a = model.A[i];
            const Matrix &b = model.B[i];
            g.L[i] = (model.R[i] + b.transpose() * e[i] * b) * policy.gains[i] - b.transpose() * e[i] * a;
            g.gradient[i] = 2.0 * g.L[i] * chi.blocks[i];
        }
        g.correlation = chi;
        return g;
    }

    AreSolution solve_coupled_are(const JumpLinearModel &model, const SolverTolerance &tol)
    {
        model.validate();
        auto riccati = [&](const ModeMatrices &p) {
            const ModeMatrices e = expected_next(model.transitions, p);
            ModeMatrices next(p.size());
            for (std::size_t i = 0; i < p.size(); ++i)
            {
                const Matrix &a = model.A[i];
                const Matrix &b = model.B[i];
                const Matrix bea = b.transpose() * e[i] * a;
                const Matrix gram = model.R[i] + b.transpose() * e[i] * b;
                next[i] = model.Q[i] + a.transpose() * e[i] * a - bea.transpose() * gram.ldlt().solve(bea);
                next[i] = 0.5 * (next[i] + next[i].transpose()).eval();
            }
            return next;
        };
        AreSolution out;
        out.value = iterate_to_fixed_point(model.Q, riccati, tol, "coupled Riccati");

        const ModeMatrices e = expected_next(model.transitions, out.value.value);
        out.gain.gains.resize(e.size());
        for (std::size_t i = 0; i < e.size(); ++i)
        {
            const Matrix &b = model.B[i];
            const Matrix gram = model.R[i] + b.transpose() * e[i] * b;
            out.gain.gains[i] = gram.ldlt().solve(b.transpose() * e[i] * model.A[i]);
        }
        const double rho = mss_spectral_radius(model, out.gain);
        if (!(rho < 1.0))
        {
            throw NoConvergence("coupled Riccati: resulting gain is not stabilizing (rho = " + std::to_string(rho) +
                                "); model may not be mean-square stabilizable");
        }
        return out;
    }

    double coupled_riccati_residual(const JumpLinearModel &model, const ModeMatrices &value)
    {
        const ModeMatrices e = expected_next(model.transitions, value);
        double res = 0.0;
        for (std::size_t i = 0; i < value.size(); ++i)
        {
            const Matrix &a = model.A[i];
            const Matrix &b = model.B[i];
            const Matrix bea = b.transpose() * e[i] * a;
            const Matrix gram = model.R[i] + b.transpose() * e[i] * b;
            const Matrix rhs = model.Q[i] + a.transpose() * e[i] * a - bea.transpose() * gram.ldlt().solve(bea);
            res = std::max(res, (value[i] - rhs).cwiseAbs().maxCoeff());
        }
        return res;
    }

    double cost_truncation_horizon(const JumpLinearModel &model, const GainSchedule &policy, double eps)
    {
        if (!(eps > 0.0))
        {
            throw InvalidArgument("truncation tolerance must be positive");
        }
        const double c = exact_cost(model, policy);
        double weight = 0.0;
        for (std::size_t i = 0; i < model.Q.size(); ++i)
        {
            const double k = spectral_norm(policy.gains[i]);
            weight += spectral_norm(model.Q[i]) + spectral_norm(model.R[i]) * k * k;
        }
        const double lq = min_eigenvalue_over_modes(model.Q);
        return model.state_dim() * c * c * weight / (eps * mu_parameter(model) * lq * lq);
    }

    double correlation_truncation_horizon(const JumpLinearModel &model, const GainSchedule &policy, double eps)
    {
        if (!(eps > 0.0))
        {
            throw InvalidArgument("truncation tolerance must be positive");
        }
        const double c = exact_cost(model, policy);
        const double lq = min_eigenvalue_over_modes(model.Q);
        return model.state_dim() * c * c / (eps * mu_parameter(model) * lq * lq);
    }

} // namespace mjls

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

#include "mjls/simulation.hpp"

#include <cmath>
#include <utility>

#include "mjls/errors.hpp"

namespace mjls
{
    namespace
    {
        Matrix covariance_factor(const Matrix &covariance)
        {
            Eigen::LLT<Matrix> llt(covariance);
            if (llt.info() != Eigen::Success)
            {
                throw InvalidArgument("Sigma0 is not positive definite");
            }
            return llt.matrixL();
        }

        Vector draw_truncated_gaussian(const Matrix &factor, double bound, Rng &rng)
        {
            const auto d = factor.rows();
            Vector z(d);
            // Acceptance probability is at least 0.99 for the default bound.
            for (;;)
            {
                for (Eigen::Index i = 0; i < d; ++i)
                {
                    z(i) = standard_normal(rng);
                }
                Vector x = factor * z;
                if (x.norm() <= bound)
                {
                    return x;
                }
            }
        }
    } // namespace

    std::vector<int> sample_mode_chain(const Matrix &transitions, const Vector &initial_modes,
                                       std::size_t length, Rng &rng)
    {
        require_row_stochastic(transitions, 1e-9);
        if (initial_modes.size() != transitions.rows())
        {
            throw InvalidArgument("pi0 must have one entry per mode");
        }
        if (length < 1)
        {
            throw InvalidArgument("mode chain length must be at least 1");
        }
        std::vector<int> modes(length);
        modes[0] = sample_categorical(initial_modes, rng);
        for (std::size_t t = 1; t < length; ++t)
        {
            modes[t] = sample_categorical(transitions.row(modes[t - 1]), rng);
        }
        return modes;
    }

    Vector sample_initial_state(const InitialStateDistribution &dist, Rng &rng)
    {
        return draw_truncated_gaussian(covariance_factor(dist.covariance), dist.norm_bound, rng);
    }

    SimulatedOracle::SimulatedOracle(JumpLinearModel model)
        : model_(std::move(model))
    {
        model_.validate();
        driving_transitions_ = model_.transitions;
        state_factor_ = covariance_factor(model_.initial_state.covariance);
        cost_buffer_ = Vector::Zero(model_.state_dim());
        next_state_ = Vector::Zero(model_.state_dim());
        state_ = Vector::Zero(model_.state_dim());
    }

    void SimulatedOracle::reset(Rng &rng)
    {
        state_ = draw_truncated_gaussian(state_factor_, model_.initial_state.norm_bound, rng);
        mode_ = sample_categorical(model_.initial_modes, rng);
        transition_rng_.seed(rng());
    }

    void SimulatedOracle::reset_to(const Vector &x0, int mode, std::uint64_t transition_seed)
    {
        if (x0.size() != model_.state_dim() || mode < 0 || mode >= model_.num_modes())
        {
            throw InvalidArgument("reset_to: initial condition does not match the model");
        }
        state_ = x0;
        mode_ = mode;
        transition_rng_.seed(transition_seed);
    }

    CostOracle::StepResult SimulatedOracle::step(const Vector &input)
    {
        const auto m = static_cast<std::size_t>(mode_);
        StepResult result;
        cost_buffer_.noalias() = model_.Q[m] * state_;
        double cost = state_.dot(cost_buffer_);
        // R * u reuses the head of the buffer when k <= d; otherwise allocate once.
        if (input.size() <= cost_buffer_.size())
        {
            auto head = cost_buffer_.head(input.size());
            head.noalias() = model_.R[m] * input;
            cost += input.dot(head);
        }
        else
        {
            cost += input.dot(model_.R[m] * input);
        }
        result.stage_cost = cost;

        next_state_.noalias() = model_.A[m] * state_;
        next_state_.noalias() += model_.B[m] * input;
        state_.swap(next_state_);
        mode_ = sample_categorical(driving_transitions_.row(mode_), transition_rng_);

        const double norm = state_.norm();
        result.diverged = !(norm <= kOverflowGuard) || !std::isfinite(cost);
        return result;
    }

    std::vector<int> SimulatedOracle::observe_mode_chain(std::size_t length, Rng &rng) const
    {
        return sample_mode_chain(model_.transitions, model_.initial_modes, length, rng);
    }

    void SimulatedOracle::drive_modes_with(const Matrix &transitions)
    {
        if (transitions.rows() != model_.num_modes())
        {
            throw InvalidArgument("driving transition matrix must be Ns x Ns");
        }
        require_row_stochastic(transitions, 1e-9);
        driving_transitions_ = transitions;
    }

    std::unique_ptr<CostOracle> SimulatedOracle::clone() const
    {
        auto copy = std::make_unique<SimulatedOracle>(*this);
        return copy;
    }

    Trajectory rollout(CostOracle &oracle, const GainSchedule &policy, std::size_t horizon, Rng &rng)
    {
        if (horizon < 1)
        {
            throw InvalidArgument("rollout horizon must be at least 1");
        }
        if (policy.num_modes() != oracle.num_modes())
        {
            throw InvalidArgument("policy must have one gain per mode");
        }
        for (const auto &g : policy.gains)
        {
            if (g.rows() != oracle.input_dim() || g.cols() != oracle.state_dim())
            {
                throw InvalidArgument("policy gain must be k x d");
            }
        }

        Trajectory traj;
        traj.states.reserve(horizon + 1);
        traj.modes.reserve(horizon + 1);
        traj.stage_costs.reserve(horizon);

        oracle.reset(rng);
        traj.states.push_back(oracle.state());
        traj.modes.push_back(oracle.mode());
        Vector input(oracle.input_dim());
        for (std::size_t t = 0; t < horizon; ++t)
        {
            input.noalias() = -policy[oracle.mode()] * oracle.state();
            const auto res = oracle.step(input);
            traj.stage_costs.push_back(res.stage_cost);
            traj.total_cost += res.stage_cost;
            traj.states.push_back(oracle.state());
            traj.modes.push_back(oracle.mode());
            if (res.diverged)
            {
                traj.diverged = true;
                break;
            }
        }
        return traj;
    }

    Trajectory rollout(const JumpLinearModel &model, const GainSchedule &policy, std::size_t horizon, Rng &rng)
    {
        validate_policy(model, policy);
        SimulatedOracle oracle(model);
        return rollout(oracle, policy, horizon, rng);
    }

} // namespace mjls

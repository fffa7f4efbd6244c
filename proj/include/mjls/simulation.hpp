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

#ifndef MJLS_SIMULATION_HPP
#define MJLS_SIMULATION_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "mjls/cost_oracle.hpp"
#include "mjls/model.hpp"
#include "mjls/random.hpp"

namespace mjls
{
    // Draws w(0) ~ pi0 and w(t+1) ~ row w(t) of P; returns `length` modes.
    std::vector<int> sample_mode_chain(const Matrix &transitions, const Vector &initial_modes,
                                       std::size_t length, Rng &rng);

    // One draw of x0: Gaussian N(0, Sigma0) conditioned on ||x0|| <= L.
    Vector sample_initial_state(const InitialStateDistribution &dist, Rng &rng);

    struct Trajectory
    {
        std::vector<Vector> states; // x_0 .. x_l (shorter if diverged)
        std::vector<int> modes;     // w_0 .. w_l
        std::vector<double> stage_costs;
        double total_cost = 0.0;
        bool diverged = false;
    };

    // CostOracle backed by a known model; the simulator used everywhere in this project.
    class SimulatedOracle final : public CostOracle
    {
    public:
        explicit SimulatedOracle(JumpLinearModel model);

        int num_modes() const override { return model_.num_modes(); }
        int state_dim() const override { return model_.state_dim(); }
        int input_dim() const override { return model_.input_dim(); }

        void reset(Rng &rng) override;
        StepResult step(const Vector &input) override;

        const Vector &state() const override { return state_; }
        int mode() const override { return mode_; }

        std::vector<int> observe_mode_chain(std::size_t length, Rng &rng) const override;
        void drive_modes_with(const Matrix &transitions) override;
        std::unique_ptr<CostOracle> clone() const override;

        // Starts an episode from a given x0 and w0 (tests, exact initial conditions).
        void reset_to(const Vector &x0, int mode, std::uint64_t transition_seed);

    private:
        JumpLinearModel model_;
        Matrix driving_transitions_;
        Matrix state_factor_; // Cholesky factor of Sigma0
        Vector state_;
        Vector next_state_;
        Vector cost_buffer_;
        int mode_ = 0;
        Rng transition_rng_;
    };

    // Closed-loop rollout u_t = -K_{w(t)} x_t for `horizon` steps through an oracle.
    Trajectory rollout(CostOracle &oracle, const GainSchedule &policy, std::size_t horizon, Rng &rng);

    // Same, simulating the model directly.
    Trajectory rollout(const JumpLinearModel &model, const GainSchedule &policy, std::size_t horizon, Rng &rng);

} // namespace mjls

#endif // MJLS_SIMULATION_HPP

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

#ifndef MJLS_COST_ORACLE_HPP
#define MJLS_COST_ORACLE_HPP

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "mjls/random.hpp"

namespace mjls
{
    /**
     * Black-box access to a jump linear system.
     *
     * The caller observes the state, the active mode and the incurred stage
     * cost, and chooses the input. System and cost matrices are never
     * exposed; this header deliberately does not include model.hpp.
     *
     * An episode starts with reset(), which draws x0 ~ D and w0 ~ pi0 and
     * seeds the oracle's own transition stream from `rng`. Each step()
     * charges x'Qx + u'Ru for the current mode, then advances state and mode.
     */
    class CostOracle
    {
    public:
        // Norm of the state above which an episode is flagged as diverged.
        static constexpr double kOverflowGuard = 1e150;

        struct StepResult
        {
            double stage_cost = 0.0;
            bool diverged = false;
        };

        virtual ~CostOracle() = default;

        virtual int num_modes() const = 0;
        virtual int state_dim() const = 0;
        virtual int input_dim() const = 0;

        virtual void reset(Rng &rng) = 0;
        virtual StepResult step(const Eigen::VectorXd &input) = 0;

        virtual const Eigen::VectorXd &state() const = 0;
        virtual int mode() const = 0;

        // Observes `length` consecutive modes of the jump process, started from pi0.
        virtual std::vector<int> observe_mode_chain(std::size_t length, Rng &rng) const = 0;

        // Drives subsequent episodes with the given transition matrix instead of
        // the system's own (simulation with an estimated chain).
        virtual void drive_modes_with(const Eigen::MatrixXd &transitions) = 0;

        // Independent copy for a parallel worker; episode state is not shared.
        virtual std::unique_ptr<CostOracle> clone() const = 0;
    };

} // namespace mjls

#endif // MJLS_COST_ORACLE_HPP

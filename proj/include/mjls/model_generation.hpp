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

#ifndef MJLS_MODEL_GENERATION_HPP
#define MJLS_MODEL_GENERATION_HPP

#include <cstdint>

#include "mjls/model.hpp"

namespace mjls
{
    struct RandomModelOptions
    {
        // Q_i = M M' + regularization * I, same for R_i.
        double regularization = 0.1;
        double dirichlet_concentration = 1.0;
        // The zero policy must satisfy rho(F_0) <= this; otherwise A is shrunk by `shrink_factor`.
        double max_open_loop_radius = 0.95;
        double shrink_factor = 0.9;
        int max_shrink_attempts = 100;
    };

    /**
     * Random MJLS whose open loop (K = 0) is mean-square stable.
     *
     * A_i: standard normal, divided by its largest singular value. B_i: standard
     * normal. Q_i, R_i: Gram matrices plus regularization. Rows of P: Dirichlet.
     * pi0 uniform, Sigma0 = I. Bit-identical for equal seeds.
     *
     * Throws NoConvergence if the open loop is still not stable after
     * max_shrink_attempts rescalings of A.
     */
    JumpLinearModel generate_random_model(int num_modes, int state_dim, int input_dim, std::uint64_t seed,
                                          const RandomModelOptions &options = {});

    // mu = min_i pi0_i * lambda_min(Sigma0); the excitation constant of the bounds.
    double mu_parameter(const JumpLinearModel &model);

} // namespace mjls

#endif // MJLS_MODEL_GENERATION_HPP

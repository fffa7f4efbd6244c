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

#include "mjls/model_generation.hpp"

#include "mjls/errors.hpp"
#include "mjls/exact_analysis.hpp"
#include "mjls/random.hpp"

namespace mjls
{
    JumpLinearModel generate_random_model(int num_modes, int state_dim, int input_dim, std::uint64_t seed,
                                          const RandomModelOptions &options)
    {
        if (num_modes < 1 || state_dim < 1 || input_dim < 1)
        {
            throw InvalidArgument("Ns, d and k must all be at least 1");
        }
        Rng rng(seed);
        const auto ns = static_cast<std::size_t>(num_modes);

        JumpLinearModel model;
        model.A.resize(ns);
        model.B.resize(ns);
        model.Q.resize(ns);
        model.R.resize(ns);

        for (auto &a : model.A)
        {
            a = standard_normal_matrix(state_dim, state_dim, rng);
            a /= spectral_norm(a);
        }
        for (auto &b : model.B)
        {
            b = standard_normal_matrix(state_dim, input_dim, rng);
        }
        for (auto &q : model.Q)
        {
            const Matrix m = standard_normal_matrix(state_dim, state_dim, rng);
            q = m * m.transpose() + options.regularization * Matrix::Identity(state_dim, state_dim);
            q = 0.5 * (q + q.transpose()).eval();
        }
        for (auto &r : model.R)
        {
            const Matrix m = standard_normal_matrix(input_dim, input_dim, rng);
            r = m * m.transpose() + options.regularization * Matrix::Identity(input_dim, input_dim);
            r = 0.5 * (r + r.transpose()).eval();
        }

        model.transitions.resize(num_modes, num_modes);
        for (int i = 0; i < num_modes; ++i)
        {
            model.transitions.row(i) = sample_dirichlet(num_modes, options.dirichlet_concentration, rng).transpose();
        }
        model.initial_modes = Vector::Constant(num_modes, 1.0 / num_modes);
        model.initial_state.covariance = Matrix::Identity(state_dim, state_dim);
        model.initial_state.norm_bound = InitialStateDistribution::default_norm_bound(model.initial_state.covariance);

        const GainSchedule zero = zero_policy(model);
        int attempts = 0;
        while (mss_spectral_radius(model, zero) > options.max_open_loop_radius)
        {
            if (++attempts > options.max_shrink_attempts)
            {
                throw NoConvergence("random model: open loop not mean-square stable after rescaling A");
            }
            for (auto &a : model.A)
            {
                a *= options.shrink_factor;
            }
        }
        model.validate();
        return model;
    }

    double mu_parameter(const JumpLinearModel &model)
    {
        return model.initial_modes.minCoeff() * min_symmetric_eigenvalue(model.initial_state.covariance);
    }

} // namespace mjls

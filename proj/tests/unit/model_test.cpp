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

#include <cmath>

#include <gtest/gtest.h>

#include "mjls/errors.hpp"
#include "mjls/exact_analysis.hpp"
#include "mjls/model_generation.hpp"
#include "mjls/serialization.hpp"
#include "mjls/simulation.hpp"
#include "test_support.hpp"

namespace mjls
{
    namespace
    {
        using testing::scalar_model;

        TEST(ModelValidation, AcceptsFixtures)
        {
            EXPECT_NO_THROW(testing::load_fixture("scalar_fixture.json"));
            EXPECT_NO_THROW(testing::load_fixture("two_mode_fixture.json"));
        }

        TEST(ModelValidation, RejectsNonStochasticRows)
        {
            auto m = testing::load_fixture("two_mode_fixture.json");
            m.transitions(0, 0) = 0.6;
            EXPECT_THROW(m.validate(), InvalidArgument);
        }

        TEST(ModelValidation, RejectsIndefiniteCost)
        {
            auto m = scalar_model(0.5, 1.0, 1.0, 1.0);
            m.Q[0](0, 0) = -1.0;
            EXPECT_THROW(m.validate(), InvalidArgument);
            m = scalar_model(0.5, 1.0, 1.0, 0.0);
            EXPECT_THROW(m.validate(), InvalidArgument);
        }

        TEST(ModelValidation, RejectsDimensionMismatch)
        {
            auto m = scalar_model(0.5, 1.0, 1.0, 1.0);
            m.B[0] = Matrix::Ones(2, 1);
            EXPECT_THROW(m.validate(), InvalidArgument);
        }

        TEST(ModelValidation, RejectsBadInitialDistribution)
        {
            auto m = testing::load_fixture("two_mode_fixture.json");
            m.initial_modes << 1.0, 0.0;
            EXPECT_THROW(m.validate(), InvalidArgument);
            m = testing::load_fixture("two_mode_fixture.json");
            m.initial_state.norm_bound = 0.5;
            EXPECT_THROW(m.validate(), InvalidArgument);
        }

        TEST(ModelValidation, PolicyShapeChecked)
        {
            const auto m = testing::load_fixture("two_mode_fixture.json");
            EXPECT_NO_THROW(validate_policy(m, zero_policy(m)));
            EXPECT_THROW(validate_policy(m, testing::scalar_policy({0.0})), InvalidArgument);
            GainSchedule wide = zero_policy(m);
            wide[1] = Matrix::Zero(1, 2);
            EXPECT_THROW(validate_policy(m, wide), InvalidArgument);
        }

        TEST(MuParameter, UniformModesIdentityCovariance)
        {
            auto m = generate_random_model(2, 3, 1, 4);
            EXPECT_DOUBLE_EQ(mu_parameter(m), 0.5);
        }

        TEST(MuParameter, SkewedModesDiagonalCovariance)
        {
            auto m = generate_random_model(2, 2, 1, 4);
            m.initial_modes << 0.9, 0.1;
            m.initial_state.covariance = Vector(Eigen::Vector2d(4.0, 1.0)).asDiagonal();
            m.initial_state.norm_bound = InitialStateDistribution::default_norm_bound(m.initial_state.covariance);
            EXPECT_NEAR(mu_parameter(m), 0.1, 1e-15);
        }

        TEST(MuParameter, BoundedByCovarianceEigenvalue)
        {
            for (std::uint64_t seed = 0; seed < 10; ++seed)
            {
                const auto m = generate_random_model(3, 2, 2, seed);
                EXPECT_LE(mu_parameter(m), min_symmetric_eigenvalue(m.initial_state.covariance) + 1e-15);
                EXPECT_GT(mu_parameter(m), 0.0);
            }
        }

        TEST(RandomModel, SameSeedIsBitIdentical)
        {
            const auto a = generate_random_model(3, 2, 2, 99);
            const auto b = generate_random_model(3, 2, 2, 99);
            EXPECT_EQ(model_to_json(a), model_to_json(b));
            for (int i = 0; i < 3; ++i)
            {
                EXPECT_EQ(a.A[i], b.A[i]);
                EXPECT_EQ(a.B[i], b.B[i]);
            }
            EXPECT_NE(model_to_json(a), model_to_json(generate_random_model(3, 2, 2, 100)));
        }

        TEST(RandomModel, ConstructionInvariants)
        {
            for (std::uint64_t seed = 0; seed < 25; ++seed)
            {
                const auto m = generate_random_model(1 + static_cast<int>(seed % 4), 1 + static_cast<int>(seed % 3),
                                                     1 + static_cast<int>((seed / 3) % 3), seed);
                EXPECT_NO_THROW(m.validate());
                for (Eigen::Index i = 0; i < m.transitions.rows(); ++i)
                {
                    EXPECT_NEAR(m.transitions.row(i).sum(), 1.0, 1e-12);
                    EXPECT_GE(m.transitions.row(i).minCoeff(), 0.0);
                }
                for (int i = 0; i < m.num_modes(); ++i)
                {
                    EXPECT_GT(min_symmetric_eigenvalue(m.Q[i]), 0.0);
                    EXPECT_GT(min_symmetric_eigenvalue(m.R[i]), 0.0);
                    EXPECT_LE(spectral_norm(m.A[i]), 1.0 + 1e-12);
                }
                EXPECT_LE(mss_spectral_radius(m, zero_policy(m)), 0.95 + 1e-12);
                EXPECT_TRUE(m.initial_modes.isApproxToConstant(1.0 / m.num_modes()));
            }
        }

        TEST(RandomModel, RejectsNonPositiveSizes)
        {
            EXPECT_THROW(generate_random_model(0, 2, 2, 1), InvalidArgument);
            EXPECT_THROW(generate_random_model(2, 0, 2, 1), InvalidArgument);
            EXPECT_THROW(generate_random_model(2, 2, 0, 1), InvalidArgument);
        }

        TEST(Simulation, GeometricSeriesCost)
        {
            // a = 0.5, b = 0, K = 0, x0 = 1: stage costs 0.25^t.
            SimulatedOracle oracle(scalar_model(0.5, 0.0, 1.0, 1.0));
            oracle.reset_to(Vector::Ones(1), 0, 1);
            double total = 0.0;
            for (int t = 0; t < 200; ++t)
            {
                total += oracle.step(Vector::Zero(1)).stage_cost;
            }
            EXPECT_NEAR(total, 4.0 / 3.0, 1e-14);
        }

        TEST(Simulation, RolloutMeanMatchesExactCost)
        {
            const auto m = generate_random_model(2, 1, 1, 17);
            const auto k = zero_policy(m);
            const double exact = exact_cost(m, k);
            const std::size_t horizon = 500;
            ASSERT_LT(cost_truncation_error(m, k, horizon), 1e-9 * exact);
            double sum = 0.0;
            double sum_sq = 0.0;
            const int n = 10'000;
            for (int i = 0; i < n; ++i)
            {
                Rng rng(derive_seed(3, {static_cast<std::uint64_t>(i)}));
                const auto traj = rollout(m, k, horizon, rng);
                sum += traj.total_cost;
                sum_sq += traj.total_cost * traj.total_cost;
            }
            const double mean = sum / n;
            const double se = std::sqrt((sum_sq / n - mean * mean) / (n - 1));
            EXPECT_LE(std::abs(mean - exact), 3.0 * se) << "mean " << mean << " exact " << exact;
        }

        TEST(Simulation, TrajectoryDeterminism)
        {
            const auto m = generate_random_model(3, 2, 2, 5);
            const auto k = zero_policy(m);
            Rng r1(11);
            Rng r2(11);
            const auto a = rollout(m, k, 50, r1);
            const auto b = rollout(m, k, 50, r2);
            ASSERT_EQ(a.states.size(), b.states.size());
            for (std::size_t t = 0; t < a.states.size(); ++t)
            {
                EXPECT_EQ(a.states[t], b.states[t]);
            }
            EXPECT_EQ(a.modes, b.modes);
            EXPECT_EQ(a.stage_costs, b.stage_costs);
        }

        TEST(Simulation, StageCostsNonnegative)
        {
            const auto m = generate_random_model(2, 3, 2, 8);
            GainSchedule k = zero_policy(m);
            k[0].setConstant(0.3);
            Rng rng(2);
            const auto traj = rollout(m, k, 100, rng);
            for (double c : traj.stage_costs)
            {
                EXPECT_GE(c, 0.0);
            }
            EXPECT_EQ(traj.stage_costs.size(), 100u);
            EXPECT_EQ(traj.states.size(), 101u);
            EXPECT_EQ(traj.modes.size(), 101u);
        }

        TEST(Simulation, InitialStateWithinNormBound)
        {
            InitialStateDistribution dist;
            dist.covariance = Matrix::Identity(3, 3) * 4.0;
            dist.norm_bound = 2.5;
            Rng rng(1);
            for (int i = 0; i < 2000; ++i)
            {
                EXPECT_LE(sample_initial_state(dist, rng).norm(), 2.5);
            }
        }

        TEST(Simulation, DivergenceFlagged)
        {
            SimulatedOracle oracle(scalar_model(10.0, 1.0, 1.0, 1.0));
            oracle.reset_to(Vector::Ones(1), 0, 1);
            bool diverged = false;
            for (int t = 0; t < 1000 && !diverged; ++t)
            {
                diverged = oracle.step(Vector::Zero(1)).diverged;
            }
            EXPECT_TRUE(diverged);
        }

        TEST(Simulation, ModeMarginalsFollowChain)
        {
            Matrix p(2, 2);
            p << 0.9, 0.1, 0.3, 0.7;
            Vector pi0(2);
            pi0 << 0.2, 0.8;
            const int steps = 6;
            const int n = 100'000;
            std::vector<Vector> counts(steps, Vector::Zero(2));
            Rng rng(123);
            for (int i = 0; i < n; ++i)
            {
                const auto modes = sample_mode_chain(p, pi0, steps, rng);
                for (int t = 0; t < steps; ++t)
                {
                    counts[t](modes[t]) += 1.0;
                }
            }
            Eigen::RowVectorXd marginal = pi0.transpose();
            for (int t = 0; t < steps; ++t)
            {
                const double tv = 0.5 * (counts[t].transpose() / n - marginal).cwiseAbs().sum();
                EXPECT_LE(tv, 0.02) << "t = " << t;
                marginal = marginal * p;
            }
        }

        TEST(Simulation, DrivenChainUsesReplacementMatrix)
        {
            auto m = testing::load_fixture("two_mode_fixture.json");
            SimulatedOracle oracle(m);
            Matrix stay = Matrix::Identity(2, 2);
            oracle.drive_modes_with(stay);
            Rng rng(4);
            oracle.reset(rng);
            const int first = oracle.mode();
            for (int t = 0; t < 20; ++t)
            {
                oracle.step(Vector::Zero(1));
                EXPECT_EQ(oracle.mode(), first);
            }
        }

        TEST(Simulation, CloneIsIndependent)
        {
            const auto m = generate_random_model(2, 2, 2, 3);
            SimulatedOracle oracle(m);
            auto copy = oracle.clone();
            Rng a(7);
            Rng b(7);
            oracle.reset(a);
            copy->reset(b);
            EXPECT_EQ(oracle.state(), copy->state());
            oracle.step(Vector::Ones(2));
            EXPECT_NE(oracle.state(), copy->state());
        }

        // The estimation side must be able to work with CostOracle alone.
        template <typename T>
        concept ExposesModelMatrices = requires(const T &t) { t.A; } || requires(const T &t) { t.model(); } ||
                                       requires(const T &t) { t.transitions(); } || requires(const T &t) { t.Q; };

        TEST(Oracle, InterfaceHidesModel)
        {
            static_assert(!ExposesModelMatrices<CostOracle>);
            static_assert(ExposesModelMatrices<JumpLinearModel>);
            SUCCEED();
        }

    } // namespace
} // namespace mjls

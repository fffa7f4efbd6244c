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

// Must come first: checks that the estimator header does not pull in the model.
#include "mjls/gradient_estimation.hpp"
#ifdef MJLS_MODEL_HPP
constexpr bool kEstimatorSeesModel = true;
#else
constexpr bool kEstimatorSeesModel = false;
#endif

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mjls/errors.hpp"
#include "mjls/exact_analysis.hpp"
#include "mjls/model_generation.hpp"
#include "mjls/simulation.hpp"
#include "test_support.hpp"

namespace mjls
{
    namespace
    {
        using testing::scalar_policy;

        EstimationConfig config(std::size_t m, std::size_t l, double r, std::uint64_t seed)
        {
            EstimationConfig c;
            c.trajectories = m;
            c.rollout_length = l;
            c.radius = r;
            c.seed = seed;
            return c;
        }

        TEST(Opacity, EstimatorHeaderIndependentOfModel)
        {
            EXPECT_FALSE(kEstimatorSeesModel);
        }

        TEST(SpherePerturbation, NormEqualsRadius)
        {
            Rng rng(1);
            for (int i = 0; i < 1000; ++i)
            {
                EXPECT_NEAR(sample_perturbation(2, 3, 0.37, rng).norm(), 0.37, 1e-12);
            }
            EXPECT_THROW(sample_perturbation(2, 3, 0.0, rng), InvalidArgument);
        }

        TEST(SpherePerturbation, FirstAndSecondMoments)
        {
            const int k = 2;
            const int d = 3;
            const double r = 0.5;
            const int n = 100'000;
            Rng rng(2);
            Matrix sum = Matrix::Zero(k, d);
            Matrix sum_sq = Matrix::Zero(k, d);
            for (int i = 0; i < n; ++i)
            {
                const Matrix u = sample_perturbation(k, d, r, rng);
                sum += u;
                sum_sq += u.cwiseAbs2();
            }
            const double mean_tol = 3.0 * r / std::sqrt(static_cast<double>(n) * k * d);
            EXPECT_LE((sum / n).cwiseAbs().maxCoeff(), mean_tol);
            const double second = r * r / (k * d);
            EXPECT_LE(((sum_sq / n).array() / second - 1.0).abs().maxCoeff(), 0.05);
        }

        TEST(Estimator, ConstantCostHasZeroMean)
        {
            const double c = 2.0;
            const std::size_t l = 10;
            const std::size_t m = 10'000;
            const double r = 0.1;
            testing::ConstantCostOracle oracle(c, 2);
            const auto est = estimate_gradient_and_correlation(oracle, scalar_policy({0.3, -0.2}),
                                                               config(m, l, r, 9));
            // Each mode collects cost c * l / 2 per trajectory; D = 1.
            const double se_norm = (c * l / 2.0) / (r * std::sqrt(static_cast<double>(m)));
            for (int w = 0; w < 2; ++w)
            {
                EXPECT_LE(est.gradient[w].norm(), 4.0 * se_norm) << "mode " << w;
            }
            EXPECT_EQ(est.diverged_count, 0u);
            EXPECT_EQ(est.used_trajectories, m);
        }

        TEST(Estimator, QuadraticObjectiveRecoversGradient)
        {
            testing::QuadraticOracle oracle;
            for (std::uint64_t seed : {1u, 2u, 3u})
            {
                const auto est = estimate_gradient_and_correlation(oracle, scalar_policy({1.0}),
                                                                   config(100'000, 3, 0.5, seed));
                EXPECT_NEAR(est.gradient[0](0, 0), 2.0, 0.02 * 2.0) << "seed " << seed;
            }
        }

        TEST(Estimator, IndependentMatchesSharedForOneMode)
        {
            testing::QuadraticOracle oracle;
            auto shared = config(2000, 3, 0.3, 4);
            auto independent = shared;
            independent.perturbation = PerturbationStructure::independent;
            const auto a = estimate_gradient_and_correlation(oracle, scalar_policy({0.7}), shared);
            const auto b = estimate_gradient_and_correlation(oracle, scalar_policy({0.7}), independent);
            EXPECT_EQ(a.gradient[0], b.gradient[0]);
        }

        TEST(Estimator, ResultIndependentOfWorkerCount)
        {
            SimulatedOracle oracle(generate_random_model(2, 2, 2, 3));
            auto cfg = config(1000, 40, 0.05, 77);
            const auto one = estimate_gradient_and_correlation(oracle, GainSchedule::zeros(2, 2, 2), cfg);
            cfg.workers = 3;
            const auto three = estimate_gradient_and_correlation(oracle, GainSchedule::zeros(2, 2, 2), cfg);
            for (int w = 0; w < 2; ++w)
            {
                EXPECT_EQ(one.gradient[w], three.gradient[w]);
                EXPECT_EQ(one.correlation.blocks[w], three.correlation.blocks[w]);
            }
        }

        TEST(Estimator, SeedDeterminism)
        {
            SimulatedOracle oracle(testing::load_fixture("two_mode_fixture.json"));
            const auto a = estimate_gradient_and_correlation(oracle, scalar_policy({0.1, 0.2}), config(300, 30, 0.05, 5));
            const auto b = estimate_gradient_and_correlation(oracle, scalar_policy({0.1, 0.2}), config(300, 30, 0.05, 5));
            const auto c = estimate_gradient_and_correlation(oracle, scalar_policy({0.1, 0.2}), config(300, 30, 0.05, 6));
            EXPECT_EQ(a.gradient[0], b.gradient[0]);
            EXPECT_NE(a.gradient[0], c.gradient[0]);
        }

        TEST(Estimator, DivergedRolloutsAreCounted)
        {
            SimulatedOracle oracle(testing::scalar_model(3.0, 1.0, 1.0, 1.0));
            const auto est = estimate_gradient_and_correlation(oracle, scalar_policy({0.0}), config(20, 1000, 0.01, 1));
            EXPECT_EQ(est.diverged_count, 20u);
            EXPECT_EQ(est.used_trajectories, 0u);
            EXPECT_TRUE(std::isnan(est.gradient[0](0, 0)));
        }

        TEST(Estimator, RejectsBadConfig)
        {
            testing::QuadraticOracle oracle;
            EXPECT_THROW(estimate_gradient_and_correlation(oracle, scalar_policy({0.0}), config(0, 3, 0.1, 1)),
                         InvalidArgument);
            EXPECT_THROW(estimate_gradient_and_correlation(oracle, scalar_policy({0.0}), config(10, 0, 0.1, 1)),
                         InvalidArgument);
            EXPECT_THROW(estimate_gradient_and_correlation(oracle, scalar_policy({0.0}), config(10, 3, -0.1, 1)),
                         InvalidArgument);
            EXPECT_THROW(estimate_gradient_and_correlation(oracle, scalar_policy({0.0, 0.0}), config(10, 3, 0.1, 1)),
                         InvalidArgument);
        }

        TEST(Estimator, ConcentrationWithTrajectoryCount)
        {
            SimulatedOracle oracle(testing::load_fixture("scalar_fixture.json"));
            const int reps = 400;
            std::vector<double> stds;
            for (std::size_t m : {125u, 250u, 500u})
            {
                double sum = 0.0;
                double sum_sq = 0.0;
                for (int rep = 0; rep < reps; ++rep)
                {
                    const auto est = estimate_gradient_and_correlation(
                        oracle, scalar_policy({0.0}), config(m, 40, 0.05, derive_seed(m, {static_cast<std::uint64_t>(rep)})));
                    const double g = est.gradient[0](0, 0);
                    sum += g;
                    sum_sq += g * g;
                }
                const double mean = sum / reps;
                stds.push_back(std::sqrt((sum_sq / reps - mean * mean) * reps / (reps - 1)));
            }
            for (std::size_t i = 0; i + 1 < stds.size(); ++i)
            {
                EXPECT_NEAR(stds[i] / stds[i + 1], std::sqrt(2.0), 0.15 * std::sqrt(2.0));
            }
        }

        TEST(Estimator, CorrelationConsistency)
        {
            for (const char *name : {"scalar_fixture.json", "two_mode_fixture.json"})
            {
                const auto model = testing::load_fixture(name);
                const auto k = zero_policy(model);
                const auto l = static_cast<std::size_t>(std::ceil(correlation_truncation_horizon(model, k, 1e-2)));
                SimulatedOracle oracle(model);
                const auto est = estimate_gradient_and_correlation(oracle, k, config(10'000, l, 0.05, 12));
                const auto exact = state_correlation(model, k);
                double max_err = 0.0;
                double max_abs = 0.0;
                for (int w = 0; w < model.num_modes(); ++w)
                {
                    max_err = std::max(max_err, (est.correlation.blocks[w] - exact.blocks[w]).cwiseAbs().maxCoeff());
                    max_abs = std::max(max_abs, exact.blocks[w].cwiseAbs().maxCoeff());
                }
                EXPECT_LE(max_err, 0.05 * max_abs) << name;
            }
        }

        // For Ns = 1 and D = 1 the estimator's expectation is a central difference of C^l.
        double smoothed_gradient(const JumpLinearModel &m, double k, double r, std::size_t l)
        {
            return (finite_horizon_cost(m, scalar_policy({k + r}), l) - finite_horizon_cost(m, scalar_policy({k - r}), l)) /
                   (2.0 * r);
        }

        TEST(Estimator, BiasShrinksWithRadius)
        {
            const auto m = testing::load_fixture("scalar_fixture.json");
            const double exact = -16.0 / 9.0;
            const std::size_t l = 2000;
            double previous = std::numeric_limits<double>::infinity();
            for (double r : {0.1, 0.05, 0.01})
            {
                const double gap = std::abs(smoothed_gradient(m, 0.0, r, l) - exact);
                EXPECT_LE(gap, previous) << "r = " << r;
                previous = gap;
            }
        }

        TEST(Estimator, MonteCarloMeanMatchesSmoothedGradient)
        {
            const auto m = testing::load_fixture("scalar_fixture.json");
            SimulatedOracle oracle(m);
            const double r = 0.1;
            const std::size_t l = 60;
            const std::size_t n = 100'000;
            const auto est = estimate_gradient_and_correlation(oracle, scalar_policy({0.0}), config(n, l, r, 31));
            // Per-trajectory terms are +-C/r with E[C^2] ~ 3 P^2 for Gaussian x0.
            const double p = testing::reference_value(m, scalar_policy({r}))[0](0, 0);
            const double se = std::sqrt(3.0) * p / r / std::sqrt(static_cast<double>(n));
            EXPECT_NEAR(est.gradient[0](0, 0), smoothed_gradient(m, 0.0, r, l), 4.0 * se);
        }

        TEST(Estimator, KnownAndEstimatedChainsAgree)
        {
            const auto model = testing::load_fixture("two_mode_fixture.json");
            Matrix p_hat(2, 2);
            p_hat << 0.505, 0.495, 0.495, 0.505;
            ASSERT_LE((model.transitions - p_hat).cwiseAbs().rowwise().sum().maxCoeff(), 0.01 + 1e-15);
            SimulatedOracle known(model);
            SimulatedOracle estimated(model);
            estimated.drive_modes_with(p_hat);
            const auto k = scalar_policy({0.1, 0.2});
            const auto cfg = config(2000, 100, 0.05, 8);
            const auto a = estimate_gradient_and_correlation(known, k, cfg);
            const auto b = estimate_gradient_and_correlation(estimated, k, cfg);
            EXPECT_LE(testing::relative_error(b.gradient, a.gradient), 0.10);
        }

        TEST(CostEstimate, MatchesExactCost)
        {
            const auto m = testing::scalar_model(0.5, 0.0, 1.0, 1.0);
            SimulatedOracle oracle(m);
            const auto est = estimate_cost(oracle, scalar_policy({0.0}), 20'000, 60, 4);
            EXPECT_NEAR(est.mean, 4.0 / 3.0, 4.0 * est.standard_error);
            EXPECT_GT(est.standard_error, 0.0);
            EXPECT_EQ(est.diverged_count, 0u);
        }

    } // namespace
} // namespace mjls

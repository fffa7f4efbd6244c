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
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "mjls/errors.hpp"
#include "mjls/model_generation.hpp"
#include "mjls/serialization.hpp"
#include "mjls/trace_io.hpp"
#include "test_support.hpp"

namespace mjls
{
    namespace
    {
        OptimizationTrace sample_trace()
        {
            OptimizationTrace t;
            t.rows.push_back({0, 4.0 / 3.0, 0.1, 0.0, 0.0, 0.0, 0.0});
            t.rows.push_back({1, 1.2, 1e-17, 1.0 / 3.0, 0.25, 0.001, 2.0});
            t.rows.push_back({2, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                              5.5, 3.0, 0.002, 7.0});
            return t;
        }

        TEST(TraceCsv, FormatDouble)
        {
            EXPECT_EQ(format_double(0.5), "0.5");
            EXPECT_EQ(format_double(3.0), "3");
            EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
            EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
            EXPECT_EQ(format_double(std::nan("")), "nan");
            EXPECT_EQ(std::stod(format_double(0.1 + 0.2)), 0.1 + 0.2);
        }

        TEST(TraceCsv, HeaderAndRoundTrip)
        {
            const auto trace = sample_trace();
            std::stringstream ss;
            write_trace_csv(ss, trace);
            std::string first;
            std::getline(ss, first);
            EXPECT_EQ(first, kTraceHeader);
            ss.seekg(0);
            const auto back = read_trace_csv(ss);
            ASSERT_EQ(back.rows.size(), trace.rows.size());
            for (std::size_t i = 0; i < trace.rows.size(); ++i)
            {
                EXPECT_EQ(back.rows[i].iteration, trace.rows[i].iteration);
                EXPECT_EQ(back.rows[i].cost, trace.rows[i].cost);
                EXPECT_EQ(back.rows[i].normalized_gap, trace.rows[i].normalized_gap);
                EXPECT_EQ(back.rows[i].grad_norm, trace.rows[i].grad_norm);
                EXPECT_EQ(back.rows[i].step_norm, trace.rows[i].step_norm);
                EXPECT_EQ(back.rows[i].wall_time_s, trace.rows[i].wall_time_s);
                EXPECT_EQ(back.rows[i].diverged_count, trace.rows[i].diverged_count);
            }
        }

        TEST(TraceCsv, RejectsMalformedInput)
        {
            const std::string header = std::string(kTraceHeader) + "\n";
            for (const std::string bad :
                 {std::string("iteration,cost\n0,1\n"), header + "0,1,2,3,4,5\n", header + "0,1,abc,3,4,5,6\n",
                  header + "0,1,2,3,4,5,6,7\n", std::string("")})
            {
                std::istringstream in(bad);
                EXPECT_THROW(read_trace_csv(in), InvalidArgument) << bad;
            }
        }

        TEST(TraceCsv, FileRoundTrip)
        {
            const auto dir = std::filesystem::temp_directory_path() / "mjls_io_test";
            std::filesystem::remove_all(dir);
            std::filesystem::create_directories(dir);
            write_trace_csv(dir / "t.csv", sample_trace());
            EXPECT_EQ(read_trace_csv(dir / "t.csv").rows.size(), 3u);
            EXPECT_THROW(read_trace_csv(dir / "missing.csv"), InvalidArgument);
            std::filesystem::remove_all(dir);
        }

        TEST(MeanTrace, PadsShortTracesWithLastRow)
        {
            OptimizationTrace a;
            a.rows.push_back({0, 2.0, 1.0, 0.0, 0.0, 0.0, 0.0});
            a.rows.push_back({1, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0});
            OptimizationTrace b;
            b.rows.push_back({0, 4.0, 3.0, 0.0, 0.0, 0.0, 2.0});
            b.rows.push_back({1, 3.0, 2.0, 2.0, 1.0, 0.0, 0.0});
            b.rows.push_back({2, 2.0, 1.0, 1.0, 1.0, 0.0, 4.0});
            const auto mean = mean_trace({a, b});
            ASSERT_EQ(mean.rows.size(), 3u);
            EXPECT_EQ(mean.rows[0].cost, 3.0);
            EXPECT_EQ(mean.rows[0].diverged_count, 1.0);
            EXPECT_EQ(mean.rows[2].iteration, 2u);
            EXPECT_EQ(mean.rows[2].cost, 1.5);
            EXPECT_EQ(mean.rows[2].normalized_gap, 0.5);
        }

        TEST(MeanTrace, SingleTraceIsIdentity)
        {
            const auto t = sample_trace();
            const auto mean = mean_trace({t});
            ASSERT_EQ(mean.rows.size(), t.rows.size());
            for (std::size_t i = 0; i < t.rows.size(); ++i)
            {
                EXPECT_EQ(mean.rows[i].cost, t.rows[i].cost);
                EXPECT_EQ(mean.rows[i].grad_norm, t.rows[i].grad_norm);
            }
        }

        TEST(ModelJson, RoundTripIsExact)
        {
            const auto m = generate_random_model(3, 2, 2, 99);
            const auto back = model_from_json(model_to_json(m));
            for (int i = 0; i < 3; ++i)
            {
                EXPECT_EQ(back.A[i], m.A[i]);
                EXPECT_EQ(back.B[i], m.B[i]);
                EXPECT_EQ(back.Q[i], m.Q[i]);
                EXPECT_EQ(back.R[i], m.R[i]);
            }
            EXPECT_EQ(back.transitions, m.transitions);
            EXPECT_EQ(back.initial_modes, m.initial_modes);
            EXPECT_EQ(back.initial_state.covariance, m.initial_state.covariance);
            EXPECT_EQ(back.initial_state.norm_bound, m.initial_state.norm_bound);
        }

        TEST(ModelJson, FixtureContents)
        {
            const auto m = testing::load_fixture("two_mode_fixture.json");
            EXPECT_EQ(m.num_modes(), 2);
            EXPECT_EQ(m.A[1](0, 0), 0.8);
            EXPECT_EQ(m.initial_state.norm_bound, 10.0);
        }

        TEST(ModelJson, RejectsInvalidDocuments)
        {
            EXPECT_THROW(model_from_json("not json"), InvalidArgument);
            EXPECT_THROW(model_from_json("{\"Ns\": 1}"), InvalidArgument);
            auto text = model_to_json(testing::scalar_model(0.5, 1.0, 1.0, 1.0));
            const auto pos = text.find("\"R\"");
            ASSERT_NE(pos, std::string::npos);
            auto broken = text;
            broken.replace(text.find("1.0", pos), 3, "-1.0");
            EXPECT_THROW(model_from_json(broken), InvalidArgument);
        }

        TEST(PolicyJson, RoundTrip)
        {
            GainSchedule k{{Matrix::Constant(1, 2, 0.25), Matrix::Constant(1, 2, -1.5)}};
            const auto back = policy_from_json(policy_to_json(k));
            ASSERT_EQ(back.num_modes(), 2);
            EXPECT_EQ(back[0], k[0]);
            EXPECT_EQ(back[1], k[1]);
            EXPECT_THROW(policy_from_json("{\"K\": 3}"), InvalidArgument);
        }

    } // namespace
} // namespace mjls

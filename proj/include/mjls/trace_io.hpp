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

#ifndef MJLS_TRACE_IO_HPP
#define MJLS_TRACE_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mjls/policy_optimizer.hpp"

namespace mjls
{
    inline constexpr const char *kTraceHeader =
        "iteration,cost,normalized_gap,grad_norm,step_norm,wall_time_s,diverged_count";

    // Shortest decimal text that parses back to the same double; "inf", "-inf", "nan" otherwise.
    std::string format_double(double v);

    void write_trace_csv(std::ostream &out, const OptimizationTrace &trace);
    void write_trace_csv(const std::filesystem::path &path, const OptimizationTrace &trace);

    // Throws InvalidArgument on a wrong header, a wrong column count or a non-numeric cell.
    OptimizationTrace read_trace_csv(std::istream &in);
    OptimizationTrace read_trace_csv(const std::filesystem::path &path);

    /**
     * Pointwise mean of several traces. Shorter traces are padded with their
     * last row, so the result is as long as the longest input. Row t of the
     * mean carries iteration t.
     */
    OptimizationTrace mean_trace(const std::vector<OptimizationTrace> &traces);

} // namespace mjls

#endif // MJLS_TRACE_IO_HPP

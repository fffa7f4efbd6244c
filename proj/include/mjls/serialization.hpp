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

#ifndef MJLS_SERIALIZATION_HPP
#define MJLS_SERIALIZATION_HPP

#include <filesystem>
#include <string>

#include "mjls/model.hpp"

namespace mjls
{
    /**
     * Model document:
     *
     *   {"Ns": 2, "d": 1, "k": 1,
     *    "A": [[[0.5]], [[0.8]]], "B": [...], "Q": [...], "R": [...],
     *    "P": [[0.5, 0.5], [0.5, 0.5]], "pi0": [0.5, 0.5],
     *    "Sigma0": [[1.0]], "L": 10.0}
     *
     * Matrices are arrays of rows. A, B, Q, R hold one matrix per mode.
     * "L" is optional and defaults to 10 sqrt(tr Sigma0).
     */
    std::string model_to_json(const JumpLinearModel &model, int indent = 2);

    // Throws InvalidArgument on malformed documents or invalid models.
    JumpLinearModel model_from_json(const std::string &text);

    void save_model(const JumpLinearModel &model, const std::filesystem::path &path);
    JumpLinearModel load_model(const std::filesystem::path &path);

    // Policy as {"K": [[[...]], ...]}.
    std::string policy_to_json(const GainSchedule &policy, int indent = 2);
    GainSchedule policy_from_json(const std::string &text);

} // namespace mjls

#endif // MJLS_SERIALIZATION_HPP

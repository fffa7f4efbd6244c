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

#ifndef MJLS_CLI_HPP
#define MJLS_CLI_HPP

#include <iosfwd>

namespace mjls
{
    inline constexpr int kExitOk = 0;
    inline constexpr int kExitUsage = 1;
    inline constexpr int kExitNumerical = 2;

    /**
     * Entry point of the `mjls` tool. Subcommands: generate, solve, optimize,
     * experiment, estimate-chain. Returns 0 on success, 1 on a usage error
     * (one line on `err`, nothing written) and 2 on a numerical failure.
     */
    int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace mjls

#endif // MJLS_CLI_HPP

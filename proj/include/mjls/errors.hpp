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

#ifndef MJLS_ERRORS_HPP
#define MJLS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mjls
{

    // Base class of every error raised by the library.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Malformed input: dimension mismatch, non-stochastic matrix, out-of-range parameter.
    class InvalidArgument : public Error
    {
    public:
        using Error::Error;
    };

    // Base class for failures of a numerical procedure on valid input.
    class NumericalError : public Error
    {
    public:
        using Error::Error;
    };

    // The policy does not mean-square stabilize the system (rho(F_K) >= 1).
    class NotStabilizing : public NumericalError
    {
    public:
        explicit NotStabilizing(double spectral_radius)
            : NumericalError("policy is not mean-square stabilizing (rho = " + std::to_string(spectral_radius) + ")"),
              spectral_radius_(spectral_radius)
        {
        }

        double spectral_radius() const noexcept { return spectral_radius_; }

    private:
        double spectral_radius_;
    };

    class NoConvergence : public NumericalError
    {
    public:
        using NumericalError::NumericalError;
    };

    // A block of the state correlation is not invertible.
    class SingularCorrelation : public NumericalError
    {
    public:
        explicit SingularCorrelation(int mode)
            : NumericalError("state correlation block of mode " + std::to_string(mode) + " is singular"),
              mode_(mode)
        {
        }

        int mode() const noexcept { return mode_; }

    private:
        int mode_;
    };

    // The Markov chain does not have a unique limiting distribution.
    class NonErgodic : public NumericalError
    {
    public:
        using NumericalError::NumericalError;
    };

} // namespace mjls

#endif // MJLS_ERRORS_HPP

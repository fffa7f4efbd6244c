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

#ifndef MJLS_RANDOM_HPP
#define MJLS_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace mjls
{
    using Rng = std::mt19937_64;

    // SplitMix64 finalizer; used to derive independent stream seeds.
    constexpr std::uint64_t mix_seed(std::uint64_t z) noexcept
    {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Seed of stream `path` below `master`, e.g. derive_seed(master, {size, repetition}).
    constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept
    {
        std::uint64_t s = mix_seed(master);
        for (auto p : path)
        {
            s = mix_seed(s ^ mix_seed(p + 0x632be59bd9b4e019ULL));
        }
        return s;
    }

    inline double uniform01(Rng &rng)
    {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    }

    inline double standard_normal(Rng &rng)
    {
        return std::normal_distribution<double>(0.0, 1.0)(rng);
    }

    inline Eigen::MatrixXd standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng &rng)
    {
        Eigen::MatrixXd m(rows, cols);
        // Row-major fill so the draw order matches the serialized layout.
        for (Eigen::Index r = 0; r < rows; ++r)
        {
            for (Eigen::Index c = 0; c < cols; ++c)
            {
                m(r, c) = standard_normal(rng);
            }
        }
        return m;
    }

    // Inverse-CDF draw from a discrete distribution given by `weights` (a row or column).
    // One uniform per call, so chains driven by nearby distributions stay coupled.
    template <typename Derived>
    int sample_categorical(const Eigen::DenseBase<Derived> &weights, Rng &rng)
    {
        const double u = uniform01(rng);
        double acc = 0.0;
        const auto n = weights.size();
        for (Eigen::Index i = 0; i < n; ++i)
        {
            acc += weights(i);
            if (u < acc)
            {
                return static_cast<int>(i);
            }
        }
        // Rounding left u beyond the accumulated mass: return the last positive entry.
        for (Eigen::Index i = n - 1; i > 0; --i)
        {
            if (weights(i) > 0.0)
            {
                return static_cast<int>(i);
            }
        }
        return 0;
    }

    // Dirichlet(alpha, ..., alpha) on the n-simplex.
    inline Eigen::VectorXd sample_dirichlet(Eigen::Index n, double alpha, Rng &rng)
    {
        std::gamma_distribution<double> gamma(alpha, 1.0);
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            v(i) = gamma(rng);
        }
        return v / v.sum();
    }

} // namespace mjls

#endif // MJLS_RANDOM_HPP

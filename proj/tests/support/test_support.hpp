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

#ifndef MJLS_TEST_SUPPORT_HPP
#define MJLS_TEST_SUPPORT_HPP

// Fixtures and reference computations shared by the test binaries. The
// reference routines solve the defining linear systems directly and never
// call into the library's solvers.

#include <cmath>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "mjls/cost_oracle.hpp"
#include "mjls/model.hpp"
#include "mjls/serialization.hpp"

namespace mjls::testing
{
    inline std::filesystem::path fixture_path(const std::string &name)
    {
        return std::filesystem::path(MJLS_FIXTURE_DIR) / name;
    }

    inline JumpLinearModel load_fixture(const std::string &name)
    {
        return load_model(fixture_path(name));
    }

    // Ns = 1, d = k = 1.
    inline JumpLinearModel scalar_model(double a, double b, double q, double r, double sigma0 = 1.0)
    {
        JumpLinearModel m;
        m.A = {Matrix::Constant(1, 1, a)};
        m.B = {Matrix::Constant(1, 1, b)};
        m.Q = {Matrix::Constant(1, 1, q)};
        m.R = {Matrix::Constant(1, 1, r)};
        m.transitions = Matrix::Ones(1, 1);
        m.initial_modes = Vector::Ones(1);
        m.initial_state.covariance = Matrix::Constant(1, 1, sigma0);
        m.initial_state.norm_bound = InitialStateDistribution::default_norm_bound(m.initial_state.covariance);
        return m;
    }

    inline GainSchedule scalar_policy(std::vector<double> k)
    {
        GainSchedule g;
        for (double v : k)
        {
            g.gains.push_back(Matrix::Constant(1, 1, v));
        }
        return g;
    }

    inline ModeMatrices gammas(const JumpLinearModel &m, const GainSchedule &k)
    {
        ModeMatrices g;
        for (int i = 0; i < m.num_modes(); ++i)
        {
            g.push_back(m.A[i] - m.B[i] * k[i]);
        }
        return g;
    }

    inline Vector stack(const ModeMatrices &ms)
    {
        const Eigen::Index n = ms.front().size();
        Vector v(n * static_cast<Eigen::Index>(ms.size()));
        for (std::size_t i = 0; i < ms.size(); ++i)
        {
            v.segment(static_cast<Eigen::Index>(i) * n, n) = Eigen::Map<const Vector>(ms[i].data(), n);
        }
        return v;
    }

    inline ModeMatrices unstack(const Vector &v, int ns, Eigen::Index d)
    {
        ModeMatrices out;
        for (int i = 0; i < ns; ++i)
        {
            out.push_back(Eigen::Map<const Matrix>(v.data() + i * d * d, d, d));
        }
        return out;
    }

    // P_i = W_i + Gamma_i' (sum_j p_ij P_j) Gamma_i as one dense linear system.
    inline ModeMatrices reference_value(const JumpLinearModel &m, const GainSchedule &k)
    {
        const int ns = m.num_modes();
        const Eigen::Index d = m.state_dim();
        const auto g = gammas(m, k);
        const Eigen::Index n = d * d;
        Matrix sys = Matrix::Identity(ns * n, ns * n);
        ModeMatrices w;
        for (int i = 0; i < ns; ++i)
        {
            w.push_back(m.Q[i] + k[i].transpose() * m.R[i] * k[i]);
            const Matrix kron = Eigen::kroneckerProduct(g[i].transpose(), g[i].transpose());
            for (int j = 0; j < ns; ++j)
            {
                sys.block(i * n, j * n, n, n) -= m.transitions(i, j) * kron;
            }
        }
        return unstack(sys.partialPivLu().solve(stack(w)), ns, d);
    }

    // chi_j = pi0_j Sigma0 + sum_i p_ij Gamma_i chi_i Gamma_i'.
    inline ModeMatrices reference_correlation(const JumpLinearModel &m, const GainSchedule &k)
    {
        const int ns = m.num_modes();
        const Eigen::Index d = m.state_dim();
        const auto g = gammas(m, k);
        const Eigen::Index n = d * d;
        Matrix sys = Matrix::Identity(ns * n, ns * n);
        ModeMatrices x0;
        for (int j = 0; j < ns; ++j)
        {
            x0.push_back(m.initial_modes(j) * m.initial_state.covariance);
            for (int i = 0; i < ns; ++i)
            {
                sys.block(j * n, i * n, n, n) -= m.transitions(i, j) * Matrix(Eigen::kroneckerProduct(g[i], g[i]));
            }
        }
        return unstack(sys.partialPivLu().solve(stack(x0)), ns, d);
    }

    inline double reference_cost(const JumpLinearModel &m, const GainSchedule &k)
    {
        const auto p = reference_value(m, k);
        Matrix avg = Matrix::Zero(m.state_dim(), m.state_dim());
        for (int i = 0; i < m.num_modes(); ++i)
        {
            avg += m.initial_modes(i) * p[static_cast<std::size_t>(i)];
        }
        return (avg * m.initial_state.covariance).trace();
    }

    // Expected cost of stages 0..horizon-1 by explicit second-moment propagation.
    inline double reference_finite_cost(const JumpLinearModel &m, const GainSchedule &k, std::size_t horizon)
    {
        const auto g = gammas(m, k);
        ModeMatrices x;
        for (int i = 0; i < m.num_modes(); ++i)
        {
            x.push_back(m.initial_modes(i) * m.initial_state.covariance);
        }
        double total = 0.0;
        for (std::size_t t = 0; t < horizon; ++t)
        {
            ModeMatrices next(x.size(), Matrix::Zero(m.state_dim(), m.state_dim()));
            for (int i = 0; i < m.num_modes(); ++i)
            {
                const auto ui = static_cast<std::size_t>(i);
                total += ((m.Q[ui] + k[i].transpose() * m.R[ui] * k[i]) * x[ui]).trace();
                for (int j = 0; j < m.num_modes(); ++j)
                {
                    next[static_cast<std::size_t>(j)] += m.transitions(i, j) * g[ui] * x[ui] * g[ui].transpose();
                }
            }
            x = std::move(next);
        }
        return total;
    }

    // Central differences of reference_cost, one entry at a time.
    inline ModeMatrices finite_difference_gradient(const JumpLinearModel &m, const GainSchedule &k, double h)
    {
        ModeMatrices grad;
        for (int i = 0; i < m.num_modes(); ++i)
        {
            Matrix gi(k[i].rows(), k[i].cols());
            for (Eigen::Index r = 0; r < gi.rows(); ++r)
            {
                for (Eigen::Index c = 0; c < gi.cols(); ++c)
                {
                    GainSchedule plus = k;
                    GainSchedule minus = k;
                    plus[i](r, c) += h;
                    minus[i](r, c) -= h;
                    gi(r, c) = (reference_cost(m, plus) - reference_cost(m, minus)) / (2.0 * h);
                }
            }
            grad.push_back(gi);
        }
        return grad;
    }

    inline double frobenius(const ModeMatrices &ms)
    {
        double s = 0.0;
        for (const auto &m : ms)
        {
            s += m.squaredNorm();
        }
        return std::sqrt(s);
    }

    inline double relative_error(const ModeMatrices &a, const ModeMatrices &b)
    {
        ModeMatrices diff;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            diff.push_back(a[i] - b[i]);
        }
        return frobenius(diff) / frobenius(b);
    }

    inline double cosine_similarity(const ModeMatrices &a, const ModeMatrices &b)
    {
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            dot += (a[i].array() * b[i].array()).sum();
        }
        return dot / (frobenius(a) * frobenius(b));
    }

    /**
     * Ns = 1, d = k = 1 oracle whose every stage cost is `cost`, whatever
     * the input. The mode chain alternates between `modes` modes.
     */
    class ConstantCostOracle final : public CostOracle
    {
    public:
        ConstantCostOracle(double cost, int modes) : cost_(cost), modes_(modes), state_(Vector::Ones(1)) {}

        int num_modes() const override { return modes_; }
        int state_dim() const override { return 1; }
        int input_dim() const override { return 1; }
        void reset(Rng &rng) override { mode_ = static_cast<int>(rng() % static_cast<std::uint64_t>(modes_)); }
        StepResult step(const Vector &) override
        {
            mode_ = (mode_ + 1) % modes_;
            return {cost_, false};
        }
        const Vector &state() const override { return state_; }
        int mode() const override { return mode_; }
        std::vector<int> observe_mode_chain(std::size_t length, Rng &) const override
        {
            std::vector<int> out(length);
            for (std::size_t t = 0; t < length; ++t)
            {
                out[t] = static_cast<int>(t % static_cast<std::size_t>(modes_));
            }
            return out;
        }
        void drive_modes_with(const Matrix &) override {}
        std::unique_ptr<CostOracle> clone() const override { return std::make_unique<ConstantCostOracle>(*this); }

    private:
        double cost_;
        int modes_;
        Vector state_;
        int mode_ = 0;
    };

    /**
     * Ns = 1, d = k = 1: x0 = 1, the first stage costs u^2 and the state
     * then stays at 0, so the rollout cost of gain K is exactly K^2.
     */
    class QuadraticOracle final : public CostOracle
    {
    public:
        QuadraticOracle() : state_(Vector::Ones(1)) {}

        int num_modes() const override { return 1; }
        int state_dim() const override { return 1; }
        int input_dim() const override { return 1; }
        void reset(Rng &) override { state_(0) = 1.0; }
        StepResult step(const Vector &u) override
        {
            const double c = state_(0) != 0.0 ? u(0) * u(0) : 0.0;
            state_(0) = 0.0;
            return {c, false};
        }
        const Vector &state() const override { return state_; }
        int mode() const override { return 0; }
        std::vector<int> observe_mode_chain(std::size_t length, Rng &) const override
        {
            return std::vector<int>(length, 0);
        }
        void drive_modes_with(const Matrix &) override {}
        std::unique_ptr<CostOracle> clone() const override { return std::make_unique<QuadraticOracle>(*this); }

    private:
        Vector state_;
    };

} // namespace mjls::testing

#endif // MJLS_TEST_SUPPORT_HPP

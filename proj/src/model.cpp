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

#include "mjls/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "mjls/errors.hpp"

namespace mjls
{
    namespace
    {
        void require(bool condition, const std::string &message)
        {
            if (!condition)
            {
                throw InvalidArgument(message);
            }
        }

        bool is_symmetric(const Matrix &m)
        {
            const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
            return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
        }

        void require_spd_modes(const ModeMatrices &mats, int dim, const char *name)
        {
            for (std::size_t i = 0; i < mats.size(); ++i)
            {
                const auto &m = mats[i];
                const std::string where = std::string(name) + "[" + std::to_string(i) + "]";
                require(m.rows() == dim && m.cols() == dim, where + " has wrong dimensions");
                require(m.allFinite(), where + " has non-finite entries");
                require(is_symmetric(m), where + " is not symmetric");
                require(min_symmetric_eigenvalue(m) > 0.0, where + " is not positive definite");
            }
        }
    } // namespace

    double InitialStateDistribution::default_norm_bound(const Matrix &covariance)
    {
        return 10.0 * std::sqrt(covariance.trace());
    }

    void require_row_stochastic(const Matrix &transitions, double tol)
    {
        require(transitions.rows() == transitions.cols() && transitions.rows() > 0,
                "transition matrix must be square and non-empty");
        require(transitions.allFinite(), "transition matrix has non-finite entries");
        for (Eigen::Index i = 0; i < transitions.rows(); ++i)
        {
            require(transitions.row(i).minCoeff() >= 0.0,
                    "transition matrix row " + std::to_string(i) + " has a negative entry");
            require(std::abs(transitions.row(i).sum() - 1.0) <= tol,
                    "transition matrix row " + std::to_string(i) + " does not sum to 1");
        }
    }

    void JumpLinearModel::validate() const
    {
        const int ns = num_modes();
        require(ns >= 1, "model must have at least one mode");
        require(B.size() == A.size() && Q.size() == A.size() && R.size() == A.size(),
                "A, B, Q, R must have one matrix per mode");
        const int d = state_dim();
        const int k = input_dim();
        require(d >= 1 && k >= 1, "state and input dimensions must be positive");
        for (int i = 0; i < ns; ++i)
        {
            const auto s = static_cast<std::size_t>(i);
            require(A[s].rows() == d && A[s].cols() == d, "A[" + std::to_string(i) + "] has wrong dimensions");
            require(B[s].rows() == d && B[s].cols() == k, "B[" + std::to_string(i) + "] has wrong dimensions");
            require(A[s].allFinite() && B[s].allFinite(), "A or B has non-finite entries");
        }
        require_spd_modes(Q, d, "Q");
        require_spd_modes(R, k, "R");

        require(transitions.rows() == ns, "transition matrix must be Ns x Ns");
        require_row_stochastic(transitions, 1e-12);

        require(initial_modes.size() == ns, "pi0 must have Ns entries");
        require(initial_modes.minCoeff() > 0.0, "pi0 entries must be strictly positive");
        require(std::abs(initial_modes.sum() - 1.0) <= 1e-12, "pi0 must sum to 1");

        const auto &cov = initial_state.covariance;
        require(cov.rows() == d && cov.cols() == d, "Sigma0 must be d x d");
        require(cov.allFinite() && is_symmetric(cov), "Sigma0 must be symmetric");
        require(min_symmetric_eigenvalue(cov) > 0.0, "Sigma0 must be positive definite");
        require(initial_state.norm_bound >= std::sqrt(cov.trace()), "L must be at least sqrt(trace(Sigma0))");
    }

    GainSchedule GainSchedule::zeros(int num_modes, int input_dim, int state_dim)
    {
        GainSchedule k;
        k.gains.assign(static_cast<std::size_t>(num_modes), Matrix::Zero(input_dim, state_dim));
        return k;
    }

    void GainSchedule::validate_shape(int modes, int input_dim, int state_dim) const
    {
        require(num_modes() == modes, "policy must have one gain per mode");
        for (const auto &g : gains)
        {
            require(g.rows() == input_dim && g.cols() == state_dim, "policy gain must be k x d");
            require(g.allFinite(), "policy gain has non-finite entries");
        }
    }

    double BlockCorrelation::trace() const
    {
        double t = 0.0;
        for (const auto &b : blocks)
        {
            t += b.trace();
        }
        return t;
    }

    GainSchedule zero_policy(const JumpLinearModel &model)
    {
        return GainSchedule::zeros(model.num_modes(), model.input_dim(), model.state_dim());
    }

    void validate_policy(const JumpLinearModel &model, const GainSchedule &policy)
    {
        policy.validate_shape(model.num_modes(), model.input_dim(), model.state_dim());
    }

    double spectral_norm(const Matrix &m)
    {
        if (m.size() == 0)
        {
            return 0.0;
        }
        if (m.rows() == 1 || m.cols() == 1)
        {
            return m.norm();
        }
        Eigen::JacobiSVD<Matrix> svd(m);
        return svd.singularValues()(0);
    }

    double min_symmetric_eigenvalue(const Matrix &m)
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    double min_eigenvalue_over_modes(const ModeMatrices &mats)
    {
        double lo = std::numeric_limits<double>::infinity();
        for (const auto &m : mats)
        {
            lo = std::min(lo, min_symmetric_eigenvalue(m));
        }
        return lo;
    }

    namespace tuple_norm
    {
        double max_spectral(const ModeMatrices &mats)
        {
            double n = 0.0;
            for (const auto &m : mats)
            {
                n = std::max(n, spectral_norm(m));
            }
            return n;
        }

        double sum_spectral(const ModeMatrices &mats)
        {
            double n = 0.0;
            for (const auto &m : mats)
            {
                n += spectral_norm(m);
            }
            return n;
        }

        double max_abs_entry(const ModeMatrices &mats)
        {
            double n = 0.0;
            for (const auto &m : mats)
            {
                if (m.size() > 0)
                {
                    n = std::max(n, m.cwiseAbs().maxCoeff());
                }
            }
            return n;
        }

        double frobenius(const ModeMatrices &mats)
        {
            double s = 0.0;
            for (const auto &m : mats)
            {
                s += m.squaredNorm();
            }
            return std::sqrt(s);
        }
    } // namespace tuple_norm

    ModeMatrices difference(const ModeMatrices &a, const ModeMatrices &b)
    {
        if (a.size() != b.size())
        {
            throw InvalidArgument("mode tuples have different lengths");
        }
        ModeMatrices out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            out[i] = a[i] - b[i];
        }
        return out;
    }

    ModeMatrices closed_loop(const JumpLinearModel &model, const GainSchedule &policy)
    {
        validate_policy(model, policy);
        ModeMatrices gamma(model.A.size());
        for (std::size_t i = 0; i < gamma.size(); ++i)
        {
            gamma[i] = model.A[i] - model.B[i] * policy.gains[i];
        }
        return gamma;
    }

} // namespace mjls

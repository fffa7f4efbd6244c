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

#ifndef MJLS_POLICY_HPP
#define MJLS_POLICY_HPP

#include <vector>

#include <Eigen/Dense>

namespace mjls
{
    using Matrix = Eigen::MatrixXd;
    using Vector = Eigen::VectorXd;

    // One matrix per operating mode.
    using ModeMatrices = std::vector<Matrix>;

    // Policy u_t = -K_{w(t)} x_t, one k x d gain per mode.
    struct GainSchedule
    {
        ModeMatrices gains;

        static GainSchedule zeros(int num_modes, int input_dim, int state_dim);

        int num_modes() const { return static_cast<int>(gains.size()); }
        const Matrix &operator[](int mode) const { return gains[static_cast<std::size_t>(mode)]; }
        Matrix &operator[](int mode) { return gains[static_cast<std::size_t>(mode)]; }

        // Throws InvalidArgument on dimension mismatch or non-finite entries.
        void validate_shape(int num_modes, int input_dim, int state_dim) const;
    };

    // Diagonal blocks chi_i of the block-diagonal state correlation.
    struct BlockCorrelation
    {
        ModeMatrices blocks;

        double trace() const;
    };

    // Norms of mode-indexed tuples. The spectral "max" norm is the one used by
    // the step-size formulas and the stopping rule.
    namespace tuple_norm
    {
        double max_spectral(const ModeMatrices &m);  // max_i ||M_i||_2
        double sum_spectral(const ModeMatrices &m);  // sum_i ||M_i||_2
        double max_abs_entry(const ModeMatrices &m); // max_{i,r,c} |M_i(r,c)|
        double frobenius(const ModeMatrices &m);     // sqrt(sum_i ||M_i||_F^2)
    } // namespace tuple_norm

    ModeMatrices difference(const ModeMatrices &a, const ModeMatrices &b);

    double spectral_norm(const Matrix &m);
    double min_symmetric_eigenvalue(const Matrix &m);

} // namespace mjls

#endif // MJLS_POLICY_HPP

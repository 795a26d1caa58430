#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gvspec/error.hpp"

namespace gvspec::detail {

/// Orthogonal projector onto polynomials of a fixed degree on a fixed set of
/// epochs. Epochs are mapped to [-1, 1] before the Vandermonde columns are
/// built, so the fit is shift-invariant and well conditioned for the low
/// orders used here. Built once, it can residualize any number of value
/// vectors on the same epochs.
class PolynomialProjector {
public:
    PolynomialProjector(std::span<const double> epochs, int order) : order_(order) {
        const auto n = static_cast<Eigen::Index>(epochs.size());
        const Eigen::Index cols = order + 1;
        if (order < 0) throw DegreesOfFreedomError("polynomial order must be non-negative");
        if (n < 2 || cols > n)
            throw DegreesOfFreedomError("cannot fit " + std::to_string(cols) + " constituent(s) to " +
                                        std::to_string(n) + " sample(s)");
        center_ = 0.5 * (epochs.front() + epochs.back());
        scale_ = 0.5 * (epochs.back() - epochs.front());
        if (!(scale_ > 0.0)) throw DegreesOfFreedomError("epochs span zero time");

        Eigen::MatrixXd basis(n, cols);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double tau = (epochs[static_cast<std::size_t>(i)] - center_) / scale_;
            double p = 1.0;
            for (Eigen::Index j = 0; j < cols; ++j) {
                basis(i, j) = p;
                p *= tau;
            }
        }
        qr_ = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(basis);
        if (qr_.rank() < cols)
            throw DegreesOfFreedomError("constituent basis is rank deficient (" + std::to_string(qr_.rank()) +
                                        " of " + std::to_string(cols) + ")");
        q_ = qr_.householderQ() * Eigen::MatrixXd::Identity(n, cols);
    }

    int order() const noexcept { return order_; }
    std::size_t count() const noexcept { return static_cast<std::size_t>(order_ + 1); }
    double center() const noexcept { return center_; }
    double scale() const noexcept { return scale_; }

    /// values <- values - Q Q^T values, applied twice so the result is
    /// orthogonal to the basis to working precision.
    void residualize(std::span<double> values) const {
        Eigen::Map<Eigen::VectorXd> r(values.data(), static_cast<Eigen::Index>(values.size()));
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd coeff = q_.transpose() * r;
            r.noalias() -= q_ * coeff;
        }
    }

    /// Least-squares coefficients in the scaled variable (t - center)/scale,
    /// lowest degree first.
    std::vector<double> coefficients(std::span<const double> values) const {
        const Eigen::Map<const Eigen::VectorXd> y(values.data(), static_cast<Eigen::Index>(values.size()));
        const Eigen::VectorXd c = qr_.solve(y);
        return {c.data(), c.data() + c.size()};
    }

private:
    int order_;
    double center_ = 0.0;
    double scale_ = 1.0;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
    Eigen::MatrixXd q_;
};

} // namespace gvspec::detail

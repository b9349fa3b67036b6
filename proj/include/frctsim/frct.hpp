/**
 * @file frct.hpp
 * @brief N-order inverse/forward fractional cosine transform and the
 *        subcarrier cross-correlation matrix.
 *
 * The transform pair is a DCT-II with the cosine argument scaled by the
 * bandwidth compression factor alpha. At alpha = 1 the basis is orthogonal;
 * below 1 the subcarriers overlap and frct(ifrct(X)) = C * X.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace frctsim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Precomputed N x N fractional cosine basis. Column k is subcarrier k.
class FrctBasis {
public:
    FrctBasis(std::size_t n_subcarriers, double alpha)
      : n_(n_subcarriers), alpha_(alpha)
    {
        if (n_ == 0)
            throw std::invalid_argument("FrctBasis: number of subcarriers must be positive");
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw std::invalid_argument("FrctBasis: alpha must lie in (0, 1], got " +
                                        std::to_string(alpha));

        const auto n = static_cast<Eigen::Index>(n_);
        weights_ = Vector::Ones(n);
        weights_(0) = 1.0 / std::numbers::sqrt2;

        const double scale = std::sqrt(2.0 / static_cast<double>(n_));
        const double step = std::numbers::pi * alpha_ / (2.0 * static_cast<double>(n_));
        matrix_.resize(n, n);
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index t = 0; t < n; ++t)
                matrix_(t, k) = scale * weights_(k) *
                                std::cos(step * static_cast<double>((2 * t + 1) * k));
    }

    std::size_t size() const noexcept { return n_; }
    double alpha() const noexcept { return alpha_; }

    /// Entry (n, k) = sqrt(2/N) W_k cos(pi alpha (2n+1) k / 2N).
    const Matrix &matrix() const noexcept { return matrix_; }
    const Vector &weights() const noexcept { return weights_; }

private:
    std::size_t n_;
    double alpha_;
    Vector weights_;
    Matrix matrix_;
};

inline FrctBasis make_basis(std::size_t n_subcarriers, double alpha)
{
    return FrctBasis(n_subcarriers, alpha);
}

namespace detail {
inline void check_length(Eigen::Index got, std::size_t want, const char *what)
{
    if (static_cast<std::size_t>(got) != want)
        throw std::invalid_argument(std::string(what) + ": expected length " +
                                    std::to_string(want) + ", got " + std::to_string(got));
}
} // namespace detail

/// Multiplexing: frequency-domain symbols -> real time samples.
inline Vector ifrct(const Eigen::Ref<const Vector> &freq_symbols, const FrctBasis &basis)
{
    detail::check_length(freq_symbols.size(), basis.size(), "ifrct");
    return basis.matrix() * freq_symbols;
}

/// Demultiplexing: time samples -> subcarrier outputs.
inline Vector frct(const Eigen::Ref<const Vector> &time_samples, const FrctBasis &basis)
{
    detail::check_length(time_samples.size(), basis.size(), "frct");
    return basis.matrix().transpose() * time_samples;
}

/// Column-batched forms: each column of the input is one symbol.
inline Matrix ifrct_columns(const Eigen::Ref<const Matrix> &freq_symbols, const FrctBasis &basis)
{
    detail::check_length(freq_symbols.rows(), basis.size(), "ifrct_columns");
    return basis.matrix() * freq_symbols;
}

inline Matrix frct_columns(const Eigen::Ref<const Matrix> &time_samples, const FrctBasis &basis)
{
    detail::check_length(time_samples.rows(), basis.size(), "frct_columns");
    return basis.matrix().transpose() * time_samples;
}

/// Subcarrier cross-correlation. Not renormalized: only entry (0,0) is
/// guaranteed to be one when alpha < 1.
struct CorrelationMatrix {
    Matrix entries;

    std::size_t size() const noexcept { return static_cast<std::size_t>(entries.rows()); }
    double operator()(Eigen::Index l, Eigen::Index m) const { return entries(l, m); }
};

/// C = B^T B, symmetrized so that C(l,m) == C(m,l) bit for bit.
inline CorrelationMatrix correlation_matrix(const FrctBasis &basis)
{
    Matrix c = basis.matrix().transpose() * basis.matrix();
    for (Eigen::Index l = 0; l < c.rows(); ++l)
        for (Eigen::Index m = l + 1; m < c.cols(); ++m)
            c(m, l) = c(l, m);
    return {std::move(c)};
}

/// Same matrix evaluated term by term from the cosine sum. Slower; kept as
/// the second route the product form is checked against.
inline CorrelationMatrix correlation_matrix_by_sum(const FrctBasis &basis)
{
    const auto n = static_cast<Eigen::Index>(basis.size());
    const double nd = static_cast<double>(n);
    const double arg = basis.alpha() * std::numbers::pi / (2.0 * nd);
    const Vector &w = basis.weights();

    Matrix c(n, n);
    for (Eigen::Index l = 0; l < n; ++l) {
        for (Eigen::Index m = l; m < n; ++m) {
            double acc = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) {
                const double odd = static_cast<double>(2 * k + 1);
                acc += w(l) * std::cos(arg * static_cast<double>(l) * odd) *
                       w(m) * std::cos(arg * odd * static_cast<double>(m));
            }
            c(l, m) = c(m, l) = 2.0 / nd * acc;
        }
    }
    return {std::move(c)};
}

} // namespace frctsim

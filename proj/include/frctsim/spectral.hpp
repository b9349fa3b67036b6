// DFT helpers shared by the receiver and the PSD estimator.
#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

namespace frctsim {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

namespace detail {
// Eigen::FFT caches plans internally; one instance per thread.
inline Eigen::FFT<double> &fft_engine()
{
    thread_local Eigen::FFT<double> engine;
    return engine;
}
} // namespace detail

/// Unnormalized forward DFT of a real sequence (full N bins).
inline ComplexVector dft(const Eigen::Ref<const Eigen::VectorXd> &x)
{
    std::vector<double> in(x.data(), x.data() + x.size());
    std::vector<Complex> out;
    detail::fft_engine().fwd(out, in);
    return Eigen::Map<const ComplexVector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

/// Inverse DFT with 1/N scaling, so idft(dft(x)) == x.
inline ComplexVector idft(const Eigen::Ref<const ComplexVector> &bins)
{
    std::vector<Complex> in(bins.data(), bins.data() + bins.size());
    std::vector<Complex> out;
    detail::fft_engine().inv(out, in);
    return Eigen::Map<const ComplexVector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

} // namespace frctsim

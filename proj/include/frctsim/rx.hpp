/**
 * @file rx.hpp
 * @brief Receive chain: CP removal, training-based channel estimation,
 *        one-tap frequency-domain equalization, FrCT demultiplexing,
 *        iterative ICI detection and PAM demapping.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "frctsim/analysis.hpp"
#include "frctsim/frct.hpp"
#include "frctsim/spectral.hpp"
#include "frctsim/tx.hpp"

namespace frctsim {

/// Drops the first cp_len samples of one received symbol.
inline std::vector<double> remove_cp(std::span<const double> rx_symbol, int cp_len)
{
    if (cp_len < 0 || static_cast<std::size_t>(cp_len) >= rx_symbol.size())
        throw std::invalid_argument("remove_cp: cp_len must be nonnegative and shorter than the symbol");
    return {rx_symbol.begin() + cp_len, rx_symbol.end()};
}

struct ChannelEstimate {
    ComplexVector bins;     ///< per-DFT-bin gain H_k
    int n_training_avg = 0; ///< number of received training symbols pooled
};

/// Bins with magnitude below this fraction of the largest bin are floored.
inline constexpr double kChannelFloor = 1e-6;

/// Per-bin least-squares estimate H_k = sum_j Y_kj conj(T_kj) / sum_j |T_kj|^2
/// over all received training symbols. Column j of rx_training is matched
/// with reference column j mod (reference columns).
inline ChannelEstimate estimate_channel(const Eigen::Ref<const Matrix> &rx_training,
                                        const Eigen::Ref<const ComplexMatrix> &reference)
{
    if (rx_training.cols() < 1) throw std::invalid_argument("estimate_channel: need at least one training symbol");
    if (reference.cols() < 1 || reference.rows() != rx_training.rows())
        throw std::invalid_argument("estimate_channel: reference shape does not match the training symbols");
    if ((reference.array() == Complex(0.0, 0.0)).any())
        throw std::invalid_argument("estimate_channel: reference has a zero entry");

    const Eigen::Index n = rx_training.rows();
    ComplexVector num = ComplexVector::Zero(n);
    Eigen::VectorXd den = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < rx_training.cols(); ++j) {
        const auto ref = reference.col(j % reference.cols());
        const ComplexVector y = dft(rx_training.col(j));
        num.array() += y.array() * ref.array().conjugate();
        den.array() += ref.array().abs2();
    }

    ChannelEstimate est;
    est.bins = num.array() / den.array().cast<Complex>();
    est.n_training_avg = static_cast<int>(rx_training.cols());

    const double floor = kChannelFloor * est.bins.cwiseAbs().maxCoeff();
    for (auto &h : est.bins)
        if (std::abs(h) < floor) h = (std::abs(h) > 0.0) ? h / std::abs(h) * floor : Complex(floor, 0.0);
    return est;
}

/// DFT, per-bin division by H, inverse DFT, real part.
inline Vector equalize(const Eigen::Ref<const Vector> &rx_symbol, const ChannelEstimate &est)
{
    if (rx_symbol.size() != est.bins.size())
        throw std::invalid_argument("equalize: symbol length does not match the channel estimate");
    const ComplexVector x = dft(rx_symbol).cwiseQuotient(est.bins);
    return idft(x).real();
}

/// Detector state after `iteration` of `total_iterations` steps.
struct IdState {
    Matrix estimate;             ///< S_i, one column per symbol
    double decision_level = 1.0; ///< d
    int iteration = 0;           ///< i
    int total_iterations = 0;    ///< I
};

/// Iterative ICI cancellation for +-1 symbols:
///   S_i = R - (C - e) S_{i-1}, entries beyond +-d snapped to +-1,
///   d = 1 - i/I. The final output is hard-decided (ties go to +1).
class IterativeDetector {
public:
    IterativeDetector(const Eigen::Ref<const Matrix> &received, const CorrelationMatrix &corr, int total_iterations)
      : received_(received)
    {
        if (total_iterations < 0) throw std::invalid_argument("IterativeDetector: negative iteration count");
        if (static_cast<std::size_t>(received.rows()) != corr.size())
            throw std::invalid_argument("IterativeDetector: symbol length does not match the correlation matrix");
        interference_ = corr.entries - Matrix::Identity(corr.entries.rows(), corr.entries.cols());
        state_.estimate = Matrix::Zero(received.rows(), received.cols());
        state_.total_iterations = total_iterations;
    }

    bool done() const noexcept { return state_.iteration >= state_.total_iterations; }
    const IdState &state() const noexcept { return state_; }

    void step()
    {
        if (done()) return;
        Matrix next = received_;
        next.noalias() -= interference_ * state_.estimate;
        const double d = state_.decision_level;
        next = next.unaryExpr([d](double v) { return v > d ? 1.0 : (v < -d ? -1.0 : v); });
        state_.estimate = std::move(next);
        ++state_.iteration;
        state_.decision_level = 1.0 - static_cast<double>(state_.iteration) / state_.total_iterations;
    }

    /// Runs the remaining iterations and returns hard +-1 decisions.
    Matrix run()
    {
        while (!done()) step();
        const Matrix &soft = state_.total_iterations == 0 ? received_ : state_.estimate;
        return soft.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    }

private:
    Matrix received_;
    Matrix interference_;
    IdState state_;
};

/// I = 0 is the pass-through hard decision (no ICI cancellation).
inline Vector iterative_detect(const Eigen::Ref<const Vector> &demuxed, const CorrelationMatrix &corr,
                               int total_iterations)
{
    IterativeDetector det(demuxed, corr, total_iterations);
    return det.run().col(0);
}

inline Matrix iterative_detect_columns(const Eigen::Ref<const Matrix> &demuxed, const CorrelationMatrix &corr,
                                       int total_iterations)
{
    IterativeDetector det(demuxed, corr, total_iterations);
    return det.run();
}

/// Nearest-level decision, inverse of pam_map.
inline Bits pam_demap(std::span<const double> symbols, int pam_order)
{
    detail::check_pam_order(pam_order);
    const int bps = std::countr_zero(static_cast<unsigned>(pam_order));
    const double scale = detail::pam_scale(pam_order);
    Bits bits;
    bits.reserve(symbols.size() * bps);
    for (double s : symbols) {
        const double pos = (s * scale + (pam_order - 1)) / 2.0;
        const auto level = static_cast<unsigned>(std::clamp(std::floor(pos + 0.5), 0.0, pam_order - 1.0));
        const unsigned gray = level ^ (level >> 1);
        for (int b = bps - 1; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((gray >> b) & 1u));
    }
    return bits;
}

/// Everything the receiver is given besides the waveform itself.
struct RxSideInfo {
    ComplexMatrix training_reference;
    DcBias bias;
    double signal_rms = 0.0;
};

/// Full receive chain for a frame batch laid out as build_frames does.
/// After equalization the known bias is subtracted, the symbols are
/// demultiplexed with the receiver's basis and rescaled by 1/eta so the
/// nominal constellation sits at +-1 before detection.
inline Bits decode_frames(const Waveform &received, const FrameConfig &config, const FrctBasis &rx_basis,
                          const CorrelationMatrix &rx_corr, const RxSideInfo &side)
{
    config.validate();
    if (received.size() != config.total_samples())
        throw std::invalid_argument("decode_frames: waveform length does not match the frame layout");

    const int n = config.n_subcarriers;
    const int nt = config.training_symbols_per_frame;
    const int np = config.payload_symbols_per_frame;
    const int sps = config.samples_per_symbol();
    const auto &s = received.samples();

    auto symbol = [&](int frame, int index) {
        const std::size_t start =
            (static_cast<std::size_t>(frame) * config.symbols_per_frame() + index) * sps + config.cp_len;
        return Eigen::Map<const Vector>(s.data() + start, n);
    };

    if (nt < 1) throw std::invalid_argument("decode_frames: channel estimation needs training symbols");
    Matrix training(n, static_cast<Eigen::Index>(nt) * config.n_frames);
    for (int f = 0; f < config.n_frames; ++f)
        for (int j = 0; j < nt; ++j) training.col(static_cast<Eigen::Index>(f) * nt + j) = symbol(f, j);
    const ChannelEstimate est = estimate_channel(training, side.training_reference);

    Matrix equalized(n, static_cast<Eigen::Index>(np) * config.n_frames);
    for (int f = 0; f < config.n_frames; ++f)
        for (int j = 0; j < np; ++j)
            equalized.col(static_cast<Eigen::Index>(f) * np + j) = equalize(symbol(f, nt + j), est);
    equalized.array() -= side.bias.b_dc;

    const double eta = side.signal_rms > 0.0 ? attenuation_factor(side.signal_rms, side.bias.b_dc) : 1.0;
    const Matrix demuxed = frct_columns(equalized, rx_basis) / eta;

    Bits bits;
    bits.reserve(config.payload_bits());
    if (config.pam_order == 2) {
        const Matrix decided = iterative_detect_columns(demuxed, rx_corr, config.id_iterations);
        for (Eigen::Index c = 0; c < decided.cols(); ++c)
            for (Eigen::Index k = 0; k < decided.rows(); ++k) bits.push_back(decided(k, c) > 0.0 ? 1 : 0);
    } else {
        for (Eigen::Index c = 0; c < demuxed.cols(); ++c) {
            const auto col = pam_demap(std::span<const double>(demuxed.col(c).data(), n), config.pam_order);
            bits.insert(bits.end(), col.begin(), col.end());
        }
    }
    return bits;
}

} // namespace frctsim

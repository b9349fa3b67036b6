/**
 * @file tx.hpp
 * @brief Transmit chain: bits -> M-PAM -> IFrCT -> cyclic prefix -> frames
 *        -> DC bias and lower clipping.
 */
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "frctsim/frct.hpp"
#include "frctsim/spectral.hpp"

namespace frctsim {

using Bits = std::vector<std::uint8_t>;

/// Every transmitter and receiver parameter of one link. Defaults follow
/// the 100 Mbit/s, 256-subcarrier, 2-PAM reference setup.
struct FrameConfig {
    int n_subcarriers = 256;
    double alpha = 0.8;
    int cp_len = 16;
    int pam_order = 2;
    double dc_bias_db = 7.0;
    double bit_rate = 1e8;
    int payload_symbols_per_frame = 256;
    int training_symbols_per_frame = 10;
    int n_frames = 8;
    std::uint64_t training_seed = 0x7261696eULL;

    // Receiver side.
    int id_iterations = 20;
    double rx_delta_alpha = 0.0;
    double tap_energy_threshold = 0.9999;

    void validate() const
    {
        auto fail = [](const std::string &msg) { throw std::invalid_argument("FrameConfig: " + msg); };
        if (n_subcarriers <= 0) fail("n_subcarriers must be positive");
        if (!(alpha > 0.0 && alpha <= 1.0)) fail("alpha must lie in (0, 1]");
        if (cp_len < 0 || cp_len >= n_subcarriers) fail("cp_len must satisfy 0 <= cp_len < n_subcarriers");
        if (pam_order < 2 || !std::has_single_bit(static_cast<unsigned>(pam_order)))
            fail("pam_order must be a power of two >= 2");
        if (!(bit_rate > 0.0)) fail("bit_rate must be positive");
        if (payload_symbols_per_frame <= 0) fail("payload_symbols_per_frame must be positive");
        if (training_symbols_per_frame < 0) fail("training_symbols_per_frame must be nonnegative");
        if (n_frames <= 0) fail("n_frames must be positive");
        if (!std::isfinite(dc_bias_db) || dc_bias_db < 0.0) fail("dc_bias_db must be >= 0");
        if (id_iterations < 0) fail("id_iterations must be nonnegative");
        if (id_iterations > 0 && pam_order != 2)
            fail("iterative detection is defined for 2-PAM only; set id_iterations = 0");
        if (!(rx_alpha() > 0.0 && rx_alpha() <= 1.0)) fail("receiver alpha + delta must lie in (0, 1]");
        if (!(tap_energy_threshold > 0.0 && tap_energy_threshold < 1.0))
            fail("tap_energy_threshold must lie in (0, 1)");
    }

    int bits_per_symbol() const { return std::countr_zero(static_cast<unsigned>(pam_order)); }
    double sample_rate() const { return bit_rate / bits_per_symbol(); }
    /// Duration T of one multicarrier symbol without CP.
    double symbol_duration() const { return n_subcarriers / sample_rate(); }
    double rx_alpha() const { return alpha + rx_delta_alpha; }
    int symbols_per_frame() const { return payload_symbols_per_frame + training_symbols_per_frame; }
    int samples_per_symbol() const { return n_subcarriers + cp_len; }
    std::size_t total_samples() const
    {
        return static_cast<std::size_t>(n_frames) * symbols_per_frame() * samples_per_symbol();
    }
    std::size_t payload_bits() const
    {
        return static_cast<std::size_t>(n_frames) * payload_symbols_per_frame * n_subcarriers *
               bits_per_symbol();
    }
};

/// Real sample stream at a fixed rate. Rejects non-finite samples.
class Waveform {
public:
    Waveform() = default;
    Waveform(std::vector<double> samples, double sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate)
    {
        if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_))
            throw std::invalid_argument("Waveform: sample rate must be positive");
        for (double v : samples_)
            if (!std::isfinite(v))
                throw std::invalid_argument("Waveform: non-finite sample");
    }

    const std::vector<double> &samples() const noexcept { return samples_; }
    std::span<const double> view() const noexcept { return samples_; }
    double sample_rate() const noexcept { return sample_rate_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }

    double mean_square() const
    {
        if (samples_.empty()) return 0.0;
        double acc = 0.0;
        for (double v : samples_) acc += v * v;
        return acc / static_cast<double>(samples_.size());
    }

private:
    std::vector<double> samples_;
    double sample_rate_ = 1.0;
};

/// DC bias sized as a power ratio: bias_db = 10 log10(k^2 + 1), b_dc = k * rms.
struct DcBias {
    double k_factor = 0.0;
    double bias_db = 0.0;
    double b_dc = 0.0;

    static double k_from_db(double bias_db)
    {
        if (!(bias_db >= 0.0)) throw std::invalid_argument("DcBias: bias_db must be >= 0");
        return std::sqrt(std::pow(10.0, bias_db / 10.0) - 1.0);
    }

    static DcBias from_db(double bias_db, double signal_rms)
    {
        if (!(signal_rms >= 0.0)) throw std::invalid_argument("DcBias: rms must be >= 0");
        const double k = k_from_db(bias_db);
        return {k, bias_db, k * signal_rms};
    }
};

namespace detail {
inline void check_pam_order(int m)
{
    if (m < 2 || !std::has_single_bit(static_cast<unsigned>(m)))
        throw std::invalid_argument("PAM order must be a power of two >= 2, got " + std::to_string(m));
}

/// Unit-average-power normalization of the levels {+-1, +-3, ...}.
inline double pam_scale(int m) { return std::sqrt((static_cast<double>(m) * m - 1.0) / 3.0); }
} // namespace detail

/// Gray-coded M-PAM, unit average power. Bits are MSB first within a
/// symbol; for M = 2 this is 0 -> -1, 1 -> +1.
inline std::vector<double> pam_map(std::span<const std::uint8_t> bits, int pam_order)
{
    detail::check_pam_order(pam_order);
    const int bps = std::countr_zero(static_cast<unsigned>(pam_order));
    if (bits.size() % static_cast<std::size_t>(bps) != 0)
        throw std::invalid_argument("pam_map: bit count is not a multiple of log2(M)");

    const double scale = detail::pam_scale(pam_order);
    std::vector<double> out;
    out.reserve(bits.size() / bps);
    for (std::size_t i = 0; i < bits.size(); i += bps) {
        unsigned gray = 0;
        for (int b = 0; b < bps; ++b) gray = (gray << 1) | (bits[i + b] & 1u);
        unsigned level = gray;
        for (unsigned shift = gray >> 1; shift != 0; shift >>= 1) level ^= shift;
        out.push_back((2.0 * level - (pam_order - 1)) / scale);
    }
    return out;
}

/// Prepends the last cp_len samples of the symbol.
inline std::vector<double> add_cp(std::span<const double> symbol, int cp_len)
{
    if (cp_len < 0 || static_cast<std::size_t>(cp_len) >= symbol.size())
        throw std::invalid_argument("add_cp: cp_len must be nonnegative and shorter than the symbol");
    std::vector<double> out;
    out.reserve(symbol.size() + cp_len);
    out.insert(out.end(), symbol.end() - cp_len, symbol.end());
    out.insert(out.end(), symbol.begin(), symbol.end());
    return out;
}

/// s = x + B_DC where x >= -B_DC, else 0. Single-sided; no upper clip.
inline Waveform dc_bias_clip(const Waveform &waveform, const DcBias &bias)
{
    std::vector<double> out(waveform.samples());
    for (double &v : out) v = (v >= -bias.b_dc) ? v + bias.b_dc : 0.0;
    return Waveform(std::move(out), waveform.sample_rate());
}

/// Output of build_frames: the unipolar waveform plus what the receiver is
/// assumed to know (training content and the applied bias).
struct TxBatch {
    Waveform waveform;
    /// FrCT-domain 2-PAM training symbols, one per column (N x n_training).
    Matrix training_symbols;
    /// DFT of each transmitted training symbol exactly as it left the
    /// transmitter (biased, clipped, CP removed). Identical in every frame.
    ComplexMatrix training_reference;
    DcBias bias;
    /// Measured rms of the bipolar multiplexed batch (the sigma of the clip model).
    double signal_rms = 0.0;
};

/// Pseudorandom +-1 training symbols drawn from the configured seed.
inline Matrix training_symbols(const FrameConfig &config)
{
    std::mt19937_64 rng(config.training_seed);
    Matrix t(config.n_subcarriers, config.training_symbols_per_frame);
    for (Eigen::Index j = 0; j < t.cols(); ++j)
        for (Eigen::Index k = 0; k < t.rows(); ++k)
            t(k, j) = (rng() >> 63) ? 1.0 : -1.0;
    return t;
}

/// Uniform random payload bits from a seeded generator.
inline Bits random_bits(std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Bits bits(count);
    for (auto &b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
    return bits;
}

/// Frame layout: per frame, training symbols then payload symbols. Every
/// symbol is multiplexed and CP-extended; the concatenated batch is then
/// biased and clipped once using its measured rms.
inline TxBatch build_frames(std::span<const std::uint8_t> payload_bits, const FrameConfig &config,
                            const FrctBasis &basis)
{
    config.validate();
    if (basis.size() != static_cast<std::size_t>(config.n_subcarriers))
        throw std::invalid_argument("build_frames: basis size does not match n_subcarriers");
    if (payload_bits.size() != config.payload_bits())
        throw std::invalid_argument("build_frames: expected " + std::to_string(config.payload_bits()) +
                                    " payload bits, got " + std::to_string(payload_bits.size()));

    const int n = config.n_subcarriers;
    const int nt = config.training_symbols_per_frame;
    const int np = config.payload_symbols_per_frame;
    const int spf = config.symbols_per_frame();

    const std::vector<double> payload = pam_map(payload_bits, config.pam_order);
    const Matrix training = training_symbols(config);

    Matrix freq(n, static_cast<Eigen::Index>(config.n_frames) * spf);
    for (int f = 0; f < config.n_frames; ++f) {
        const Eigen::Index base = static_cast<Eigen::Index>(f) * spf;
        freq.middleCols(base, nt) = training;
        for (int s = 0; s < np; ++s) {
            const std::size_t off = (static_cast<std::size_t>(f) * np + s) * n;
            freq.col(base + nt + s) = Eigen::Map<const Vector>(payload.data() + off, n);
        }
    }
    const Matrix time = ifrct_columns(freq, basis);

    std::vector<double> serial;
    serial.reserve(config.total_samples());
    for (Eigen::Index c = 0; c < time.cols(); ++c) {
        const auto sym = add_cp(std::span<const double>(time.col(c).data(), n), config.cp_len);
        serial.insert(serial.end(), sym.begin(), sym.end());
    }

    Waveform bipolar(std::move(serial), config.sample_rate());
    const double rms = std::sqrt(bipolar.mean_square());
    const DcBias bias = DcBias::from_db(config.dc_bias_db, rms);
    Waveform unipolar = dc_bias_clip(bipolar, bias);

    ComplexMatrix reference(n, nt);
    const auto &s = unipolar.samples();
    for (int j = 0; j < nt; ++j) {
        const std::size_t start = static_cast<std::size_t>(j) * config.samples_per_symbol() + config.cp_len;
        reference.col(j) = dft(Eigen::Map<const Vector>(s.data() + start, n));
    }

    return {std::move(unipolar), training, std::move(reference), bias, rms};
}

} // namespace frctsim

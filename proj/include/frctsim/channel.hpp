/**
 * @file channel.hpp
 * @brief Linear baseband optical-wireless channel.
 *
 * Exponential-decay (ED) and ceiling-bounce (CB) diffuse impulse
 * responses, discretized by integrating the closed-form CDF over each tap
 * interval, plus signal-independent white Gaussian noise.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "frctsim/tx.hpp"

namespace frctsim {

enum class ChannelKind { awgn_only, exp_decay, ceiling_bounce };

inline const char *to_string(ChannelKind kind)
{
    switch (kind) {
    case ChannelKind::awgn_only: return "awgn";
    case ChannelKind::exp_decay: return "ed";
    case ChannelKind::ceiling_bounce: return "cb";
    }
    return "?";
}

inline ChannelKind parse_channel_kind(const std::string &name)
{
    if (name == "awgn" || name == "AWGN_ONLY" || name == "none") return ChannelKind::awgn_only;
    if (name == "ed" || name == "EXP_DECAY") return ChannelKind::exp_decay;
    if (name == "cb" || name == "CEILING_BOUNCE") return ChannelKind::ceiling_bounce;
    throw std::invalid_argument("unknown channel model '" + name + "' (expected awgn, ed or cb)");
}

class ChannelModel {
public:
    static ChannelModel awgn_only() { return ChannelModel(ChannelKind::awgn_only, 0.0); }
    static ChannelModel exp_decay(double rms_delay_spread) { return {ChannelKind::exp_decay, rms_delay_spread}; }
    static ChannelModel ceiling_bounce(double rms_delay_spread)
    {
        return {ChannelKind::ceiling_bounce, rms_delay_spread};
    }
    static ChannelModel make(ChannelKind kind, double rms_delay_spread)
    {
        return kind == ChannelKind::awgn_only ? awgn_only() : ChannelModel(kind, rms_delay_spread);
    }

    ChannelKind kind() const noexcept { return kind_; }
    double rms_delay_spread() const noexcept { return d_; }
    /// CB time constant a = 12 sqrt(11/13) D.
    double cb_a() const noexcept { return a_; }
    bool fading() const noexcept { return kind_ != ChannelKind::awgn_only; }

    /// Impulse response h(t); unit area for ED and CB.
    double impulse(double t) const
    {
        if (t < 0.0) return 0.0;
        switch (kind_) {
        case ChannelKind::exp_decay: return std::exp(-t / (2.0 * d_)) / (2.0 * d_);
        case ChannelKind::ceiling_bounce: return 6.0 * std::pow(a_, 6) / std::pow(t + a_, 7);
        case ChannelKind::awgn_only: break;
        }
        return t == 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }

    /// Integral of h from 0 to t.
    double cdf(double t) const
    {
        if (t <= 0.0) return kind_ == ChannelKind::awgn_only && t == 0.0 ? 1.0 : 0.0;
        switch (kind_) {
        case ChannelKind::exp_decay: return -std::expm1(-t / (2.0 * d_));
        case ChannelKind::ceiling_bounce: return 1.0 - std::pow(a_ / (t + a_), 6);
        case ChannelKind::awgn_only: break;
        }
        return 1.0;
    }

    /// Time by which the given fraction of the impulse energy has arrived.
    double energy_time(double fraction) const
    {
        switch (kind_) {
        case ChannelKind::exp_decay: return -2.0 * d_ * std::log1p(-fraction);
        case ChannelKind::ceiling_bounce: return a_ * (std::pow(1.0 - fraction, -1.0 / 6.0) - 1.0);
        case ChannelKind::awgn_only: break;
        }
        return 0.0;
    }

private:
    ChannelModel(ChannelKind kind, double d) : kind_(kind), d_(d)
    {
        if (kind_ != ChannelKind::awgn_only && !(d_ > 0.0 && std::isfinite(d_)))
            throw std::invalid_argument("ChannelModel: rms delay spread must be positive");
        if (kind_ == ChannelKind::ceiling_bounce) a_ = 12.0 * std::sqrt(11.0 / 13.0) * d_;
    }

    ChannelKind kind_;
    double d_ = 0.0;
    double a_ = 0.0;
};

struct FirTaps {
    std::vector<double> taps;
    double tap_interval = 0.0;
    double truncation_residue = 0.0;
};

/// Tap n = F((n+1) dt) - F(n dt), emitted until the running sum reaches
/// energy_threshold. AWGN_ONLY gives the single tap [1].
inline FirTaps impulse_taps(const ChannelModel &model, double tap_interval, double energy_threshold = 0.9999)
{
    if (!(tap_interval > 0.0)) throw std::invalid_argument("impulse_taps: tap interval must be positive");
    if (!(energy_threshold > 0.0 && energy_threshold < 1.0))
        throw std::invalid_argument("impulse_taps: energy threshold must lie in (0, 1)");

    FirTaps out;
    out.tap_interval = tap_interval;
    if (!model.fading()) {
        out.taps = {1.0};
        return out;
    }
    double sum = 0.0;
    double prev = 0.0;
    for (std::size_t n = 0; sum < energy_threshold; ++n) {
        const double next = model.cdf(static_cast<double>(n + 1) * tap_interval);
        out.taps.push_back(next - prev);
        sum = next;
        prev = next;
    }
    out.truncation_residue = 1.0 - sum;
    return out;
}

namespace detail {
// |sum_i h_i exp(-j 2 pi f t_i)| with t_i = t0 + i dt, by phasor recurrence.
inline double dtft_magnitude(std::span<const double> h, double t0, double dt, double f)
{
    const double w = -2.0 * std::numbers::pi * f;
    const std::complex<double> step = std::polar(1.0, w * dt);
    std::complex<double> z = std::polar(1.0, w * t0);
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        acc += h[i] * z;
        z *= step;
        if ((i & 1023) == 1023) z = std::polar(1.0, w * (t0 + static_cast<double>(i + 1) * dt));
    }
    return std::abs(acc);
}

struct FineResponse {
    std::vector<double> h;
    double dt = 0.0;
    double gain = 0.0;
};

// Bin-integrated response with step D/100 out to the 1 - 1e-6 energy point.
inline FineResponse fine_response(const ChannelModel &model)
{
    FineResponse r;
    r.dt = model.rms_delay_spread() / 100.0;
    const auto count = static_cast<std::size_t>(std::ceil(model.energy_time(1.0 - 1e-6) / r.dt));
    r.h.resize(count);
    double prev = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double next = model.cdf(static_cast<double>(i + 1) * r.dt);
        r.h[i] = next - prev;
        prev = next;
    }
    r.gain = prev;
    return r;
}
} // namespace detail

/// |H(f)| in dB of the continuous model, normalized so that |H(0)| = 0 dB.
inline std::vector<double> transfer_function(const ChannelModel &model, std::span<const double> freqs)
{
    std::vector<double> out(freqs.size(), 0.0);
    if (!model.fading()) return out;
    const auto fine = detail::fine_response(model);
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        if (freqs[i] < 0.0) throw std::invalid_argument("transfer_function: negative frequency");
        const double mag = detail::dtft_magnitude(fine.h, 0.5 * fine.dt, fine.dt, freqs[i]) / fine.gain;
        out[i] = 20.0 * std::log10(mag);
    }
    return out;
}

/// |H(f)| in dB of a discrete tap set, normalized to its own DC gain.
inline std::vector<double> transfer_function(const FirTaps &taps, std::span<const double> freqs)
{
    double gain = 0.0;
    for (double t : taps.taps) gain += t;
    std::vector<double> out(freqs.size());
    for (std::size_t i = 0; i < freqs.size(); ++i)
        out[i] = 20.0 * std::log10(detail::dtft_magnitude(taps.taps, 0.0, taps.tap_interval, freqs[i]) / gain);
    return out;
}

/// Smallest frequency with |H(f)| <= -3 dB, by bisection to 10 kHz.
/// Returns nullopt ("unbounded") for the non-fading channel.
inline std::optional<double> three_db_bandwidth(const ChannelModel &model)
{
    if (!model.fading()) return std::nullopt;
    const auto fine = detail::fine_response(model);
    auto level_db = [&](double f) {
        return 20.0 * std::log10(detail::dtft_magnitude(fine.h, 0.5 * fine.dt, fine.dt, f) / fine.gain);
    };
    constexpr double target = -3.0;
    double lo = 0.0;
    double hi = 1e6;
    while (level_db(hi) > target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e13) throw std::runtime_error("three_db_bandwidth: no -3 dB crossing found");
    }
    while (hi - lo > 10e3) {
        const double mid = 0.5 * (lo + hi);
        (level_db(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Linear convolution truncated to the input length.
inline Waveform apply_channel(const Waveform &waveform, const FirTaps &taps)
{
    if (std::abs(taps.tap_interval * waveform.sample_rate() - 1.0) > 1e-9)
        throw std::invalid_argument("apply_channel: tap interval does not match the waveform sample interval");
    const auto &x = waveform.samples();
    const auto &h = taps.taps;
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t n = 0; n < x.size(); ++n) {
        const std::size_t kmax = std::min(h.size(), n + 1);
        double acc = 0.0;
        for (std::size_t k = 0; k < kmax; ++k) acc += h[k] * x[n - k];
        y[n] = acc;
    }
    return Waveform(std::move(y), waveform.sample_rate());
}

struct NoisyWaveform {
    Waveform waveform;
    double noise_variance = 0.0;
    /// Set when the input carried no power and the fallback variance was used.
    bool degenerate = false;
};

/// Adds i.i.d. Gaussian noise with variance mean(x^2) / 10^(snr/10), the
/// signal power measured on the waveform as given (DC included). snr_db =
/// +inf disables noise.
inline NoisyWaveform add_awgn(const Waveform &waveform, double snr_db, std::uint64_t noise_seed,
                              double fallback_variance = 1.0)
{
    if (waveform.empty()) throw std::invalid_argument("add_awgn: empty waveform");
    if (std::isnan(snr_db)) throw std::invalid_argument("add_awgn: SNR is NaN");
    if (snr_db == std::numeric_limits<double>::infinity()) return {waveform, 0.0, false};

    const double power = waveform.mean_square();
    NoisyWaveform out;
    out.degenerate = !(power > 0.0);
    out.noise_variance = out.degenerate ? fallback_variance : power / std::pow(10.0, snr_db / 10.0);

    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(out.noise_variance));
    std::vector<double> y(waveform.samples());
    for (double &v : y) v += gauss(rng);
    out.waveform = Waveform(std::move(y), waveform.sample_rate());
    return out;
}

/// CSV columns: index, delay_s, coefficient.
inline void write_taps_csv(std::ostream &os, const FirTaps &taps)
{
    os << "index,delay_s,coefficient\n";
    for (std::size_t n = 0; n < taps.taps.size(); ++n)
        fmt::print(os, "{},{:.9g},{:.17g}\n", n, static_cast<double>(n) * taps.tap_interval, taps.taps[n]);
}

} // namespace frctsim

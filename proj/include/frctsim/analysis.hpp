/**
 * @file analysis.hpp
 * @brief Closed-form statistics of the multiplexed and DC-biased signal.
 *
 * Rate/bandwidth algebra, Q and Phi, the clipped-Gaussian density and its
 * electrical power, the clipping attenuation factor, a one-sample KS test
 * against the fitted normal, and a Welch PSD estimator.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "frctsim/spectral.hpp"
#include "frctsim/tx.hpp"

namespace frctsim {

struct RateSpec {
    int n_subcarriers = 0;
    double alpha = 0.0;
    double symbol_duration = 0.0; ///< T, seconds
    double bandwidth_hz = 0.0;    ///< B = alpha N / 2T
    double nyquist_rate_hz = 0.0; ///< R_N = 2B
    double symbol_rate_hz = 0.0;  ///< R_S = N / T
};

inline RateSpec rate_spec(int n_subcarriers, double alpha, double bit_rate, int pam_order)
{
    if (n_subcarriers <= 0 || !(alpha > 0.0) || !(bit_rate > 0.0) || pam_order < 2)
        throw std::invalid_argument("rate_spec: inputs must be positive (pam_order >= 2)");
    RateSpec r;
    r.n_subcarriers = n_subcarriers;
    r.alpha = alpha;
    r.symbol_duration = n_subcarriers * std::log2(static_cast<double>(pam_order)) / bit_rate;
    r.bandwidth_hz = alpha * n_subcarriers / (2.0 * r.symbol_duration);
    r.nyquist_rate_hz = alpha * n_subcarriers / r.symbol_duration;
    r.symbol_rate_hz = n_subcarriers / r.symbol_duration;
    return r;
}

/// Upper tail of the standard normal. Accepts +-infinity.
inline double q_function(double v) { return 0.5 * std::erfc(v / std::numbers::sqrt2); }

/// Standard normal CDF.
inline double phi_cdf(double v) { return 0.5 * std::erfc(-v / std::numbers::sqrt2); }

inline double normal_pdf(double x, double mean, double sigma)
{
    const double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

namespace detail {
inline void check_sigma(double sigma)
{
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
}
} // namespace detail

/// Density of the biased, lower-clipped signal. The continuous part is
/// N(x; B_DC, sigma^2) for x >= 0; the clipped mass Q(B_DC/sigma) sits at 0.
struct ClippedDensity {
    double density = 0.0;
    double point_mass_at_zero = 0.0;
};

inline ClippedDensity clipped_pdf(double x, double sigma, double b_dc)
{
    detail::check_sigma(sigma);
    return {x >= 0.0 ? normal_pdf(x, b_dc, sigma) : 0.0, q_function(b_dc / sigma)};
}

/// E[s^2] = sigma^2 Phi(B/sigma) + B^2 Phi(B/sigma) + sigma B / sqrt(2 pi) exp(-B^2 / 2 sigma^2).
inline double clipped_power(double sigma, double b_dc)
{
    detail::check_sigma(sigma);
    if (!(b_dc >= 0.0)) throw std::invalid_argument("clipped_power: b_dc must be >= 0");
    const double k = b_dc / sigma;
    const double p = phi_cdf(k);
    return sigma * sigma * p + b_dc * b_dc * p +
           sigma * b_dc / std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * k * k);
}

/// eta = sqrt(Phi(B/sigma)).
inline double attenuation_factor(double sigma, double b_dc)
{
    detail::check_sigma(sigma);
    return std::sqrt(phi_cdf(b_dc / sigma));
}

struct ClippedGaussianStats {
    double sigma = 0.0;
    double b_dc = 0.0;
    double power = 0.0;
    double attenuation = 0.0;
    double clip_probability = 0.0;
};

inline ClippedGaussianStats clipped_stats(double sigma, double b_dc)
{
    return {sigma, b_dc, clipped_power(sigma, b_dc), attenuation_factor(sigma, b_dc), q_function(b_dc / sigma)};
}

/// One-sample KS statistic of the standardized samples (sample mean and
/// standard deviation) against the standard normal CDF.
inline double gaussianity_ks(std::span<const double> samples)
{
    if (samples.size() < 1000) throw std::invalid_argument("gaussianity_ks: need at least 1000 samples");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / (n - 1.0));
    if (!(sd > 0.0)) throw std::invalid_argument("gaussianity_ks: samples have zero variance");

    std::vector<double> z(samples.begin(), samples.end());
    for (double &v : z) v = (v - mean) / sd;
    std::sort(z.begin(), z.end());

    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double f = phi_cdf(z[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// Sample mean of s^2 for s = clip(x + b_dc), x ~ N(0, sigma^2).
inline double monte_carlo_clipped_power(double sigma, double b_dc, std::size_t samples, std::uint64_t seed)
{
    detail::check_sigma(sigma);
    if (samples == 0) throw std::invalid_argument("monte_carlo_clipped_power: need samples");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    double acc = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double s = std::max(gauss(rng) + b_dc, 0.0);
        acc += s * s;
    }
    return acc / static_cast<double>(samples);
}

/// Time samples of `symbols` random 2-PAM FrCT-NOFDM symbols, pooled
/// (no CP, no bias).
inline std::vector<double> multiplexed_samples(int n_subcarriers, double alpha, int symbols, std::uint64_t seed)
{
    if (symbols < 1) throw std::invalid_argument("multiplexed_samples: need at least one symbol");
    const FrctBasis basis(static_cast<std::size_t>(n_subcarriers), alpha);
    const Bits bits = random_bits(static_cast<std::size_t>(n_subcarriers) * symbols, seed);
    const std::vector<double> pam = pam_map(bits, 2);
    const Matrix freq = Eigen::Map<const Matrix>(pam.data(), n_subcarriers, symbols);
    const Matrix time = ifrct_columns(freq, basis);
    return {time.data(), time.data() + time.size()};
}

struct PowerSpectrum {
    std::vector<double> freq_hz;
    std::vector<double> power_db;
    /// Linear mean of the bins within 20 dB of the peak; the 0 dB reference.
    double in_band_mean = 0.0;
};

/// Averaged periodogram: Hann (raised-cosine) window, 50 % overlap, mean
/// removed first. One-sided bins 0..L/2, normalized to 0 dB at the in-band
/// mean.
inline PowerSpectrum psd_estimate(const Waveform &waveform, int segment_len)
{
    const auto &x = waveform.samples();
    if (segment_len < 2) throw std::invalid_argument("psd_estimate: segment length must be >= 2");
    if (x.size() < static_cast<std::size_t>(segment_len))
        throw std::invalid_argument("psd_estimate: segment longer than waveform");

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());

    const auto len = static_cast<std::size_t>(segment_len);
    Vector window(segment_len);
    for (int n = 0; n < segment_len; ++n)
        window(n) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / segment_len);

    const std::size_t hop = std::max<std::size_t>(1, len / 2);
    const std::size_t bins = len / 2 + 1;
    std::vector<double> acc(bins, 0.0);
    std::size_t segments = 0;
    Vector seg(segment_len);
    for (std::size_t start = 0; start + len <= x.size(); start += hop, ++segments) {
        for (std::size_t n = 0; n < len; ++n) seg(static_cast<Eigen::Index>(n)) = (x[start + n] - mean) * window(static_cast<Eigen::Index>(n));
        const ComplexVector spec = dft(seg);
        for (std::size_t k = 0; k < bins; ++k) acc[k] += std::norm(spec(static_cast<Eigen::Index>(k)));
    }

    PowerSpectrum out;
    const double peak = *std::max_element(acc.begin(), acc.end());
    double in_band = 0.0;
    std::size_t count = 0;
    for (double p : acc)
        if (p >= peak * 0.01) {
            in_band += p;
            ++count;
        }
    out.in_band_mean = in_band / static_cast<double>(count) / static_cast<double>(segments);
    const double ref = in_band / static_cast<double>(count);
    const double tiny = std::numeric_limits<double>::min();
    out.freq_hz.resize(bins);
    out.power_db.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        out.freq_hz[k] = static_cast<double>(k) * waveform.sample_rate() / static_cast<double>(len);
        out.power_db[k] = 10.0 * std::log10(std::max(acc[k], tiny) / ref);
    }
    return out;
}

/// Mean linear power (relative to the 0 dB reference) of bins in [f_lo, f_hi], in dB.
inline double band_power_db(const PowerSpectrum &psd, double f_lo, double f_hi)
{
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < psd.freq_hz.size(); ++k)
        if (psd.freq_hz[k] >= f_lo && psd.freq_hz[k] <= f_hi) {
            acc += std::pow(10.0, psd.power_db[k] / 10.0);
            ++count;
        }
    if (count == 0) throw std::invalid_argument("band_power_db: no bins in band");
    return 10.0 * std::log10(acc / static_cast<double>(count));
}

/// CSV columns: freq_hz, power_db.
inline void write_psd_csv(std::ostream &os, const PowerSpectrum &psd)
{
    os << "freq_hz,power_db\n";
    for (std::size_t k = 0; k < psd.freq_hz.size(); ++k)
        fmt::print(os, "{:.9g},{:.6f}\n", psd.freq_hz[k], psd.power_db[k]);
}

} // namespace frctsim

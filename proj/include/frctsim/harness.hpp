/**
 * @file harness.hpp
 * @brief Monte-Carlo BER engine: one link end to end per point, grid
 *        sweeps with order-independent seeding, and required-SNR
 *        post-processing.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "frctsim/channel.hpp"
#include "frctsim/frct.hpp"
#include "frctsim/rx.hpp"
#include "frctsim/tx.hpp"

namespace frctsim {

/// Hard-decision 7 % overhead FEC limit.
inline constexpr double kFecBerThreshold = 3.8e-3;

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for a sweep point. Depends only on the master seed and the point's
/// SNR, so every curve of a sweep sees the same payload and noise
/// realization at a given SNR and adding grid points never shifts others.
inline std::uint64_t point_seed(std::uint64_t master_seed, double snr_db)
{
    return mix64(mix64(master_seed) ^ std::bit_cast<std::uint64_t>(snr_db));
}

struct BerRecord {
    FrameConfig config;
    ChannelModel channel = ChannelModel::awgn_only();
    double snr_db = 0.0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits_tested = 0;
    double ber = 0.0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;
    /// Non-empty when the point failed; the counts are then zero and ber is NaN.
    std::string error;
};

/// TX -> channel -> noise -> RX for one configuration. Deterministic in
/// (config, channel, snr_db, seed); counts payload bit errors only.
inline BerRecord run_point(const FrameConfig &config, const ChannelModel &channel, double snr_db,
                           std::uint64_t seed)
{
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();

    const auto n = static_cast<std::size_t>(config.n_subcarriers);
    const FrctBasis tx_basis(n, config.alpha);
    const FrctBasis rx_basis(n, config.rx_alpha());
    const CorrelationMatrix rx_corr = correlation_matrix(rx_basis);

    const Bits payload = random_bits(config.payload_bits(), seed);
    TxBatch tx = build_frames(payload, config, tx_basis);

    const FirTaps taps = impulse_taps(channel, 1.0 / config.sample_rate(), config.tap_energy_threshold);
    const Waveform faded = apply_channel(tx.waveform, taps);
    const NoisyWaveform noisy = add_awgn(faded, snr_db, mix64(seed ^ 0x6e6f697365ULL));

    const RxSideInfo side{std::move(tx.training_reference), tx.bias, tx.signal_rms};
    const Bits decoded = decode_frames(noisy.waveform, config, rx_basis, rx_corr, side);

    BerRecord rec;
    rec.config = config;
    rec.channel = channel;
    rec.snr_db = snr_db;
    rec.seed = seed;
    rec.bits_tested = payload.size();
    for (std::size_t i = 0; i < payload.size(); ++i) rec.bit_errors += payload[i] != decoded[i];
    rec.ber = static_cast<double>(rec.bit_errors) / static_cast<double>(rec.bits_tested);
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

struct SweepSpec {
    FrameConfig base_config;
    ChannelModel channel = ChannelModel::ceiling_bounce(3e-9);
    std::vector<double> snr_grid_db;
    std::vector<double> alpha_grid;
    std::vector<double> delta_alpha_grid{0.0};
    std::vector<int> iteration_grid;
    std::vector<double> dc_bias_grid_db;
    /// RMS delay spreads to sweep; empty means the channel's own value.
    std::vector<double> delay_spread_grid_s;
    std::uint64_t master_seed = 1;
    double fec_ber_threshold = kFecBerThreshold;

    void validate() const
    {
        auto fail = [](const std::string &msg) { throw std::invalid_argument("SweepSpec: " + msg); };
        if (snr_grid_db.empty()) fail("SNR grid is empty");
        if (alpha_grid.empty()) fail("alpha grid is empty");
        if (delta_alpha_grid.empty()) fail("delta-alpha grid is empty");
        if (iteration_grid.empty()) fail("iteration grid is empty");
        if (dc_bias_grid_db.empty()) fail("DC-bias grid is empty");
        if (!(fec_ber_threshold > 0.0 && fec_ber_threshold < 0.5)) fail("FEC threshold must lie in (0, 0.5)");
        for (double s : snr_grid_db)
            if (std::isnan(s)) fail("SNR grid contains NaN");
        if (channel.fading())
            for (double d : delay_spread_grid_s)
                if (!(d > 0.0)) fail("delay spreads must be positive");
    }
};

struct SweepPoint {
    FrameConfig config;
    ChannelModel channel = ChannelModel::awgn_only();
    double snr_db = 0.0;
    std::uint64_t seed = 0;
};

/// Cartesian product in canonical order: delay spread, DC bias, alpha,
/// delta alpha, iterations, then SNR innermost.
inline std::vector<SweepPoint> expand_grid(const SweepSpec &spec)
{
    spec.validate();
    std::vector<double> delays = spec.delay_spread_grid_s;
    if (delays.empty() || !spec.channel.fading()) delays = {spec.channel.rms_delay_spread()};

    std::vector<SweepPoint> points;
    for (double d : delays)
        for (double bias : spec.dc_bias_grid_db)
            for (double alpha : spec.alpha_grid)
                for (double da : spec.delta_alpha_grid)
                    for (int iters : spec.iteration_grid)
                        for (double snr : spec.snr_grid_db) {
                            SweepPoint p;
                            p.config = spec.base_config;
                            p.config.alpha = alpha;
                            p.config.rx_delta_alpha = da;
                            p.config.id_iterations = iters;
                            p.config.dc_bias_db = bias;
                            p.channel = ChannelModel::make(spec.channel.kind(), d);
                            p.snr_db = snr;
                            p.seed = point_seed(spec.master_seed, snr);
                            points.push_back(std::move(p));
                        }
    return points;
}

struct SweepOptions {
    unsigned jobs = 1;
    /// Polled between points; when set, remaining points are skipped.
    const std::atomic<bool> *cancel = nullptr;
    /// Called after each finished point with (done, total). May be called
    /// from worker threads, serialized by the engine.
    std::function<void(std::size_t, std::size_t)> progress;
};

/// Runs every grid point. Results come back in canonical grid order
/// regardless of the number of jobs. A failing point is recorded with its
/// error message; a cancelled sweep returns only the finished points.
inline std::vector<BerRecord> sweep(const SweepSpec &spec, const SweepOptions &options = {})
{
    const std::vector<SweepPoint> points = expand_grid(spec);
    std::vector<std::optional<BerRecord>> slots(points.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> finished{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (;;) {
            if (options.cancel && options.cancel->load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            const SweepPoint &p = points[i];
            try {
                slots[i] = run_point(p.config, p.channel, p.snr_db, p.seed);
            } catch (const std::exception &e) {
                BerRecord rec;
                rec.config = p.config;
                rec.channel = p.channel;
                rec.snr_db = p.snr_db;
                rec.seed = p.seed;
                rec.ber = std::numeric_limits<double>::quiet_NaN();
                rec.error = e.what();
                slots[i] = std::move(rec);
            }
            const std::size_t done = finished.fetch_add(1) + 1;
            if (options.progress) {
                std::lock_guard lock(progress_mutex);
                options.progress(done, points.size());
            }
        }
    };

    const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(points.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    std::vector<BerRecord> out;
    for (auto &slot : slots)
        if (slot) out.push_back(std::move(*slot));
    return out;
}

/// SNR at which the curve first falls to the threshold, by linear
/// interpolation in (SNR, log10 BER). Zero-BER points are floored at
/// 1/(2 bits_tested). Returns nullopt when the curve never gets there.
/// If the first record already meets the threshold its SNR is returned.
inline std::optional<double> required_snr(std::span<const BerRecord> curve, double threshold = kFecBerThreshold)
{
    if (curve.size() < 2) throw std::invalid_argument("required_snr: need at least two records");
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (!(curve[i].snr_db > curve[i - 1].snr_db))
            throw std::invalid_argument("required_snr: records must be sorted by increasing SNR");

    auto log_ber = [](const BerRecord &r) {
        const double floor = 1.0 / (2.0 * static_cast<double>(std::max<std::uint64_t>(r.bits_tested, 1)));
        return std::log10(std::max(r.ber, floor));
    };
    if (curve.front().ber <= threshold) return curve.front().snr_db;
    const double target = std::log10(threshold);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i - 1].ber > threshold && curve[i].ber <= threshold) {
            const double b0 = log_ber(curve[i - 1]);
            const double b1 = log_ber(curve[i]);
            const double s0 = curve[i - 1].snr_db;
            const double s1 = curve[i].snr_db;
            if (b1 == b0) return s1;
            return s0 + (target - b0) / (b1 - b0) * (s1 - s0);
        }
    }
    return std::nullopt;
}

/// Records sharing everything but the SNR, in the order the curves first
/// appear. Each curve keeps its records' original (SNR) order.
inline std::vector<std::vector<BerRecord>> split_curves(std::span<const BerRecord> records)
{
    auto key = [](const BerRecord &r) {
        return std::make_tuple(static_cast<int>(r.channel.kind()), r.channel.rms_delay_spread(), r.config.dc_bias_db,
                               r.config.alpha, r.config.rx_delta_alpha, r.config.id_iterations);
    };
    std::vector<std::vector<BerRecord>> curves;
    std::map<decltype(key(records.front())), std::size_t> index;
    for (const auto &r : records) {
        auto [it, inserted] = index.try_emplace(key(r), curves.size());
        if (inserted) curves.emplace_back();
        curves[it->second].push_back(r);
    }
    return curves;
}

/// BER against receiver alpha mismatch: the transmitter keeps
/// config.alpha, the receiver rebuilds its basis and correlation matrix at
/// alpha + delta for each grid value.
inline std::vector<BerRecord> security_sweep(const FrameConfig &config, const ChannelModel &channel,
                                             std::span<const double> delta_alpha_grid, double snr_db,
                                             std::uint64_t master_seed, const SweepOptions &options = {})
{
    if (delta_alpha_grid.empty()) throw std::invalid_argument("security_sweep: delta-alpha grid is empty");
    for (double da : delta_alpha_grid) {
        const double rx = config.alpha + da;
        if (!(rx > 0.0 && rx <= 1.0))
            throw std::invalid_argument("security_sweep: receiver alpha " + std::to_string(rx) + " outside (0, 1]");
    }
    SweepSpec spec;
    spec.base_config = config;
    spec.channel = channel;
    spec.snr_grid_db = {snr_db};
    spec.alpha_grid = {config.alpha};
    spec.delta_alpha_grid.assign(delta_alpha_grid.begin(), delta_alpha_grid.end());
    spec.iteration_grid = {config.id_iterations};
    spec.dc_bias_grid_db = {config.dc_bias_db};
    spec.master_seed = master_seed;
    return sweep(spec, options);
}

} // namespace frctsim

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "frctsim/channel.hpp"

using namespace frctsim;

namespace {
constexpr double kDt = 10e-9;

double tap_sum(const FirTaps &t) { return std::accumulate(t.taps.begin(), t.taps.end(), 0.0); }
} // namespace

TEST(ChannelModel, ParametersAndValidation)
{
    const auto cb = ChannelModel::ceiling_bounce(3e-9);
    EXPECT_NEAR(cb.cb_a() / (12.0 * std::sqrt(11.0 / 13.0) * 3e-9), 1.0, 1e-15);
    EXPECT_NEAR(cb.cb_a(), 3.311518359628079e-08, 1e-22);
    EXPECT_THROW(ChannelModel::exp_decay(0.0), std::invalid_argument);
    EXPECT_THROW(ChannelModel::ceiling_bounce(-1e-9), std::invalid_argument);
    EXPECT_FALSE(ChannelModel::awgn_only().fading());
    EXPECT_EQ(ChannelModel::make(ChannelKind::awgn_only, 5e-9).kind(), ChannelKind::awgn_only);
    EXPECT_EQ(parse_channel_kind("cb"), ChannelKind::ceiling_bounce);
    EXPECT_EQ(parse_channel_kind("ed"), ChannelKind::exp_decay);
    EXPECT_EQ(parse_channel_kind("awgn"), ChannelKind::awgn_only);
    EXPECT_THROW(parse_channel_kind("rayleigh"), std::invalid_argument);
}

TEST(ChannelModel, UnitAreaImpulseResponses)
{
    for (auto m : {ChannelModel::exp_decay(3e-9), ChannelModel::ceiling_bounce(3e-9)}) {
        // Trapezoid on a log-spaced grid out to where the CDF is ~1.
        double acc = 0.0, t0 = 0.0;
        for (double t = 1e-13; t < 1e-3; t *= 1.001) {
            acc += 0.5 * (m.impulse(t0) + m.impulse(t)) * (t - t0);
            t0 = t;
        }
        EXPECT_NEAR(acc, 1.0, 1e-4);
        EXPECT_NEAR(m.cdf(1e-3), 1.0, 1e-12);
        EXPECT_EQ(m.cdf(0.0), 0.0);
        EXPECT_NEAR(m.cdf(m.energy_time(0.9999)), 0.9999, 1e-12);
    }
}

TEST(ImpulseTaps, AwgnIsSingleUnitTap)
{
    const auto t = impulse_taps(ChannelModel::awgn_only(), kDt);
    EXPECT_EQ(t.taps, std::vector<double>{1.0});
    EXPECT_EQ(t.truncation_residue, 0.0);
}

TEST(ImpulseTaps, FrozenFirstTaps)
{
    const auto ed = impulse_taps(ChannelModel::exp_decay(3e-9), kDt);
    EXPECT_NEAR(ed.taps.front(), 0.8111243971624382, 1e-14);
    const auto cb = impulse_taps(ChannelModel::ceiling_bounce(3e-9), kDt);
    EXPECT_NEAR(cb.taps.front(), 0.7947034909781288, 1e-14);
}

TEST(ImpulseTaps, NonnegativeAndEnergyThreshold)
{
    for (double d : {1.5e-9, 3e-9, 6e-9, 9e-9})
        for (auto m : {ChannelModel::exp_decay(d), ChannelModel::ceiling_bounce(d)})
            for (double thr : {0.99, 0.9999}) {
                const auto t = impulse_taps(m, kDt, thr);
                for (double h : t.taps) EXPECT_GE(h, 0.0);
                const double s = tap_sum(t);
                EXPECT_GE(s, thr);
                EXPECT_LE(s, 1.0 + 1e-15);
                EXPECT_NEAR(t.truncation_residue, 1.0 - s, 1e-15);
                EXPECT_LT(t.truncation_residue, 1.0 - thr + 1e-15);
                // One tap fewer would fall short of the threshold.
                EXPECT_LT(s - t.taps.back(), thr);
            }
}

TEST(ImpulseTaps, Errors)
{
    EXPECT_THROW(impulse_taps(ChannelModel::exp_decay(3e-9), 0.0), std::invalid_argument);
    EXPECT_THROW(impulse_taps(ChannelModel::exp_decay(3e-9), -1e-9), std::invalid_argument);
    EXPECT_THROW(impulse_taps(ChannelModel::exp_decay(3e-9), kDt, 1.0), std::invalid_argument);
}

TEST(TransferFunction, ZeroDbAtDc)
{
    const std::vector<double> f0{0.0};
    for (auto m : {ChannelModel::awgn_only(), ChannelModel::exp_decay(1.5e-9), ChannelModel::ceiling_bounce(9e-9)})
        EXPECT_NEAR(transfer_function(m, f0)[0], 0.0, 1e-9);
}

TEST(TransferFunction, ExponentialDecayMatchesAnalyticForm)
{
    const double d = 1.5e-9;
    const std::vector<double> f{1e6, 10e6, 30e6, 53.05e6, 100e6};
    const auto got = transfer_function(ChannelModel::exp_decay(d), f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = 4.0 * std::numbers::pi * f[i] * d;
        EXPECT_NEAR(got[i], -10.0 * std::log10(1.0 + w * w), 0.01) << f[i];
    }
}

TEST(TransferFunction, MonotoneRollOff)
{
    std::vector<double> f(101);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1e6 * static_cast<double>(i);
    for (auto m : {ChannelModel::exp_decay(3e-9), ChannelModel::ceiling_bounce(3e-9)}) {
        const auto h = transfer_function(m, f);
        for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1] + 1e-12);
    }
}

TEST(ThreeDbBandwidth, ExponentialDecayAnalyticPoint)
{
    const auto bw = three_db_bandwidth(ChannelModel::exp_decay(1.5e-9));
    ASSERT_TRUE(bw);
    // |H|^2 = 1 / (1 + (4 pi f D)^2) crosses -3 dB at x^2 = 10^0.3 - 1.
    EXPECT_NEAR(*bw, std::sqrt(std::pow(10.0, 0.3) - 1.0) / (4.0 * std::numbers::pi * 1.5e-9), 0.02e6);
}

TEST(ThreeDbBandwidth, CeilingBounceFrozen)
{
    // Crossings of the continuous ceiling-bounce transform, computed
    // independently by numerical Fourier integration of the closed form.
    const std::pair<double, double> cases[] = {{1.5e-9, 48.93e6}, {3e-9, 24.46e6}, {6e-9, 12.23e6}, {9e-9, 8.15e6}};
    for (auto [d, f] : cases) {
        const auto bw = three_db_bandwidth(ChannelModel::ceiling_bounce(d));
        ASSERT_TRUE(bw);
        EXPECT_NEAR(*bw, f, 0.02e6) << "D=" << d;
    }
}

TEST(ThreeDbBandwidth, ScalesInverselyWithDelaySpread)
{
    for (auto kind : {ChannelKind::exp_decay, ChannelKind::ceiling_bounce}) {
        const double b3 = *three_db_bandwidth(ChannelModel::make(kind, 3e-9));
        const double b6 = *three_db_bandwidth(ChannelModel::make(kind, 6e-9));
        const double b9 = *three_db_bandwidth(ChannelModel::make(kind, 9e-9));
        EXPECT_GT(b3, b6);
        EXPECT_GT(b6, b9);
        EXPECT_NEAR(b3 * 3.0, b6 * 6.0, 0.1e6);
        EXPECT_NEAR(b3 * 3.0, b9 * 9.0, 0.15e6);
    }
}

TEST(ThreeDbBandwidth, AwgnIsUnbounded)
{
    EXPECT_FALSE(three_db_bandwidth(ChannelModel::awgn_only()).has_value());
}

TEST(Discretization, TapsTrackFineModelAtLowFrequency)
{
    // The 10 ns taps alias above ~10 MHz for D = 3 ns; below that they
    // stay within 0.2 dB of the fine-grained response.
    const auto m = ChannelModel::ceiling_bounce(3e-9);
    const auto taps = impulse_taps(m, kDt);
    std::vector<double> f;
    for (double x = 0.0; x <= 10e6; x += 0.5e6) f.push_back(x);
    const auto fine = transfer_function(m, f);
    const auto disc = transfer_function(taps, f);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(disc[i], fine[i], 0.2) << f[i];
    EXPECT_NEAR(disc[0], 0.0, 1e-12);
}

TEST(ApplyChannel, IdentityDelayAndImpulse)
{
    const Waveform w({1.0, 2.0, 3.0, 4.0}, 1e8);
    EXPECT_EQ(apply_channel(w, FirTaps{{1.0}, kDt, 0.0}).samples(), w.samples());
    EXPECT_EQ(apply_channel(w, FirTaps{{0.0, 1.0}, kDt, 0.0}).samples(), (std::vector<double>{0.0, 1.0, 2.0, 3.0}));

    const auto taps = impulse_taps(ChannelModel::ceiling_bounce(3e-9), kDt);
    std::vector<double> delta(64, 0.0);
    delta[0] = 1.0;
    const auto out = apply_channel(Waveform(delta, 1e8), taps).samples();
    for (std::size_t i = 0; i < taps.taps.size(); ++i) EXPECT_DOUBLE_EQ(out[i], taps.taps[i]);
    for (std::size_t i = taps.taps.size(); i < out.size(); ++i) EXPECT_EQ(out[i], 0.0);
}

TEST(ApplyChannel, RateMismatch)
{
    const Waveform w({1.0, 2.0}, 1e8);
    EXPECT_THROW(apply_channel(w, FirTaps{{1.0}, 20e-9, 0.0}), std::invalid_argument);
}

TEST(ApplyChannel, LinearAndTimeInvariant)
{
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    const auto taps = impulse_taps(ChannelModel::exp_decay(6e-9), kDt);
    std::vector<double> x(500), y(500);
    for (std::size_t i = 0; i < 500; ++i) {
        x[i] = g(rng);
        y[i] = g(rng);
    }
    std::vector<double> mix(500);
    for (std::size_t i = 0; i < 500; ++i) mix[i] = 2.0 * x[i] - 0.5 * y[i];
    const auto hx = apply_channel(Waveform(x, 1e8), taps).samples();
    const auto hy = apply_channel(Waveform(y, 1e8), taps).samples();
    const auto hm = apply_channel(Waveform(mix, 1e8), taps).samples();
    for (std::size_t i = 0; i < 500; ++i) EXPECT_NEAR(hm[i], 2.0 * hx[i] - 0.5 * hy[i], 1e-12);

    const std::size_t shift = 37;
    std::vector<double> xs(500, 0.0);
    for (std::size_t i = shift; i < 500; ++i) xs[i] = x[i - shift];
    const auto hs = apply_channel(Waveform(xs, 1e8), taps).samples();
    for (std::size_t i = shift; i < 500; ++i) EXPECT_NEAR(hs[i], hx[i - shift], 1e-12);
}

TEST(AddAwgn, InfiniteSnrPassesThrough)
{
    const Waveform w({0.5, 1.5, 2.5}, 1e8);
    const auto out = add_awgn(w, std::numeric_limits<double>::infinity(), 1);
    EXPECT_EQ(out.waveform.samples(), w.samples());
    EXPECT_EQ(out.noise_variance, 0.0);
    EXPECT_FALSE(out.degenerate);
}

TEST(AddAwgn, ZeroWaveformUsesFallback)
{
    const Waveform w(std::vector<double>(100000, 0.0), 1e8);
    const auto out = add_awgn(w, 20.0, 3, 0.25);
    EXPECT_TRUE(out.degenerate);
    EXPECT_EQ(out.noise_variance, 0.25);
    EXPECT_NEAR(out.waveform.mean_square(), 0.25, 0.25 * 0.02);
}

TEST(AddAwgn, VarianceAndMeanAtTenDb)
{
    std::vector<double> x(1'000'000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i % 2) ? 1.0 : -1.0;
    const Waveform w(x, 1e8);
    const auto out = add_awgn(w, 10.0, 77);
    EXPECT_NEAR(out.noise_variance, 0.1, 1e-15);
    double mean = 0.0, var = 0.0;
    const auto &y = out.waveform.samples();
    for (std::size_t i = 0; i < y.size(); ++i) mean += y[i] - x[i];
    mean /= static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) var += (y[i] - x[i] - mean) * (y[i] - x[i] - mean);
    var /= static_cast<double>(y.size() - 1);
    EXPECT_NEAR(var / 0.1, 1.0, 0.01);
    EXPECT_LT(std::abs(mean), 3.0 * std::sqrt(0.1 / 1e6));
}

TEST(AddAwgn, PowerReferenceIncludesDc)
{
    const Waveform w(std::vector<double>(1000, 2.0), 1e8);
    EXPECT_NEAR(add_awgn(w, 20.0, 1).noise_variance, 4.0 / 100.0, 1e-15);
}

TEST(AddAwgn, DeterministicAndErrors)
{
    const Waveform w({1.0, 2.0, 3.0}, 1e8);
    EXPECT_EQ(add_awgn(w, 5.0, 9).waveform.samples(), add_awgn(w, 5.0, 9).waveform.samples());
    EXPECT_NE(add_awgn(w, 5.0, 9).waveform.samples(), add_awgn(w, 5.0, 10).waveform.samples());
    EXPECT_THROW(add_awgn(Waveform({}, 1e8), 5.0, 1), std::invalid_argument);
    EXPECT_THROW(add_awgn(w, std::nan(""), 1), std::invalid_argument);
}

TEST(TapsCsv, HeaderAndRows)
{
    std::ostringstream os;
    write_taps_csv(os, impulse_taps(ChannelModel::exp_decay(3e-9), kDt));
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "index,delay_s,coefficient");
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 4), "0,0,");
}

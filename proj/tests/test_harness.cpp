#include <atomic>
#include <cmath>

#include <gtest/gtest.h>

#include "frctsim/harness.hpp"

using namespace frctsim;

namespace {

FrameConfig small_config()
{
    FrameConfig c;
    c.n_subcarriers = 64;
    c.cp_len = 4;
    c.n_frames = 2;
    c.payload_symbols_per_frame = 16;
    c.training_symbols_per_frame = 4;
    c.alpha = 0.9;
    return c;
}

BerRecord rec(double snr, double ber, std::uint64_t bits = 524288)
{
    BerRecord r;
    r.snr_db = snr;
    r.ber = ber;
    r.bits_tested = bits;
    r.bit_errors = static_cast<std::uint64_t>(std::llround(ber * static_cast<double>(bits)));
    return r;
}

bool same(const BerRecord &a, const BerRecord &b)
{
    return a.snr_db == b.snr_db && a.bit_errors == b.bit_errors && a.bits_tested == b.bits_tested &&
           a.seed == b.seed && a.config.alpha == b.config.alpha && a.config.rx_delta_alpha == b.config.rx_delta_alpha &&
           a.config.id_iterations == b.config.id_iterations && a.config.dc_bias_db == b.config.dc_bias_db &&
           a.channel.rms_delay_spread() == b.channel.rms_delay_spread() && a.error == b.error;
}

} // namespace

TEST(Seeds, StableAndDistinct)
{
    EXPECT_EQ(point_seed(1, 22.0), point_seed(1, 22.0));
    EXPECT_NE(point_seed(1, 22.0), point_seed(1, 24.0));
    EXPECT_NE(point_seed(1, 22.0), point_seed(2, 22.0));
    EXPECT_NE(mix64(0), 0u);
}

TEST(RunPoint, NoiselessOrthogonalIsErrorFree)
{
    FrameConfig c;
    c.alpha = 1.0;
    const auto r = run_point(c, ChannelModel::awgn_only(), kNoiseless, 5);
    EXPECT_EQ(r.ber, 0.0);
    EXPECT_EQ(r.bits_tested, 8u * 256u * 256u);
}

TEST(RunPoint, DeterministicAndCountsConsistent)
{
    const FrameConfig c = small_config();
    const auto a = run_point(c, ChannelModel::ceiling_bounce(3e-9), 14.0, 77);
    const auto b = run_point(c, ChannelModel::ceiling_bounce(3e-9), 14.0, 77);
    EXPECT_TRUE(same(a, b));
    EXPECT_EQ(a.ber, b.ber);
    EXPECT_EQ(a.bits_tested, c.payload_bits());
    EXPECT_DOUBLE_EQ(a.ber, static_cast<double>(a.bit_errors) / static_cast<double>(a.bits_tested));
    EXPECT_GT(a.bit_errors, 0u);
    EXPECT_GE(a.wall_time_s, 0.0);
}

TEST(RunPoint, InvalidConfigThrows)
{
    FrameConfig c = small_config();
    c.cp_len = 64;
    EXPECT_THROW(run_point(c, ChannelModel::awgn_only(), 10.0, 1), std::invalid_argument);
}

TEST(SweepSpec, Validation)
{
    SweepSpec s;
    s.snr_grid_db = {10.0};
    s.alpha_grid = {0.9};
    s.iteration_grid = {20};
    s.dc_bias_grid_db = {7.0};
    EXPECT_NO_THROW(s.validate());
    auto broken = s;
    broken.snr_grid_db.clear();
    EXPECT_THROW(broken.validate(), std::invalid_argument);
    broken = s;
    broken.delta_alpha_grid.clear();
    EXPECT_THROW(broken.validate(), std::invalid_argument);
    broken = s;
    broken.fec_ber_threshold = 0.5;
    EXPECT_THROW(broken.validate(), std::invalid_argument);
    broken = s;
    broken.delay_spread_grid_s = {3e-9, 0.0};
    EXPECT_THROW(broken.validate(), std::invalid_argument);
}

TEST(ExpandGrid, FourAlphaEightSnrGridHas32Points)
{
    SweepSpec s;
    s.alpha_grid = {1.0, 0.9, 0.8, 0.7};
    for (double v = 16.0; v <= 30.0; v += 2.0) s.snr_grid_db.push_back(v);
    s.iteration_grid = {20};
    s.dc_bias_grid_db = {7.0};
    const auto pts = expand_grid(s);
    ASSERT_EQ(pts.size(), 32u);
    EXPECT_EQ(pts[0].config.alpha, 1.0);
    EXPECT_EQ(pts[0].snr_db, 16.0);
    EXPECT_EQ(pts[7].snr_db, 30.0);
    EXPECT_EQ(pts[8].config.alpha, 0.9);
    for (const auto &p : pts) EXPECT_EQ(p.seed, point_seed(1, p.snr_db));
}

TEST(ExpandGrid, CanonicalOrderWithDelays)
{
    SweepSpec s;
    s.snr_grid_db = {10.0, 12.0};
    s.alpha_grid = {0.9};
    s.iteration_grid = {0, 20};
    s.dc_bias_grid_db = {7.0};
    s.delay_spread_grid_s = {3e-9, 6e-9};
    const auto pts = expand_grid(s);
    ASSERT_EQ(pts.size(), 8u);
    EXPECT_EQ(pts[0].channel.rms_delay_spread(), 3e-9);
    EXPECT_EQ(pts[4].channel.rms_delay_spread(), 6e-9);
    EXPECT_EQ(pts[1].config.id_iterations, 0);
    EXPECT_EQ(pts[2].config.id_iterations, 20);
}

TEST(Sweep, SinglePointMatchesRunPoint)
{
    SweepSpec s;
    s.base_config = small_config();
    s.snr_grid_db = {12.0};
    s.alpha_grid = {0.9};
    s.iteration_grid = {20};
    s.dc_bias_grid_db = {7.0};
    s.master_seed = 99;
    const auto out = sweep(s);
    ASSERT_EQ(out.size(), 1u);
    const auto direct = run_point(out[0].config, s.channel, 12.0, point_seed(99, 12.0));
    EXPECT_TRUE(same(out[0], direct));
}

TEST(Sweep, ParallelMatchesSerial)
{
    SweepSpec s;
    s.base_config = small_config();
    s.snr_grid_db = {6.0, 8.0, 10.0, 12.0, 14.0, 16.0};
    s.alpha_grid = {0.8};
    s.iteration_grid = {10};
    s.dc_bias_grid_db = {7.0};
    const auto serial = sweep(s, SweepOptions{1, nullptr, {}});
    const auto parallel = sweep(s, SweepOptions{4, nullptr, {}});
    ASSERT_EQ(serial.size(), 6u);
    ASSERT_EQ(parallel.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_TRUE(same(serial[i], parallel[i])) << i;
}

TEST(Sweep, AddingGridPointsKeepsExistingResults)
{
    SweepSpec s;
    s.base_config = small_config();
    s.snr_grid_db = {8.0, 12.0};
    s.alpha_grid = {0.8};
    s.iteration_grid = {10};
    s.dc_bias_grid_db = {7.0};
    const auto a = sweep(s);
    s.snr_grid_db = {8.0, 10.0, 12.0};
    const auto b = sweep(s);
    EXPECT_TRUE(same(a[0], b[0]));
    EXPECT_TRUE(same(a[1], b[2]));
}

TEST(Sweep, FailingPointIsRecordedNotFatal)
{
    SweepSpec s;
    s.base_config = small_config();
    s.snr_grid_db = {10.0};
    s.alpha_grid = {0.9, 1.0};
    s.delta_alpha_grid = {0.05};
    s.iteration_grid = {5};
    s.dc_bias_grid_db = {7.0};
    const auto out = sweep(s);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_TRUE(out[0].error.empty());
    EXPECT_FALSE(out[1].error.empty());
    EXPECT_TRUE(std::isnan(out[1].ber));
}

TEST(Sweep, CancelledBeforeStartReturnsNothing)
{
    SweepSpec s;
    s.base_config = small_config();
    s.snr_grid_db = {10.0, 12.0};
    s.alpha_grid = {0.9};
    s.iteration_grid = {5};
    s.dc_bias_grid_db = {7.0};
    std::atomic<bool> stop{true};
    EXPECT_TRUE(sweep(s, SweepOptions{1, &stop, {}}).empty());
}

TEST(Sweep, ProgressReportsEveryPoint)
{
    SweepSpec s;
    s.base_config = small_config();
    s.snr_grid_db = {10.0, 12.0, 14.0};
    s.alpha_grid = {0.9};
    s.iteration_grid = {5};
    s.dc_bias_grid_db = {7.0};
    std::size_t calls = 0, last = 0;
    sweep(s, SweepOptions{2, nullptr, [&](std::size_t done, std::size_t total) {
                              ++calls;
                              last = done;
                              EXPECT_EQ(total, 3u);
                          }});
    EXPECT_EQ(calls, 3u);
    EXPECT_EQ(last, 3u);
}

TEST(RequiredSnr, InterpolatesInLogDomain)
{
    const std::vector<BerRecord> c{rec(20.0, 1e-2), rec(22.0, 1e-3)};
    EXPECT_NEAR(*required_snr(c, 3.8e-3), 20.84043280676638, 1e-12);
}

TEST(RequiredSnr, ExactlyAtThreshold)
{
    const std::vector<BerRecord> c{rec(18.0, 2e-2), rec(20.0, 3.8e-3), rec(22.0, 1e-4)};
    EXPECT_NEAR(*required_snr(c, 3.8e-3), 20.0, 1e-12);
}

TEST(RequiredSnr, NotReachedAndErrors)
{
    const std::vector<BerRecord> high{rec(20.0, 0.1), rec(22.0, 0.05), rec(24.0, 0.01)};
    EXPECT_FALSE(required_snr(high).has_value());
    EXPECT_THROW(required_snr(std::vector<BerRecord>{rec(20.0, 0.1)}), std::invalid_argument);
    const std::vector<BerRecord> unsorted{rec(22.0, 0.1), rec(20.0, 0.05)};
    EXPECT_THROW(required_snr(unsorted), std::invalid_argument);
}

TEST(RequiredSnr, ZeroBerIsFlooredForInterpolation)
{
    const std::vector<BerRecord> c{rec(20.0, 1e-2, 1000), rec(22.0, 0.0, 1000)};
    // Floor 1/(2*1000) = 5e-4.
    const double expect = 20.0 + (std::log10(3.8e-3) + 2.0) / (std::log10(5e-4) + 2.0) * 2.0;
    EXPECT_NEAR(*required_snr(c, 3.8e-3), expect, 1e-12);
}

TEST(SplitCurves, GroupsBySettings)
{
    std::vector<BerRecord> rs;
    for (double a : {1.0, 0.9})
        for (double snr : {10.0, 12.0}) {
            auto r = rec(snr, 0.01);
            r.config.alpha = a;
            rs.push_back(r);
        }
    const auto curves = split_curves(rs);
    ASSERT_EQ(curves.size(), 2u);
    EXPECT_EQ(curves[0].front().config.alpha, 1.0);
    EXPECT_EQ(curves[1].size(), 2u);
}

TEST(SecuritySweep, RejectsOutOfRangeReceiverAlpha)
{
    FrameConfig c = small_config();
    c.alpha = 0.9;
    const std::vector<double> bad{0.0, 0.2};
    EXPECT_THROW(security_sweep(c, ChannelModel::ceiling_bounce(3e-9), bad, 28.0, 1), std::invalid_argument);
    EXPECT_THROW(security_sweep(c, ChannelModel::ceiling_bounce(3e-9), std::vector<double>{}, 28.0, 1),
                 std::invalid_argument);
}

TEST(SecuritySweep, KeysRecordsByOffsetAndSharesSeed)
{
    FrameConfig c;
    c.alpha = 0.9;
    const std::vector<double> grid{0.0, 0.0005, 0.005};
    const auto out = security_sweep(c, ChannelModel::ceiling_bounce(3e-9), grid, 28.0, 1);
    ASSERT_EQ(out.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(out[i].config.rx_delta_alpha, grid[i]);
        EXPECT_EQ(out[i].config.alpha, 0.9);
        EXPECT_EQ(out[i].seed, out[0].seed);
    }
    EXPECT_LT(out[0].ber, kFecBerThreshold);
    EXPECT_LT(out[1].ber, out[2].ber);
}

TEST(Properties, BerDegradesWithDelaySpread)
{
    SweepSpec s;
    s.base_config.alpha = 0.9;
    s.snr_grid_db = {24.0};
    s.alpha_grid = {0.9};
    s.iteration_grid = {20};
    s.dc_bias_grid_db = {7.0};
    s.delay_spread_grid_s = {1.5e-9, 3e-9, 6e-9, 9e-9};
    const auto out = sweep(s);
    ASSERT_EQ(out.size(), 4u);
    for (std::size_t i = 1; i < out.size(); ++i) EXPECT_GE(out[i].ber, out[i - 1].ber) << i;
}

TEST(Properties, RequiredSnrNonincreasingInIterations)
{
    SweepSpec s;
    s.base_config.alpha = 0.8;
    for (double v = 16.0; v <= 30.0; v += 2.0) s.snr_grid_db.push_back(v);
    s.alpha_grid = {0.8};
    s.iteration_grid = {0, 5, 10, 20};
    s.dc_bias_grid_db = {7.0};
    const auto out = sweep(s);
    const auto curves = split_curves(out);
    ASSERT_EQ(curves.size(), 4u);
    double prev = INFINITY;
    for (const auto &c : curves) {
        const double req = required_snr(c).value_or(INFINITY);
        EXPECT_LE(req, prev) << "I=" << c.front().config.id_iterations;
        prev = req;
        // Sanity bound for a calibrated binary chain.
        for (const auto &r : c) {
            const double sd = std::sqrt(0.25 / static_cast<double>(r.bits_tested));
            EXPECT_LE(r.ber, 0.5 + 3.0 * sd);
        }
    }
}

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "frctsim/report.hpp"

using namespace frctsim;

namespace {

std::vector<BerRecord> sample_records()
{
    std::vector<BerRecord> out;
    for (double a : {1.0, 0.9})
        for (double snr : {20.0, 22.0, 24.0}) {
            BerRecord r;
            r.config.alpha = a;
            r.channel = ChannelModel::ceiling_bounce(3e-9);
            r.snr_db = snr;
            r.bits_tested = 1000;
            r.bit_errors = static_cast<std::uint64_t>(a == 1.0 ? 50 / (snr - 19.0) : 200);
            r.ber = static_cast<double>(r.bit_errors) / 1000.0;
            r.seed = point_seed(1, snr);
            r.wall_time_s = 0.25;
            out.push_back(r);
        }
    return out;
}

std::vector<std::string> lines(const std::string &s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

} // namespace

TEST(FormatNumber, Specials)
{
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(3e-9), "3e-09");
    EXPECT_EQ(format_number(NAN), "nan");
    EXPECT_EQ(format_number(INFINITY), "inf");
    EXPECT_EQ(format_number(-INFINITY), "-inf");
}

TEST(RecordsCsv, HeaderRowsAndManifest)
{
    const auto rs = sample_records();
    std::ostringstream os;
    write_records_csv(os, rs, "run_manifest.json");
    const auto ls = lines(os.str());
    ASSERT_EQ(ls.size(), 8u);
    EXPECT_EQ(ls[0], "# manifest: run_manifest.json");
    EXPECT_EQ(ls[1], kRecordColumns);
    EXPECT_EQ(ls[2].substr(0, 20), "cb,3e-09,1,0,7,20,25");
    const auto cols = std::count(ls[1].begin(), ls[1].end(), ',');
    for (std::size_t i = 2; i < ls.size(); ++i) EXPECT_EQ(std::count(ls[i].begin(), ls[i].end(), ','), cols);
}

TEST(RecordsCsv, ByteIdenticalAndNoWallTime)
{
    auto rs = sample_records();
    std::ostringstream a, b;
    write_records_csv(a, rs);
    for (auto &r : rs) r.wall_time_s = 99.0;
    write_records_csv(b, rs);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().rfind("channel,", 0), 0u);
}

TEST(RecordsCsv, ErrorTextIsSanitized)
{
    BerRecord r;
    r.error = "bad, very\nbad";
    r.ber = NAN;
    std::ostringstream os;
    write_records_csv(os, std::vector<BerRecord>{r});
    const auto ls = lines(os.str());
    ASSERT_EQ(ls.size(), 2u);
    EXPECT_NE(ls[1].find("bad; very bad"), std::string::npos);
    EXPECT_NE(ls[1].find(",nan,"), std::string::npos);
}

TEST(SummaryJson, RequiredSnrTable)
{
    const auto rs = sample_records();
    const auto j = summary_json(rs, 0.02);
    EXPECT_EQ(j["points"], 6);
    EXPECT_EQ(j["failed_points"], 0);
    EXPECT_DOUBLE_EQ(j["compute_time_s"].get<double>(), 1.5);
    ASSERT_EQ(j["required_snr"].size(), 2u);
    EXPECT_TRUE(j["required_snr"][0]["required_snr_db"].is_number());
    EXPECT_EQ(j["required_snr"][1]["required_snr_db"], "not reached");
    EXPECT_EQ(j["required_snr"][1]["alpha"], 0.9);
}

TEST(Svg, StructureAndDeterminism)
{
    std::vector<ChartSeries> s{{"a", {1, 2, 3}, {1e-1, 1e-2, 1e-3}}, {"b<&>", {1, 2, 3}, {2e-1, 5e-2, 0.0}}};
    ChartSpec spec{"BER", "SNR (dB)", "BER", true, 3.8e-3, "FEC", "manifest: m.json"};
    const std::string svg = render_svg(spec, s);
    EXPECT_EQ(svg, render_svg(spec, s));
    EXPECT_EQ(svg.rfind("<svg", 0) == 0 || svg.rfind("<?xml", 0) == 0, true);
    EXPECT_NE(svg.find("width=\"720\""), std::string::npos);
    EXPECT_NE(svg.find("height=\"480\""), std::string::npos);
    EXPECT_NE(svg.find("b&lt;&amp;&gt;"), std::string::npos);
    EXPECT_NE(svg.find("manifest: m.json"), std::string::npos);
    EXPECT_NE(svg.find("FEC"), std::string::npos);
    EXPECT_EQ(svg.find("nan"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Svg, LinearAxesAndEmptySeries)
{
    std::vector<ChartSeries> s{{"h", {0, 50, 100}, {0, -3, -10}}, {"empty", {}, {}}};
    ChartSpec spec{"H", "f", "dB", false, -3.0, "-3 dB", ""};
    const std::string svg = render_svg(spec, s);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

/**
 * @file report.hpp
 * @brief Output formats: BER record CSV, sweep summary JSON, and a small
 *        dependency-free SVG line chart.
 *
 * CSV is the source of truth. All number formatting goes through fmt with
 * fixed precision, so identical records give byte-identical files.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "json.hpp"

#include "frctsim/harness.hpp"

namespace frctsim {

inline std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.10g}", v);
}

/// Column order of write_records_csv.
inline constexpr const char *kRecordColumns =
    "channel,delay_spread_s,alpha,rx_delta_alpha,dc_bias_db,id_iterations,n_subcarriers,cp_len,"
    "pam_order,n_frames,snr_db,seed,bit_errors,bits_tested,ber,error";

/// One row per record. Wall time is deliberately left out so reruns are
/// byte-identical; it goes to the JSON summary instead.
inline void write_records_csv(std::ostream &os, std::span<const BerRecord> records,
                              const std::string &manifest_ref = {})
{
    if (!manifest_ref.empty()) os << "# manifest: " << manifest_ref << '\n';
    os << kRecordColumns << '\n';
    for (const auto &r : records) {
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.channel.kind()),
                   format_number(r.channel.rms_delay_spread()), format_number(r.config.alpha),
                   format_number(r.config.rx_delta_alpha), format_number(r.config.dc_bias_db),
                   r.config.id_iterations, r.config.n_subcarriers, r.config.cp_len, r.config.pam_order,
                   r.config.n_frames, format_number(r.snr_db), r.seed, r.bit_errors, r.bits_tested,
                   format_number(r.ber), err);
    }
}

inline nlohmann::json curve_key_json(const BerRecord &r)
{
    return {{"channel", to_string(r.channel.kind())},
            {"delay_spread_s", r.channel.rms_delay_spread()},
            {"alpha", r.config.alpha},
            {"rx_delta_alpha", r.config.rx_delta_alpha},
            {"dc_bias_db", r.config.dc_bias_db},
            {"id_iterations", r.config.id_iterations}};
}

/// Required-SNR table (one entry per curve) plus per-point timing.
inline nlohmann::json summary_json(std::span<const BerRecord> records, double fec_threshold)
{
    nlohmann::json table = nlohmann::json::array();
    for (const auto &curve : split_curves(records)) {
        nlohmann::json row = curve_key_json(curve.front());
        std::optional<double> req;
        if (curve.size() >= 2) {
            std::vector<BerRecord> sorted = curve;
            std::sort(sorted.begin(), sorted.end(), [](auto &a, auto &b) { return a.snr_db < b.snr_db; });
            req = required_snr(sorted, fec_threshold);
        } else if (curve.front().ber <= fec_threshold) {
            req = curve.front().snr_db;
        }
        row["required_snr_db"] = req ? nlohmann::json(*req) : nlohmann::json("not reached");
        table.push_back(std::move(row));
    }

    double total_time = 0.0;
    std::size_t failed = 0;
    for (const auto &r : records) {
        total_time += r.wall_time_s;
        failed += !r.error.empty();
    }
    return {{"fec_ber_threshold", fec_threshold},
            {"points", records.size()},
            {"failed_points", failed},
            {"compute_time_s", total_time},
            {"required_snr", std::move(table)}};
}

struct ChartSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::optional<double> guide_y;
    std::string guide_label;
    std::string comment;
};

namespace detail {
inline std::string xml_escape(const std::string &s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string px(double v) { return fmt::format("{:.2f}", v); }

inline std::string tick_label(double v)
{
    if (std::abs(v) < 1e-12) return "0";
    return fmt::format("{:.4g}", v);
}

// Roughly five round-valued ticks covering [lo, hi].
inline std::vector<double> linear_ticks(double lo, double hi)
{
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) ticks.push_back(t);
    return ticks;
}
} // namespace detail

/// Fixed 720 x 480 line chart. Non-positive y values are dropped on a log
/// axis. Output depends only on the inputs.
inline std::string render_svg(const ChartSpec &spec, std::span<const ChartSeries> series)
{
    constexpr double width = 720, height = 480;
    constexpr double left = 80, right = 170, top = 40, bottom = 60;
    constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
    static constexpr const char *palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

    auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto &s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (spec.log_y && s.y[i] <= 0.0)) continue;
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, ty(s.y[i]));
            y_hi = std::max(y_hi, ty(s.y[i]));
        }
    if (spec.guide_y && (!spec.log_y || *spec.guide_y > 0.0)) {
        y_lo = std::min(y_lo, ty(*spec.guide_y));
        y_hi = std::max(y_hi, ty(*spec.guide_y));
    }
    if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0;
    if (!std::isfinite(y_lo)) y_lo = spec.log_y ? -6.0 : 0.0, y_hi = spec.log_y ? 0.0 : 1.0;
    if (x_hi == x_lo) x_lo -= 0.5, x_hi += 0.5;
    if (spec.log_y) {
        y_lo = std::floor(y_lo);
        y_hi = std::max(std::ceil(y_hi), y_lo + 1.0);
    } else if (y_hi == y_lo) {
        y_lo -= 0.5, y_hi += 0.5;
    }

    auto sx = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * plot_w; };
    auto sy = [&](double y) { return top + (1.0 - (ty(y) - y_lo) / (y_hi - y_lo)) * plot_h; };
    auto sy_raw = [&](double t) { return top + (1.0 - (t - y_lo) / (y_hi - y_lo)) * plot_h; };

    std::string out;
    out += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
                       width, height, width, height);
    if (!spec.comment.empty()) out += "<!-- " + detail::xml_escape(spec.comment) + " -->\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
                       detail::px(left + plot_w / 2), detail::xml_escape(spec.title));
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                       left, top, plot_w, plot_h);

    for (double t : detail::linear_ticks(x_lo, x_hi)) {
        const std::string x = detail::px(sx(t));
        out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#ddd\"/>\n", x, top, top + plot_h);
        out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                           x, detail::px(top + plot_h + 18), detail::tick_label(t));
    }
    const std::vector<double> yticks = spec.log_y ? [&] {
        std::vector<double> v;
        for (double e = y_lo; e <= y_hi + 1e-9; e += 1.0) v.push_back(e);
        return v;
    }() : detail::linear_ticks(y_lo, y_hi);
    for (double t : yticks) {
        const std::string y = detail::px(sy_raw(t));
        const std::string label = spec.log_y ? fmt::format("1e{}", static_cast<int>(std::lround(t))) : detail::tick_label(t);
        out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#ddd\"/>\n", left, y, left + plot_w);
        out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                           detail::px(left - 6), y, label);
    }
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
                       detail::px(left + plot_w / 2), detail::px(height - 16), detail::xml_escape(spec.x_label));
    out += fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
                       "transform=\"rotate(-90 18 {0})\">{1}</text>\n",
                       detail::px(top + plot_h / 2), detail::xml_escape(spec.y_label));

    if (spec.guide_y && (!spec.log_y || *spec.guide_y > 0.0)) {
        const std::string y = detail::px(sy(*spec.guide_y));
        out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\" stroke-dasharray=\"6 4\"/>\n",
                           left, y, left + plot_w);
        if (!spec.guide_label.empty())
            out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                               detail::px(left + 4), detail::px(sy(*spec.guide_y) - 4),
                               detail::xml_escape(spec.guide_label));
    }

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto &ser = series[s];
        const char *colour = palette[s % std::size(palette)];
        std::string pts;
        for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
            if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i]) || (spec.log_y && ser.y[i] <= 0.0)) continue;
            if (!pts.empty()) pts += ' ';
            pts += detail::px(sx(ser.x[i])) + "," + detail::px(sy(ser.y[i]));
        }
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" points=\"{}\"/>\n", colour, pts);
        const double ly = top + 14 + 18 * static_cast<double>(s);
        out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                           detail::px(left + plot_w + 10), detail::px(ly), detail::px(left + plot_w + 34), colour);
        out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                           detail::px(left + plot_w + 40), detail::px(ly + 4), detail::xml_escape(ser.label));
    }
    out += "</svg>\n";
    return out;
}

} // namespace frctsim

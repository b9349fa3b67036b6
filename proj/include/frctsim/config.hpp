/**
 * @file config.hpp
 * @brief Run configuration for the command-line front end: INI-style
 *        key/value files, list syntax, and figure presets.
 *
 * File layout (every key optional; unknown keys are rejected):
 *
 *   [run]       figure, master_seed, jobs, fec_ber_threshold
 *   [frame]     n_subcarriers, alpha, cp_len, pam_order, dc_bias_db, bit_rate,
 *               payload_symbols_per_frame, training_symbols_per_frame, n_frames,
 *               training_seed, id_iterations, rx_delta_alpha, tap_energy_threshold
 *   [channel]   model (awgn|ed|cb), delay_spread_ns
 *   [grid]      snr_db, alpha, delta_alpha, iterations, dc_bias_db, delay_spread_ns
 *   [security]  snr_db, delta_alpha
 *   [stats]     sigma, bias_db, samples, symbols
 *   [spectrum]  alpha, segment_len
 *   [transfer]  models, delay_spread_ns, max_freq_mhz, points
 *
 * Lists are comma separated ("1,0.9,0.8") or a range "start:stop:step"
 * with stop included.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"

#include "frctsim/channel.hpp"
#include "frctsim/harness.hpp"

namespace frctsim {

/// Invalid or unreadable configuration (exit status 1 in the CLI).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::vector<double> parse_double_list(std::string_view text)
{
    std::string s(text);
    boost::algorithm::trim(s);
    if (s.empty()) throw ConfigError("empty list");
    auto to_double = [](std::string item) {
        boost::algorithm::trim(item);
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            return v;
        } catch (const std::exception &) {
            throw ConfigError("not a number: '" + item + "'");
        }
    };

    if (s.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::size_t pos = 0;
        for (std::size_t colon; (colon = s.find(':', pos)) != std::string::npos; pos = colon + 1)
            parts.push_back(s.substr(pos, colon - pos));
        parts.push_back(s.substr(pos));
        if (parts.size() != 3) throw ConfigError("range must be start:stop:step, got '" + s + "'");
        const double start = to_double(parts[0]), stop = to_double(parts[1]), step = to_double(parts[2]);
        if (!(step > 0.0) || stop < start) throw ConfigError("bad range '" + s + "'");
        std::vector<double> out;
        const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        for (long i = 0; i <= count; ++i) out.push_back(start + static_cast<double>(i) * step);
        return out;
    }

    std::vector<double> out;
    std::size_t pos = 0;
    for (std::size_t comma; (comma = s.find(',', pos)) != std::string::npos; pos = comma + 1)
        out.push_back(to_double(s.substr(pos, comma - pos)));
    out.push_back(to_double(s.substr(pos)));
    return out;
}

inline std::vector<int> parse_int_list(std::string_view text)
{
    std::vector<int> out;
    for (double v : parse_double_list(text)) {
        if (v != std::floor(v)) throw ConfigError("expected integers in list");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

inline std::vector<double> scale(std::vector<double> v, double factor)
{
    for (double &x : v) x *= factor;
    return v;
}

/// Everything a CLI subcommand needs. Grids left unset default to the
/// single value held in `frame` / the channel.
struct RunConfig {
    std::string figure;
    FrameConfig frame;
    ChannelKind channel_kind = ChannelKind::ceiling_bounce;
    double delay_spread_s = 3e-9;
    std::uint64_t master_seed = 1;
    unsigned jobs = 1;
    double fec_ber_threshold = kFecBerThreshold;

    std::optional<std::vector<double>> snr_grid_db;
    std::optional<std::vector<double>> alpha_grid;
    std::optional<std::vector<double>> delta_alpha_grid;
    std::optional<std::vector<int>> iteration_grid;
    std::optional<std::vector<double>> dc_bias_grid_db;
    std::optional<std::vector<double>> delay_grid_s;

    double security_snr_db = 28.0;
    std::vector<double> security_delta_alpha{0.0, 0.0005, 0.001, 0.0015, 0.002, 0.003, 0.004, 0.005};

    double stats_sigma = 1.0;
    std::vector<double> stats_bias_db{0.0, 2.0, 4.0, 7.0, 10.0, 14.2};
    std::size_t stats_samples = 1'000'000;
    int stats_symbols = 400;

    std::vector<double> spectrum_alpha{1.0, 0.9, 0.8, 0.7};
    int spectrum_segment = 512;

    std::vector<ChannelKind> transfer_models{ChannelKind::exp_decay, ChannelKind::ceiling_bounce};
    std::vector<double> transfer_delays_s{1.5e-9, 3e-9, 6e-9, 9e-9};
    double transfer_max_freq_hz = 100e6;
    int transfer_points = 1001;

    ChannelModel channel() const { return ChannelModel::make(channel_kind, delay_spread_s); }

    SweepSpec sweep_spec() const
    {
        SweepSpec s;
        s.base_config = frame;
        s.channel = channel();
        s.snr_grid_db = snr_grid_db.value_or(parse_double_list("16:30:2"));
        s.alpha_grid = alpha_grid.value_or(std::vector<double>{frame.alpha});
        s.delta_alpha_grid = delta_alpha_grid.value_or(std::vector<double>{frame.rx_delta_alpha});
        s.iteration_grid = iteration_grid.value_or(std::vector<int>{frame.id_iterations});
        s.dc_bias_grid_db = dc_bias_grid_db.value_or(std::vector<double>{frame.dc_bias_db});
        s.delay_spread_grid_s = delay_grid_s.value_or(std::vector<double>{});
        s.master_seed = master_seed;
        s.fec_ber_threshold = fec_ber_threshold;
        return s;
    }

    void validate() const
    {
        try {
            frame.validate();
            const SweepSpec s = sweep_spec();
            s.validate();
            for (const auto &p : expand_grid(s)) p.config.validate();
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
        if (jobs == 0) throw ConfigError("jobs must be >= 1");
        if (!(stats_sigma > 0.0)) throw ConfigError("stats sigma must be positive");
        if (stats_samples < 1000) throw ConfigError("stats samples must be >= 1000");
        if (spectrum_segment < 16) throw ConfigError("spectrum segment_len must be >= 16");
        if (transfer_points < 2 || !(transfer_max_freq_hz > 0.0)) throw ConfigError("bad transfer grid");
        for (double a : spectrum_alpha)
            if (!(a > 0.0 && a <= 1.0)) throw ConfigError("spectrum alpha outside (0, 1]");
    }
};

inline const std::vector<std::string> &preset_names()
{
    static const std::vector<std::string> names{"fig4", "fig5", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12"};
    return names;
}

/// Parameter grids of each reproduced figure. All share the reference
/// link: N = 256, CP 16, 2-PAM, 100 Mbit/s, 8 frames of 10 + 256 symbols,
/// CB channel with D = 3 ns, 7 dB bias, 20 detector iterations.
inline RunConfig preset(std::string_view name)
{
    RunConfig c;
    c.figure = std::string(name);
    if (name == "fig4") {
        c.transfer_models = {ChannelKind::exp_decay, ChannelKind::ceiling_bounce};
        c.transfer_delays_s = {1.5e-9, 3e-9, 6e-9, 9e-9};
    } else if (name == "fig5") {
        c.spectrum_alpha = {1.0, 0.9, 0.8, 0.7};
    } else if (name == "fig7") {
        c.alpha_grid = {1.0, 0.9, 0.8, 0.7};
        c.snr_grid_db = parse_double_list("16:30:2");
    } else if (name == "fig8") {
        c.frame.alpha = 0.9;
        c.delay_grid_s = {1.5e-9, 3e-9, 6e-9, 9e-9};
        c.snr_grid_db = parse_double_list("16:30:2");
    } else if (name == "fig9") {
        c.alpha_grid = {1.0, 0.9};
        c.delay_grid_s = {1.5e-9, 3e-9, 4.5e-9, 6e-9, 7.5e-9, 9e-9};
        c.snr_grid_db = parse_double_list("12:36:1");
    } else if (name == "fig10") {
        c.frame.alpha = 0.9;
        c.dc_bias_grid_db = {4.0, 7.0, 10.0};
        c.snr_grid_db = parse_double_list("12:30:1");
    } else if (name == "fig11") {
        c.frame.alpha = 0.8;
        c.iteration_grid = {0, 5, 10, 20};
        c.snr_grid_db = parse_double_list("16:30:2");
    } else if (name == "fig12") {
        c.frame.alpha = 0.9;
        c.security_snr_db = 28.0;
    } else {
        throw ConfigError("unknown figure preset '" + std::string(name) + "'");
    }
    return c;
}

namespace detail {
template <class T>
T ini_value(const boost::property_tree::ptree &node, const std::string &where)
{
    try {
        return node.get_value<T>();
    } catch (const boost::property_tree::ptree_error &) {
        throw ConfigError("bad value for " + where + ": '" + node.data() + "'");
    }
}
} // namespace detail

/// Overlays the keys of an INI tree onto `config`. [run] figure, if present,
/// must be applied by the caller first (see load_config).
inline void apply_ini(RunConfig &c, const boost::property_tree::ptree &tree)
{
    using boost::property_tree::ptree;
    for (const auto &[section, body] : tree) {
        for (const auto &[key, node] : body) {
            const std::string where = section + "." + key;
            const std::string text = node.data();
            auto num = [&] { return detail::ini_value<double>(node, where); };
            auto integer = [&] { return detail::ini_value<long long>(node, where); };
            auto list = [&] { return parse_double_list(text); };
            bool known = true;
            if (section == "run") {
                if (key == "figure") {}
                else if (key == "master_seed") c.master_seed = static_cast<std::uint64_t>(integer());
                else if (key == "jobs") c.jobs = static_cast<unsigned>(integer());
                else if (key == "fec_ber_threshold") c.fec_ber_threshold = num();
                else known = false;
            } else if (section == "frame") {
                auto &f = c.frame;
                if (key == "n_subcarriers") f.n_subcarriers = static_cast<int>(integer());
                else if (key == "alpha") f.alpha = num();
                else if (key == "cp_len") f.cp_len = static_cast<int>(integer());
                else if (key == "pam_order") f.pam_order = static_cast<int>(integer());
                else if (key == "dc_bias_db") f.dc_bias_db = num();
                else if (key == "bit_rate") f.bit_rate = num();
                else if (key == "payload_symbols_per_frame") f.payload_symbols_per_frame = static_cast<int>(integer());
                else if (key == "training_symbols_per_frame") f.training_symbols_per_frame = static_cast<int>(integer());
                else if (key == "n_frames") f.n_frames = static_cast<int>(integer());
                else if (key == "training_seed") f.training_seed = static_cast<std::uint64_t>(integer());
                else if (key == "id_iterations") f.id_iterations = static_cast<int>(integer());
                else if (key == "rx_delta_alpha") f.rx_delta_alpha = num();
                else if (key == "tap_energy_threshold") f.tap_energy_threshold = num();
                else known = false;
            } else if (section == "channel") {
                if (key == "model") {
                    try {
                        c.channel_kind = parse_channel_kind(text);
                    } catch (const std::invalid_argument &e) {
                        throw ConfigError(e.what());
                    }
                } else if (key == "delay_spread_ns") c.delay_spread_s = num() * 1e-9;
                else known = false;
            } else if (section == "grid") {
                if (key == "snr_db") c.snr_grid_db = list();
                else if (key == "alpha") c.alpha_grid = list();
                else if (key == "delta_alpha") c.delta_alpha_grid = list();
                else if (key == "iterations") c.iteration_grid = parse_int_list(text);
                else if (key == "dc_bias_db") c.dc_bias_grid_db = list();
                else if (key == "delay_spread_ns") c.delay_grid_s = scale(list(), 1e-9);
                else known = false;
            } else if (section == "security") {
                if (key == "snr_db") c.security_snr_db = num();
                else if (key == "delta_alpha") c.security_delta_alpha = list();
                else known = false;
            } else if (section == "stats") {
                if (key == "sigma") c.stats_sigma = num();
                else if (key == "bias_db") c.stats_bias_db = list();
                else if (key == "samples") c.stats_samples = static_cast<std::size_t>(num());
                else if (key == "symbols") c.stats_symbols = static_cast<int>(integer());
                else known = false;
            } else if (section == "spectrum") {
                if (key == "alpha") c.spectrum_alpha = list();
                else if (key == "segment_len") c.spectrum_segment = static_cast<int>(integer());
                else known = false;
            } else if (section == "transfer") {
                if (key == "models") {
                    c.transfer_models.clear();
                    std::string s = text;
                    std::size_t pos = 0;
                    for (std::size_t comma;; pos = comma + 1) {
                        comma = s.find(',', pos);
                        std::string item = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
                        boost::algorithm::trim(item);
                        try {
                            c.transfer_models.push_back(parse_channel_kind(item));
                        } catch (const std::invalid_argument &e) {
                            throw ConfigError(e.what());
                        }
                        if (comma == std::string::npos) break;
                    }
                } else if (key == "delay_spread_ns") c.transfer_delays_s = scale(list(), 1e-9);
                else if (key == "max_freq_mhz") c.transfer_max_freq_hz = num() * 1e6;
                else if (key == "points") c.transfer_points = static_cast<int>(integer());
                else known = false;
            } else {
                throw ConfigError("unknown section [" + section + "]");
            }
            if (!known) throw ConfigError("unknown key " + where);
        }
    }
}

inline boost::property_tree::ptree read_ini_file(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return tree;
}

/// Resolves preset + file. The preset is `figure` if given, else the
/// file's [run] figure key, else none.
inline RunConfig resolve_config(const boost::property_tree::ptree *tree, const std::string &figure = {})
{
    std::string fig = figure;
    if (fig.empty() && tree)
        if (auto f = tree->get_optional<std::string>("run.figure")) fig = *f;
    RunConfig c = fig.empty() ? RunConfig{} : preset(fig);
    if (tree) apply_ini(c, *tree);
    return c;
}

inline RunConfig load_config(const std::filesystem::path &path)
{
    const auto tree = read_ini_file(path);
    return resolve_config(&tree);
}

inline nlohmann::json to_json(const FrameConfig &f)
{
    return {{"n_subcarriers", f.n_subcarriers},
            {"alpha", f.alpha},
            {"cp_len", f.cp_len},
            {"pam_order", f.pam_order},
            {"dc_bias_db", f.dc_bias_db},
            {"bit_rate", f.bit_rate},
            {"payload_symbols_per_frame", f.payload_symbols_per_frame},
            {"training_symbols_per_frame", f.training_symbols_per_frame},
            {"n_frames", f.n_frames},
            {"training_seed", f.training_seed},
            {"id_iterations", f.id_iterations},
            {"rx_delta_alpha", f.rx_delta_alpha},
            {"tap_energy_threshold", f.tap_energy_threshold}};
}

/// Fully resolved configuration, as recorded in run manifests.
inline nlohmann::json to_json(const RunConfig &c)
{
    const SweepSpec s = c.sweep_spec();
    nlohmann::json models = nlohmann::json::array();
    for (auto m : c.transfer_models) models.push_back(to_string(m));
    return {{"figure", c.figure},
            {"frame", to_json(c.frame)},
            {"channel", {{"model", to_string(c.channel_kind)}, {"delay_spread_s", c.delay_spread_s}}},
            {"master_seed", c.master_seed},
            {"jobs", c.jobs},
            {"fec_ber_threshold", c.fec_ber_threshold},
            {"grid",
             {{"snr_db", s.snr_grid_db},
              {"alpha", s.alpha_grid},
              {"delta_alpha", s.delta_alpha_grid},
              {"iterations", s.iteration_grid},
              {"dc_bias_db", s.dc_bias_grid_db},
              {"delay_spread_s", s.delay_spread_grid_s}}},
            {"security", {{"snr_db", c.security_snr_db}, {"delta_alpha", c.security_delta_alpha}}},
            {"stats",
             {{"sigma", c.stats_sigma},
              {"bias_db", c.stats_bias_db},
              {"samples", c.stats_samples},
              {"symbols", c.stats_symbols}}},
            {"spectrum", {{"alpha", c.spectrum_alpha}, {"segment_len", c.spectrum_segment}}},
            {"transfer",
             {{"models", models},
              {"delay_spread_s", c.transfer_delays_s},
              {"max_freq_hz", c.transfer_max_freq_hz},
              {"points", c.transfer_points}}}};
}

} // namespace frctsim

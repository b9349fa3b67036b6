// frctsim-cli: sweep, channel, stats, security and spectrum front end.
//
// Exit status: 0 success, 1 configuration error, 2 runtime error or
// interrupted run (partial results are still written).

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "frctsim/analysis.hpp"
#include "frctsim/channel.hpp"
#include "frctsim/config.hpp"
#include "frctsim/harness.hpp"
#include "frctsim/report.hpp"
#include "frctsim/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace frctsim;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

struct RuntimeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string utc_now()
{
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

// Options shared by every subcommand.
struct Common {
    std::string config_path;
    std::string figure;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    std::string out_dir;
    bool dry_run = false;
};

void add_common(CLI::App *cmd, Common &c)
{
    cmd->add_option("--config", c.config_path, "INI configuration file");
    cmd->add_option("--figure", c.figure, "figure preset (fig4 fig5 fig7 fig8 fig9 fig10 fig11 fig12)")
        ->check(CLI::IsMember(preset_names()));
    cmd->add_option("--seed", c.seed, "master seed");
    cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out_dir, "output directory (default $FRCTSIM_OUT_DIR or ./frctsim-out)");
    cmd->add_flag("--dry-run", c.dry_run, "print the resolved manifest and exit");
}

RunConfig base_config(const Common &c)
{
    std::optional<boost::property_tree::ptree> tree;
    if (!c.config_path.empty()) tree = read_ini_file(c.config_path);
    RunConfig cfg = resolve_config(tree ? &*tree : nullptr, c.figure);
    if (c.seed) cfg.master_seed = *c.seed;
    if (c.jobs) cfg.jobs = *c.jobs;
    return cfg;
}

// Collects output files and writes the manifest that every file points to.
class Run {
public:
    Run(std::string command, const Common &common, const RunConfig &cfg)
      : command_(std::move(command)), cfg_(cfg), started_(utc_now())
    {
        prefix_ = cfg.figure.empty() ? command_ : cfg.figure;
        if (!common.out_dir.empty()) dir_ = common.out_dir;
        else if (const char *env = std::getenv("FRCTSIM_OUT_DIR"); env && *env) dir_ = env;
        else dir_ = "frctsim-out";
    }

    std::string manifest_name() const { return prefix_ + "_manifest.json"; }

    json manifest(const json &extra = json::object()) const
    {
        json m{{"tool", "frctsim"},
               {"version", kVersion},
               {"command", command_},
               {"master_seed", cfg_.master_seed},
               {"config", to_json(cfg_)},
               {"output_dir", dir_.string()},
               {"outputs", outputs_},
               {"started_utc", started_},
               {"finished_utc", finished_}};
        for (auto &[k, v] : extra.items()) m[k] = v;
        return m;
    }

    // Writes `name` into the output directory and records it.
    void write(const std::string &suffix, const std::string &content)
    {
        fs::create_directories(dir_);
        const std::string name = prefix_ + "_" + suffix;
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw RuntimeFailure("cannot write " + (dir_ / name).string());
        out << content;
        if (!out) throw RuntimeFailure("write failed for " + (dir_ / name).string());
        outputs_.push_back(name);
    }

    void finish(const json &extra = json::object())
    {
        finished_ = utc_now();
        fs::create_directories(dir_);
        const auto path = dir_ / manifest_name();
        std::ofstream out(path);
        if (!out) throw RuntimeFailure("cannot write " + path.string());
        out << manifest(extra).dump(2) << '\n';
        std::cerr << "wrote " << outputs_.size() + 1 << " files to " << dir_.string() << '\n';
    }

private:
    std::string command_;
    RunConfig cfg_;
    std::string prefix_;
    fs::path dir_;
    std::vector<std::string> outputs_;
    std::string started_;
    std::string finished_;
};

int dry_run(const Run &run)
{
    std::cout << run.manifest().dump(2) << '\n';
    return 0;
}

std::optional<std::vector<double>> list_opt(const std::string &text)
{
    if (text.empty()) return std::nullopt;
    return parse_double_list(text);
}

SweepOptions sweep_options(const RunConfig &cfg)
{
    SweepOptions opt;
    opt.jobs = cfg.jobs;
    opt.cancel = &g_interrupted;
    opt.progress = [](std::size_t done, std::size_t total) {
        std::cerr << fmt::format("\r[{:>4}/{}]", done, total) << (done == total ? "\n" : "") << std::flush;
    };
    return opt;
}

// Label built only from the curve keys that differ between curves.
std::vector<std::string> curve_labels(const std::vector<std::vector<BerRecord>> &curves)
{
    struct Field {
        const char *name;
        double (*get)(const BerRecord &);
        double scale;
        const char *unit;
    };
    static const Field fields[] = {
        {"D", [](const BerRecord &r) { return r.channel.rms_delay_spread(); }, 1e9, " ns"},
        {"bias", [](const BerRecord &r) { return r.config.dc_bias_db; }, 1.0, " dB"},
        {"alpha", [](const BerRecord &r) { return r.config.alpha; }, 1.0, ""},
        {"dalpha", [](const BerRecord &r) { return r.config.rx_delta_alpha; }, 1.0, ""},
        {"I", [](const BerRecord &r) { return static_cast<double>(r.config.id_iterations); }, 1.0, ""},
    };
    std::vector<std::string> labels(curves.size());
    for (const auto &f : fields) {
        std::set<double> values;
        for (const auto &c : curves) values.insert(f.get(c.front()));
        if (values.size() < 2) continue;
        for (std::size_t i = 0; i < curves.size(); ++i) {
            if (!labels[i].empty()) labels[i] += ", ";
            labels[i] += fmt::format("{}={:g}{}", f.name, f.get(curves[i].front()) * f.scale, f.unit);
        }
    }
    for (std::size_t i = 0; i < curves.size(); ++i)
        if (labels[i].empty())
            labels[i] = fmt::format("alpha={:g}", curves[i].front().config.alpha);
    return labels;
}

std::string records_csv(const std::vector<BerRecord> &records, const std::string &manifest)
{
    std::ostringstream os;
    write_records_csv(os, records, manifest);
    return os.str();
}

// ---------------------------------------------------------------- sweep

struct SweepFlags {
    std::string snr, alpha, delta_alpha, iterations, bias_db, delay_ns, channel;
};

int cmd_sweep(const Common &common, const SweepFlags &fl)
{
    RunConfig cfg = base_config(common);
    if (auto v = list_opt(fl.snr)) cfg.snr_grid_db = *v;
    if (auto v = list_opt(fl.alpha)) cfg.alpha_grid = *v;
    if (auto v = list_opt(fl.delta_alpha)) cfg.delta_alpha_grid = *v;
    if (!fl.iterations.empty()) cfg.iteration_grid = parse_int_list(fl.iterations);
    if (auto v = list_opt(fl.bias_db)) cfg.dc_bias_grid_db = *v;
    if (!fl.channel.empty()) {
        try {
            cfg.channel_kind = parse_channel_kind(fl.channel);
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
    }
    if (auto v = list_opt(fl.delay_ns)) {
        cfg.delay_spread_s = v->front() * 1e-9;
        cfg.delay_grid_s = scale(*v, 1e-9);
    }
    cfg.validate();

    Run run("sweep", common, cfg);
    if (common.dry_run) return dry_run(run);

    const SweepSpec spec = cfg.sweep_spec();
    const std::size_t total = expand_grid(spec).size();
    std::cerr << "sweep: " << total << " points, " << cfg.jobs << " job(s)\n";
    const std::vector<BerRecord> records = sweep(spec, sweep_options(cfg));
    const bool interrupted = g_interrupted.load();

    run.write("records.csv", records_csv(records, run.manifest_name()));
    json summary = summary_json(records, cfg.fec_ber_threshold);
    summary["manifest"] = run.manifest_name();
    summary["version"] = kVersion;
    summary["master_seed"] = cfg.master_seed;
    summary["interrupted"] = interrupted;
    run.write("summary.json", summary.dump(2) + "\n");

    const auto curves = split_curves(records);
    if (!curves.empty()) {
        const auto labels = curve_labels(curves);
        std::vector<ChartSeries> series;
        for (std::size_t i = 0; i < curves.size(); ++i) {
            ChartSeries s{labels[i], {}, {}};
            for (const auto &r : curves[i]) {
                s.x.push_back(r.snr_db);
                s.y.push_back(r.ber);
            }
            series.push_back(std::move(s));
        }
        ChartSpec chart{"BER versus SNR", "SNR (dB)", "BER", true, cfg.fec_ber_threshold, "FEC limit",
                        "manifest: " + run.manifest_name()};
        run.write("ber.svg", render_svg(chart, series));
    }

    // Delay-spread sweeps also get the required-SNR-vs-D chart.
    std::set<double> delays;
    for (const auto &r : records) delays.insert(r.channel.rms_delay_spread());
    if (delays.size() > 1) {
        std::map<std::string, ChartSeries> by_label;
        std::vector<std::vector<BerRecord>> flat;
        for (const auto &c : curves) flat.push_back(c);
        for (auto &c : flat)
            for (auto &r : c) r.channel = ChannelModel::make(r.channel.kind(), *delays.begin());
        const auto labels = curve_labels(flat);
        for (std::size_t i = 0; i < curves.size(); ++i) {
            if (curves[i].size() < 2) continue;
            auto sorted = curves[i];
            std::sort(sorted.begin(), sorted.end(), [](auto &a, auto &b) { return a.snr_db < b.snr_db; });
            const auto req = required_snr(sorted, cfg.fec_ber_threshold);
            if (!req) continue;
            auto &s = by_label[labels[i]];
            s.label = labels[i];
            s.x.push_back(curves[i].front().channel.rms_delay_spread() * 1e9);
            s.y.push_back(*req);
        }
        std::vector<ChartSeries> series;
        for (auto &[_, s] : by_label) series.push_back(std::move(s));
        ChartSpec chart{"Required SNR at the FEC limit", "RMS delay spread (ns)", "required SNR (dB)", false,
                        std::nullopt, "", "manifest: " + run.manifest_name()};
        run.write("required_snr.svg", render_svg(chart, series));
    }

    run.finish({{"interrupted", interrupted}});
    for (const auto &row : summary["required_snr"]) std::cout << row.dump() << '\n';
    if (interrupted) {
        std::cerr << "interrupted: wrote " << records.size() << " of " << total << " points\n";
        return 2;
    }
    return 0;
}

// -------------------------------------------------------------- channel

struct ChannelFlags {
    std::string models, delay_ns;
    std::optional<double> max_freq_mhz;
    std::optional<int> points;
    bool taps = false;
};

int cmd_channel(const Common &common, const ChannelFlags &fl)
{
    RunConfig cfg = base_config(common);
    if (!fl.models.empty()) {
        cfg.transfer_models.clear();
        std::stringstream ss(fl.models);
        for (std::string item; std::getline(ss, item, ',');) {
            try {
                cfg.transfer_models.push_back(parse_channel_kind(item));
            } catch (const std::invalid_argument &e) {
                throw ConfigError(e.what());
            }
        }
    }
    if (auto v = list_opt(fl.delay_ns)) cfg.transfer_delays_s = scale(*v, 1e-9);
    if (fl.max_freq_mhz) cfg.transfer_max_freq_hz = *fl.max_freq_mhz * 1e6;
    if (fl.points) cfg.transfer_points = *fl.points;
    cfg.validate();
    for (double d : cfg.transfer_delays_s)
        if (!(d > 0.0)) throw ConfigError("delay spreads must be positive");

    Run run("channel", common, cfg);
    if (common.dry_run) return dry_run(run);

    std::vector<double> freqs(static_cast<std::size_t>(cfg.transfer_points));
    for (std::size_t i = 0; i < freqs.size(); ++i)
        freqs[i] = cfg.transfer_max_freq_hz * static_cast<double>(i) / static_cast<double>(freqs.size() - 1);

    std::vector<std::pair<ChannelModel, std::string>> models;
    for (auto kind : cfg.transfer_models) {
        if (kind == ChannelKind::awgn_only) {
            models.emplace_back(ChannelModel::awgn_only(), "awgn");
            continue;
        }
        for (double d : cfg.transfer_delays_s)
            models.emplace_back(ChannelModel::make(kind, d), fmt::format("{}_{:g}ns", to_string(kind), d * 1e9));
    }

    std::ostringstream csv;
    csv << "# manifest: " << run.manifest_name() << "\nfreq_hz";
    std::vector<std::vector<double>> responses;
    json bandwidths = json::array();
    std::vector<ChartSeries> series;
    for (const auto &[model, name] : models) {
        csv << ',' << name << "_db";
        responses.push_back(transfer_function(model, freqs));
        const auto bw = three_db_bandwidth(model);
        bandwidths.push_back({{"model", to_string(model.kind())},
                              {"delay_spread_s", model.rms_delay_spread()},
                              {"bandwidth_3db_hz", bw ? json(*bw) : json("unbounded")}});
        std::cout << fmt::format("{:<12} 3-dB bandwidth: {}\n", name,
                                 bw ? fmt::format("{:.3f} MHz", *bw / 1e6) : std::string("unbounded"));
        ChartSeries s{name, {}, responses.back()};
        for (double f : freqs) s.x.push_back(f / 1e6);
        series.push_back(std::move(s));
    }
    csv << '\n';
    for (std::size_t i = 0; i < freqs.size(); ++i) {
        csv << format_number(freqs[i]);
        for (const auto &r : responses) csv << ',' << fmt::format("{:.6f}", r[i]);
        csv << '\n';
    }
    run.write("transfer.csv", csv.str());
    run.write("summary.json",
              json{{"manifest", run.manifest_name()}, {"version", kVersion}, {"bandwidths", bandwidths}}.dump(2) +
                  "\n");
    ChartSpec chart{"Channel transfer function", "frequency (MHz)", "|H(f)| (dB)", false, -3.0, "-3 dB",
                    "manifest: " + run.manifest_name()};
    run.write("transfer.svg", render_svg(chart, series));

    if (fl.taps) {
        const double dt = 1.0 / cfg.frame.sample_rate();
        for (const auto &[model, name] : models) {
            std::ostringstream os;
            os << "# manifest: " << run.manifest_name() << '\n';
            write_taps_csv(os, impulse_taps(model, dt, cfg.frame.tap_energy_threshold));
            run.write("taps_" + name + ".csv", os.str());
        }
    }
    run.finish();
    return 0;
}

// ---------------------------------------------------------------- stats

struct StatsFlags {
    std::optional<double> sigma;
    std::string bias_db;
    std::optional<std::size_t> samples;
    std::optional<int> symbols;
};

int cmd_stats(const Common &common, const StatsFlags &fl)
{
    RunConfig cfg = base_config(common);
    if (fl.sigma) cfg.stats_sigma = *fl.sigma;
    if (auto v = list_opt(fl.bias_db)) cfg.stats_bias_db = *v;
    if (fl.samples) cfg.stats_samples = *fl.samples;
    if (fl.symbols) cfg.stats_symbols = *fl.symbols;
    cfg.validate();
    for (double b : cfg.stats_bias_db)
        if (!(b >= 0.0)) throw ConfigError("bias_db values must be >= 0");

    Run run("stats", common, cfg);
    if (common.dry_run) return dry_run(run);

    const double sigma = cfg.stats_sigma;
    std::ostringstream power;
    power << "# manifest: " << run.manifest_name() << '\n'
          << "bias_db,k,b_dc,analytic_power,monte_carlo_power,relative_error,attenuation,clip_probability\n";
    json rows = json::array();
    for (std::size_t i = 0; i < cfg.stats_bias_db.size(); ++i) {
        const double db = cfg.stats_bias_db[i];
        const DcBias bias = DcBias::from_db(db, sigma);
        const ClippedGaussianStats st = clipped_stats(sigma, bias.b_dc);
        const double mc = monte_carlo_clipped_power(sigma, bias.b_dc, cfg.stats_samples, mix64(cfg.master_seed + i));
        const double rel = std::abs(mc - st.power) / st.power;
        fmt::print(power, "{},{:.9g},{:.9g},{:.9g},{:.9g},{:.3e},{:.9g},{:.9g}\n", format_number(db),
                   bias.k_factor, bias.b_dc, st.power, mc, rel, st.attenuation, st.clip_probability);
        rows.push_back({{"bias_db", db}, {"b_dc", bias.b_dc}, {"analytic_power", st.power},
                        {"monte_carlo_power", mc}, {"relative_error", rel}, {"attenuation", st.attenuation}});
    }
    run.write("clipped_power.csv", power.str());
    std::cout << power.str();

    const std::vector<double> x =
        multiplexed_samples(cfg.frame.n_subcarriers, cfg.frame.alpha, cfg.stats_symbols, mix64(cfg.master_seed ^ 0x6b73));
    const double ks = gaussianity_ks(x);
    double mean = 0.0, var = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    for (double v : x) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(x.size() - 1));

    // Histogram over +-4 sd with the fitted normal overlaid.
    constexpr int bins = 80;
    const double lo = mean - 4.0 * sd, width = 8.0 * sd / bins;
    std::vector<double> counts(bins, 0.0);
    for (double v : x) {
        const int b = static_cast<int>(std::floor((v - lo) / width));
        if (b >= 0 && b < bins) counts[static_cast<std::size_t>(b)] += 1.0;
    }
    std::ostringstream pdf;
    pdf << "# manifest: " << run.manifest_name() << "\nx,empirical_density,normal_density\n";
    ChartSeries emp{"FrCT-NOFDM samples", {}, {}}, fit{"fitted normal", {}, {}};
    for (int b = 0; b < bins; ++b) {
        const double c = lo + (b + 0.5) * width;
        const double d = counts[static_cast<std::size_t>(b)] / (static_cast<double>(x.size()) * width);
        fmt::print(pdf, "{:.6g},{:.6g},{:.6g}\n", c, d, normal_pdf(c, mean, sd));
        emp.x.push_back(c);
        emp.y.push_back(d);
        fit.x.push_back(c);
        fit.y.push_back(normal_pdf(c, mean, sd));
    }
    run.write("pdf.csv", pdf.str());

    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    std::ostringstream cdf;
    cdf << "# manifest: " << run.manifest_name() << "\nx,empirical_cdf,normal_cdf\n";
    const std::size_t stride = std::max<std::size_t>(1, sorted.size() / 1000);
    for (std::size_t i = 0; i < sorted.size(); i += stride)
        fmt::print(cdf, "{:.6g},{:.6g},{:.6g}\n", sorted[i], static_cast<double>(i + 1) / sorted.size(),
                   phi_cdf((sorted[i] - mean) / sd));
    run.write("cdf.csv", cdf.str());

    const std::vector<ChartSeries> series{emp, fit};
    ChartSpec chart{fmt::format("Sample distribution, alpha={:g}", cfg.frame.alpha), "amplitude", "density", false,
                    std::nullopt, "", "manifest: " + run.manifest_name()};
    run.write("pdf.svg", render_svg(chart, series));

    json summary{{"manifest", run.manifest_name()},
                 {"version", kVersion},
                 {"sigma", sigma},
                 {"clipped_power", rows},
                 {"gaussianity",
                  {{"alpha", cfg.frame.alpha},
                   {"n_subcarriers", cfg.frame.n_subcarriers},
                   {"symbols", cfg.stats_symbols},
                   {"samples", x.size()},
                   {"ks_statistic", ks}}}};
    run.write("summary.json", summary.dump(2) + "\n");
    std::cout << fmt::format("KS statistic ({} samples): {:.5f}\n", x.size(), ks);
    run.finish();
    return 0;
}

// ------------------------------------------------------------- security

struct SecurityFlags {
    std::optional<double> alpha, snr, delay_ns;
    std::string delta_alpha, channel;
};

int cmd_security(const Common &common, const SecurityFlags &fl)
{
    RunConfig cfg = base_config(common);
    if (fl.alpha) cfg.frame.alpha = *fl.alpha;
    if (fl.snr) cfg.security_snr_db = *fl.snr;
    if (auto v = list_opt(fl.delta_alpha)) cfg.security_delta_alpha = *v;
    if (!fl.channel.empty()) {
        try {
            cfg.channel_kind = parse_channel_kind(fl.channel);
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
    }
    if (fl.delay_ns) cfg.delay_spread_s = *fl.delay_ns * 1e-9;
    cfg.validate();
    if (cfg.security_delta_alpha.empty()) throw ConfigError("delta-alpha grid is empty");
    for (double da : cfg.security_delta_alpha)
        if (!(cfg.frame.alpha + da > 0.0 && cfg.frame.alpha + da <= 1.0))
            throw ConfigError(fmt::format("receiver alpha {:g} outside (0, 1]", cfg.frame.alpha + da));

    Run run("security", common, cfg);
    if (common.dry_run) return dry_run(run);

    const auto records = security_sweep(cfg.frame, cfg.channel(), cfg.security_delta_alpha, cfg.security_snr_db,
                                        cfg.master_seed, sweep_options(cfg));
    const bool interrupted = g_interrupted.load();
    run.write("records.csv", records_csv(records, run.manifest_name()));

    ChartSeries s{fmt::format("alpha={:g}, SNR={:g} dB", cfg.frame.alpha, cfg.security_snr_db), {}, {}};
    json points = json::array();
    for (const auto &r : records) {
        s.x.push_back(r.config.rx_delta_alpha);
        s.y.push_back(r.ber);
        points.push_back({{"delta_alpha", r.config.rx_delta_alpha},
                          {"ber", r.ber},
                          {"below_fec", r.ber <= cfg.fec_ber_threshold}});
        std::cout << fmt::format("delta_alpha={:<8g} BER={}\n", r.config.rx_delta_alpha, format_number(r.ber));
    }
    const std::vector<ChartSeries> series{s};
    ChartSpec chart{"BER versus receiver alpha mismatch", "delta alpha", "BER", true, cfg.fec_ber_threshold,
                    "FEC limit", "manifest: " + run.manifest_name()};
    run.write("mismatch.svg", render_svg(chart, series));
    run.write("summary.json", json{{"manifest", run.manifest_name()},
                                   {"version", kVersion},
                                   {"fec_ber_threshold", cfg.fec_ber_threshold},
                                   {"interrupted", interrupted},
                                   {"points", points}}
                                      .dump(2) +
                                  "\n");
    run.finish({{"interrupted", interrupted}});
    return interrupted ? 2 : 0;
}

// ------------------------------------------------------------- spectrum

struct SpectrumFlags {
    std::string alpha, channel;
    std::optional<double> delay_ns;
    std::optional<int> segment;
};

int cmd_spectrum(const Common &common, const SpectrumFlags &fl)
{
    RunConfig cfg = base_config(common);
    if (auto v = list_opt(fl.alpha)) cfg.spectrum_alpha = *v;
    if (fl.segment) cfg.spectrum_segment = *fl.segment;
    if (!fl.channel.empty()) {
        try {
            cfg.channel_kind = parse_channel_kind(fl.channel);
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
    }
    if (fl.delay_ns) cfg.delay_spread_s = *fl.delay_ns * 1e-9;
    cfg.validate();

    Run run("spectrum", common, cfg);
    if (common.dry_run) return dry_run(run);

    std::vector<PowerSpectrum> spectra;
    json edges = json::array();
    for (double alpha : cfg.spectrum_alpha) {
        FrameConfig fc = cfg.frame;
        fc.alpha = alpha;
        const FrctBasis basis(static_cast<std::size_t>(fc.n_subcarriers), alpha);
        const Bits bits = random_bits(fc.payload_bits(), point_seed(cfg.master_seed, alpha));
        const TxBatch tx = build_frames(bits, fc, basis);
        spectra.push_back(psd_estimate(tx.waveform, cfg.spectrum_segment));
        // Band edge: highest frequency still within 10 dB of the in-band level.
        double edge = 0.0;
        const auto &p = spectra.back();
        for (std::size_t k = 0; k < p.freq_hz.size(); ++k)
            if (p.power_db[k] >= -10.0) edge = p.freq_hz[k];
        edges.push_back({{"alpha", alpha}, {"band_edge_hz", edge}});
        std::cout << fmt::format("alpha={:<5g} band edge {:.2f} MHz\n", alpha, edge / 1e6);
    }

    const auto &freqs = spectra.front().freq_hz;
    const auto channel_db = transfer_function(cfg.channel(), freqs);

    std::ostringstream csv;
    csv << "# manifest: " << run.manifest_name() << "\nfreq_hz";
    for (double a : cfg.spectrum_alpha) csv << fmt::format(",psd_alpha_{:g}_db", a);
    csv << ",channel_db\n";
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        csv << format_number(freqs[k]);
        for (const auto &p : spectra) csv << fmt::format(",{:.6f}", p.power_db[k]);
        csv << fmt::format(",{:.6f}\n", channel_db[k]);
    }
    run.write("psd.csv", csv.str());

    std::vector<ChartSeries> series;
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        ChartSeries s{fmt::format("alpha={:g}", cfg.spectrum_alpha[i]), {}, spectra[i].power_db};
        for (double f : freqs) s.x.push_back(f / 1e6);
        series.push_back(std::move(s));
    }
    ChartSeries ch{fmt::format("channel {} D={:g} ns", to_string(cfg.channel_kind), cfg.delay_spread_s * 1e9), {},
                   channel_db};
    for (double f : freqs) ch.x.push_back(f / 1e6);
    series.push_back(std::move(ch));
    ChartSpec chart{"Transmitted power spectral density", "frequency (MHz)", "PSD (dB)", false, std::nullopt, "",
                    "manifest: " + run.manifest_name()};
    run.write("psd.svg", render_svg(chart, series));
    run.write("summary.json",
              json{{"manifest", run.manifest_name()}, {"version", kVersion}, {"band_edges", edges}}.dump(2) + "\n");
    run.finish();
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"FrCT-NOFDM optical-wireless link simulator"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Common common;
    SweepFlags sw;
    ChannelFlags ch;
    StatsFlags st;
    SecurityFlags se;
    SpectrumFlags sp;

    auto *sweep_cmd = app.add_subcommand("sweep", "BER versus SNR over a parameter grid");
    add_common(sweep_cmd, common);
    sweep_cmd->add_option("--snr", sw.snr, "SNR grid in dB, list or start:stop:step");
    sweep_cmd->add_option("--alpha", sw.alpha, "bandwidth compression factors");
    sweep_cmd->add_option("--delta-alpha", sw.delta_alpha, "receiver alpha offsets");
    sweep_cmd->add_option("--iterations", sw.iterations, "detector iteration counts");
    sweep_cmd->add_option("--bias-db", sw.bias_db, "DC bias levels in dB");
    sweep_cmd->add_option("--delay-ns", sw.delay_ns, "RMS delay spreads in ns");
    sweep_cmd->add_option("--channel", sw.channel, "awgn, ed or cb");

    auto *channel_cmd = app.add_subcommand("channel", "channel transfer functions and 3-dB bandwidths");
    add_common(channel_cmd, common);
    channel_cmd->add_option("--channel", ch.models, "comma separated models (awgn, ed, cb)");
    channel_cmd->add_option("--delay-ns", ch.delay_ns, "RMS delay spreads in ns");
    channel_cmd->add_option("--max-freq-mhz", ch.max_freq_mhz, "upper frequency of the CSV grid");
    channel_cmd->add_option("--points", ch.points, "frequency grid points");
    channel_cmd->add_flag("--taps", ch.taps, "also write discrete tap CSVs");

    auto *stats_cmd = app.add_subcommand("stats", "clipped-signal power and Gaussianity report");
    add_common(stats_cmd, common);
    stats_cmd->add_option("--sigma", st.sigma, "rms of the bipolar signal");
    stats_cmd->add_option("--bias-db", st.bias_db, "DC bias levels in dB");
    stats_cmd->add_option("--samples", st.samples, "Monte-Carlo samples per bias level");
    stats_cmd->add_option("--symbols", st.symbols, "multiplexed symbols pooled for the KS test");

    auto *security_cmd = app.add_subcommand("security", "BER versus receiver alpha mismatch");
    add_common(security_cmd, common);
    security_cmd->add_option("--alpha", se.alpha, "transmitter alpha");
    security_cmd->add_option("--snr", se.snr, "SNR in dB");
    security_cmd->add_option("--delta-alpha", se.delta_alpha, "receiver alpha offsets");
    security_cmd->add_option("--channel", se.channel, "awgn, ed or cb");
    security_cmd->add_option("--delay-ns", se.delay_ns, "RMS delay spread in ns");

    auto *spectrum_cmd = app.add_subcommand("spectrum", "transmitted PSD with the channel response");
    add_common(spectrum_cmd, common);
    spectrum_cmd->add_option("--alpha", sp.alpha, "bandwidth compression factors");
    spectrum_cmd->add_option("--segment", sp.segment, "Welch segment length");
    spectrum_cmd->add_option("--channel", sp.channel, "awgn, ed or cb");
    spectrum_cmd->add_option("--delay-ns", sp.delay_ns, "RMS delay spread in ns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    std::signal(SIGINT, on_sigint);
    try {
        if (*sweep_cmd) return cmd_sweep(common, sw);
        if (*channel_cmd) return cmd_channel(common, ch);
        if (*stats_cmd) return cmd_stats(common, st);
        if (*security_cmd) return cmd_security(common, se);
        if (*spectrum_cmd) return cmd_spectrum(common, sp);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gvspec/engine.hpp"
#include "gvspec/error.hpp"
#include "gvspec/fourier.hpp"
#include "gvspec/io.hpp"
#include "gvspec/peaks.hpp"
#include "gvspec/preprocess.hpp"
#include "gvspec/stats.hpp"
#include "gvspec/timeseries.hpp"

namespace gvspec::cli {

using json = nlohmann::json;

enum ExitCode : int { ok = 0, usage = 1, input_error = 2, numeric_error = 3 };

namespace detail {

struct GridArgs {
    std::size_t nfreq = 2000;
    std::optional<double> fmin, fmax, pmin, pmax;
    std::string spacing = "frequency";
    bool allow_above = false;

    void add_to(CLI::App& app) {
        app.add_option("--nfreq", nfreq, "Number of trial frequencies")->check(CLI::PositiveNumber);
        app.add_option("--fmin", fmin, "Lowest trial frequency (default 2/span)");
        app.add_option("--fmax", fmax, "Highest trial frequency (default 0.5/min_gap)");
        app.add_option("--pmin", pmin, "Shortest trial period (sets fmax)");
        app.add_option("--pmax", pmax, "Longest trial period (sets fmin)");
        app.add_option("--spacing", spacing, "Grid spacing")->check(CLI::IsMember({"frequency", "period"}));
        app.add_flag("--allow-above-nyquist", allow_above, "Permit frequencies above 0.5/min_gap");
    }

    FrequencyGrid build(const TimeSeries& ts) const {
        const auto st = describe(ts);
        double lo = 2.0 / st.span;
        double hi = 0.5 / st.min_gap;
        if (pmax) lo = 1.0 / *pmax;
        if (pmin) hi = 1.0 / *pmin;
        if (fmin) lo = *fmin;
        if (fmax) hi = *fmax;
        if (spacing == "period") return FrequencyGrid::linear_in_period(1.0 / hi, 1.0 / lo, nfreq);
        return FrequencyGrid::linear_in_frequency(lo, hi, nfreq);
    }

    json to_json() const {
        json j = {{"nfreq", nfreq}, {"spacing", spacing}, {"allow_above_nyquist", allow_above}};
        if (fmin) j["fmin"] = *fmin;
        if (fmax) j["fmax"] = *fmax;
        if (pmin) j["pmin"] = *pmin;
        if (pmax) j["pmax"] = *pmax;
        return j;
    }
};

struct AnalysisArgs {
    double alpha = 0.01;
    std::string constituents = "datum";
    double kappa = kDefaultKappa;
    unsigned threads = 0;
    std::size_t min_sep = 2;
    double fidelity_threshold = kDefaultFidelityThreshold;

    void add_to(CLI::App& app) {
        app.add_option("--alpha", alpha, "Significance level (1 - confidence)")->check(CLI::Range(0.0, 1.0));
        app.add_option("--constituents", constituents, "datum | datum+linear | datum+polyK");
        app.add_option("--kappa", kappa, "Fidelity calibration constant")->check(CLI::PositiveNumber);
        app.add_option("--threads", threads, "Worker threads (0 = all cores)");
        app.add_option("--min-sep", min_sep, "Minimum peak separation in grid lines");
        app.add_option("--fidelity-threshold", fidelity_threshold, "Phi below which a peak is noise");
    }

    SpectrumOptions spectrum_options(bool allow_above) const {
        SpectrumOptions o;
        o.constituents = Constituents::parse(constituents);
        o.alpha = alpha;
        o.kappa = kappa;
        o.allow_above_sampling_limit = allow_above;
        o.threads = threads;
        return o;
    }

    PeakOptions peak_options() const { return {min_sep, fidelity_threshold}; }

    /// Fails early, before a grid is derived from a record too short to analyse.
    void check_record(const TimeSeries& ts) const {
        degrees_of_freedom(ts.size(), Constituents::parse(constituents).count());
    }

    json to_json() const {
        return {{"alpha", alpha},         {"constituents", constituents}, {"kappa", kappa},
                {"min_sep", min_sep},     {"fidelity_threshold", fidelity_threshold}};
    }
};

inline TimeSeries read_input(const std::string& path, std::istream& in) {
    if (path == "-") return load_series(in);
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open input '" + path + "'");
    return load_series(f);
}

inline std::string series_csv(const TimeSeries& ts) {
    std::ostringstream s;
    save_series(s, ts);
    return s.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << content;
    if (!f) throw IoError("write failed for '" + path.string() + "'");
}

inline std::filesystem::path sidecar_for(const std::string& out) {
    return std::filesystem::path(out).replace_extension(".json");
}

/// Main payload plus optional JSON sidecar. Everything is computed before
/// any file is opened, so a failing command leaves no partial output.
struct Emission {
    std::string body;
    std::optional<json> meta;
};

inline void emit(const Emission& e, const std::string& out_path, const std::string& meta_path, std::ostream& out) {
    if (out_path.empty() || out_path == "-") {
        out << e.body;
    } else {
        write_file(out_path, e.body);
    }
    if (!e.meta) return;
    std::string target = meta_path;
    if (target.empty() && !out_path.empty() && out_path != "-") target = sidecar_for(out_path).string();
    if (!target.empty()) write_file(target, e.meta->dump(2) + "\n");
}

inline void warn_zeros(const TimeSeries& ts, std::ostream& err) {
    const auto zeros = std::ranges::count_if(ts.values(), [](double v) { return v == 0.0; });
    if (zeros > 0)
        err << "warning: input contains " << zeros
            << " exact zero value(s); a later restore step would delete them\n";
}

} // namespace detail

/// Runs one subcommand. argv[0] is the program name.
inline int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Least-squares (Gauss-Vanicek) spectral analysis of gapped time series"};
    app.require_subcommand(1);

    std::string in_path, out_path, meta_path;
    const auto add_io = [&](CLI::App* sub, bool needs_input = true) {
        if (needs_input) sub->add_option("--in", in_path, "Input series CSV ('-' for stdin)")->required();
        sub->add_option("--out", out_path, "Output file (default stdout)");
        sub->add_option("--meta", meta_path, "JSON metadata path (default: next to --out)");
    };

    detail::GridArgs grid_args;
    detail::AnalysisArgs an;

    auto* analyze = app.add_subcommand("analyze", "Variance spectrum of a series");
    add_io(analyze);
    grid_args.add_to(*analyze);
    an.add_to(*analyze);
    std::string plot_path;
    analyze->add_option("--plot", plot_path, "Also write plot-ready CSV here");

    auto* fourier = app.add_subcommand("fourier", "Fourier power spectrum of an evenly spaced series");
    add_io(fourier);
    bool no_demean = false;
    std::size_t compare_top = 0;
    double tol_bins = 1.0;
    fourier->add_flag("--no-demean", no_demean, "Do not remove the mean first");
    fourier->add_option("--compare", compare_top, "Compare the top-K peaks with the variance spectrum");
    fourier->add_option("--tol-bins", tol_bins, "Peak alignment tolerance in Fourier bins");

    auto* resample = app.add_subcommand("resample", "Value-hold resampling onto an even grid");
    add_io(resample);
    double dt = 0.25;
    resample->add_option("--dt", dt, "Output sampling step")->required();

    auto* pad = app.add_subcommand("pad", "Zero-pad an evenly spaced series to a power of two");
    add_io(pad);

    auto* detrend = app.add_subcommand("detrend", "Subtract a least-squares polynomial");
    add_io(detrend);
    int order = 3;
    detrend->add_option("--order", order, "Polynomial degree");

    auto* restore_cmd = app.add_subcommand("restore", "Delete zeros and collapse repeated values");
    add_io(restore_cmd);

    auto* peaks = app.add_subcommand("peaks", "Peak table of the variance spectrum");
    add_io(peaks);
    grid_args.add_to(*peaks);
    an.add_to(*peaks);
    std::string format = "text";
    peaks->add_option("--format", format, "text | csv | json")->check(CLI::IsMember({"text", "csv", "json"}));

    auto* ab = app.add_subcommand("ab", "Raw versus resampled/padded/detrended false-peak comparison");
    add_io(ab);
    grid_args.add_to(*ab);
    an.add_to(*ab);
    bool no_pad = false;
    bool ab_text = false;
    ab->add_option("--dt", dt, "Resampling step");
    ab->add_option("--order", order, "Detrending degree");
    ab->add_flag("--no-pad", no_pad, "Skip zero padding");
    ab->add_flag("--text", ab_text, "Print both peak tables instead of JSON");

    auto* mc = app.add_subcommand("mc", "Monte-Carlo critical levels on the series' epochs");
    add_io(mc);
    grid_args.add_to(*mc);
    SignificanceConfig sig;
    std::string null_model = "white";
    std::string mc_constituents = "datum";
    unsigned mc_threads = 0;
    mc->add_option("--alpha", sig.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    mc->add_option("--trials", sig.trials, "Number of null trials");
    mc->add_option("--seed", sig.seed, "Generator seed");
    mc->add_option("--null", null_model, "white | random-walk");
    mc->add_option("--constituents", mc_constituents, "Constituents removed in each trial");
    mc->add_option("--threads", mc_threads, "Worker threads (0 = all cores)");

    auto* synth_cmd = app.add_subcommand("synth", "Generate a gapped sum-of-sinusoids record");
    add_io(synth_cmd, false);
    std::vector<double> periods, amps, phases;
    SynthOptions so;
    so.noise_sd = 0.1;
    synth_cmd->add_option("--period", periods, "Component period (repeatable)")->required();
    synth_cmd->add_option("--amp", amps, "Component amplitude (repeatable, default 1)");
    synth_cmd->add_option("--phase", phases, "Component phase in radians (repeatable, default 0)");
    synth_cmd->add_option("--noise", so.noise_sd, "Gaussian noise standard deviation");
    synth_cmd->add_option("--gaps", so.gap_fraction, "Fraction of interior samples deleted");
    synth_cmd->add_option("--n", so.n, "Samples before deletion");
    synth_cmd->add_option("--span", so.span, "Record span");
    synth_cmd->add_option("--seed", so.seed, "Generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ExitCode::ok : ExitCode::usage;
    }

    try {
        detail::Emission em;
        json config = {{"in", in_path}};

        if (analyze->parsed()) {
            const auto ts = detail::read_input(in_path, in);
            an.check_record(ts);
            const auto grid = grid_args.build(ts);
            const auto spec = spectrum(ts, grid, an.spectrum_options(grid_args.allow_above));
            std::ostringstream body;
            io::write_spectrum_csv(body, spec);
            em.body = body.str();
            config.update({{"command", "analyze"}, {"grid", grid_args.to_json()}, {"analysis", an.to_json()}});
            em.meta = io::spectrum_metadata(spec);
            (*em.meta)["config"] = config;
            std::string plot;
            if (!plot_path.empty()) {
                std::ostringstream p;
                io::write_plotdata(p, spec, find_peaks(spec, an.peak_options()));
                plot = p.str();
            }
            detail::emit(em, out_path, meta_path, out);
            if (!plot_path.empty()) detail::write_file(plot_path, plot);
        } else if (fourier->parsed()) {
            const auto ts = detail::read_input(in_path, in);
            if (!is_evenly_spaced(ts)) throw ValidationError("Fourier power needs an evenly spaced series");
            std::vector<double> v(ts.values().begin(), ts.values().end());
            if (!no_demean) {
                double mean = 0.0;
                for (double x : v) mean += x;
                mean /= static_cast<double>(v.size());
                for (double& x : v) x -= mean;
            }
            const double step = ts.span() / static_cast<double>(ts.size() - 1);
            if (!std::has_single_bit(v.size()))
                err << "warning: " << v.size()
                    << " samples is not a power of two; a radix-2 transform would require padding\n";
            const auto fs = dft_power(v, step);
            std::ostringstream body;
            io::write_fourier_csv(body, fs);
            em.body = body.str();
            em.meta = io::fourier_metadata(fs);
            config.update({{"command", "fourier"}, {"demean", !no_demean}});
            if (compare_top > 0) {
                // Variance spectrum evaluated on the interior Fourier bins.
                std::vector<double> bins(fs.frequencies.begin(), fs.frequencies.end());
                if (bins.size() > 1 && v.size() % 2 == 0) bins.pop_back();
                const auto gv = spectrum(ts, FrequencyGrid(bins), SpectrumOptions{});
                const auto rep = compare_peaks(gv, fs, compare_top, tol_bins);
                (*em.meta)["comparison"] = io::alignment_json(rep);
                config.update({{"compare", compare_top}, {"tol_bins", tol_bins}});
                err << "comparison: " << (rep.aligned ? "aligned" : "not aligned") << '\n';
            }
            (*em.meta)["config"] = config;
            detail::emit(em, out_path, meta_path, out);
        } else if (resample->parsed() || pad->parsed() || detrend->parsed() || restore_cmd->parsed()) {
            const auto ts = detail::read_input(in_path, in);
            std::optional<Processed> res;
            if (resample->parsed()) {
                detail::warn_zeros(ts, err);
                res = step_resample(ts, dt);
                config.update({{"command", "resample"}, {"dt", dt}});
            } else if (pad->parsed()) {
                detail::warn_zeros(ts, err);
                res = zero_pad_pow2(ts);
                config["command"] = "pad";
            } else if (detrend->parsed()) {
                detail::warn_zeros(ts, err);
                res = detrend_poly(ts, order);
                config.update({{"command", "detrend"}, {"order", order}});
            } else {
                res = restore(ts);
                const auto& step = std::get<RestoreStep>(res->report.steps.front());
                if (step.zeros_removed > 0)
                    err << "warning: restore deleted " << step.zeros_removed
                        << " zero-valued sample(s); genuine zero observations are lost\n";
                config["command"] = "restore";
            }
            em.body = detail::series_csv(res->series);
            em.meta = io::report_json(res->report);
            (*em.meta)["config"] = config;
            detail::emit(em, out_path, meta_path, out);
        } else if (peaks->parsed()) {
            const auto ts = detail::read_input(in_path, in);
            an.check_record(ts);
            const auto spec = spectrum(ts, grid_args.build(ts), an.spectrum_options(grid_args.allow_above));
            const auto table = find_peaks(spec, an.peak_options());
            std::ostringstream body;
            if (format == "csv")
                io::write_peak_table_csv(body, table);
            else if (format == "json")
                body << io::peak_table_json(table).dump(2) << '\n';
            else
                io::write_peak_table_text(body, table, ts.unit_label());
            em.body = body.str();
            config.update({{"command", "peaks"}, {"grid", grid_args.to_json()}, {"analysis", an.to_json()}});
            em.meta = io::spectrum_metadata(spec);
            (*em.meta)["config"] = config;
            detail::emit(em, out_path, meta_path, out);
        } else if (ab->parsed()) {
            const auto ts = detail::read_input(in_path, in);
            detail::warn_zeros(ts, err);
            an.check_record(ts);
            AbOptions opt;
            opt.dt = dt;
            opt.pad = !no_pad;
            opt.detrend_order = order;
            opt.spectrum = an.spectrum_options(grid_args.allow_above);
            opt.peaks = an.peak_options();
            const auto rep = ab_false_peaks(ts, grid_args.build(ts), opt);
            config.update({{"command", "ab"},
                           {"dt", dt},
                           {"pad", !no_pad},
                           {"order", order},
                           {"grid", grid_args.to_json()},
                           {"analysis", an.to_json()}});
            auto report = io::ab_json(rep);
            report["config"] = config;
            std::ostringstream body;
            if (ab_text) {
                body << "Raw record (n=" << rep.raw_spectrum.n << ")\n";
                io::write_peak_table_text(body, rep.raw_table, ts.unit_label());
                body << "\nAltered record (n=" << rep.altered_spectrum.n << ")\n";
                io::write_peak_table_text(body, rep.altered_table, ts.unit_label());
                body << "\nnew significant peaks: " << rep.new_significant_count << "\ndB range raw: "
                     << rep.db_range_raw << "\ndB range altered: " << rep.db_range_altered << '\n';
                em.meta = report;
            } else {
                body << report.dump(2) << '\n';
            }
            em.body = body.str();
            detail::emit(em, out_path, meta_path, out);
        } else if (mc->parsed()) {
            const auto ts = detail::read_input(in_path, in);
            sig.null_model = parse_null_model(null_model);
            const auto grid = grid_args.build(ts);
            check_sampling_limit(grid, ts, grid_args.allow_above);
            const auto res = monte_carlo_critical(ts, grid, sig, Constituents::parse(mc_constituents), mc_threads);
            std::ostringstream body;
            io::write_mc_csv(body, res);
            em.body = body.str();
            config.update({{"command", "mc"},
                           {"alpha", sig.alpha},
                           {"trials", sig.trials},
                           {"seed", sig.seed},
                           {"null", null_model},
                           {"constituents", mc_constituents},
                           {"grid", grid_args.to_json()}});
            em.meta = json{{"n", res.n}, {"u", res.u}, {"analytic_critical", res.analytic_critical}, {"config", config}};
            detail::emit(em, out_path, meta_path, out);
        } else if (synth_cmd->parsed()) {
            if (!amps.empty() && amps.size() != periods.size())
                throw ValidationError("--amp must be given once per --period");
            if (!phases.empty() && phases.size() != periods.size())
                throw ValidationError("--phase must be given once per --period");
            for (std::size_t i = 0; i < periods.size(); ++i)
                so.components.push_back({periods[i], amps.empty() ? 1.0 : amps[i], phases.empty() ? 0.0 : phases[i]});
            const auto ts = synth(so);
            em.body = detail::series_csv(ts);
            em.meta = json{{"config",
                            {{"command", "synth"},
                             {"period", periods},
                             {"amp", amps},
                             {"phase", phases},
                             {"noise", so.noise_sd},
                             {"gaps", so.gap_fraction},
                             {"n", so.n},
                             {"span", so.span},
                             {"seed", so.seed}}},
                           {"result_n", ts.size()}};
            detail::emit(em, out_path, meta_path, out);
        }
        return ExitCode::ok;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.is_numeric() ? ExitCode::numeric_error : ExitCode::input_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return ExitCode::input_error;
    }
}

inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.push_back("gvspec");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), in, out, err);
}

} // namespace gvspec::cli

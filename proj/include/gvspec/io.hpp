#pragma once

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"

#include "gvspec/detail/numfmt.hpp"
#include "gvspec/engine.hpp"
#include "gvspec/error.hpp"
#include "gvspec/fourier.hpp"
#include "gvspec/peaks.hpp"
#include "gvspec/preprocess.hpp"
#include "gvspec/stats.hpp"

namespace gvspec::io {

using json = nlohmann::json;
using detail::format_double;

// JSON cannot carry inf/nan; those travel as strings.
inline json number(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

// --- spectra ---------------------------------------------------------------

inline void write_spectrum_csv(std::ostream& out, const Spectrum& spec) {
    out << "period,frequency,var_percent,db,fidelity\n";
    for (const auto& l : spec.lines)
        out << format_double(l.period) << ',' << format_double(l.frequency) << ','
            << format_double(100.0 * l.var_fraction) << ',' << format_double(l.db) << ','
            << format_double(l.fidelity) << '\n';
}

inline json spectrum_metadata(const Spectrum& spec) {
    json grid = {{"count", spec.lines.size()}, {"spacing", std::string(to_string(spec.spacing))}};
    if (!spec.lines.empty()) {
        grid["fmin"] = spec.lines.front().frequency;
        grid["fmax"] = spec.lines.back().frequency;
    }
    return {{"method", "gauss-vanicek"},
            {"n", spec.n},
            {"u", spec.u},
            {"nu", spec.nu},
            {"alpha", spec.alpha},
            {"critical_s", spec.critical_s},
            {"critical_var_percent", 100.0 * spec.critical_s},
            {"kappa", spec.kappa},
            {"span", spec.span},
            {"constituents", spec.constituents.name()},
            {"grid", grid},
            {"singular_lines", spec.singular_lines}};
}

inline void write_fourier_csv(std::ostream& out, const FourierSpectrum& fs) {
    out << "period,frequency,power\n";
    for (std::size_t k = 0; k < fs.power.size(); ++k)
        out << format_double(1.0 / fs.frequencies[k]) << ',' << format_double(fs.frequencies[k]) << ','
            << format_double(fs.power[k]) << '\n';
}

inline json fourier_metadata(const FourierSpectrum& fs) {
    return {{"method", "fourier"},
            {"n", fs.n},
            {"dt", fs.dt},
            {"bins", fs.power.size()},
            {"normalization", "|X_k|^2/N"},
            {"power_of_two", std::has_single_bit(fs.n)}};
}

inline json alignment_json(const AlignmentReport& rep) {
    json matches = json::array();
    for (const auto& m : rep.matches)
        matches.push_back({{"fourier_frequency", m.fourier_frequency},
                           {"fourier_power", m.fourier_power},
                           {"gv_frequency", m.gv_frequency ? json(*m.gv_frequency) : json(nullptr)},
                           {"distance_bins", number(m.distance_bins)},
                           {"within", m.within}});
    return {{"aligned", rep.aligned}, {"bin_width", rep.bin_width}, {"tol_bins", rep.tol_bins}, {"matches", matches}};
}

// --- preprocessing provenance ------------------------------------------------

inline json step_json(const PreprocessStep& step) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ResampleStep>) {
                return {{"step", "resample"}, {"dt", s.dt}};
            } else if constexpr (std::is_same_v<T, PadStep>) {
                return {{"step", "pad"}, {"count", s.count}};
            } else if constexpr (std::is_same_v<T, DetrendStep>) {
                return {{"step", "detrend"},
                        {"order", s.order},
                        {"center", s.center},
                        {"scale", s.scale},
                        {"coefficients", s.coefficients}};
            } else {
                return {{"step", "restore"}, {"zeros_removed", s.zeros_removed}, {"repeats_removed", s.repeats_removed}};
            }
        },
        step);
}

inline json report_json(const PreprocessReport& rep) {
    json steps = json::array();
    for (const auto& s : rep.steps) steps.push_back(step_json(s));
    return {{"original_n", rep.original_n}, {"result_n", rep.result_n}, {"steps", steps}};
}

// --- peak tables --------------------------------------------------------------

inline void write_peak_table_csv(std::ostream& out, const PeakTable& table) {
    out << "period,frequency,var_percent,db,fidelity,significant,fidelity_pass\n";
    for (const auto& p : table.peaks)
        out << format_double(p.period) << ',' << format_double(p.frequency) << ','
            << format_double(100.0 * p.var_fraction) << ',' << format_double(p.db) << ','
            << format_double(p.fidelity) << ',' << (p.significant ? 1 : 0) << ',' << (p.fidelity_pass ? 1 : 0)
            << '\n';
}

/// Aligned columns: Period, Fidelity (Phi), GVS (var%), Power (decibel),
/// grouped above/below the confidence level.
inline void write_peak_table_text(std::ostream& out, const PeakTable& table, std::string_view unit = "Myr") {
    char buf[160];
    const auto hdr = "Period (" + std::string(unit) + ")";
    std::snprintf(buf, sizeof buf, "%-16s %16s %12s %16s\n", hdr.c_str(), "Fidelity (Phi)", "GVS (var%)",
                  "Power (decibel)");
    out << buf;
    const double conf = 100.0 * (1.0 - table.alpha);
    for (int group = 0; group < 2; ++group) {
        const bool want = group == 0;
        std::snprintf(buf, sizeof buf, "%s %g%% confidence level at %.2f var%%\n", want ? "Above" : "Below", conf,
                      100.0 * table.critical_s);
        out << buf;
        for (const auto& p : table.peaks) {
            if (p.significant != want) continue;
            std::snprintf(buf, sizeof buf, "%-16.5f %16.5f %12.4f %16.5f%s\n", p.period, p.fidelity,
                          100.0 * p.var_fraction, p.db, p.fidelity_pass ? "" : "  (Phi below threshold)");
            out << buf;
        }
    }
}

inline json peak_table_json(const PeakTable& table) {
    json peaks = json::array();
    for (const auto& p : table.peaks)
        peaks.push_back({{"period", p.period},
                         {"frequency", p.frequency},
                         {"var_percent", 100.0 * p.var_fraction},
                         {"db", number(p.db)},
                         {"fidelity", p.fidelity},
                         {"significant", p.significant},
                         {"fidelity_pass", p.fidelity_pass}});
    return {{"critical_s", table.critical_s},
            {"alpha", table.alpha},
            {"fidelity_threshold", table.fidelity_threshold},
            {"peaks", peaks}};
}

inline json ab_json(const AbReport& rep) {
    return {{"new_significant_count", rep.new_significant_count},
            {"db_range_raw", rep.db_range_raw},
            {"db_range_altered", rep.db_range_altered},
            {"raw", {{"spectrum", spectrum_metadata(rep.raw_spectrum)}, {"peaks", peak_table_json(rep.raw_table)}}},
            {"altered",
             {{"spectrum", spectrum_metadata(rep.altered_spectrum)}, {"peaks", peak_table_json(rep.altered_table)}}},
            {"alteration", report_json(rep.alteration)}};
}

// --- Monte-Carlo thresholds ---------------------------------------------------------

inline void write_mc_csv(std::ostream& out, const MonteCarloResult& mc) {
    out << "frequency,s_crit_empirical,s_crit_analytic\n";
    for (std::size_t i = 0; i < mc.frequencies.size(); ++i)
        out << format_double(mc.frequencies[i]) << ',' << format_double(mc.empirical_critical[i]) << ','
            << format_double(mc.analytic_critical) << '\n';
}

// --- plot data -----------------------------------------------------------------

inline constexpr std::string_view kPlotHeader = "period,frequency,var_percent,db,fidelity,critical_var_percent,peak";

/// Tidy per-line table: spectrum columns, the constant critical level in
/// var%, and a marker ("significant", "insignificant" or blank) on peak lines.
inline void write_plotdata(std::ostream& out, const Spectrum& spec, const PeakTable& peaks) {
    std::vector<std::string_view> marker(spec.lines.size());
    for (const auto& p : peaks.peaks)
        if (p.index < marker.size()) marker[p.index] = p.significant ? "significant" : "insignificant";
    out << kPlotHeader << '\n';
    const std::string crit = format_double(100.0 * spec.critical_s);
    for (std::size_t i = 0; i < spec.lines.size(); ++i) {
        const auto& l = spec.lines[i];
        out << format_double(l.period) << ',' << format_double(l.frequency) << ','
            << format_double(100.0 * l.var_fraction) << ',' << format_double(l.db) << ','
            << format_double(l.fidelity) << ',' << crit << ',' << marker[i] << '\n';
    }
}

inline void emit_plotdata(const Spectrum& spec, const PeakTable& peaks, const std::filesystem::path& path) {
    std::ostringstream buf;
    write_plotdata(buf, spec, peaks);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << buf.str();
    if (!f) throw IoError("write failed for '" + path.string() + "'");
}

struct PlotRow {
    double period = 0.0;
    double frequency = 0.0;
    double var_percent = 0.0;
    double db = 0.0;
    double fidelity = 0.0;
    double critical_var_percent = 0.0;
    std::string peak;
};

inline std::vector<PlotRow> read_plotdata(std::istream& in) {
    std::vector<PlotRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto row = detail::trim(line);
        if (row.empty()) continue;
        if (line_no == 1) {
            if (row != kPlotHeader) throw ParseError(1, "unexpected plot-data header");
            continue;
        }
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        for (;;) {
            const auto comma = row.find(',', start);
            fields.push_back(row.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 7) throw ParseError(line_no, "expected 7 fields");
        const auto num = [&](std::size_t k) {
            const auto f = detail::trim(fields[k]);
            if (f == "-inf") return -std::numeric_limits<double>::infinity();
            const auto v = detail::parse_double(f);
            if (!v) throw ParseError(line_no, "malformed number '" + std::string(f) + "'");
            return *v;
        };
        rows.push_back({num(0), num(1), num(2), num(3), num(4), num(5), std::string(detail::trim(fields[6]))});
    }
    return rows;
}

} // namespace gvspec::io

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <limits>
#include <vector>

#include "gvspec/detail/extrema.hpp"
#include "gvspec/engine.hpp"
#include "gvspec/preprocess.hpp"

namespace gvspec {

struct Peak {
    std::size_t index = 0; // line index in the source spectrum
    double period = 0.0;
    double frequency = 0.0;
    double var_fraction = 0.0;
    double db = 0.0;
    double fidelity = 0.0;
    bool significant = false;
    bool fidelity_pass = false;

    friend bool operator==(const Peak&, const Peak&) = default;
};

/// Significant peaks first, then insignificant; descending period within each group.
struct PeakTable {
    std::vector<Peak> peaks;
    double critical_s = 0.0;
    double alpha = 0.0;
    double fidelity_threshold = kDefaultFidelityThreshold;

    std::size_t significant_count() const {
        return static_cast<std::size_t>(std::ranges::count_if(peaks, [](const Peak& p) { return p.significant; }));
    }

    friend bool operator==(const PeakTable&, const PeakTable&) = default;
};

struct PeakOptions {
    std::size_t min_separation_bins = 2;
    double fidelity_threshold = kDefaultFidelityThreshold;
};

inline void sort_table(std::vector<Peak>& peaks) {
    std::ranges::sort(peaks, [](const Peak& a, const Peak& b) {
        if (a.significant != b.significant) return a.significant;
        return a.period > b.period;
    });
}

/// Interior strict local maxima of the variance spectrum. Candidates are
/// accepted strongest first; one closer than `min_separation_bins` lines
/// (inclusive) to an accepted peak is dropped.
inline PeakTable find_peaks(const Spectrum& spec, const PeakOptions& opt = {}) {
    PeakTable table;
    table.critical_s = spec.critical_s;
    table.alpha = spec.alpha;
    table.fidelity_threshold = opt.fidelity_threshold;
    if (spec.lines.size() < 3) return table;

    const auto s = spec.var_fractions();
    const auto ranked = detail::top_by_value(detail::local_maxima(s), s, std::numeric_limits<std::size_t>::max());
    std::vector<std::size_t> kept;
    for (std::size_t idx : ranked) {
        const bool crowded = std::ranges::any_of(kept, [&](std::size_t k) {
            const std::size_t d = idx > k ? idx - k : k - idx;
            return d <= opt.min_separation_bins;
        });
        if (!crowded) kept.push_back(idx);
    }
    for (std::size_t idx : kept) {
        const auto& line = spec.lines[idx];
        table.peaks.push_back(Peak{idx, line.period, line.frequency, line.var_fraction, line.db, line.fidelity,
                                   line.var_fraction > spec.critical_s, line.fidelity >= opt.fidelity_threshold});
    }
    sort_table(table.peaks);
    return table;
}

/// Max minus min of the finite dB values.
inline double db_range(const Spectrum& spec) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& l : spec.lines)
        if (std::isfinite(l.db)) {
            lo = std::min(lo, l.db);
            hi = std::max(hi, l.db);
        }
    return hi >= lo ? hi - lo : 0.0;
}

struct AbOptions {
    double dt = 0.25;
    bool pad = true;
    int detrend_order = 3;
    SpectrumOptions spectrum;  // constituents apply to both analyses
    PeakOptions peaks;
};

struct AbReport {
    Spectrum raw_spectrum;
    Spectrum altered_spectrum;
    PeakTable raw_table;
    PeakTable altered_table;
    PreprocessReport alteration;
    std::size_t new_significant_count = 0;
    double db_range_raw = 0.0;
    double db_range_altered = 0.0;
};

/// Raw record versus the same record after value-hold resampling, optional
/// zero padding and polynomial detrending, both analysed on one grid. A
/// significant altered peak is "new" when it lies more than one grid line
/// away from every significant raw peak.
inline AbReport ab_false_peaks(const TimeSeries& raw, const FrequencyGrid& grid, const AbOptions& opt = {}) {
    AbReport rep;
    rep.raw_spectrum = spectrum(raw, grid, opt.spectrum);

    auto stage = step_resample(raw, opt.dt);
    rep.alteration = stage.report;
    if (opt.pad) {
        auto padded = zero_pad_pow2(stage.series);
        rep.alteration.append(padded.report);
        stage.series = std::move(padded.series);
    }
    auto detrended = detrend_poly(stage.series, opt.detrend_order);
    rep.alteration.append(detrended.report);

    rep.altered_spectrum = spectrum(detrended.series, grid, opt.spectrum);
    rep.raw_table = find_peaks(rep.raw_spectrum, opt.peaks);
    rep.altered_table = find_peaks(rep.altered_spectrum, opt.peaks);

    for (const auto& p : rep.altered_table.peaks) {
        if (!p.significant) continue;
        const bool known = std::ranges::any_of(rep.raw_table.peaks, [&](const Peak& q) {
            if (!q.significant) return false;
            const std::size_t d = p.index > q.index ? p.index - q.index : q.index - p.index;
            return d <= 1;
        });
        if (!known) ++rep.new_significant_count;
    }
    rep.db_range_raw = db_range(rep.raw_spectrum);
    rep.db_range_altered = db_range(rep.altered_spectrum);
    return rep;
}

} // namespace gvspec

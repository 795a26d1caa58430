#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "gvspec/peaks.hpp"
#include "gvspec/preprocess.hpp"

using namespace gvspec;

namespace {

Spectrum make_spectrum(const std::vector<double>& s, double critical) {
    Spectrum spec;
    spec.critical_s = critical;
    spec.alpha = 0.01;
    spec.span = 500.0;
    spec.kappa = kDefaultKappa;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = 0.01 * static_cast<double>(i + 1);
        spec.lines.push_back(make_line(f, s[i], spec.span, spec.kappa));
    }
    return spec;
}

} // namespace

TEST_CASE("one sinusoid gives one significant peak", "[peaks]") {
    // n = 100 puts the level near 9%, above the 4.7% first window sidelobe.
    SynthOptions so;
    so.components = {{140.0, 1.0, 0.0}};
    so.n = 100;
    const auto ts = synth(so);
    const auto spec = spectrum(ts, FrequencyGrid::linear_in_period(40.0, 400.0, 400));
    const auto table = find_peaks(spec);
    REQUIRE(table.significant_count() == 1);
    const auto& top = table.peaks.front();
    CHECK(top.significant);
    CHECK(std::abs(top.period - 140.0) < 3.0);
    CHECK(top.index == spec.argmax());
    CHECK(table.critical_s == spec.critical_s);
}

TEST_CASE("monotone spectra have no peaks", "[peaks]") {
    std::vector<double> up(30);
    for (std::size_t i = 0; i < up.size(); ++i) up[i] = 0.01 * static_cast<double>(i + 1);
    CHECK(find_peaks(make_spectrum(up, 0.05)).peaks.empty());
    CHECK(find_peaks(make_spectrum({0.2, 0.3}, 0.05)).peaks.empty());
}

TEST_CASE("two tones give two significant peaks", "[peaks]") {
    SynthOptions so;
    so.components = {{190.0, 1.0, 0.0}, {137.0, 1.0, 0.5}};
    so.noise_sd = 0.05;
    so.n = 120;
    so.span = 1500.0;
    so.seed = 2;
    const auto spec = spectrum(synth(so), FrequencyGrid::linear_in_period(60.0, 400.0, 600));
    const auto table = find_peaks(spec);
    REQUIRE(table.significant_count() == 2);
    CHECK(std::abs(table.peaks[0].period - 190.0) < 5.0);
    CHECK(std::abs(table.peaks[1].period - 137.0) < 5.0);
}

TEST_CASE("peak thinning and ordering", "[peaks]") {
    //                             0    1    2    3    4    5     6    7    8    9    10
    const std::vector<double> s = {0.0, 0.3, 0.1, 0.2, 0.0, 0.04, 0.0, 0.0, 0.5, 0.0, 0.0};
    const auto table = find_peaks(make_spectrum(s, 0.15));
    // index 3 sits two lines from the stronger index 1 and is dropped.
    REQUIRE(table.peaks.size() == 3);
    CHECK(table.significant_count() == 2);
    // Significant group first, each group by descending period (ascending index here).
    CHECK(table.peaks[0].index == 1);
    CHECK(table.peaks[1].index == 8);
    CHECK(table.peaks[2].index == 5);
    CHECK_FALSE(table.peaks[2].significant);

    PeakOptions loose;
    loose.min_separation_bins = 1;
    CHECK(find_peaks(make_spectrum(s, 0.15), loose).peaks.size() == 4);
}

TEST_CASE("peak table properties", "[peaks][property]") {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(0.0, 0.9);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<double> s(5 + gen() % 80);
        for (double& x : s) x = u(gen);
        const auto spec = make_spectrum(s, 0.5);
        const auto table = find_peaks(spec);
        bool seen_insignificant = false;
        for (std::size_t i = 0; i < table.peaks.size(); ++i) {
            const auto& p = table.peaks[i];
            REQUIRE(p.index > 0);
            REQUIRE(p.index + 1 < s.size());
            REQUIRE(s[p.index] > s[p.index - 1]);
            REQUIRE(s[p.index] > s[p.index + 1]);
            REQUIRE(p.significant == (p.var_fraction > 0.5));
            REQUIRE(p.fidelity_pass == (p.fidelity >= kDefaultFidelityThreshold));
            if (!p.significant) seen_insignificant = true;
            REQUIRE(!(seen_insignificant && p.significant));
            if (i > 0 && table.peaks[i - 1].significant == p.significant) REQUIRE(table.peaks[i - 1].period > p.period);
            for (std::size_t j = 0; j < i; ++j) {
                const auto d = p.index > table.peaks[j].index ? p.index - table.peaks[j].index : table.peaks[j].index - p.index;
                REQUIRE(d > 2);
            }
        }
    }
}

TEST_CASE("peaks are invariant to scaling the data", "[peaks][property]") {
    SynthOptions so;
    so.components = {{90.0, 1.0, 0.0}, {33.0, 0.7, 0.0}};
    so.noise_sd = 0.4;
    so.n = 120;
    so.gap_fraction = 0.2;
    so.seed = 8;
    const auto ts = synth(so);
    std::vector<double> scaled(ts.values().begin(), ts.values().end());
    for (double& x : scaled) x = -250.0 * x + 17.0;
    const auto grid = FrequencyGrid::default_for(ts, 700);
    const auto a = find_peaks(spectrum(ts, grid));
    const auto b = find_peaks(spectrum(ts.with_values(scaled), grid));
    REQUIRE(a.peaks.size() == b.peaks.size());
    for (std::size_t i = 0; i < a.peaks.size(); ++i) {
        CHECK(a.peaks[i].index == b.peaks[i].index);
        CHECK(a.peaks[i].significant == b.peaks[i].significant);
        CHECK(a.peaks[i].var_fraction == Catch::Approx(b.peaks[i].var_fraction).epsilon(1e-9));
    }
}

TEST_CASE("db_range ignores empty lines", "[peaks]") {
    auto spec = make_spectrum({0.5, 0.0, 0.1}, 0.2);
    CHECK(std::isinf(spec.lines[1].db));
    CHECK(db_range(spec) == Catch::Approx(10.0 * std::log10(9.0)));
}

TEST_CASE("altering a sparse stepwise record manufactures peaks", "[peaks][ab]") {
    const auto raw = fixture::sparse_stepwise(542);
    REQUIRE(describe(raw).changing_pairs == 40);
    const auto grid = FrequencyGrid::default_for(raw, 1500);
    const auto rep = ab_false_peaks(raw, grid);
    INFO("new=" << rep.new_significant_count << " raw range=" << rep.db_range_raw
                << " altered range=" << rep.db_range_altered);
    CHECK(rep.new_significant_count >= 1);
    CHECK(rep.db_range_altered > rep.db_range_raw);
    REQUIRE(rep.alteration.steps.size() == 3);
    CHECK(std::holds_alternative<ResampleStep>(rep.alteration.steps[0]));
    CHECK(std::holds_alternative<PadStep>(rep.alteration.steps[1]));
    CHECK(std::get<DetrendStep>(rep.alteration.steps[2]).order == 3);
    CHECK(rep.alteration.original_n == raw.size());
    CHECK(rep.altered_spectrum.n == 4096);

    const auto again = ab_false_peaks(raw, grid);
    CHECK(again.new_significant_count == rep.new_significant_count);
    CHECK(again.altered_table == rep.altered_table);
}

TEST_CASE("a dense even record gains nothing from the alteration", "[peaks][ab]") {
    const auto ts = fixture::tones(256, {{40.0, 1.0}, {17.0, 0.6}});
    AbOptions opt;
    opt.dt = 1.0;
    opt.pad = false;
    opt.detrend_order = 0;
    const auto grid = FrequencyGrid::linear_in_frequency(0.005, 0.45, 400);
    const auto rep = ab_false_peaks(ts, grid, opt);
    CHECK(rep.new_significant_count == 0);
    REQUIRE(rep.altered_table.peaks.size() == rep.raw_table.peaks.size());
    for (std::size_t i = 0; i < rep.raw_table.peaks.size(); ++i) {
        CHECK(rep.altered_table.peaks[i].index == rep.raw_table.peaks[i].index);
        CHECK(rep.altered_table.peaks[i].significant == rep.raw_table.peaks[i].significant);
    }
    CHECK(rep.alteration.steps.size() == 2);
}

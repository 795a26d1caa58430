#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "gvspec/detail/numfmt.hpp"
#include "gvspec/detail/polyfit.hpp"
#include "gvspec/error.hpp"
#include "gvspec/timeseries.hpp"

namespace gvspec {

struct ResampleStep {
    double dt = 0.0;
    friend bool operator==(const ResampleStep&, const ResampleStep&) = default;
};

struct PadStep {
    std::size_t count = 0;
    friend bool operator==(const PadStep&, const PadStep&) = default;
};

/// Coefficients are in the scaled variable (t - center) / scale, lowest degree first.
struct DetrendStep {
    int order = 0;
    double center = 0.0;
    double scale = 1.0;
    std::vector<double> coefficients;
    friend bool operator==(const DetrendStep&, const DetrendStep&) = default;
};

struct RestoreStep {
    std::size_t zeros_removed = 0;
    std::size_t repeats_removed = 0;
    friend bool operator==(const RestoreStep&, const RestoreStep&) = default;
};

using PreprocessStep = std::variant<ResampleStep, PadStep, DetrendStep, RestoreStep>;

/// Ordered record of every alteration applied to a series.
struct PreprocessReport {
    std::vector<PreprocessStep> steps;
    std::size_t original_n = 0;
    std::size_t result_n = 0;

    /// Chains `next` (which must start where this report ends).
    PreprocessReport& append(const PreprocessReport& next) {
        if (steps.empty() && original_n == 0) original_n = next.original_n;
        steps.insert(steps.end(), next.steps.begin(), next.steps.end());
        result_n = next.result_n;
        return *this;
    }

    friend bool operator==(const PreprocessReport&, const PreprocessReport&) = default;
};

struct Processed {
    TimeSeries series;
    PreprocessReport report;
};

inline bool contains_zero(const TimeSeries& ts) {
    return std::ranges::any_of(ts.values(), [](double v) { return v == 0.0; });
}

/// Evenly spaced series t0 + k*dt, k = 0..floor(span/dt), each sample holding
/// the value of the latest input epoch at or before it.
inline Processed step_resample(const TimeSeries& ts, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("resampling step must be positive");
    const double span = ts.span();
    if (dt > span)
        throw PreconditionError("step " + detail::format_double(dt) + " exceeds the record span " +
                                detail::format_double(span) + "; output would be a single point");
    const auto t = ts.epochs();
    const auto v = ts.values();
    const double t0 = t.front();
    const auto steps = static_cast<std::size_t>(std::floor(span / dt + 1e-9));
    const double slack = 1e-9 * dt;

    std::vector<double> epochs(steps + 1);
    std::vector<double> values(steps + 1);
    std::size_t j = 0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double tk = t0 + static_cast<double>(k) * dt;
        while (j + 1 < t.size() && t[j + 1] <= tk + slack) ++j;
        epochs[k] = tk;
        values[k] = v[j];
    }
    PreprocessReport report{{ResampleStep{dt}}, ts.size(), epochs.size()};
    return {TimeSeries(std::move(epochs), std::move(values), ts.unit_label()), std::move(report)};
}

inline std::size_t next_pow2(std::size_t n) { return std::bit_ceil(n); }

/// Appends zeros at the continued sampling step until the length is a power
/// of two. Needs evenly spaced input.
inline Processed zero_pad_pow2(const TimeSeries& ts) {
    if (!is_evenly_spaced(ts)) throw PreconditionError("zero padding needs an evenly spaced series");
    const std::size_t n = ts.size();
    const std::size_t target = next_pow2(n);
    const double t0 = ts.first_epoch();
    const double dt = ts.span() / static_cast<double>(n - 1);
    std::vector<double> epochs(ts.epochs().begin(), ts.epochs().end());
    std::vector<double> values(ts.values().begin(), ts.values().end());
    for (std::size_t k = n; k < target; ++k) {
        epochs.push_back(t0 + static_cast<double>(k) * dt);
        values.push_back(0.0);
    }
    PreprocessReport report{{PadStep{target - n}}, n, target};
    return {TimeSeries(std::move(epochs), std::move(values), ts.unit_label()), std::move(report)};
}

/// Subtracts the least-squares polynomial of degree `order` in epoch.
inline Processed detrend_poly(const TimeSeries& ts, int order) {
    if (order < 0) throw DegreesOfFreedomError("detrending order must be non-negative");
    if (ts.size() < static_cast<std::size_t>(order) + 2)
        throw DegreesOfFreedomError("detrending with order " + std::to_string(order) + " needs at least " +
                                    std::to_string(order + 2) + " samples, got " + std::to_string(ts.size()));
    const detail::PolynomialProjector proj(ts.epochs(), order);
    std::vector<double> r(ts.values().begin(), ts.values().end());
    DetrendStep step{order, proj.center(), proj.scale(), proj.coefficients(ts.values())};
    proj.residualize(r);
    PreprocessReport report{{std::move(step)}, ts.size(), ts.size()};
    return {ts.with_values(std::move(r)), std::move(report)};
}

/// Deletes exact zeros, then keeps only the first sample of each run of
/// consecutive equal values.
inline Processed restore(const TimeSeries& ts) {
    const auto t = ts.epochs();
    const auto v = ts.values();
    std::vector<double> epochs;
    std::vector<double> values;
    RestoreStep step;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (v[i] == 0.0) {
            ++step.zeros_removed;
            continue;
        }
        if (!values.empty() && values.back() == v[i]) {
            ++step.repeats_removed;
            continue;
        }
        epochs.push_back(t[i]);
        values.push_back(v[i]);
    }
    if (values.size() < 2)
        throw EmptyRecordError("restoration leaves " + std::to_string(values.size()) + " sample(s)");
    PreprocessReport report{{step}, ts.size(), values.size()};
    return {TimeSeries(std::move(epochs), std::move(values), ts.unit_label()), std::move(report)};
}

struct SynthComponent {
    double period = 1.0;
    double amplitude = 1.0;
    double phase = 0.0; // radians
};

struct SynthOptions {
    std::vector<SynthComponent> components;
    double noise_sd = 0.0;
    double gap_fraction = 0.0;
    std::size_t n = 100;
    double span = 500.0;
    std::uint64_t seed = 1;
};

/// Sum of sinusoids a*sin(2*pi*t/P + phase) plus Gaussian noise on n evenly
/// spaced epochs over [0, span], with round(gap_fraction*(n-2)) interior
/// samples deleted at random. Deterministic for a given seed.
inline TimeSeries synth(const SynthOptions& opt) {
    if (opt.n < 4) throw PreconditionError("synthetic record needs n >= 4");
    if (!(opt.gap_fraction >= 0.0 && opt.gap_fraction < 1.0))
        throw PreconditionError("gap fraction must lie in [0, 1)");
    if (!(opt.span > 0.0)) throw PreconditionError("span must be positive");
    if (!(opt.noise_sd >= 0.0)) throw PreconditionError("noise sd must be non-negative");
    for (const auto& c : opt.components)
        if (!(c.period > 0.0)) throw PreconditionError("component periods must be positive");

    std::mt19937_64 gen(opt.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> epochs(opt.n);
    std::vector<double> values(opt.n);
    for (std::size_t i = 0; i < opt.n; ++i) {
        const double t = opt.span * static_cast<double>(i) / static_cast<double>(opt.n - 1);
        double y = 0.0;
        for (const auto& c : opt.components) y += c.amplitude * std::sin(2.0 * std::numbers::pi * t / c.period + c.phase);
        epochs[i] = t;
        values[i] = y;
    }
    if (opt.noise_sd > 0.0)
        for (double& y : values) y += opt.noise_sd * normal(gen);

    const auto drop = static_cast<std::size_t>(std::lround(opt.gap_fraction * static_cast<double>(opt.n - 2)));
    if (drop == 0) return TimeSeries(std::move(epochs), std::move(values));

    std::vector<std::size_t> interior(opt.n - 2);
    std::iota(interior.begin(), interior.end(), std::size_t{1});
    std::shuffle(interior.begin(), interior.end(), gen);
    std::vector<char> keep(opt.n, 1);
    for (std::size_t k = 0; k < drop; ++k) keep[interior[k]] = 0;
    std::vector<double> te;
    std::vector<double> ve;
    for (std::size_t i = 0; i < opt.n; ++i)
        if (keep[i]) {
            te.push_back(epochs[i]);
            ve.push_back(values[i]);
        }
    return TimeSeries(std::move(te), std::move(ve));
}

} // namespace gvspec

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gvspec/detail/numfmt.hpp"
#include "gvspec/detail/parallel.hpp"
#include "gvspec/detail/polyfit.hpp"
#include "gvspec/error.hpp"
#include "gvspec/significance.hpp"
#include "gvspec/timeseries.hpp"

namespace gvspec {

// ---------------------------------------------------------------------------
// Frequency grid
// ---------------------------------------------------------------------------

enum class SpacingMode { linear_in_frequency, linear_in_period, custom };

inline std::string_view to_string(SpacingMode m) {
    switch (m) {
    case SpacingMode::linear_in_frequency: return "linear-in-frequency";
    case SpacingMode::linear_in_period: return "linear-in-period";
    case SpacingMode::custom: return "custom";
    }
    return "custom";
}

/// Trial frequencies in cycles per time unit, strictly increasing and positive.
class FrequencyGrid {
public:
    explicit FrequencyGrid(std::vector<double> frequencies, SpacingMode mode = SpacingMode::custom)
        : f_(std::move(frequencies)), mode_(mode) {
        if (f_.empty()) throw ValidationError("frequency grid is empty");
        for (std::size_t i = 0; i < f_.size(); ++i) {
            if (!std::isfinite(f_[i]) || !(f_[i] > 0.0))
                throw ValidationError("grid frequencies must be finite and positive");
            if (i > 0 && !(f_[i] > f_[i - 1])) throw ValidationError("grid frequencies must be strictly increasing");
        }
    }

    static FrequencyGrid linear_in_frequency(double fmin, double fmax, std::size_t count) {
        if (count == 0) throw ValidationError("grid needs at least one frequency");
        if (!(fmin > 0.0) || !(fmax >= fmin) || (count > 1 && !(fmax > fmin)))
            throw ValidationError("invalid frequency range [" + detail::format_double(fmin) + ", " +
                                  detail::format_double(fmax) + "]");
        std::vector<double> f(count);
        for (std::size_t i = 0; i < count; ++i)
            f[i] = count == 1 ? fmin : fmin + (fmax - fmin) * static_cast<double>(i) / static_cast<double>(count - 1);
        if (count > 1) f.back() = fmax;
        return FrequencyGrid(std::move(f), SpacingMode::linear_in_frequency);
    }

    /// Periods evenly spaced in [pmin, pmax]; stored in ascending frequency.
    static FrequencyGrid linear_in_period(double pmin, double pmax, std::size_t count) {
        if (count == 0) throw ValidationError("grid needs at least one frequency");
        if (!(pmin > 0.0) || !(pmax >= pmin) || (count > 1 && !(pmax > pmin)))
            throw ValidationError("invalid period range [" + detail::format_double(pmin) + ", " +
                                  detail::format_double(pmax) + "]");
        std::vector<double> f(count);
        for (std::size_t i = 0; i < count; ++i) {
            const double p = count == 1 ? pmax
                                        : pmax - (pmax - pmin) * static_cast<double>(i) / static_cast<double>(count - 1);
            f[i] = 1.0 / p;
        }
        return FrequencyGrid(std::move(f), SpacingMode::linear_in_period);
    }

    /// `count` frequencies linear from 2/span up to the sampling limit 0.5/min_gap.
    static FrequencyGrid default_for(const TimeSeries& ts, std::size_t count = 2000) {
        const auto st = describe(ts);
        return linear_in_frequency(2.0 / st.span, 0.5 / st.min_gap, count);
    }

    std::span<const double> frequencies() const noexcept { return f_; }
    std::size_t size() const noexcept { return f_.size(); }
    double operator[](std::size_t i) const { return f_[i]; }
    double min() const noexcept { return f_.front(); }
    double max() const noexcept { return f_.back(); }
    SpacingMode mode() const noexcept { return mode_; }

    /// Local spacing at index i: the larger of the two adjacent gaps.
    double step(std::size_t i) const {
        if (f_.size() < 2) return 0.0;
        const double left = i > 0 ? f_[i] - f_[i - 1] : 0.0;
        const double right = i + 1 < f_.size() ? f_[i + 1] - f_[i] : 0.0;
        return std::max(left, right);
    }

    /// Index of the grid frequency closest to f.
    std::size_t nearest(double f) const {
        const auto it = std::lower_bound(f_.begin(), f_.end(), f);
        if (it == f_.begin()) return 0;
        if (it == f_.end()) return f_.size() - 1;
        const auto hi = static_cast<std::size_t>(it - f_.begin());
        return (f_[hi] - f) < (f - f_[hi - 1]) ? hi : hi - 1;
    }

    friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

private:
    std::vector<double> f_;
    SpacingMode mode_;
};

/// Throws unless every grid frequency respects 0.5/min_gap of `ts`, or the
/// caller explicitly allows scanning above it.
inline void check_sampling_limit(const FrequencyGrid& grid, const TimeSeries& ts, bool allow_above) {
    if (allow_above) return;
    const double limit = 0.5 / describe(ts).min_gap;
    if (grid.max() > limit * (1.0 + 1e-12))
        throw ValidationError("grid reaches " + detail::format_double(grid.max()) +
                              " cycles/unit, above the sampling limit " + detail::format_double(limit) +
                              " (override to scan anyway)");
}

// ---------------------------------------------------------------------------
// Constituents and residualization
// ---------------------------------------------------------------------------

/// Known constituents removed before scanning: datum (order 0), datum plus
/// linear trend (order 1) or datum plus polynomial of order k.
struct Constituents {
    int poly_order = 0;

    static Constituents datum() { return {0}; }
    static Constituents linear() { return {1}; }
    static Constituents poly(int k) { return {k}; }

    std::size_t count() const noexcept { return static_cast<std::size_t>(poly_order + 1); }

    std::string name() const {
        if (poly_order == 0) return "datum";
        if (poly_order == 1) return "datum+linear";
        return "datum+poly" + std::to_string(poly_order);
    }

    /// Accepts "datum", "datum+linear", "datum+polyK", "datum+poly:K" and "datum+poly(K)".
    static Constituents parse(std::string_view s) {
        if (s == "datum") return datum();
        if (s == "datum+linear" || s == "linear") return linear();
        std::string_view rest = s;
        if (rest.starts_with("datum+")) rest.remove_prefix(6);
        if (!rest.starts_with("poly")) throw ValidationError("unknown constituents '" + std::string(s) + "'");
        rest.remove_prefix(4);
        if (rest.starts_with(":")) rest.remove_prefix(1);
        if (rest.starts_with("(") && rest.ends_with(")")) rest = rest.substr(1, rest.size() - 2);
        const auto k = detail::parse_double(rest);
        if (!k || *k < 0 || *k != std::floor(*k) || *k > 64)
            throw ValidationError("bad polynomial order in '" + std::string(s) + "'");
        return poly(static_cast<int>(*k));
    }

    friend bool operator==(const Constituents&, const Constituents&) = default;
};

struct Residual {
    TimeSeries series;
    std::size_t removed = 0; // u
    std::vector<double> coefficients;
    double center = 0.0;
    double scale = 1.0;
};

/// Least-squares removal of the named constituents from `ts`.
inline Residual residualize(const TimeSeries& ts, Constituents constituents) {
    if (constituents.poly_order < 0) throw DegreesOfFreedomError("negative polynomial order");
    if (ts.size() <= constituents.count())
        throw DegreesOfFreedomError("need more than " + std::to_string(constituents.count()) +
                                    " samples to remove " + constituents.name() + ", got " +
                                    std::to_string(ts.size()));
    const detail::PolynomialProjector proj(ts.epochs(), constituents.poly_order);
    std::vector<double> r(ts.values().begin(), ts.values().end());
    auto coeff = proj.coefficients(ts.values());
    proj.residualize(r);
    return Residual{ts.with_values(std::move(r)), proj.count(), std::move(coeff), proj.center(), proj.scale()};
}

// ---------------------------------------------------------------------------
// Per-frequency projection
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr double kSingularTolerance = 1e-10;

/// Builds an orthonormal basis (u1, u2) of span{cos 2πf t, sin 2πf t} over the
/// epochs, using the phase rotation that makes the two columns orthogonal.
/// Returns the rank (1 when the sine-like column collapses relative to the
/// cosine-like one, in which case u2 is zeroed).
inline int build_trig_basis(std::span<const double> epochs, double t_ref, double f, std::span<double> u1,
                            std::span<double> u2) {
    const std::size_t n = epochs.size();
    const double omega = 2.0 * std::numbers::pi * f;
    double s2 = 0.0;
    double c2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double th = omega * (epochs[i] - t_ref);
        const double c = std::cos(th);
        const double s = std::sin(th);
        u1[i] = c;
        u2[i] = s;
        s2 += 2.0 * c * s;
        c2 += (c - s) * (c + s);
    }
    const double phi = 0.5 * std::atan2(s2, c2);
    const double cp = std::cos(phi);
    const double sp = std::sin(phi);
    double cc = 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = u1[i] * cp + u2[i] * sp;
        const double s = u2[i] * cp - u1[i] * sp;
        u1[i] = c;
        u2[i] = s;
        cc += c * c;
        ss += s * s;
    }
    // The rotation puts the larger eigenvalue on u1, so cc >= ss.
    const double n1 = 1.0 / std::sqrt(cc);
    for (std::size_t i = 0; i < n; ++i) u1[i] *= n1;
    if (ss <= kSingularTolerance * cc) {
        std::fill(u2.begin(), u2.end(), 0.0);
        return 1;
    }
    const double n2 = 1.0 / std::sqrt(ss);
    for (std::size_t i = 0; i < n; ++i) u2[i] *= n2;
    return 2;
}

/// r . r_hat for the least-squares fit of r onto the basis.
inline double fitted_energy(std::span<const double> r, std::span<const double> u1, std::span<const double> u2) {
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        a += r[i] * u1[i];
        b += r[i] * u2[i];
    }
    return a * a + b * b;
}

inline double dot_self(std::span<const double> r) {
    double acc = 0.0;
    for (double x : r) acc += x * x;
    return acc;
}

inline double clamp_fraction(double s) {
    static const double below_one = std::nextafter(1.0, 0.0);
    return std::clamp(s, 0.0, below_one);
}

} // namespace detail

struct Projection {
    double var_fraction = 0.0;
    bool singular = false; // trigonometric columns degenerate at this frequency
};

/// Fraction of the residual's energy explained by the least-squares
/// sinusoid at frequency f. A rank-deficient cos/sin pair falls back to the
/// minimum-norm solution and sets `singular`.
inline Projection projection_at(const TimeSeries& residual, double f) {
    if (!(f > 0.0) || !std::isfinite(f)) throw DomainError("frequency must be positive");
    if (residual.size() < 4) throw DegreesOfFreedomError("projection needs at least 4 samples");
    const auto r = residual.values();
    const double rr = detail::dot_self(r);
    if (rr == 0.0) throw UndefinedSpectrumError("residual is identically zero");
    std::vector<double> u1(r.size());
    std::vector<double> u2(r.size());
    const int rank = detail::build_trig_basis(residual.epochs(), residual.first_epoch(), f, u1, u2);
    return {detail::clamp_fraction(detail::fitted_energy(r, u1, u2) / rr), rank < 2};
}

// ---------------------------------------------------------------------------
// dB and fidelity
// ---------------------------------------------------------------------------

/// Log-odds form of a variance fraction: 10 log10(s / (1 - s)).
inline double var_to_db(double s) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("var_to_db needs s in (0, 1), got " + detail::format_double(s));
    return 10.0 * std::log10(s / (1.0 - s));
}

inline constexpr double kDefaultKappa = 16.48;
inline constexpr double kDefaultFidelityThreshold = 12.0;

/// Peak fidelity (kappa * period / span)^2. Grows with the square of the
/// period within one analysis.
inline double fidelity(double period, double span, double kappa = kDefaultKappa) {
    if (!(period > 0.0) || !(span > 0.0) || !(kappa > 0.0))
        throw DomainError("fidelity needs positive period, span and kappa");
    const double x = kappa * period / span;
    return x * x;
}

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

struct SpectralLine {
    double frequency = 0.0;
    double period = 0.0;
    double var_fraction = 0.0;
    double db = 0.0; // -inf when var_fraction == 0
    double fidelity = 0.0;

    friend bool operator==(const SpectralLine&, const SpectralLine&) = default;
};

struct SpectrumOptions {
    Constituents constituents = Constituents::datum();
    double alpha = 0.01;
    double kappa = kDefaultKappa;
    bool allow_above_sampling_limit = false;
    unsigned threads = 0; // 0: hardware concurrency
};

struct Spectrum {
    std::vector<SpectralLine> lines;
    std::size_t n = 0;
    std::size_t u = 0;
    std::size_t nu = 0;
    double alpha = 0.01;
    double critical_s = 0.0;
    double kappa = kDefaultKappa;
    double span = 0.0;
    Constituents constituents;
    SpacingMode spacing = SpacingMode::custom;
    std::vector<std::size_t> singular_lines; // indices with rank-deficient cos/sin pairs

    std::size_t size() const noexcept { return lines.size(); }

    std::vector<double> var_fractions() const {
        std::vector<double> s(lines.size());
        for (std::size_t i = 0; i < lines.size(); ++i) s[i] = lines[i].var_fraction;
        return s;
    }

    std::size_t argmax() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < lines.size(); ++i)
            if (lines[i].var_fraction > lines[best].var_fraction) best = i;
        return best;
    }

    /// Larger of the two adjacent frequency gaps at line i.
    double step(std::size_t i) const {
        if (lines.size() < 2) return 0.0;
        const double left = i > 0 ? lines[i].frequency - lines[i - 1].frequency : 0.0;
        const double right = i + 1 < lines.size() ? lines[i + 1].frequency - lines[i].frequency : 0.0;
        return std::max(left, right);
    }

    friend bool operator==(const Spectrum&, const Spectrum&) = default;
};

inline SpectralLine make_line(double f, double s, double span, double kappa) {
    SpectralLine line;
    line.frequency = f;
    line.period = 1.0 / f;
    line.var_fraction = s;
    line.db = s > 0.0 ? var_to_db(s) : -std::numeric_limits<double>::infinity();
    line.fidelity = fidelity(line.period, span, kappa);
    return line;
}

/// Variance spectrum of `ts` over `grid`: residualize the constituents, then
/// project the residual onto each trial frequency independently. Frequencies
/// are split across threads in fixed chunks; every line depends only on its
/// own frequency, so the result is identical for any thread count.
inline Spectrum spectrum(const TimeSeries& ts, const FrequencyGrid& grid, const SpectrumOptions& opt = {}) {
    check_sampling_limit(grid, ts, opt.allow_above_sampling_limit);
    if (!(opt.kappa > 0.0)) throw DomainError("kappa must be positive");

    Spectrum out;
    out.n = ts.size();
    out.u = opt.constituents.count();
    out.nu = degrees_of_freedom(out.n, out.u);
    out.alpha = opt.alpha;
    out.critical_s = critical_var(opt.alpha, out.n, out.u);
    out.kappa = opt.kappa;
    out.span = ts.span();
    out.constituents = opt.constituents;
    out.spacing = grid.mode();

    const Residual res = residualize(ts, opt.constituents);
    const auto r = res.series.values();
    const auto t = res.series.epochs();
    const double rr = detail::dot_self(r);
    const double yy = detail::dot_self(ts.values());
    if (rr == 0.0 || rr <= 1e-24 * yy)
        throw UndefinedSpectrumError("nothing left to analyse after removing " + opt.constituents.name());

    out.lines.resize(grid.size());
    std::vector<char> singular(grid.size(), 0);
    detail::parallel_for_chunks(grid.size(), opt.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> u1(t.size());
        std::vector<double> u2(t.size());
        for (std::size_t i = begin; i < end; ++i) {
            const int rank = detail::build_trig_basis(t, t.front(), grid[i], u1, u2);
            const double s = detail::clamp_fraction(detail::fitted_energy(r, u1, u2) / rr);
            out.lines[i] = make_line(grid[i], s, out.span, opt.kappa);
            singular[i] = rank < 2;
        }
    });
    for (std::size_t i = 0; i < singular.size(); ++i)
        if (singular[i]) out.singular_lines.push_back(i);
    return out;
}

} // namespace gvspec

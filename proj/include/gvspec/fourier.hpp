#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "gvspec/detail/extrema.hpp"
#include "gvspec/detail/numfmt.hpp"
#include "gvspec/engine.hpp"
#include "gvspec/error.hpp"

namespace gvspec {

/// Periodogram |X_k|^2 / N at k = 1..floor(N/2) (DC excluded).
struct FourierSpectrum {
    std::vector<double> frequencies;
    std::vector<double> power;
    std::size_t n = 0;
    double dt = 0.0;

    double bin_width() const noexcept { return 1.0 / (static_cast<double>(n) * dt); }
};

enum class DftPath { automatic, direct, fast };

namespace detail {

inline void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        for (std::size_t k = 0; k < half; ++k) {
            // Twiddles from the exact angle, not by repeated multiplication.
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
            const std::complex<double> w(std::cos(ang), std::sin(ang));
            for (std::size_t i = 0; i < n; i += len) {
                const auto u = a[i + k];
                const auto v = a[i + k + half] * w;
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

inline std::vector<double> direct_power(std::span<const double> x, std::size_t bins) {
    const std::size_t n = x.size();
    std::vector<double> p(bins);
    for (std::size_t k = 1; k <= bins; ++k) {
        double re = 0.0;
        double im = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t m = (j * k) % n;
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
            re += x[j] * std::cos(ang);
            im += x[j] * std::sin(ang);
        }
        p[k - 1] = (re * re + im * im) / static_cast<double>(n);
    }
    return p;
}

} // namespace detail

/// Classical periodogram of evenly spaced values. Power-of-two lengths use a
/// radix-2 transform, other lengths direct summation.
inline FourierSpectrum dft_power(std::span<const double> values, double dt, DftPath path = DftPath::automatic) {
    const std::size_t n = values.size();
    if (n < 4) throw ValidationError("Fourier power needs at least 4 values");
    if (!(dt > 0.0)) throw ValidationError("sampling step must be positive");
    const bool pow2 = std::has_single_bit(n);
    if (path == DftPath::fast && !pow2) throw PreconditionError("fast transform needs a power-of-two length");

    FourierSpectrum out;
    out.n = n;
    out.dt = dt;
    const std::size_t bins = n / 2;
    out.frequencies.resize(bins);
    for (std::size_t k = 1; k <= bins; ++k)
        out.frequencies[k - 1] = static_cast<double>(k) / (static_cast<double>(n) * dt);

    if (path == DftPath::direct || (path == DftPath::automatic && !pow2)) {
        out.power = detail::direct_power(values, bins);
        return out;
    }
    std::vector<std::complex<double>> a(values.begin(), values.end());
    detail::fft_inplace(a);
    out.power.resize(bins);
    for (std::size_t k = 1; k <= bins; ++k) out.power[k - 1] = std::norm(a[k]) / static_cast<double>(n);
    return out;
}

/// Periodogram of an evenly spaced series; the sampling step is taken from its epochs.
inline FourierSpectrum dft_power(const TimeSeries& ts, DftPath path = DftPath::automatic) {
    if (!is_evenly_spaced(ts)) throw ValidationError("Fourier power needs an evenly spaced series");
    return dft_power(ts.values(), ts.span() / static_cast<double>(ts.size() - 1), path);
}

struct PeakMatch {
    double fourier_frequency = 0.0;
    double fourier_power = 0.0;
    std::optional<double> gv_frequency;
    double distance_bins = std::numeric_limits<double>::infinity();
    bool within = false;
};

struct AlignmentReport {
    std::vector<PeakMatch> matches;
    double bin_width = 0.0;
    double tol_bins = 0.0;
    bool aligned = true;
};

/// Takes the `top_k` strongest interior local maxima of each spectrum and,
/// for every Fourier peak, finds the nearest of the GV peaks. Distances are
/// measured in Fourier bins 1/(N*dt); a match needs distance <= tol_bins.
inline AlignmentReport compare_peaks(const Spectrum& gv, const FourierSpectrum& fs, std::size_t top_k,
                                     double tol_bins = 1.0) {
    if (gv.lines.empty() || fs.frequencies.empty()) throw ComparisonError("cannot compare an empty spectrum");
    const double lo = std::max(gv.lines.front().frequency, fs.frequencies.front());
    const double hi = std::min(gv.lines.back().frequency, fs.frequencies.back());
    if (lo > hi) throw ComparisonError("GV and Fourier spectra cover disjoint frequency ranges");

    AlignmentReport rep;
    rep.bin_width = fs.bin_width();
    rep.tol_bins = tol_bins;
    if (top_k == 0) return rep;

    const auto s = gv.var_fractions();
    const auto gv_top = detail::top_by_value(detail::local_maxima(s), s, top_k);
    const auto fs_top = detail::top_by_value(detail::local_maxima(fs.power), fs.power, top_k);

    for (std::size_t k : fs_top) {
        PeakMatch m;
        m.fourier_frequency = fs.frequencies[k];
        m.fourier_power = fs.power[k];
        for (std::size_t g : gv_top) {
            const double d = std::abs(gv.lines[g].frequency - m.fourier_frequency) / rep.bin_width;
            if (d < m.distance_bins) {
                m.distance_bins = d;
                m.gv_frequency = gv.lines[g].frequency;
            }
        }
        m.within = m.gv_frequency.has_value() && m.distance_bins <= tol_bins;
        rep.aligned = rep.aligned && m.within;
        rep.matches.push_back(m);
    }
    if (fs_top.size() < top_k || gv_top.size() < top_k) rep.aligned = false;
    return rep;
}

} // namespace gvspec

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "gvspec/timeseries.hpp"

namespace fixture {

/// Irregular record of `changes + 1` samples over [0, span] whose values
/// are random levels, each one different from the last.
inline gvspec::TimeSeries sparse_stepwise(std::uint64_t seed, std::size_t changes = 40, double span = 542.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> pos(0.0, span);
    std::uniform_real_distribution<double> level(50.0, 150.0);
    std::vector<double> t = {0.0, span};
    while (t.size() < changes + 1) {
        const double x = std::round(pos(gen) * 4.0) / 4.0;
        bool clash = false;
        for (double y : t) clash = clash || std::abs(x - y) < 1.0;
        if (!clash) t.push_back(x);
    }
    std::sort(t.begin(), t.end());
    std::vector<double> v(t.size());
    for (auto& x : v) x = std::round(level(gen));
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] == v[i - 1]) v[i] += 1.0;
    return gvspec::TimeSeries(t, v);
}

/// Demeaned two-or-more-tone record on 0..n-1.
inline gvspec::TimeSeries tones(std::size_t n, const std::vector<std::pair<double, double>>& period_amp) {
    std::vector<double> t(n), v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = static_cast<double>(i);
        for (auto [p, a] : period_amp) v[i] += a * std::sin(2.0 * std::numbers::pi * t[i] / p);
    }
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(n);
    for (double& x : v) x -= m;
    return gvspec::TimeSeries(t, v);
}

} // namespace fixture

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gvspec/detail/parallel.hpp"
#include "gvspec/detail/polyfit.hpp"
#include "gvspec/engine.hpp"
#include "gvspec/error.hpp"
#include "gvspec/significance.hpp"

namespace gvspec {

enum class NullModel {
    white_noise, // independent standard normal values
    random_walk, // cumulative sum of unit-variance normal steps
};

inline std::string_view to_string(NullModel m) {
    return m == NullModel::white_noise ? "white" : "random-walk";
}

inline NullModel parse_null_model(std::string_view s) {
    if (s == "white" || s == "white-noise") return NullModel::white_noise;
    if (s == "random-walk" || s == "randomwalk") return NullModel::random_walk;
    throw ValidationError("unknown null model '" + std::string(s) + "'");
}

struct SignificanceConfig {
    double alpha = 0.01;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    NullModel null_model = NullModel::white_noise;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
        if (trials < 100) throw ValidationError("at least 100 Monte-Carlo trials are required");
    }
};

struct MonteCarloResult {
    std::vector<double> frequencies;
    std::vector<double> empirical_critical;
    double analytic_critical = 0.0;
    std::vector<std::size_t> exceedances; // trials with s > analytic_critical, per frequency
    std::vector<char> singular;           // rank-deficient cos/sin pair at this frequency
    std::size_t trials = 0;
    std::size_t n = 0;
    std::size_t u = 0;
    double alpha = 0.0;

    friend bool operator==(const MonteCarloResult&, const MonteCarloResult&) = default;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Independent generator for one trial; depends only on (seed, trial).
inline std::mt19937_64 trial_engine(std::uint64_t seed, std::size_t trial) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(trial))));
}

inline void draw_null(std::mt19937_64& gen, NullModel model, std::span<double> out) {
    std::normal_distribution<double> normal(0.0, 1.0);
    double acc = 0.0;
    for (double& x : out) {
        const double z = normal(gen);
        if (model == NullModel::random_walk) {
            acc += z;
            x = acc;
        } else {
            x = z;
        }
    }
}

inline std::size_t quantile_index(std::size_t trials, double alpha) {
    // Largest index with at most floor(alpha * trials) values strictly above it.
    const auto above = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(trials) + 1e-9));
    return above >= trials ? 0 : trials - 1 - above;
}

} // namespace detail

/// Empirical per-frequency critical variance fractions under a null model.
///
/// Each trial draws fresh null values on `epochs`, removes `constituents`
/// and evaluates the variance spectrum on `grid`. The empirical level is the
/// smallest trial value with at most floor(alpha * trials) trials above it.
/// Trials use generators derived from (seed, trial index) alone, so the
/// output does not depend on the thread count.
inline MonteCarloResult monte_carlo_critical(std::span<const double> epochs, const FrequencyGrid& grid,
                                             const SignificanceConfig& config,
                                             Constituents constituents = Constituents::datum(),
                                             unsigned threads = 0) {
    config.validate();
    const std::size_t n = epochs.size();
    const std::size_t u = constituents.count();
    if (n < 4) throw DegreesOfFreedomError("Monte-Carlo null needs at least 4 epochs");

    MonteCarloResult out;
    out.frequencies.assign(grid.frequencies().begin(), grid.frequencies().end());
    out.analytic_critical = critical_var(config.alpha, n, u);
    out.trials = config.trials;
    out.n = n;
    out.u = u;
    out.alpha = config.alpha;
    out.empirical_critical.resize(grid.size());
    out.exceedances.resize(grid.size());
    out.singular.resize(grid.size());

    const detail::PolynomialProjector proj(epochs, constituents.poly_order);
    const std::size_t trials = config.trials;
    const std::size_t block = std::clamp<std::size_t>(4'000'000 / trials, 1, 256);
    const std::size_t q_index = detail::quantile_index(trials, config.alpha);

    std::vector<double> basis;     // block x 2 x n
    std::vector<double> s_values;  // block x trials
    for (std::size_t f0 = 0; f0 < grid.size(); f0 += block) {
        const std::size_t nf = std::min(block, grid.size() - f0);
        basis.assign(nf * 2 * n, 0.0);
        for (std::size_t j = 0; j < nf; ++j) {
            std::span<double> u1(basis.data() + (2 * j) * n, n);
            std::span<double> u2(basis.data() + (2 * j + 1) * n, n);
            out.singular[f0 + j] = detail::build_trig_basis(epochs, epochs.front(), grid[f0 + j], u1, u2) < 2;
        }
        s_values.assign(nf * trials, 0.0);
        detail::parallel_for_chunks(trials, threads, [&](std::size_t begin, std::size_t end) {
            std::vector<double> r(n);
            for (std::size_t trial = begin; trial < end; ++trial) {
                auto gen = detail::trial_engine(config.seed, trial);
                detail::draw_null(gen, config.null_model, r);
                proj.residualize(r);
                const double rr = detail::dot_self(r);
                for (std::size_t j = 0; j < nf; ++j) {
                    const std::span<const double> u1(basis.data() + (2 * j) * n, n);
                    const std::span<const double> u2(basis.data() + (2 * j + 1) * n, n);
                    const double s = rr > 0.0 ? detail::fitted_energy(r, u1, u2) / rr : 0.0;
                    s_values[j * trials + trial] = detail::clamp_fraction(s);
                }
            }
        });
        for (std::size_t j = 0; j < nf; ++j) {
            auto first = s_values.begin() + static_cast<std::ptrdiff_t>(j * trials);
            auto last = first + static_cast<std::ptrdiff_t>(trials);
            out.exceedances[f0 + j] = static_cast<std::size_t>(
                std::count_if(first, last, [&](double s) { return s > out.analytic_critical; }));
            std::nth_element(first, first + static_cast<std::ptrdiff_t>(q_index), last);
            out.empirical_critical[f0 + j] = *(first + static_cast<std::ptrdiff_t>(q_index));
        }
    }
    return out;
}

inline MonteCarloResult monte_carlo_critical(const TimeSeries& ts, const FrequencyGrid& grid,
                                             const SignificanceConfig& config,
                                             Constituents constituents = Constituents::datum(),
                                             unsigned threads = 0) {
    return monte_carlo_critical(ts.epochs(), grid, config, constituents, threads);
}

} // namespace gvspec

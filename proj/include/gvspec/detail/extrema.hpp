#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace gvspec::detail {

// Indices of interior strict local maxima; endpoints never qualify.
inline std::vector<std::size_t> local_maxima(std::span<const double> y) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i + 1 < y.size(); ++i)
        if (y[i] > y[i - 1] && y[i] > y[i + 1]) idx.push_back(i);
    return idx;
}

// The `k` largest entries among `candidates`, ties broken by lower index.
inline std::vector<std::size_t> top_by_value(std::vector<std::size_t> candidates, std::span<const double> y,
                                             std::size_t k) {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });
    if (candidates.size() > k) candidates.resize(k);
    return candidates;
}

} // namespace gvspec::detail

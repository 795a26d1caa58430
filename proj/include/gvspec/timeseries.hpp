#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gvspec/detail/numfmt.hpp"
#include "gvspec/error.hpp"

namespace gvspec {

/// A possibly gapped, unevenly sampled record. Immutable once constructed;
/// the constructor enforces strictly increasing finite epochs, finite values
/// and at least two samples. The unit label is carried along, never used in
/// arithmetic.
class TimeSeries {
public:
    TimeSeries(std::vector<double> epochs, std::vector<double> values, std::string unit_label = "Myr")
        : epochs_(std::move(epochs)), values_(std::move(values)), unit_label_(std::move(unit_label)) {
        validate();
    }

    std::span<const double> epochs() const noexcept { return epochs_; }
    std::span<const double> values() const noexcept { return values_; }
    const std::string& unit_label() const noexcept { return unit_label_; }

    std::size_t size() const noexcept { return epochs_.size(); }
    double first_epoch() const noexcept { return epochs_.front(); }
    double last_epoch() const noexcept { return epochs_.back(); }
    double span() const noexcept { return epochs_.back() - epochs_.front(); }

    /// Same epochs, new values (length must match).
    TimeSeries with_values(std::vector<double> values) const {
        return TimeSeries(epochs_, std::move(values), unit_label_);
    }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    void validate() const {
        if (epochs_.size() != values_.size())
            throw ValidationError("epochs and values differ in length (" + std::to_string(epochs_.size()) +
                                  " vs " + std::to_string(values_.size()) + ")");
        if (epochs_.size() < 2)
            throw ValidationError("a time series needs at least 2 samples, got " +
                                  std::to_string(epochs_.size()));
        for (std::size_t i = 0; i < epochs_.size(); ++i) {
            if (!std::isfinite(epochs_[i]) || !std::isfinite(values_[i]))
                throw ValidationError("non-finite entry at sample " + std::to_string(i));
            if (i > 0 && !(epochs_[i] > epochs_[i - 1]))
                throw ValidationError(epochs_[i] == epochs_[i - 1]
                                          ? "duplicate epoch " + detail::format_double(epochs_[i])
                                          : "decreasing epoch at sample " + std::to_string(i));
        }
    }

    std::vector<double> epochs_;
    std::vector<double> values_;
    std::string unit_label_;
};

struct SeriesStats {
    std::size_t n = 0;
    double span = 0.0;
    double min_gap = 0.0;
    double max_gap = 0.0;
    std::size_t constant_pairs = 0; // consecutive pairs with bitwise-equal values
    std::size_t changing_pairs = 0;
};

inline SeriesStats describe(const TimeSeries& ts) {
    SeriesStats st;
    const auto t = ts.epochs();
    const auto v = ts.values();
    st.n = ts.size();
    st.span = ts.span();
    st.min_gap = std::numeric_limits<double>::infinity();
    st.max_gap = 0.0;
    for (std::size_t i = 1; i < st.n; ++i) {
        const double gap = t[i] - t[i - 1];
        st.min_gap = std::min(st.min_gap, gap);
        st.max_gap = std::max(st.max_gap, gap);
        if (v[i] == v[i - 1])
            ++st.constant_pairs;
        else
            ++st.changing_pairs;
    }
    return st;
}

/// Ratio of locally constant to locally changing consecutive pairs; +inf when
/// nothing changes.
inline double replication_ratio(const TimeSeries& ts) {
    const auto st = describe(ts);
    if (st.changing_pairs == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(st.constant_pairs) / static_cast<double>(st.changing_pairs);
}

/// True when consecutive gaps agree to `rel_tol` relative to the largest gap.
inline bool is_evenly_spaced(const TimeSeries& ts, double rel_tol = 1e-9) {
    const auto st = describe(ts);
    return (st.max_gap - st.min_gap) <= rel_tol * st.max_gap;
}

/// Reads two-column "epoch,value" text. A single header line is recognised
/// when its first field is not numeric. Blank lines are skipped.
inline TimeSeries load_series(std::istream& in, std::string unit_label = "Myr") {
    std::vector<double> epochs;
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    bool seen_content = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view row = detail::trim(line);
        if (line_no == 1 && row.size() >= 3 && row.substr(0, 3) == "\xEF\xBB\xBF") row.remove_prefix(3);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos) throw ParseError(line_no, "expected two comma-separated fields");
        const std::string_view first = row.substr(0, comma);
        const std::string_view second = row.substr(comma + 1);
        if (second.find(',') != std::string_view::npos)
            throw ParseError(line_no, "expected exactly two fields");
        const auto epoch = detail::parse_double(first);
        if (!seen_content && !epoch) {
            seen_content = true; // header line
            continue;
        }
        seen_content = true;
        const auto value = detail::parse_double(second);
        if (!epoch) throw ParseError(line_no, "malformed epoch '" + std::string(detail::trim(first)) + "'");
        if (!value) throw ParseError(line_no, "malformed value '" + std::string(detail::trim(second)) + "'");
        epochs.push_back(*epoch);
        values.push_back(*value);
    }
    if (in.bad()) throw IoError("read failure while loading series");
    return TimeSeries(std::move(epochs), std::move(values), std::move(unit_label));
}

inline void save_series(std::ostream& out, const TimeSeries& ts) {
    out << "epoch,value\n";
    const auto t = ts.epochs();
    const auto v = ts.values();
    for (std::size_t i = 0; i < ts.size(); ++i)
        out << detail::format_double(t[i]) << ',' << detail::format_double(v[i]) << '\n';
}

} // namespace gvspec

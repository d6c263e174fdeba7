#ifndef UNCON_METRICS_HPP
#define UNCON_METRICS_HPP

// Error measures. E1: signed percentage error of mean totals. E2: mean
// absolute gap between reconstructed and actual cumulative demand over the
// censored days. E3: mean absolute error of final totals.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uncon/errors.hpp"

namespace uncon {

inline double e1(const std::vector<double>& dhat_totals, const std::vector<double>& actual_totals) {
    if (dhat_totals.size() != actual_totals.size() || dhat_totals.empty()) {
        throw ShapeMismatch("e1: totals must be non-empty and of equal length");
    }
    double sd = 0.0;
    double sa = 0.0;
    for (std::size_t i = 0; i < dhat_totals.size(); ++i) {
        sd += dhat_totals[i];
        sa += actual_totals[i];
    }
    if (!(sa > 0.0)) {
        throw InvalidArgument("e1: mean actual total must be positive");
    }
    return 100.0 * (sd - sa) / sa;
}

inline double e2(const std::vector<std::vector<double>>& uncon_cumulative,
                 const std::vector<std::vector<double>>& actual_cumulative) {
    if (uncon_cumulative.size() != actual_cumulative.size()) {
        throw ShapeMismatch("e2: curve counts differ");
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < uncon_cumulative.size(); ++c) {
        if (uncon_cumulative[c].size() != actual_cumulative[c].size()) {
            throw ShapeMismatch("e2: censored window lengths differ for curve " + std::to_string(c));
        }
        for (std::size_t t = 0; t < uncon_cumulative[c].size(); ++t) {
            sum += std::fabs(uncon_cumulative[c][t] - actual_cumulative[c][t]);
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

inline double e3(const std::vector<double>& uncon_totals, const std::vector<double>& actual_totals) {
    if (uncon_totals.size() != actual_totals.size()) {
        throw ShapeMismatch("e3: totals differ in length");
    }
    if (uncon_totals.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < uncon_totals.size(); ++i) {
        sum += std::fabs(uncon_totals[i] - actual_totals[i]);
    }
    return sum / static_cast<double>(uncon_totals.size());
}

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<int> counts;
};

// Equal-width bins over [0, max], closed on the right: (0, w], (w, 2w], ...
// Zero falls in the first bin.
inline Histogram error_histogram(const std::vector<double>& values, int bins) {
    if (bins < 1) {
        throw InvalidArgument("error_histogram: bins must be at least 1");
    }
    Histogram h;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    if (values.empty()) {
        return h;
    }
    h.hi = *std::max_element(values.begin(), values.end());
    const double width = h.hi > 0.0 ? h.hi / bins : 1.0;
    for (double v : values) {
        auto b = static_cast<int>(std::ceil(std::max(v, 0.0) / width)) - 1;
        b = std::clamp(b, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

struct ExperimentReport {
    std::string method;
    double e1 = 0.0;
    std::optional<double> e2;  // absent for methods without daily paths
    double e3 = 0.0;
    std::vector<double> per_curve_e3;
    int n_constrained = 0;
    std::vector<std::uint64_t> seeds;
};

}  // namespace uncon

#endif  // UNCON_METRICS_HPP

#ifndef UNCON_BASELINES_HPP
#define UNCON_BASELINES_HPP

// Comparison methods: truncated-normal EM, projection detruncation (PD),
// their per-day variants, Holt's double exponential smoothing and mean
// imputation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "uncon/curves.hpp"
#include "uncon/errors.hpp"

namespace uncon {

struct UnorderedTask {
    std::vector<double> values;
    std::vector<bool> censored;
    std::vector<double> limits;  // only read for censored entries

    std::size_t censored_count() const {
        return static_cast<std::size_t>(std::count(censored.begin(), censored.end(), true));
    }

    void validate() const {
        if (values.size() != censored.size() || values.size() != limits.size()) {
            throw ShapeMismatch("UnorderedTask: values, censored and limits differ in length");
        }
        if (censored_count() == values.size()) {
            throw NoReferenceCurves("UnorderedTask: no uncensored observations");
        }
    }
};

struct SeriesTask {
    std::vector<double> cumulative;  // observed prefix, non-decreasing
    int horizon = 1;                 // days to forecast
};

struct UnconstrainOutput {
    // Unordered methods: one estimate per censored entry, in task order.
    // Series methods: the cumulative path over the forecast window.
    std::vector<double> unconstrained;
    std::vector<double> daily;  // per-day estimates where the method produces them
    int iterations = 0;
    bool converged = true;
    bool degenerate = false;  // spread collapsed; mean imputation was used
    double mu = 0.0;
    double sigma = 0.0;
};

struct EmOptions {
    double tol = 1e-4;
    int max_iter = 500;
};

namespace detail {

inline const boost::math::normal& std_normal() {
    static const boost::math::normal n(0.0, 1.0);
    return n;
}

inline void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    sd = std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace detail

// E[X | X >= b] for X ~ N(mu, sigma^2).
inline double truncated_normal_mean(double mu, double sigma, double b) {
    const double z = (b - mu) / sigma;
    if (z > 30.0) {
        // Inverse Mills ratio asymptotics: phi/Q = z + 1/z - 2/z^3 + ...
        return mu + sigma * (z + 1.0 / z - 2.0 / (z * z * z));
    }
    const double phi = boost::math::pdf(detail::std_normal(), z);
    const double q = boost::math::cdf(boost::math::complement(detail::std_normal(), z));
    return std::max(b, mu + sigma * phi / q);
}

// The q with P(X >= q) = tau P(X >= b), X ~ N(mu, sigma^2). tau = 0.5 gives
// the conditional median above b.
inline double truncated_normal_quantile(double mu, double sigma, double b, double tau) {
    if (!(tau > 0.0 && tau <= 1.0)) {
        throw InvalidArgument("truncated_normal_quantile: tau must lie in (0, 1]");
    }
    if (tau == 1.0) {
        return b;
    }
    const double z = (b - mu) / sigma;
    const double tail = tau * boost::math::cdf(boost::math::complement(detail::std_normal(), z));
    if (!(tail > std::numeric_limits<double>::min())) {
        // Far tail: Q(z + d) ~ Q(z) exp(-z d) for small d.
        return b - sigma * std::log(tau) / z;
    }
    const double zq = boost::math::quantile(boost::math::complement(detail::std_normal(), tail));
    return std::max(b, mu + sigma * zq);
}

inline UnconstrainOutput mean_impute(const UnorderedTask& task) {
    task.validate();
    UnconstrainOutput out;
    std::vector<double> free;
    for (std::size_t i = 0; i < task.values.size(); ++i) {
        if (!task.censored[i]) {
            free.push_back(task.values[i]);
        }
    }
    detail::mean_sd(free, out.mu, out.sigma);
    for (std::size_t i = 0; i < task.values.size(); ++i) {
        if (task.censored[i]) {
            out.unconstrained.push_back(std::max(task.limits[i], out.mu));
        }
    }
    return out;
}

namespace detail {

// Shared EM skeleton; estep(mu, sigma, b) gives the imputed value.
template <class EStep>
UnconstrainOutput censored_em(const UnorderedTask& task, const EmOptions& opts, EStep estep) {
    task.validate();
    if (!(opts.tol > 0.0)) {
        throw InvalidArgument("em: tol must be positive");
    }
    UnconstrainOutput out;
    std::vector<double> free;
    std::vector<std::size_t> cens;
    for (std::size_t i = 0; i < task.values.size(); ++i) {
        if (task.censored[i]) {
            cens.push_back(i);
        } else {
            free.push_back(task.values[i]);
        }
    }
    double mu = 0.0;
    double sigma = 0.0;
    mean_sd(free, mu, sigma);
    out.mu = mu;
    out.sigma = sigma;
    if (cens.empty()) {
        return out;
    }
    if (sigma < 1e-9) {
        out = mean_impute(task);
        out.degenerate = true;
        return out;
    }
    std::vector<double> est(cens.size());
    std::vector<double> pooled(free);
    pooled.resize(free.size() + cens.size());
    out.converged = false;
    for (int it = 1; it <= opts.max_iter; ++it) {
        double change = 0.0;
        for (std::size_t k = 0; k < cens.size(); ++k) {
            const double v = estep(mu, sigma, task.limits[cens[k]]);
            change = std::max(change, std::fabs(v - (it == 1 ? task.limits[cens[k]] : est[k])));
            est[k] = v;
        }
        std::copy(est.begin(), est.end(), pooled.begin() + static_cast<std::ptrdiff_t>(free.size()));
        mean_sd(pooled, mu, sigma);
        out.iterations = it;
        if (sigma < 1e-9) {
            break;
        }
        if (it > 1 && change < opts.tol) {
            out.converged = true;
            break;
        }
    }
    out.unconstrained = std::move(est);
    out.mu = mu;
    out.sigma = sigma;
    return out;
}

}  // namespace detail

inline UnconstrainOutput em(const UnorderedTask& task, const EmOptions& opts = {}) {
    return detail::censored_em(task, opts, truncated_normal_mean);
}

inline UnconstrainOutput pd(const UnorderedTask& task, double tau = 0.5, const EmOptions& opts = {}) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw InvalidArgument("pd: tau must lie in (0, 1)");
    }
    return detail::censored_em(task, opts, [tau](double mu, double sigma, double b) {
        return truncated_normal_quantile(mu, sigma, b, tau);
    });
}

// Observed final totals across a population; censored curves sit at their limit.
inline UnorderedTask totals_task(const std::vector<BookingCurve>& curves) {
    UnorderedTask task;
    for (const auto& c : curves) {
        task.values.push_back(c.observed_total());
        task.censored.push_back(c.constrained());
        task.limits.push_back(c.observed_total());
    }
    return task;
}

enum class DailyMethod { em, pd };

// EM/PD applied day by day from the first constrained day onward. On each
// day, curves still open supply true observations and closed curves are
// censored at what they recorded that day (0 after closing). Per curve,
// `daily` holds the estimates over its censored days and `unconstrained` the
// cumulative path prefix + running sum.
inline std::vector<UnconstrainOutput> daily_unconstrain(const std::vector<BookingCurve>& curves, DailyMethod method,
                                                        double tau = 0.5, const EmOptions& opts = {}) {
    std::vector<UnconstrainOutput> out(curves.size());
    int t_max = std::numeric_limits<int>::max();
    int horizon = 0;
    for (const auto& c : curves) {
        if (c.constrained()) {
            t_max = std::min(t_max, *c.constrained_from);
        }
        horizon = std::max(horizon, c.horizon());
    }
    if (t_max == std::numeric_limits<int>::max()) {
        return out;
    }
    std::vector<std::vector<int>> observed(curves.size());
    for (std::size_t i = 0; i < curves.size(); ++i) {
        observed[i] = curves[i].observed_daily();
    }
    for (int t = t_max; t < horizon; ++t) {
        UnorderedTask task;
        std::vector<std::size_t> who;
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const bool closed = curves[i].constrained() && *curves[i].constrained_from <= t;
            const double v = observed[i][static_cast<std::size_t>(t)];
            task.values.push_back(v);
            task.censored.push_back(closed);
            task.limits.push_back(v);
            if (closed) {
                who.push_back(i);
            }
        }
        if (who.empty()) {
            continue;
        }
        if (task.censored_count() == task.values.size()) {
            throw NoReferenceCurves("daily unconstraining: no open curve on day index " + std::to_string(t));
        }
        const UnconstrainOutput day = method == DailyMethod::em ? em(task, opts) : pd(task, tau, opts);
        for (std::size_t k = 0; k < who.size(); ++k) {
            UnconstrainOutput& o = out[who[k]];
            o.daily.push_back(day.unconstrained[k]);
            o.iterations = std::max(o.iterations, day.iterations);
            o.converged = o.converged && day.converged;
            o.degenerate = o.degenerate || day.degenerate;
        }
    }
    for (std::size_t i = 0; i < curves.size(); ++i) {
        if (!curves[i].constrained()) {
            continue;
        }
        double running = curves[i].prefix_total();
        for (double d : out[i].daily) {
            running += d;
            out[i].unconstrained.push_back(running);
        }
    }
    return out;
}

inline std::vector<UnconstrainOutput> em_daily(const std::vector<BookingCurve>& curves, const EmOptions& opts = {}) {
    return daily_unconstrain(curves, DailyMethod::em, 0.5, opts);
}

inline std::vector<UnconstrainOutput> pd_daily(const std::vector<BookingCurve>& curves, double tau = 0.5,
                                               const EmOptions& opts = {}) {
    return daily_unconstrain(curves, DailyMethod::pd, tau, opts);
}

// Forecast offsets are snapped to multiples of 2^-30 bookings (error below
// 5e-10). For inputs on that grid below 2^22 every later sum is exact, so
// translating the input translates the forecasts bit for bit.
inline constexpr double kDesQuantum = 0x1p-30;

// Holt's linear method on a cumulative series, smoothing constants picked by
// one-step-ahead SSE over a 0.05 grid. Works relative to the first value so
// that translating the input translates the forecasts.
inline UnconstrainOutput des(const SeriesTask& task) {
    const auto& y = task.cumulative;
    if (y.size() < 3) {
        throw TooFewObservations("des: need at least 3 observations");
    }
    if (task.horizon < 1) {
        throw InvalidArgument("des: horizon must be at least 1");
    }
    const double origin = y.front();
    std::vector<double> z(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        z[i] = y[i] - origin;
    }
    auto run = [&](double alpha, double beta, double& level, double& trend) {
        level = z[0];
        trend = z[1] - z[0];
        double sse = 0.0;
        for (std::size_t t = 1; t < z.size(); ++t) {
            const double pred = level + trend;
            sse += (z[t] - pred) * (z[t] - pred);
            const double prev = level;
            level = alpha * z[t] + (1.0 - alpha) * pred;
            trend = beta * (level - prev) + (1.0 - beta) * trend;
        }
        return sse;
    };
    double best = std::numeric_limits<double>::infinity();
    double best_level = 0.0;
    double best_trend = 0.0;
    for (int a = 1; a <= 19; ++a) {
        for (int b = 1; b <= 19; ++b) {
            double level = 0.0;
            double trend = 0.0;
            const double sse = run(0.05 * a, 0.05 * b, level, trend);
            if (sse < best) {
                best = sse;
                best_level = level;
                best_trend = trend;
            }
        }
    }
    UnconstrainOutput out;
    double floor_value = z.back();
    double prev = z.back();
    for (int h = 1; h <= task.horizon; ++h) {
        const double raw = std::nearbyint((best_level + h * best_trend) / kDesQuantum) * kDesQuantum;
        const double f = std::max(floor_value, raw);
        floor_value = f;
        out.unconstrained.push_back(f + origin);
        out.daily.push_back(f - prev);
        prev = f;
    }
    return out;
}

}  // namespace uncon

#endif  // UNCON_BASELINES_HPP

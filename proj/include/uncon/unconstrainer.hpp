#ifndef UNCON_UNCONSTRAINER_HPP
#define UNCON_UNCONSTRAINER_HPP

// GP unconstraining of a single censored booking curve: train on the
// observed days, forecast daily rates over the censored window, rebuild the
// cumulative curve.

#include <algorithm>
#include <utility>
#include <vector>

#include "uncon/baselines.hpp"
#include "uncon/curves.hpp"
#include "uncon/gp.hpp"

namespace uncon {

inline constexpr int kMinTrainingDays = 10;

struct GpUnconstrainConfig {
    GridConfig grid;
    KernelFamily family = KernelFamily::standard;
    InferenceOptions inference;
};

struct GpUnconstrainResult {
    UnconstrainOutput output;  // daily = forecast rates, unconstrained = cumulative path
    std::vector<std::pair<double, double>> xc_posterior;  // (xc, mass), changepoint family only
    double xc_map = 0.0;
    double rate_before = 0.0;  // mean fitted rate on training days before xc_map
    double rate_after = 0.0;   // and from xc_map on
    std::size_t dropped_points = 0;
};

// Day index i of an h-day horizon maps to i / (h - 1).
inline double scaled_input(int index, int horizon) {
    return static_cast<double>(index) / static_cast<double>(horizon - 1);
}

inline TrainingSet training_set(const BookingCurve& curve) {
    TrainingSet t;
    const int end = curve.constrained() ? *curve.constrained_from : curve.horizon();
    for (int i = 0; i < end; ++i) {
        t.xs.push_back(scaled_input(i, curve.horizon()));
        t.ys.push_back(curve.daily[static_cast<std::size_t>(i)]);
    }
    return t;
}

inline GpUnconstrainResult gp_unconstrain_detailed(const BookingCurve& curve, const GpUnconstrainConfig& cfg) {
    GpUnconstrainResult res;
    if (!curve.constrained()) {
        return res;
    }
    const TrainingSet train = training_set(curve);
    if (static_cast<int>(train.size()) < kMinTrainingDays) {
        throw TooFewObservations("gp_unconstrain: " + std::to_string(train.size()) + " training days, need " +
                                 std::to_string(kMinTrainingDays));
    }
    const int cf = *curve.constrained_from;
    const bool cp = cfg.family == KernelFamily::changepoint;

    std::vector<double> test;
    if (cp) {
        test = train.xs;  // fitted rates on the training days, for the before/after summary
    }
    for (int i = cf; i < curve.horizon(); ++i) {
        test.push_back(scaled_input(i, curve.horizon()));
    }
    const HyperGrid grid =
        cp ? make_changepoint_grid(cfg.grid, train.xs.front(), train.xs.back()) : make_standard_grid(cfg.grid);
    const MarginalResult m = marginalize(train, grid, test, cfg.inference);
    res.dropped_points = m.dropped.size();

    const auto offset = static_cast<Eigen::Index>(cp ? train.size() : 0);
    const auto& rates = m.predictive.rate_mean;
    for (Eigen::Index j = offset; j < rates.size(); ++j) {
        res.output.daily.push_back(rates[j]);
    }
    res.output.unconstrained = reconstruct_cumulative(curve, res.output.daily);

    if (cp) {
        res.xc_posterior = changepoint_posterior(m.grid);
        double best = -1.0;
        for (auto [xc, mass] : res.xc_posterior) {
            if (mass > best) {
                best = mass;
                res.xc_map = xc;
            }
        }
        double sb = 0.0;
        double sa = 0.0;
        int nb = 0;
        int na = 0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            const double r = rates[static_cast<Eigen::Index>(i)];
            if (train.xs[i] < res.xc_map) {
                sb += r;
                ++nb;
            } else {
                sa += r;
                ++na;
            }
        }
        res.rate_before = nb > 0 ? sb / nb : 0.0;
        res.rate_after = na > 0 ? sa / na : 0.0;
    }
    return res;
}

inline UnconstrainOutput gp_unconstrain(const BookingCurve& curve, const GpUnconstrainConfig& cfg) {
    return gp_unconstrain_detailed(curve, cfg).output;
}

inline GpUnconstrainResult gp_unconstrain_cp(const BookingCurve& curve, GpUnconstrainConfig cfg) {
    cfg.family = KernelFamily::changepoint;
    return gp_unconstrain_detailed(curve, cfg);
}

// Holt forecast of a censored curve's cumulative path.
inline UnconstrainOutput des_unconstrain(const BookingCurve& curve) {
    UnconstrainOutput out;
    if (!curve.constrained()) {
        return out;
    }
    const auto cum = curve.cumulative();
    SeriesTask task;
    task.cumulative.assign(cum.begin(), cum.begin() + *curve.constrained_from);
    task.horizon = curve.censored_days();
    out = des(task);
    out.unconstrained = reconstruct_cumulative(curve, out.daily);
    return out;
}

}  // namespace uncon

#endif  // UNCON_UNCONSTRAINER_HPP

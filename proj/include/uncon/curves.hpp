#ifndef UNCON_CURVES_HPP
#define UNCON_CURVES_HPP

// Booking curves, seeded synthetic generators and the two censoring
// procedures (booking limits and fixed pre-departure windows).
//
// Day indexing: index 0 is 140 days before departure, index 139 is the day
// before departure. day_before_departure = horizon - index.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "uncon/errors.hpp"
#include "uncon/rng.hpp"

namespace uncon {

inline constexpr int kHorizon = 140;

struct BookingCurve {
    std::vector<int> daily;               // true daily bookings
    std::optional<int> limit;             // observed cumulative is flat at this value once censored
    std::optional<int> constrained_from;  // first censored day index

    int horizon() const noexcept { return static_cast<int>(daily.size()); }
    bool constrained() const noexcept { return constrained_from.has_value(); }
    int total() const noexcept { return std::accumulate(daily.begin(), daily.end(), 0); }

    std::vector<int> cumulative() const {
        std::vector<int> out(daily.size());
        std::partial_sum(daily.begin(), daily.end(), out.begin());
        return out;
    }

    int censored_days() const noexcept { return constrained() ? horizon() - *constrained_from : 0; }

    // Bookings on fully observed days, i.e. cumulative just before censoring.
    int prefix_total() const noexcept {
        const int end = constrained() ? *constrained_from : horizon();
        return std::accumulate(daily.begin(), daily.begin() + end, 0);
    }

    // What a booking system records. On the day the limit is reached only the
    // seats up to the limit are sold; afterwards nothing is.
    std::vector<int> observed_daily() const {
        std::vector<int> out = daily;
        if (!constrained()) {
            return out;
        }
        const int cf = *constrained_from;
        out[static_cast<std::size_t>(cf)] = std::max(0, *limit - prefix_total());
        std::fill(out.begin() + cf + 1, out.end(), 0);
        return out;
    }

    std::vector<int> observed_cumulative() const {
        const auto obs = observed_daily();
        std::vector<int> out(obs.size());
        std::partial_sum(obs.begin(), obs.end(), out.begin());
        return out;
    }

    int observed_total() const { return constrained() ? *limit : total(); }
};

// Cumulative path over the censored window from daily estimates:
// prefix + running sum, never below the observed cumulative (which is a
// known lower bound on demand).
inline std::vector<double> reconstruct_cumulative(const BookingCurve& curve, const std::vector<double>& daily_estimates) {
    if (static_cast<int>(daily_estimates.size()) != curve.censored_days()) {
        throw ShapeMismatch("reconstruct_cumulative: estimates do not cover the censored window");
    }
    std::vector<double> out(daily_estimates.size());
    if (out.empty()) {
        return out;
    }
    const auto observed = curve.observed_cumulative();
    double running = curve.prefix_total();
    double floor_value = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
        running += daily_estimates[k];
        floor_value = std::max(floor_value, static_cast<double>(observed[static_cast<std::size_t>(*curve.constrained_from) + k]));
        out[k] = std::max(running, floor_value);
    }
    return out;
}

enum class Shape { convex, concave, homogeneous };
enum class RateFamily { piecewise, linear, quadratic, cubic };

inline std::string to_string(Shape s) {
    switch (s) {
        case Shape::convex: return "convex";
        case Shape::concave: return "concave";
        case Shape::homogeneous: return "homogeneous";
    }
    return "?";
}

inline Shape parse_shape(const std::string& s) {
    if (s == "convex") return Shape::convex;
    if (s == "concave") return Shape::concave;
    if (s == "homogeneous") return Shape::homogeneous;
    throw InvalidArgument("unknown shape: " + s);
}

struct RateCurve {
    std::vector<double> lambda;
    RateFamily family = RateFamily::piecewise;
    Shape direction = Shape::homogeneous;
};

struct DppRates {
    std::vector<double> lambda1;  // bookings per booking day
    std::vector<double> lambda2;  // zero-booking gap length, in days
};

// Position of a day index on [0, 1]: 0 at 140 days out, 1 the day before departure.
inline double horizon_position(int index) noexcept {
    return static_cast<double>(index) / (kHorizon - 1);
}

inline BookingCurve sample_poisson_curve(const std::vector<double>& lambda, RandomStream& rng) {
    BookingCurve c;
    c.daily.resize(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        c.daily[i] = static_cast<int>(rng.poisson(lambda[i]));
    }
    return c;
}

// ---------------------------------------------------------------------------
// Experiment 1: piecewise-constant rates in 20-day blocks.

inline RateCurve exp1_rates(Shape shape) {
    RateCurve r;
    r.family = RateFamily::piecewise;
    r.direction = shape;
    r.lambda.resize(kHorizon);
    for (int i = 0; i < kHorizon; ++i) {
        const int block = i / 20;
        switch (shape) {
            case Shape::convex: r.lambda[static_cast<std::size_t>(i)] = 2.0 + block; break;
            case Shape::concave: r.lambda[static_cast<std::size_t>(i)] = 8.0 - block; break;
            case Shape::homogeneous: r.lambda[static_cast<std::size_t>(i)] = 5.0; break;
        }
    }
    return r;
}

inline std::vector<BookingCurve> gen_exp1(Shape shape, int n, Seed seed) {
    const RateCurve rates = exp1_rates(shape);
    std::vector<BookingCurve> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        RandomStream rng(seed, stream_id(StreamTag::curve, static_cast<std::uint32_t>(c)));
        out.push_back(sample_poisson_curve(rates.lambda, rng));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiment 2: 30 linear, 30 quadratic and 30 cubic rate curves.
//
// Convex: lambda = u (0.1 + 5(k+1) t^k), t in [0,1] toward departure, so
// every family averages about 5 per day and k = 1 runs 0.1 -> 10.1. Concave
// curves mirror this in time and fade to 0.1 per day at departure.
// u ~ U(0.85, 1.15) per curve.

inline constexpr int kExp2FamilySize = 30;
inline constexpr double kExp2Jitter = 0.15;
inline constexpr double kExp2Floor = 0.1;
inline constexpr double kExp2Amplitude = 5.0;

inline std::vector<RateCurve> exp2_rates(Shape shape, Seed seed) {
    if (shape == Shape::homogeneous) {
        throw InvalidArgument("exp2 is defined for convex and concave shapes only");
    }
    std::vector<RateCurve> out;
    for (int fam = 0; fam < 3; ++fam) {
        const int k = fam + 1;
        for (int j = 0; j < kExp2FamilySize; ++j) {
            const int c = fam * kExp2FamilySize + j;
            RandomStream rng(seed, stream_id(StreamTag::jitter, static_cast<std::uint32_t>(c)));
            const double u = rng.uniform(1.0 - kExp2Jitter, 1.0 + kExp2Jitter);
            RateCurve r;
            r.family = static_cast<RateFamily>(static_cast<int>(RateFamily::linear) + fam);
            r.direction = shape;
            r.lambda.resize(kHorizon);
            for (int i = 0; i < kHorizon; ++i) {
                const double t = horizon_position(shape == Shape::convex ? i : kHorizon - 1 - i);
                r.lambda[static_cast<std::size_t>(i)] = u * (kExp2Floor + kExp2Amplitude * (k + 1) * std::pow(t, k));
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

inline std::vector<BookingCurve> gen_exp2(Shape shape, Seed seed) {
    const auto rates = exp2_rates(shape, seed);
    std::vector<BookingCurve> out;
    for (std::size_t c = 0; c < rates.size(); ++c) {
        RandomStream rng(seed, stream_id(StreamTag::curve, static_cast<std::uint32_t>(c)));
        out.push_back(sample_poisson_curve(rates[c].lambda, rng));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiment 3: double Poisson process. Gaps between booking days are
// Poisson(lambda2), bookings on a booking day are Poisson(lambda1).
//
// lambda1 = u1 * 1.6 (0.02 + (k+1) t^k), lambda2 = u2 * 4 (1 - t)^1.5 for
// k = 1, 2, 3 (30 curves each), u1, u2 ~ U(0.65, 1.35). The 1.6 scale puts
// the population total near 182 with sd near 35.

inline constexpr double kDppRateScale = 1.6;
inline constexpr double kDppJitter = 0.35;
inline constexpr double kDppFloor = 0.02;  // same relative floor as Exp-2

inline std::vector<DppRates> dpp_rates(Seed seed) {
    std::vector<DppRates> out;
    for (int fam = 0; fam < 3; ++fam) {
        const int k = fam + 1;
        for (int j = 0; j < kExp2FamilySize; ++j) {
            const int c = fam * kExp2FamilySize + j;
            RandomStream rng(seed, stream_id(StreamTag::jitter, static_cast<std::uint32_t>(c)));
            const double u1 = rng.uniform(1.0 - kDppJitter, 1.0 + kDppJitter);
            const double u2 = rng.uniform(1.0 - kDppJitter, 1.0 + kDppJitter);
            DppRates r;
            r.lambda1.resize(kHorizon);
            r.lambda2.resize(kHorizon);
            for (int i = 0; i < kHorizon; ++i) {
                const double t = horizon_position(i);
                r.lambda1[static_cast<std::size_t>(i)] = u1 * kDppRateScale * (kDppFloor + (k + 1) * std::pow(t, k));
                r.lambda2[static_cast<std::size_t>(i)] = u2 * 4.0 * std::pow(1.0 - t, 1.5);
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

// Walk from 140 days out toward departure: draw the gap g of zero-booking
// days, book on the day after the gap, repeat from the following day. A
// booking day whose draw is 0 is redrawn once and then promoted to 1.
inline BookingCurve sample_dpp_curve(const DppRates& rates, RandomStream& rng) {
    const int n = static_cast<int>(rates.lambda1.size());
    BookingCurve c;
    c.daily.assign(static_cast<std::size_t>(n), 0);
    int i = 0;
    while (i < n) {
        const auto gap = rng.poisson(rates.lambda2[static_cast<std::size_t>(i)]);
        const std::int64_t day = i + gap;
        if (day >= n) {
            break;
        }
        const double rate = rates.lambda1[static_cast<std::size_t>(day)];
        auto b = rng.poisson(rate);
        if (b == 0) {
            b = rng.poisson(rate);
        }
        c.daily[static_cast<std::size_t>(day)] = static_cast<int>(std::max<std::int64_t>(b, 1));
        i = static_cast<int>(day) + 1;
    }
    return c;
}

inline std::vector<BookingCurve> gen_dpp(Seed seed) {
    const auto rates = dpp_rates(seed);
    std::vector<BookingCurve> out;
    for (std::size_t c = 0; c < rates.size(); ++c) {
        RandomStream rng(seed, stream_id(StreamTag::curve, static_cast<std::uint32_t>(c)));
        out.push_back(sample_dpp_curve(rates[c], rng));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Changepoint scenarios. The change happens at 60% of the horizon and the
// last 35 days are censored, so the forecast window lies entirely after it.

inline constexpr int kScenarioChangeIndex = 84;
inline constexpr int kScenarioWindow = 35;

struct Scenario {
    int id = 0;
    BookingCurve curve;
    std::vector<double> rates;  // true daily rates
    int changepoint_index = kScenarioChangeIndex;

    double changepoint_x() const noexcept { return horizon_position(changepoint_index); }
    std::vector<double> post_change_rates() const {
        return {rates.begin() + changepoint_index, rates.end()};
    }
};

inline std::vector<double> scenario_rates(int id) {
    if (id < 1 || id > 3) {
        throw InvalidArgument("scenario id must be 1, 2 or 3");
    }
    std::vector<double> r(kHorizon);
    for (int i = 0; i < kHorizon; ++i) {
        const bool after = i >= kScenarioChangeIndex;
        double v = 0.0;
        switch (id) {
            case 1: v = after ? 8.0 : 2.0; break;
            case 2: v = after ? 2.0 : 8.0; break;
            case 3: {
                const double s = static_cast<double>(i) / kScenarioChangeIndex;
                v = after ? 1.5 : 1.0 + 9.0 * s * s;
                break;
            }
        }
        r[static_cast<std::size_t>(i)] = v;
    }
    return r;
}

inline Scenario gen_scenario(int id, Seed seed) {
    Scenario s;
    s.id = id;
    s.rates = scenario_rates(id);
    RandomStream rng(seed, stream_id(StreamTag::scenario, static_cast<std::uint32_t>(id)));
    s.curve = sample_poisson_curve(s.rates, rng);
    const int cf = kHorizon - kScenarioWindow;
    s.curve.constrained_from = cf;
    s.curve.limit = s.curve.prefix_total();
    return s;
}

// ---------------------------------------------------------------------------
// Censoring

namespace detail {

inline double population_sd(const std::vector<double>& v) {
    if (v.empty()) {
        return 0.0;
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / static_cast<double>(v.size()));
}

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace detail

// Censors from the first day on which cumulative bookings exceed the limit.
inline void apply_limit(BookingCurve& curve, int limit) {
    curve.limit.reset();
    curve.constrained_from.reset();
    int cum = 0;
    for (int i = 0; i < curve.horizon(); ++i) {
        cum += curve.daily[static_cast<std::size_t>(i)];
        if (cum > limit) {
            curve.limit = limit;
            curve.constrained_from = i;
            return;
        }
    }
}

struct LimitCensoring {
    std::vector<BookingCurve> curves;
    std::vector<int> limits;
    double realized_fraction = 0.0;
    int attempts = 0;
};

// Per-curve limits b_i ~ N(mu_b, sd_b), rounded, at least 1. sd_b is the sd
// of totals and mu_b is set so that the expected constrained fraction,
// mean_i Phi((total_i - mu_b) / sd_b), equals q. A draw whose realized
// fraction misses q by more than 0.10 is redrawn once. At least one curve is
// always left unconstrained (EM and PD need a reference).
inline LimitCensoring constrain_by_limits(std::vector<BookingCurve> curves, double q, Seed seed) {
    if (!(q > 0.0 && q < 1.0)) {
        throw InvalidArgument("constrain_by_limits: q must lie in (0, 1)");
    }
    LimitCensoring out;
    const std::size_t n = curves.size();
    if (n == 0) {
        out.curves = std::move(curves);
        return out;
    }
    std::vector<double> totals(n);
    for (std::size_t i = 0; i < n; ++i) {
        totals[i] = curves[i].total();
    }
    const double sd = std::max(detail::population_sd(totals), 1.0);
    auto expected_fraction = [&](double mu) {
        double s = 0.0;
        for (double t : totals) {
            s += detail::std_normal_cdf((t - mu) / sd);
        }
        return s / static_cast<double>(n);
    };
    double lo = *std::min_element(totals.begin(), totals.end()) - 10.0 * sd;
    double hi = *std::max_element(totals.begin(), totals.end()) + 10.0 * sd;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (expected_fraction(mid) > q ? lo : hi) = mid;
    }
    const double mu = 0.5 * (lo + hi);

    std::vector<int> limits(n);
    for (int attempt = 0; attempt < 2; ++attempt) {
        RandomStream rng(seed, stream_id(StreamTag::limits, static_cast<std::uint32_t>(attempt)));
        int constrained = 0;
        for (std::size_t i = 0; i < n; ++i) {
            limits[i] = std::max(1, static_cast<int>(std::lround(rng.normal(mu, sd))));
            constrained += totals[i] > limits[i] ? 1 : 0;
        }
        out.attempts = attempt + 1;
        if (std::fabs(static_cast<double>(constrained) / static_cast<double>(n) - q) <= 0.10) {
            break;
        }
    }
    bool any_free = false;
    std::size_t closest = 0;
    for (std::size_t i = 0; i < n; ++i) {
        any_free = any_free || totals[i] <= limits[i];
        if (totals[i] - limits[i] < totals[closest] - limits[closest]) {
            closest = i;
        }
    }
    if (!any_free) {
        limits[closest] = curves[closest].total();
    }
    int constrained = 0;
    for (std::size_t i = 0; i < n; ++i) {
        apply_limit(curves[i], limits[i]);
        constrained += curves[i].constrained() ? 1 : 0;
    }
    out.realized_fraction = static_cast<double>(constrained) / static_cast<double>(n);
    out.curves = std::move(curves);
    out.limits = std::move(limits);
    return out;
}

// Censors the last k_days of m randomly chosen curves in each consecutive
// block of family_size curves. The censoring value is the cumulative on the
// last fully observed day.
inline std::vector<BookingCurve> constrain_window(std::vector<BookingCurve> curves, int k_days, int m, Seed seed,
                                                  int family_size = kExp2FamilySize) {
    if (k_days < 0) {
        throw InvalidArgument("constrain_window: negative window");
    }
    for (auto& c : curves) {
        c.limit.reset();
        c.constrained_from.reset();
        if (k_days >= c.horizon()) {
            throw WindowTooLong("constrain_window: window of " + std::to_string(k_days) +
                                " days leaves no observed data");
        }
    }
    if (k_days == 0) {
        return curves;
    }
    const int n = static_cast<int>(curves.size());
    for (int start = 0, fam = 0; start < n; start += family_size, ++fam) {
        const int size = std::min(family_size, n - start);
        std::vector<int> idx(static_cast<std::size_t>(size));
        std::iota(idx.begin(), idx.end(), start);
        RandomStream rng(seed, stream_id(StreamTag::window, static_cast<std::uint32_t>(fam)));
        const int take = std::min(m, size);
        for (int j = 0; j < take; ++j) {
            const auto r = static_cast<int>(rng.below(static_cast<std::uint64_t>(size - j)));
            std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(j + r)]);
            BookingCurve& c = curves[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
            c.constrained_from = c.horizon() - k_days;
            c.limit = c.prefix_total();
        }
    }
    return curves;
}

// ---------------------------------------------------------------------------
// CSV: curve_id, day_before_departure, daily_bookings, cumulative, limit,
// constrained_from. daily_bookings and cumulative are true demand; limit and
// constrained_from (in days before departure) are empty when absent.

inline void write_curves_csv(std::ostream& os, const std::vector<BookingCurve>& curves) {
    os << "curve_id,day_before_departure,daily_bookings,cumulative,limit,constrained_from\n";
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const BookingCurve& curve = curves[c];
        const auto cum = curve.cumulative();
        const std::string limit = curve.limit ? std::to_string(*curve.limit) : "";
        const std::string cf =
            curve.constrained_from ? std::to_string(curve.horizon() - *curve.constrained_from) : "";
        for (int i = 0; i < curve.horizon(); ++i) {
            os << c << ',' << curve.horizon() - i << ',' << curve.daily[static_cast<std::size_t>(i)] << ','
               << cum[static_cast<std::size_t>(i)] << ',' << limit << ',' << cf << '\n';
        }
    }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

inline std::vector<BookingCurve> read_curves_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw InvalidArgument("read_curves_csv: missing header");
    }
    std::vector<BookingCurve> curves;
    std::vector<std::vector<std::pair<int, int>>> days;  // (day_before_departure, bookings)
    std::vector<std::string> limit_field, cf_field;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 6) {
            throw InvalidArgument("read_curves_csv: expected 6 fields: " + line);
        }
        const auto id = static_cast<std::size_t>(std::stoul(f[0]));
        if (id >= days.size()) {
            days.resize(id + 1);
            limit_field.resize(id + 1);
            cf_field.resize(id + 1);
        }
        days[id].emplace_back(std::stoi(f[1]), std::stoi(f[2]));
        limit_field[id] = f[4];
        cf_field[id] = f[5];
    }
    for (std::size_t id = 0; id < days.size(); ++id) {
        auto& d = days[id];
        std::sort(d.begin(), d.end(), [](auto a, auto b) { return a.first > b.first; });
        BookingCurve c;
        for (auto [day, b] : d) {
            c.daily.push_back(b);
        }
        if (!limit_field[id].empty()) {
            c.limit = std::stoi(limit_field[id]);
        }
        if (!cf_field[id].empty()) {
            c.constrained_from = c.horizon() - std::stoi(cf_field[id]);
        }
        curves.push_back(std::move(c));
    }
    return curves;
}

}  // namespace uncon

#endif  // UNCON_CURVES_HPP

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "uncon/curves.hpp"

using namespace uncon;

namespace {

std::vector<double> totals(const std::vector<BookingCurve>& cs) {
    std::vector<double> t;
    for (const auto& c : cs) t.push_back(c.total());
    return t;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double pop_sd(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / v.size());
}

double zero_fraction(const std::vector<BookingCurve>& cs, int from, int to) {
    int zeros = 0, n = 0;
    for (const auto& c : cs)
        for (int i = from; i < to; ++i, ++n) zeros += c.daily[i] == 0;
    return static_cast<double>(zeros) / n;
}

BookingCurve make_curve(std::vector<int> daily) {
    BookingCurve c;
    c.daily = std::move(daily);
    return c;
}

}  // namespace

// --- Booking curve bookkeeping ----------------------------------------------

TEST(BookingCurve, ObservedViewsUnderALimit) {
    BookingCurve c = make_curve({3, 4, 5, 6, 2});
    apply_limit(c, 9);  // cumulative 3, 7, 12 -> crosses on index 2
    ASSERT_TRUE(c.constrained());
    EXPECT_EQ(*c.constrained_from, 2);
    EXPECT_EQ(c.prefix_total(), 7);
    EXPECT_EQ(c.censored_days(), 3);
    EXPECT_EQ(c.observed_daily(), (std::vector<int>{3, 4, 2, 0, 0}));
    EXPECT_EQ(c.observed_cumulative(), (std::vector<int>{3, 7, 9, 9, 9}));
    EXPECT_EQ(c.observed_total(), 9);
    EXPECT_EQ(c.total(), 20);
}

TEST(BookingCurve, LimitAtOrAboveTotalLeavesCurveFree) {
    BookingCurve c = make_curve({3, 4, 5});
    apply_limit(c, 12);
    EXPECT_FALSE(c.constrained());
    apply_limit(c, 1000);
    EXPECT_FALSE(c.constrained());
    EXPECT_EQ(c.observed_daily(), c.daily);
}

TEST(BookingCurve, ReconstructionKeepsPrefixAndFloor) {
    BookingCurve c = make_curve({3, 4, 5, 6, 2});
    apply_limit(c, 9);
    // Estimates below the partial booking on the crossing day are floored.
    const auto r = reconstruct_cumulative(c, {1.0, 0.5, 3.0});
    ASSERT_EQ(r.size(), 3u);
    EXPECT_DOUBLE_EQ(r[0], 9.0);
    EXPECT_DOUBLE_EQ(r[1], 9.0);
    EXPECT_DOUBLE_EQ(r[2], 11.5);
    EXPECT_THROW(reconstruct_cumulative(c, {1.0}), ShapeMismatch);
}

// --- Experiment 1 -------------------------------------------------------------

TEST(Exp1, RateShapes) {
    const auto cv = exp1_rates(Shape::convex).lambda;
    const auto cc = exp1_rates(Shape::concave).lambda;
    const auto hm = exp1_rates(Shape::homogeneous).lambda;
    ASSERT_EQ(cv.size(), 140u);
    EXPECT_EQ(cv[0], 2.0);
    EXPECT_EQ(cv[19], 2.0);
    EXPECT_EQ(cv[20], 3.0);
    EXPECT_EQ(cv[139], 8.0);
    EXPECT_EQ(cc[0], 8.0);
    EXPECT_EQ(cc[139], 2.0);
    EXPECT_DOUBLE_EQ(std::accumulate(cv.begin(), cv.end(), 0.0), 700.0);
    EXPECT_DOUBLE_EQ(std::accumulate(cc.begin(), cc.end(), 0.0), 700.0);
    EXPECT_DOUBLE_EQ(std::accumulate(hm.begin(), hm.end(), 0.0), 700.0);
}

TEST(Exp1, ConvexTotalsMatchReferencePopulation) {
    // Expected total 700, Poisson sd sqrt(700). A reference sample of 100
    // (mean 696.74, sd 27.93) must sit inside the sampling band, and so must ours.
    const double se = std::sqrt(700.0 / 100.0);
    EXPECT_LT(std::fabs(696.74 - 700.0), 3.0 * se);
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const auto t = totals(gen_exp1(Shape::convex, 100, Seed{s}));
        EXPECT_LT(std::fabs(mean(t) - 700.0), 3.0 * se) << "seed " << s;
        EXPECT_GT(pop_sd(t), 20.0);
        EXPECT_LT(pop_sd(t), 36.0);
    }
}

TEST(Exp1, HomogeneousPerDayMean) {
    const auto cs = gen_exp1(Shape::homogeneous, 100, Seed{3});
    double sum = 0.0;
    for (const auto& c : cs) sum += c.total();
    EXPECT_NEAR(sum / (100.0 * 140.0), 5.0, 3.0 * std::sqrt(5.0 / 14000.0));
}

TEST(Exp1, BlockMeansWithinSamplingBand) {
    for (Shape shape : {Shape::convex, Shape::concave, Shape::homogeneous}) {
        const auto rates = exp1_rates(shape).lambda;
        const auto cs = gen_exp1(shape, 100, Seed{11});
        for (int b = 0; b < 7; ++b) {
            double s = 0.0;
            for (const auto& c : cs)
                for (int i = 20 * b; i < 20 * b + 20; ++i) s += c.daily[i];
            const double lam = rates[20 * b];
            EXPECT_LT(std::fabs(s / 2000.0 - lam), 3.0 * std::sqrt(lam / 2000.0)) << to_string(shape) << " block " << b;
        }
    }
}

TEST(Exp1, Determinism) {
    const auto a = gen_exp1(Shape::convex, 20, Seed{42});
    const auto b = gen_exp1(Shape::convex, 20, Seed{42});
    const auto c = gen_exp1(Shape::convex, 20, Seed{43});
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].daily, b[i].daily);
    EXPECT_NE(totals(a), totals(c));
}

TEST(Exp1, PerCurveStreamsIndependentOfPopulationSize) {
    const auto small = gen_exp1(Shape::concave, 5, Seed{9});
    const auto large = gen_exp1(Shape::concave, 50, Seed{9});
    for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i].daily, large[i].daily);
}

TEST(Exp1, NonNegativeCounts) {
    for (const auto& c : gen_exp1(Shape::convex, 30, Seed{5}))
        for (int d : c.daily) EXPECT_GE(d, 0);
}

// --- Experiment 2 -------------------------------------------------------------

TEST(Exp2, FamiliesAndEndpoints) {
    const auto rates = exp2_rates(Shape::convex, Seed{1});
    ASSERT_EQ(rates.size(), 90u);
    for (int j = 0; j < 90; ++j) {
        const auto& r = rates[j];
        EXPECT_EQ(r.family, static_cast<RateFamily>(1 + j / 30));
        for (double v : r.lambda) EXPECT_GT(v, 0.0);
        // every family starts at 0.1u; the last day is 0.1u + 5(k+1)u
        const double u = r.lambda.front() / 0.1;
        EXPECT_GE(u, 0.85);
        EXPECT_LE(u, 1.15);
        const int k = 1 + j / 30;
        EXPECT_NEAR(r.lambda.back(), (0.1 + 5.0 * (k + 1)) * u, 1e-12);
        // mean daily rate is 5u up to the floor and the discretization
        const double avg = std::accumulate(r.lambda.begin(), r.lambda.end(), 0.0) / 140.0;
        EXPECT_NEAR(avg, 5.1 * u, 0.1 * (k + 1) * u);
        EXPECT_TRUE(std::is_sorted(r.lambda.begin(), r.lambda.end()));
    }
    const auto conc = exp2_rates(Shape::concave, Seed{1});
    for (int j = 0; j < 90; ++j) {
        for (int i = 0; i < 140; ++i) EXPECT_DOUBLE_EQ(conc[j].lambda[i], rates[j].lambda[139 - i]);
    }
    EXPECT_THROW(exp2_rates(Shape::homogeneous, Seed{1}), InvalidArgument);
}

TEST(Exp2, PopulationSpreadInReferenceBand) {
    for (Shape shape : {Shape::convex, Shape::concave}) {
        for (std::uint64_t s = 1; s <= 5; ++s) {
            const auto t = totals(gen_exp2(shape, Seed{s}));
            ASSERT_EQ(t.size(), 90u);
            EXPECT_GE(pop_sd(t), 50.0) << to_string(shape) << " seed " << s;
            EXPECT_LE(pop_sd(t), 85.0) << to_string(shape) << " seed " << s;
            EXPECT_NEAR(mean(t), 700.0, 40.0);
        }
    }
}

// --- Experiment 3 -------------------------------------------------------------

TEST(Dpp, PopulationMomentsInReferenceBand) {
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const auto t = totals(gen_dpp(Seed{s}));
        ASSERT_EQ(t.size(), 90u);
        EXPECT_GE(mean(t), 160.0) << "seed " << s;
        EXPECT_LE(mean(t), 205.0) << "seed " << s;
        EXPECT_GE(pop_sd(t), 25.0) << "seed " << s;
        EXPECT_LE(pop_sd(t), 48.0) << "seed " << s;
    }
}

TEST(Dpp, MoreZeroDaysThanPoissonCurves) {
    for (std::uint64_t s = 1; s <= 3; ++s) {
        const auto dpp = gen_dpp(Seed{s});
        const auto ref = gen_exp2(Shape::convex, Seed{s});
        EXPECT_GT(zero_fraction(dpp, 0, 140), zero_fraction(ref, 0, 140));
        EXPECT_GE(zero_fraction(dpp, 0, 70), 0.25);
    }
}

TEST(Dpp, RatesPositiveAndOriented) {
    for (const auto& r : dpp_rates(Seed{2})) {
        for (double v : r.lambda1) EXPECT_GT(v, 0.0);
        for (int i = 0; i < 139; ++i) EXPECT_GT(r.lambda2[i], 0.0);
        EXPECT_TRUE(std::is_sorted(r.lambda1.begin(), r.lambda1.end()));
        EXPECT_TRUE(std::is_sorted(r.lambda2.rbegin(), r.lambda2.rend()));
    }
}

TEST(Dpp, ZeroGapsBookEveryDay) {
    DppRates r;
    r.lambda1.assign(140, 0.05);  // tiny rate: most draws are 0 and get promoted
    r.lambda2.assign(140, 0.0);
    RandomStream rng(Seed{8}, 0);
    const auto c = sample_dpp_curve(r, rng);
    for (int d : c.daily) EXPECT_GE(d, 1);
}

TEST(Dpp, Determinism) {
    const auto a = gen_dpp(Seed{17});
    const auto b = gen_dpp(Seed{17});
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].daily, b[i].daily);
}

// --- Scenarios ----------------------------------------------------------------

TEST(Scenario, JumpUpOnEverySeed) {
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const Scenario sc = gen_scenario(1, Seed{s});
        double before = 0.0, after = 0.0;
        for (int i = 0; i < 84; ++i) before += sc.curve.daily[i];
        for (int i = 84; i < 140; ++i) after += sc.curve.daily[i];
        EXPECT_GE((after / 56.0) / (before / 84.0), 2.0) << "seed " << s;
    }
}

TEST(Scenario, FlatAfterDrop) {
    // Pooled over 10 seeds, the post-change daily mean sits within 1.5 standard
    // errors of 1.5.
    double sum = 0.0;
    int n = 0;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        const Scenario sc = gen_scenario(3, Seed{s});
        for (int i = 84; i < 140; ++i, ++n) sum += sc.curve.daily[i];
        for (double r : sc.post_change_rates()) EXPECT_EQ(r, 1.5);
    }
    EXPECT_LT(std::fabs(sum / n - 1.5), 1.5 * std::sqrt(1.5 / n));
}

TEST(Scenario, GroundTruthAndCensoring) {
    for (int id = 1; id <= 3; ++id) {
        const Scenario a = gen_scenario(id, Seed{4});
        const Scenario b = gen_scenario(id, Seed{4});
        EXPECT_EQ(a.curve.daily, b.curve.daily);
        EXPECT_EQ(a.changepoint_index, 84);
        EXPECT_NEAR(a.changepoint_x(), 84.0 / 139.0, 1e-15);
        ASSERT_TRUE(a.curve.constrained());
        EXPECT_EQ(*a.curve.constrained_from, 105);
        EXPECT_EQ(*a.curve.limit, a.curve.prefix_total());
        EXPECT_EQ(a.post_change_rates().size(), 56u);
    }
    const auto s3 = scenario_rates(3);
    EXPECT_NEAR(s3[83], 1.0 + 9.0 * std::pow(83.0 / 84.0, 2), 1e-12);
    EXPECT_THROW(scenario_rates(4), InvalidArgument);
}

// --- Censoring ----------------------------------------------------------------

TEST(Limits, TwentyPercentOfCurves) {
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const auto cs = gen_exp1(Shape::convex, 100, Seed{s});
        const auto lc = constrain_by_limits(cs, 0.2, Seed{100 + s});
        int n = 0;
        for (const auto& c : lc.curves) n += c.constrained();
        EXPECT_GE(n, 10) << "seed " << s;
        EXPECT_LE(n, 30) << "seed " << s;
        EXPECT_DOUBLE_EQ(lc.realized_fraction, n / 100.0);
    }
}

TEST(Limits, NinetyEightPercentConstrainsAboutEightDays) {
    double total_len = 0.0;
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const auto cs = gen_exp1(Shape::convex, 100, Seed{s});
        const auto lc = constrain_by_limits(cs, 0.98, Seed{200 + s});
        double len = 0.0;
        int n = 0;
        for (const auto& c : lc.curves) {
            if (c.constrained()) {
                len += c.censored_days();
                ++n;
            }
        }
        ASSERT_GT(n, 0);
        total_len += len / n;
    }
    EXPECT_GE(total_len / 5.0, 4.0);
    EXPECT_LE(total_len / 5.0, 14.0);
}

TEST(Limits, AlwaysLeavesAReferenceCurve) {
    const auto cs = gen_exp1(Shape::convex, 10, Seed{1});
    const auto lc = constrain_by_limits(cs, 0.99, Seed{1});
    EXPECT_TRUE(std::any_of(lc.curves.begin(), lc.curves.end(), [](const auto& c) { return !c.constrained(); }));
}

TEST(Limits, CensoringPreservesPrefix) {
    const auto cs = gen_exp1(Shape::concave, 40, Seed{6});
    const auto lc = constrain_by_limits(cs, 0.6, Seed{7});
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const auto& c = lc.curves[i];
        EXPECT_EQ(c.daily, cs[i].daily);  // true demand untouched
        if (!c.constrained()) {
            EXPECT_LE(c.total(), lc.limits[i]);
            continue;
        }
        const int cf = *c.constrained_from;
        const auto obs = c.observed_cumulative();
        const auto cum = c.cumulative();
        for (int t = 0; t < cf; ++t) EXPECT_EQ(obs[t], cum[t]);
        for (int t = cf; t < 140; ++t) EXPECT_EQ(obs[t], *c.limit);
        EXPECT_GT(cum[cf], *c.limit);
        EXPECT_LE(cf == 0 ? 0 : cum[cf - 1], *c.limit);
    }
}

TEST(Limits, DeterministicAndValidated) {
    const auto cs = gen_exp1(Shape::convex, 30, Seed{1});
    EXPECT_EQ(constrain_by_limits(cs, 0.5, Seed{3}).limits, constrain_by_limits(cs, 0.5, Seed{3}).limits);
    EXPECT_THROW(constrain_by_limits(cs, 0.0, Seed{3}), InvalidArgument);
    EXPECT_THROW(constrain_by_limits(cs, 1.0, Seed{3}), InvalidArgument);
}

TEST(Window, FifteenOfEachThirty) {
    const auto cs = constrain_window(gen_exp2(Shape::convex, Seed{1}), 20, 15, Seed{2});
    int total = 0;
    for (int fam = 0; fam < 3; ++fam) {
        int n = 0;
        for (int j = 0; j < 30; ++j) n += cs[fam * 30 + j].constrained();
        EXPECT_EQ(n, 15);
        total += n;
    }
    EXPECT_EQ(total, 45);
    for (const auto& c : cs) {
        if (!c.constrained()) continue;
        EXPECT_EQ(*c.constrained_from, 120);
        const auto obs = c.observed_cumulative();
        for (int t = 119; t < 140; ++t) EXPECT_EQ(obs[t], obs[119]);
        EXPECT_EQ(*c.limit, c.cumulative()[119]);
    }
}

TEST(Window, ZeroDaysAndTooLong) {
    const auto base = gen_exp2(Shape::concave, Seed{1});
    for (const auto& c : constrain_window(base, 0, 15, Seed{2})) EXPECT_FALSE(c.constrained());
    EXPECT_THROW(constrain_window(base, 140, 15, Seed{2}), WindowTooLong);
    EXPECT_NO_THROW(constrain_window(base, 139, 15, Seed{2}));
}

TEST(Window, SelectionDependsOnSeed) {
    const auto base = gen_exp2(Shape::convex, Seed{1});
    auto chosen = [&](std::uint64_t s) {
        std::set<int> out;
        const auto cs = constrain_window(base, 10, 15, Seed{s});
        for (int i = 0; i < 90; ++i)
            if (cs[i].constrained()) out.insert(i);
        return out;
    };
    EXPECT_EQ(chosen(5), chosen(5));
    EXPECT_NE(chosen(5), chosen(6));
}

// --- CSV ----------------------------------------------------------------------

TEST(Csv, RoundTrip) {
    auto cs = constrain_window(gen_exp2(Shape::convex, Seed{3}), 10, 15, Seed{4});
    cs.resize(35);
    std::stringstream ss;
    write_curves_csv(ss, cs);
    const auto back = read_curves_csv(ss);
    ASSERT_EQ(back.size(), cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) {
        EXPECT_EQ(back[i].daily, cs[i].daily);
        EXPECT_EQ(back[i].limit, cs[i].limit);
        EXPECT_EQ(back[i].constrained_from, cs[i].constrained_from);
    }
}

TEST(Csv, HeaderAndEmptyOptionals) {
    std::vector<BookingCurve> cs{make_curve({1, 2, 3})};
    std::stringstream ss;
    write_curves_csv(ss, cs);
    EXPECT_EQ(ss.str(),
              "curve_id,day_before_departure,daily_bookings,cumulative,limit,constrained_from\n"
              "0,3,1,1,,\n0,2,2,3,,\n0,1,3,6,,\n");
}

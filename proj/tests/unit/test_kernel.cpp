#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "uncon/kernel.hpp"

using namespace uncon;

namespace {

std::vector<double> random_inputs(std::mt19937_64& rng, int n, bool sorted = false) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (auto& x : xs) x = u(rng);
    if (sorted) std::sort(xs.begin(), xs.end());
    return xs;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

TEST(PolyKernel, Examples) {
    EXPECT_DOUBLE_EQ(poly_kernel(0.5, 0.5, {1.0, 0.75, 1.0}), 1.0);
    EXPECT_DOUBLE_EQ(poly_kernel(0.0, 0.9, {2.0, 1.0, 2.0}), 4.0);
    using big = boost::multiprecision::cpp_bin_float_50;
    const double ref = static_cast<double>(big("2.25") * boost::multiprecision::pow(big("0.68"), big("2.5")));
    EXPECT_NEAR(poly_kernel(0.3, 0.6, {1.5, 0.5, 2.5}), ref, 1e-14);
}

TEST(PolyKernel, SymmetricExactly) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0), pos(0.05, 4.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng), y = u(rng);
        const PolyKernelParams p{pos(rng), pos(rng), pos(rng)};
        ASSERT_EQ(poly_kernel(x, y, p), poly_kernel(y, x, p));
        ASSERT_TRUE(std::isfinite(poly_kernel(x, y, p)));
    }
}

TEST(PolyKernel, RejectsInvalidParams) {
    EXPECT_THROW(build_cov(std::vector<double>{0.1}, KernelSpec{PolyKernelParams{1.0, 0.0, 1.0}}), InvalidArgument);
    EXPECT_FALSE((PolyKernelParams{-1.0, 1.0, 1.0}.valid()));
}

TEST(ChangepointKernel, Examples) {
    const PolyKernelParams any{1.3, 0.4, 2.2};
    EXPECT_EQ(changepoint_kernel(0.2, 0.8, {any, any, 0.5}), 0.0);
    EXPECT_DOUBLE_EQ(changepoint_kernel(0.1, 0.3, {{1.0, 1.0, 1.0}, any, 0.5}), 1.03);
    EXPECT_DOUBLE_EQ(changepoint_kernel(0.5, 0.5, {any, {1.0, 0.75, 1.0}, 0.5}), 1.0);
}

TEST(BuildCov, Examples) {
    const std::vector<double> xs{0.0, 1.0};
    const auto k = build_cov(xs, xs, PolyKernelParams{1.0, 1.0, 1.0});
    EXPECT_DOUBLE_EQ(k.entries(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(k.entries(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(k.entries(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(k.entries(1, 1), 2.0);
    EXPECT_FALSE(k.shifted);
}

TEST(BuildCov, ReversedSecondArgumentGivesTranspose) {
    std::mt19937_64 rng(3);
    const auto xs = random_inputs(rng, 6);
    auto rev = xs;
    std::reverse(rev.begin(), rev.end());
    const KernelSpec spec = PolyKernelParams{1.2, 0.3, 2.7};
    const auto a = build_cov(xs, rev, spec).entries;
    const auto b = build_cov(rev, xs, spec).entries;
    EXPECT_EQ((a - b.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(BuildCov, MatchesScalarLoopOracle) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> pos(0.1, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto xs = random_inputs(rng, 5);
        const PolyKernelParams p{pos(rng), pos(rng), pos(rng)};
        const auto k = build_cov(xs, xs, p).entries;
        for (int i = 0; i < 5; ++i) {
            for (int j = 0; j < 5; ++j) {
                const double g = xs[i] * xs[j];
                const double ref = p.sigma * p.sigma * std::pow(g + p.c, p.p);
                EXPECT_NEAR(k(i, j), ref, 1e-12 * ref);
            }
        }
    }
}

TEST(BuildCov, TrainingMatrixSymmetric) {
    std::mt19937_64 rng(5);
    const auto xs = random_inputs(rng, 30);
    const auto k = build_cov(xs, xs, PolyKernelParams{2.0, 0.05, 3.3}).entries;
    EXPECT_EQ((k - k.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(KernelProperty, RankTwoBaseIsPsd) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> cs(0.001, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto xs = random_inputs(rng, 12);
        const auto k = build_cov(xs, xs, PolyKernelParams{1.0, cs(rng), 1.0}).entries;
        EXPECT_GE(min_eigenvalue(k), -1e-10);
    }
}

TEST(KernelProperty, IntegerDegreeIsPsd) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> pos(0.05, 3.0);
    std::uniform_int_distribution<int> sizes(2, 8);
    for (int p : {1, 2, 3}) {
        for (int trial = 0; trial < 50; ++trial) {
            const auto xs = random_inputs(rng, sizes(rng));
            const auto k =
                build_cov(xs, xs, PolyKernelParams{pos(rng), pos(rng), static_cast<double>(p)}).entries;
            EXPECT_GE(min_eigenvalue(k), -1e-8 * k.trace());
        }
    }
}

TEST(KernelProperty, ChangepointBlockStructure) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto xs = random_inputs(rng, 25, true);
        const double xc = 0.2 + 0.6 * (trial / 20.0);
        const ChangepointKernelParams cp{{1.5, 0.2, 2.5}, {0.7, 1.1, 0.6}, xc};
        const auto k = build_cov(xs, xs, cp).entries;
        const auto split = static_cast<Eigen::Index>(std::lower_bound(xs.begin(), xs.end(), xc) - xs.begin());
        const Eigen::Index n = k.rows();
        EXPECT_EQ(k.topRightCorner(split, n - split).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_EQ(k.bottomLeftCorner(n - split, split).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_GT(k.topLeftCorner(split, split).minCoeff(), 0.0);
    }
}

TEST(ApplyShift, Examples) {
    CovMatrix rank1;
    rank1.entries = Eigen::MatrixXd::Ones(2, 2);
    const auto s = apply_shift(rank1, 1.0);
    EXPECT_TRUE(s.shifted);
    EXPECT_DOUBLE_EQ(s.entries(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(s.entries(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(s.shift, 1.0);
    EXPECT_GT(min_eigenvalue(s.entries), 0.0);

    CovMatrix pd;
    pd.entries = Eigen::Matrix2d{{2.0, 0.5}, {0.5, 1.0}};
    const auto same = apply_shift(pd, 0.0);
    EXPECT_TRUE(same.shifted);
    EXPECT_EQ((same.entries - pd.entries).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ApplyShift, EigenvaluesMoveByShift) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const auto xs = random_inputs(rng, 10);
        const auto k = build_cov(xs, xs, PolyKernelParams{1.0, 0.3, 2.5});
        const double d = 0.5 + trial;
        const auto s = apply_shift(k, d);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> a(k.entries, Eigen::EigenvaluesOnly);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> b(s.entries, Eigen::EigenvaluesOnly);
        for (Eigen::Index i = 0; i < 10; ++i) {
            EXPECT_NEAR(b.eigenvalues()[i], a.eigenvalues()[i] + d, 1e-10);
        }
        EXPECT_GE(b.eigenvalues().minCoeff(), 1e-300);
    }
}

TEST(ApplyShift, EscalatesThenFails) {
    CovMatrix neg;
    neg.entries = Eigen::Matrix2d{{-3.0, 0.0}, {0.0, 1.0}};
    // d = 1 fails, 2 fails, 4 succeeds
    const auto s = apply_shift(neg, 1.0);
    EXPECT_DOUBLE_EQ(s.shift, 4.0);

    CovMatrix hopeless;
    hopeless.entries = Eigen::Matrix2d{{-100.0, 0.0}, {0.0, 1.0}};
    try {
        apply_shift(hopeless, 1.0);
        FAIL() << "expected SingularShift";
    } catch (const SingularShift& e) {
        EXPECT_DOUBLE_EQ(e.last_shift(), 8.0);
    }
}

TEST(ApplyShift, RejectsNonSquare) {
    CovMatrix rect;
    rect.entries = Eigen::MatrixXd::Ones(2, 3);
    EXPECT_THROW(apply_shift(rect, 1.0), InvalidArgument);
}

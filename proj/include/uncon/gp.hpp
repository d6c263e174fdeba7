#ifndef UNCON_GP_HPP
#define UNCON_GP_HPP

// Laplace-approximation GP inference for Poisson counts under the softplus
// link, plus hyperparameter marginalization by grid quadrature with a uniform
// prior over grid points.
//
// The prior covariance used for inference is the shifted training matrix
// Kt = K + dI. Mode finding follows the numerically stable Newton scheme in
// terms of B = I + W^1/2 Kt W^1/2, tracking a = Kt^-1 f so that f = Kt a
// holds throughout.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "uncon/errors.hpp"
#include "uncon/kernel.hpp"
#include "uncon/likelihood.hpp"

namespace uncon {

struct TrainingSet {
    std::vector<double> xs;  // scaled inputs in [0, 1], strictly increasing
    std::vector<double> ys;  // non-negative integer counts

    std::size_t size() const noexcept { return xs.size(); }

    void validate() const {
        if (xs.size() != ys.size()) {
            throw InvalidArgument("TrainingSet: xs and ys differ in length");
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i > 0 && !(xs[i] > xs[i - 1])) {
                throw InvalidArgument("TrainingSet: xs must be strictly increasing");
            }
            if (ys[i] < 0.0 || std::floor(ys[i]) != ys[i]) {
                throw InvalidArgument("TrainingSet: ys must be non-negative integers");
            }
        }
    }
};

struct NewtonOptions {
    int max_iter = 100;
    double grad_tol = 1e-6;  // inf-norm of the gradient of the log posterior
    double polish_tol = 1e-10;  // keep stepping toward this while steps still help
    double w_floor = 1e-9;  // lower clamp on W inside B and the predictive covariance
};

struct LaplaceFit {
    Eigen::VectorXd fhat;
    Eigen::VectorXd w;       // -d2 log p(y|f) at fhat, unclamped
    Eigen::VectorXd alpha;   // Kt^-1 fhat
    Eigen::MatrixXd chol_b;  // lower Cholesky factor of B at fhat (clamped W)
    double log_marginal = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
};

enum class ForecastMode { plugin, integrated };

struct PosteriorPredictive {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    Eigen::VectorXd rate_mean;
};

namespace detail {

inline Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

inline double psi_value(const Eigen::VectorXd& ys, const Eigen::VectorXd& f, const Eigen::VectorXd& a) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        s += log_lik(ys[i], f[i]);
    }
    return s - 0.5 * a.dot(f);
}

inline Eigen::VectorXd grad_loglik(const Eigen::VectorXd& ys, const Eigen::VectorXd& f) {
    Eigen::VectorXd g(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        g[i] = dlog_lik(ys[i], f[i]);
    }
    return g;
}

inline Eigen::VectorXd neg_hess_loglik(const Eigen::VectorXd& ys, const Eigen::VectorXd& f) {
    Eigen::VectorXd w(f.size());
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        w[i] = -d2log_lik(ys[i], f[i]);
    }
    return w;
}

inline Eigen::VectorXd clamp_w(const Eigen::VectorXd& w, double floor) {
    return w.cwiseMax(floor);
}

// Lower Cholesky factor of I + diag(sw) K diag(sw).
inline Eigen::MatrixXd chol_b(const Eigen::MatrixXd& k, const Eigen::VectorXd& sw) {
    Eigen::MatrixXd b = sw.asDiagonal() * k * sw.asDiagonal();
    b.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(b);
    if (llt.info() != Eigen::Success) {
        throw NumericalBreakdown("Cholesky of B = I + W^1/2 K W^1/2 failed");
    }
    return llt.matrixL();
}

inline double laplace_log_marginal(const Eigen::VectorXd& ys, const Eigen::VectorXd& f,
                                   const Eigen::VectorXd& alpha, const Eigen::MatrixXd& l) {
    double log_det_half = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        log_det_half += std::log(l(i, i));
    }
    return psi_value(ys, f, alpha) - log_det_half;
}

}  // namespace detail

// Posterior mode of p(f | y) under the prior N(0, Kt).
inline LaplaceFit find_mode(const TrainingSet& train, const CovMatrix& k_shifted,
                            const NewtonOptions& opts = {}) {
    const auto n = static_cast<Eigen::Index>(train.size());
    if (k_shifted.rows() != n || k_shifted.cols() != n) {
        throw InvalidArgument("find_mode: covariance does not match training size");
    }
    LaplaceFit fit;
    if (n == 0) {
        return fit;
    }
    const Eigen::MatrixXd& k = k_shifted.entries;
    const Eigen::VectorXd ys = detail::as_vector(train.ys);

    Eigen::VectorXd f(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        f[i] = softplus_inv(std::max(ys[i], 0.5));
    }
    Eigen::LLT<Eigen::MatrixXd> k_llt(k);
    if (k_llt.info() != Eigen::Success) {
        throw NumericalBreakdown("find_mode: shifted covariance is not positive definite");
    }
    Eigen::VectorXd a = k_llt.solve(f);
    f = k * a;
    double psi = detail::psi_value(ys, f, a);
    double grad_norm = (detail::grad_loglik(ys, f) - a).lpNorm<Eigen::Infinity>();

    int it = 0;
    const double target = std::min(opts.grad_tol, opts.polish_tol);
    int polish = 0;
    while (grad_norm >= target) {
        const bool polishing = grad_norm < opts.grad_tol;
        if (polishing && ++polish > 4) {
            break;  // Newton converges quadratically; more steps only chase rounding
        }
        if (it == opts.max_iter) {
            if (grad_norm < opts.grad_tol) {
                break;
            }
            throw NoConvergence("find_mode: Newton iteration did not converge", it, grad_norm);
        }
        ++it;
        const Eigen::VectorXd g = detail::grad_loglik(ys, f);
        const Eigen::VectorXd w = detail::clamp_w(detail::neg_hess_loglik(ys, f), opts.w_floor);
        const Eigen::VectorXd sw = w.cwiseSqrt();
        const Eigen::MatrixXd l = detail::chol_b(k, sw);
        const Eigen::VectorXd b = w.cwiseProduct(f) + g;
        Eigen::VectorXd c = sw.cwiseProduct(k * b);
        l.triangularView<Eigen::Lower>().solveInPlace(c);
        l.transpose().triangularView<Eigen::Upper>().solveInPlace(c);
        const Eigen::VectorXd da = b - sw.cwiseProduct(c) - a;

        if (polishing) {
            // Near the mode psi is flat to rounding, so judge the full step by
            // the gradient instead.
            const Eigen::VectorXd a_new = a + da;
            const Eigen::VectorXd f_new = k * a_new;
            const double g_new = (detail::grad_loglik(ys, f_new) - a_new).lpNorm<Eigen::Infinity>();
            if (!(g_new < grad_norm)) {
                break;
            }
            a = a_new;
            f = f_new;
            psi = detail::psi_value(ys, f, a);
            grad_norm = g_new;
            continue;
        }

        // Step halving along the Newton direction in a.
        double t = 1.0;
        Eigen::VectorXd a_new, f_new;
        double psi_new = -std::numeric_limits<double>::infinity();
        for (int halving = 0; halving <= 30; ++halving, t *= 0.5) {
            a_new = a + t * da;
            f_new = k * a_new;
            psi_new = detail::psi_value(ys, f_new, a_new);
            if (psi_new >= psi) {
                break;
            }
        }
        if (!(psi_new >= psi)) {
            throw NoConvergence("find_mode: line search failed to improve the objective", it, grad_norm);
        }
        a = std::move(a_new);
        f = std::move(f_new);
        psi = psi_new;
        grad_norm = (detail::grad_loglik(ys, f) - a).lpNorm<Eigen::Infinity>();
    }

    fit.fhat = f;
    fit.alpha = a;
    fit.w = detail::neg_hess_loglik(ys, f);
    fit.chol_b = detail::chol_b(k, detail::clamp_w(fit.w, opts.w_floor).cwiseSqrt());
    fit.log_marginal = detail::laplace_log_marginal(ys, f, a, fit.chol_b);
    fit.grad_norm = grad_norm;
    fit.iterations = it;
    return fit;
}

// Laplace approximation of log p(y | theta):
//   log p(y|fhat) - 1/2 fhat^T Kt^-1 fhat - 1/2 log det B.
inline double log_marginal(const LaplaceFit& fit, const TrainingSet& train, const CovMatrix& k_shifted,
                           const NewtonOptions& opts = {}) {
    if (train.size() == 0) {
        return 0.0;
    }
    const Eigen::VectorXd ys = detail::as_vector(train.ys);
    const Eigen::VectorXd w = detail::neg_hess_loglik(ys, fit.fhat);
    const Eigen::MatrixXd l =
        detail::chol_b(k_shifted.entries, detail::clamp_w(w, opts.w_floor).cwiseSqrt());
    const double value = detail::laplace_log_marginal(ys, fit.fhat, fit.alpha, l);
    if (!std::isfinite(value)) {
        throw NumericalBreakdown("log_marginal: non-finite value");
    }
    return value;
}

// 16-point Gauss-Hermite rule (physicists' weight e^{-x^2}) by Golub-Welsch.
struct GaussHermite {
    static constexpr int kPoints = 16;
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;

    static const GaussHermite& rule() {
        static const GaussHermite instance = [] {
            Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(kPoints, kPoints);
            for (int i = 1; i < kPoints; ++i) {
                jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(0.5 * i);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
            GaussHermite gh;
            gh.nodes = es.eigenvalues();
            gh.weights.resize(kPoints);
            for (int i = 0; i < kPoints; ++i) {
                const double v0 = es.eigenvectors()(0, i);
                gh.weights[i] = std::sqrt(std::numbers::pi) * v0 * v0;
            }
            return gh;
        }();
        return instance;
    }

    // E[g(Z)] for Z ~ N(mean, var).
    template <typename F>
    double expect_normal(F&& g, double mean, double var) const {
        const double scale = std::sqrt(2.0 * std::max(var, 0.0));
        double s = 0.0;
        for (int i = 0; i < kPoints; ++i) {
            s += weights[i] * g(mean + scale * nodes[i]);
        }
        return s / std::sqrt(std::numbers::pi);
    }
};

namespace detail {

inline Eigen::VectorXd forecast_rates(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                      ForecastMode mode) {
    Eigen::VectorXd rate(mean.size());
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
        rate[i] = mode == ForecastMode::plugin
                      ? softplus(mean[i])
                      : GaussHermite::rule().expect_normal([](double f) { return softplus(f); },
                                                           mean[i], cov(i, i));
    }
    return rate;
}

}  // namespace detail

// Predictive over latent values at test inputs. The mean uses the shifted
// form Ks^T Kt^-1 fhat; the covariance is Kss - Ks^T W^1/2 B^-1 W^1/2 Ks.
inline PosteriorPredictive predict(const LaplaceFit& fit, const TrainingSet& train, const KernelSpec& spec,
                                   std::span<const double> test_xs, ForecastMode mode = ForecastMode::plugin,
                                   const NewtonOptions& opts = {}) {
    PosteriorPredictive out;
    const auto m = static_cast<Eigen::Index>(test_xs.size());
    out.mean = Eigen::VectorXd::Zero(m);
    out.rate_mean = Eigen::VectorXd::Zero(m);
    out.cov = build_cov(test_xs, test_xs, spec).entries;
    if (m == 0) {
        return out;
    }
    if (train.size() > 0) {
        const Eigen::MatrixXd ks = build_cov(train.xs, test_xs, spec).entries;
        out.mean = ks.transpose() * fit.alpha;
        const Eigen::VectorXd sw = detail::clamp_w(fit.w, opts.w_floor).cwiseSqrt();
        Eigen::MatrixXd v = sw.asDiagonal() * ks;
        fit.chol_b.triangularView<Eigen::Lower>().solveInPlace(v);
        out.cov.noalias() -= v.transpose() * v;
        out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        if (out.cov(i, i) < 0.0) {
            out.cov(i, i) = 0.0;
        }
    }
    out.rate_mean = detail::forecast_rates(out.mean, out.cov, mode);
    return out;
}

// ---------------------------------------------------------------------------
// Hyperparameter grids

struct AxisRange {
    double lo = 0.0;
    double hi = 0.0;
    int points = 1;

    std::vector<double> values() const {
        std::vector<double> v(static_cast<std::size_t>(std::max(points, 0)));
        for (int i = 0; i < points; ++i) {
            v[static_cast<std::size_t>(i)] =
                points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (points - 1);
        }
        return v;
    }
};

struct GridConfig {
    AxisRange log_sigma{std::log(0.1), std::log(10.0), 7};
    AxisRange log_c{std::log(0.01), std::log(2.0), 5};
    AxisRange p{0.25, 4.0, 7};
    int cp_side_points = 3;  // per-axis resolution on each side of the changepoint
    int xc_points = 9;
};

struct GridAxis {
    std::string name;
    std::vector<double> values;
};

struct HyperGrid {
    std::vector<GridAxis> axes;
    std::vector<KernelSpec> points;
    std::vector<double> weights;  // filled by marginalize

    std::size_t size() const noexcept { return points.size(); }
};

inline std::vector<PolyKernelParams> poly_param_product(const AxisRange& log_sigma, const AxisRange& log_c,
                                                        const AxisRange& p) {
    std::vector<PolyKernelParams> out;
    for (double ls : log_sigma.values()) {
        for (double lc : log_c.values()) {
            for (double pp : p.values()) {
                out.push_back({std::exp(ls), std::exp(lc), pp});
            }
        }
    }
    return out;
}

inline HyperGrid make_standard_grid(const GridConfig& cfg = {}) {
    HyperGrid grid;
    grid.axes = {{"log_sigma", cfg.log_sigma.values()}, {"log_c", cfg.log_c.values()}, {"p", cfg.p.values()}};
    for (const auto& params : poly_param_product(cfg.log_sigma, cfg.log_c, cfg.p)) {
        grid.points.emplace_back(params);
    }
    return grid;
}

// Changepoint locations are xc_points evenly spaced strictly inside
// (x_lo, x_hi), the span of the training inputs.
inline std::vector<double> changepoint_locations(const GridConfig& cfg, double x_lo, double x_hi) {
    std::vector<double> xcs;
    for (int k = 1; k <= cfg.xc_points; ++k) {
        xcs.push_back(x_lo + (x_hi - x_lo) * static_cast<double>(k) / (cfg.xc_points + 1));
    }
    return xcs;
}

inline HyperGrid make_changepoint_grid(const GridConfig& cfg, double x_lo, double x_hi) {
    if (!(x_hi > x_lo)) {
        throw InvalidArgument("make_changepoint_grid: empty training range");
    }
    const AxisRange ls{cfg.log_sigma.lo, cfg.log_sigma.hi, cfg.cp_side_points};
    const AxisRange lc{cfg.log_c.lo, cfg.log_c.hi, cfg.cp_side_points};
    const AxisRange pp{cfg.p.lo, cfg.p.hi, cfg.cp_side_points};
    const auto side = poly_param_product(ls, lc, pp);
    const auto xcs = changepoint_locations(cfg, x_lo, x_hi);

    HyperGrid grid;
    grid.axes = {{"xc", xcs},
                 {"log_sigma_before", ls.values()}, {"log_c_before", lc.values()}, {"p_before", pp.values()},
                 {"log_sigma_after", ls.values()}, {"log_c_after", lc.values()}, {"p_after", pp.values()}};
    for (double xc : xcs) {
        for (const auto& before : side) {
            for (const auto& after : side) {
                grid.points.emplace_back(ChangepointKernelParams{before, after, xc});
            }
        }
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Single-point fit and marginalization

struct InferenceOptions {
    NewtonOptions newton;
    ShiftOptions shift;
    ForecastMode mode = ForecastMode::plugin;
    // Changepoint kernels are block diagonal, so the Laplace fit splits into
    // independent fits on each side of xc. Disable to fit the joint matrix.
    bool factorize_changepoint = true;
};

struct PointFit {
    LaplaceFit fit;
    PosteriorPredictive predictive;
    double log_marginal = 0.0;
    double shift = 0.0;  // diagonal shift actually used
};

inline PointFit fit_point(const TrainingSet& train, const KernelSpec& spec, std::span<const double> test_xs,
                          const InferenceOptions& opts = {}) {
    const CovMatrix k = apply_shift(build_cov(train.xs, train.xs, spec), opts.shift);
    PointFit out;
    out.shift = k.shift;
    out.fit = find_mode(train, k, opts.newton);
    out.log_marginal = out.fit.log_marginal;
    if (!std::isfinite(out.log_marginal)) {
        throw NumericalBreakdown("fit_point: non-finite log marginal likelihood");
    }
    out.predictive = predict(out.fit, train, spec, test_xs, opts.mode, opts.newton);
    return out;
}

struct MarginalResult {
    PosteriorPredictive predictive;
    HyperGrid grid;                    // with normalized weights (0 for dropped points)
    std::vector<double> log_marginals; // NaN for dropped points
    std::vector<std::size_t> dropped;
    std::vector<std::string> drop_reasons;
};

namespace detail {

struct BlockKey {
    double xc;
    int side;  // 0 before, 1 after
    double sigma, c, p;
    double shift;  // starting shift; negative means the default escalation
    auto tie() const { return std::tie(xc, side, sigma, c, p, shift); }
    bool operator<(const BlockKey& o) const { return tie() < o.tie(); }
};

struct BlockResult {
    bool ok = false;
    std::string reason;
    double log_marginal = 0.0;
    double shift = 0.0;
    PosteriorPredictive predictive;  // over the test points on this side
};

struct SideSplit {
    TrainingSet train[2];
    std::vector<double> test[2];
    std::vector<Eigen::Index> test_index[2];
};

inline SideSplit split_at(const TrainingSet& train, std::span<const double> test_xs, double xc) {
    SideSplit s;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const int side = train.xs[i] >= xc ? 1 : 0;
        s.train[side].xs.push_back(train.xs[i]);
        s.train[side].ys.push_back(train.ys[i]);
    }
    for (std::size_t j = 0; j < test_xs.size(); ++j) {
        const int side = test_xs[j] >= xc ? 1 : 0;
        s.test[side].push_back(test_xs[j]);
        s.test_index[side].push_back(static_cast<Eigen::Index>(j));
    }
    return s;
}

// Mixture of Gaussians given per-point predictives and weights.
class MixtureAccumulator {
public:
    explicit MixtureAccumulator(Eigen::Index m)
        : mean_(Eigen::VectorXd::Zero(m)), second_(Eigen::MatrixXd::Zero(m, m)),
          rate_(Eigen::VectorXd::Zero(m)) {}

    void add(double w, const PosteriorPredictive& p) {
        if (w == 0.0) {
            return;
        }
        mean_.noalias() += w * p.mean;
        second_.noalias() += w * (p.cov + p.mean * p.mean.transpose());
        rate_.noalias() += w * p.rate_mean;
    }

    PosteriorPredictive finish() const {
        PosteriorPredictive out;
        out.mean = mean_;
        out.cov = second_ - mean_ * mean_.transpose();
        out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();
        for (Eigen::Index i = 0; i < out.cov.rows(); ++i) {
            out.cov(i, i) = std::max(out.cov(i, i), 0.0);
        }
        out.rate_mean = rate_;
        return out;
    }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd second_;
    Eigen::VectorXd rate_;
};

inline std::vector<double> softmax_weights(const std::vector<double>& log_m) {
    double top = -std::numeric_limits<double>::infinity();
    for (double v : log_m) {
        if (std::isfinite(v)) {
            top = std::max(top, v);
        }
    }
    std::vector<double> w(log_m.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < log_m.size(); ++i) {
        if (std::isfinite(log_m[i])) {
            w[i] = std::exp(log_m[i] - top);
            total += w[i];
        }
    }
    for (double& v : w) {
        v /= total;
    }
    return w;
}

}  // namespace detail

// Quadrature over the grid: weights proportional to p(y | theta_g).
inline MarginalResult marginalize(const TrainingSet& train, const HyperGrid& grid,
                                  std::span<const double> test_xs, const InferenceOptions& opts = {}) {
    train.validate();
    if (grid.points.empty()) {
        throw InvalidArgument("marginalize: empty grid");
    }
    const auto m = static_cast<Eigen::Index>(test_xs.size());
    const std::size_t g = grid.points.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    MarginalResult result;
    result.grid = grid;
    result.log_marginals.assign(g, nan);
    std::vector<PosteriorPredictive> preds(g);

    // Cached block fits for the factorized changepoint route.
    std::map<double, detail::SideSplit> splits;
    std::map<detail::BlockKey, detail::BlockResult> blocks;
    // A joint Cholesky of a block-diagonal matrix succeeds exactly when both
    // blocks do, so the joint escalation ends at the larger of the two block
    // shifts. A block fitted at a smaller shift is refitted at that one.
    auto block = [&](double xc, int side, const PolyKernelParams& params,
                     double forced_shift) -> const detail::BlockResult& {
        const detail::BlockKey key{xc, side, params.sigma, params.c, params.p, forced_shift};
        auto found = blocks.find(key);
        if (found != blocks.end()) {
            return found->second;
        }
        auto split_it = splits.find(xc);
        if (split_it == splits.end()) {
            split_it = splits.emplace(xc, detail::split_at(train, test_xs, xc)).first;
        }
        const detail::SideSplit& split = split_it->second;
        InferenceOptions local = opts;
        if (forced_shift >= 0.0) {
            local.shift = ShiftOptions{forced_shift, 0};
        }
        detail::BlockResult r;
        try {
            const PointFit pf = fit_point(split.train[side], params, split.test[side], local);
            r.ok = true;
            r.log_marginal = pf.log_marginal;
            r.shift = pf.shift;
            r.predictive = pf.predictive;
        } catch (const Error& e) {
            r.reason = e.what();
        }
        return blocks.emplace(key, std::move(r)).first->second;
    };

    // First pass: fits and log marginals. Changepoint points keep references
    // to their two cached blocks and are assembled during accumulation.
    std::vector<std::pair<const detail::BlockResult*, const detail::BlockResult*>> cp_parts(g, {nullptr, nullptr});
    for (std::size_t i = 0; i < g; ++i) {
        const KernelSpec& spec = grid.points[i];
        const auto* cp = std::get_if<ChangepointKernelParams>(&spec);
        if (cp != nullptr && opts.factorize_changepoint) {
            const detail::BlockResult* before = &block(cp->xc, 0, cp->before, -1.0);
            const detail::BlockResult* after = &block(cp->xc, 1, cp->after, -1.0);
            if (before->ok && after->ok && before->shift != after->shift) {
                const double d = std::max(before->shift, after->shift);
                (before->shift < d ? before : after) =
                    before->shift < d ? &block(cp->xc, 0, cp->before, d) : &block(cp->xc, 1, cp->after, d);
            }
            if (!before->ok || !after->ok) {
                result.dropped.push_back(i);
                result.drop_reasons.push_back(!before->ok ? before->reason : after->reason);
                continue;
            }
            result.log_marginals[i] = before->log_marginal + after->log_marginal;
            cp_parts[i] = {before, after};
            continue;
        }
        try {
            PointFit pf = fit_point(train, spec, test_xs, opts);
            result.log_marginals[i] = pf.log_marginal;
            preds[i] = std::move(pf.predictive);
        } catch (const Error& e) {
            result.dropped.push_back(i);
            result.drop_reasons.emplace_back(e.what());
        }
    }

    if (result.dropped.size() == g) {
        throw AllGridPointsFailed("marginalize: every grid point failed (first: " + result.drop_reasons.front() +
                                  ")");
    }
    result.grid.weights = detail::softmax_weights(result.log_marginals);
    detail::MixtureAccumulator acc(m);
    PosteriorPredictive joined;
    for (std::size_t i = 0; i < g; ++i) {
        const double w = result.grid.weights[i];
        if (w == 0.0) {
            continue;
        }
        if (cp_parts[i].first == nullptr) {
            acc.add(w, preds[i]);
            continue;
        }
        const detail::SideSplit& split = splits.at(std::get<ChangepointKernelParams>(grid.points[i]).xc);
        joined.mean = Eigen::VectorXd::Zero(m);
        joined.rate_mean = Eigen::VectorXd::Zero(m);
        joined.cov = Eigen::MatrixXd::Zero(m, m);
        for (int side = 0; side < 2; ++side) {
            const PosteriorPredictive& part =
                side == 0 ? cp_parts[i].first->predictive : cp_parts[i].second->predictive;
            const auto& idx = split.test_index[side];
            for (std::size_t a = 0; a < idx.size(); ++a) {
                const auto ia = static_cast<Eigen::Index>(a);
                joined.mean[idx[a]] = part.mean[ia];
                joined.rate_mean[idx[a]] = part.rate_mean[ia];
                for (std::size_t b = 0; b < idx.size(); ++b) {
                    joined.cov(idx[a], idx[b]) = part.cov(ia, static_cast<Eigen::Index>(b));
                }
            }
        }
        acc.add(w, joined);
    }
    result.predictive = acc.finish();
    return result;
}

// Posterior mass per changepoint location, sorted by location.
inline std::vector<std::pair<double, double>> changepoint_posterior(const HyperGrid& weighted) {
    std::map<double, double> mass;
    for (std::size_t i = 0; i < weighted.points.size(); ++i) {
        if (const auto* cp = std::get_if<ChangepointKernelParams>(&weighted.points[i])) {
            mass[cp->xc] += i < weighted.weights.size() ? weighted.weights[i] : 0.0;
        }
    }
    return {mass.begin(), mass.end()};
}

}  // namespace uncon

#endif  // UNCON_GP_HPP

#ifndef UNCON_KERNEL_HPP
#define UNCON_KERNEL_HPP

// Variable-degree polynomial covariance k(x, x') = sigma^2 (x x' + c)^p, its
// changepoint extension, covariance assembly and the diagonal spectral shift
// that makes the (generally indefinite) matrix usable for inference.

#include <cassert>
#include <cmath>
#include <span>
#include <string>
#include <variant>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "uncon/errors.hpp"

namespace uncon {

struct PolyKernelParams {
    double sigma = 1.0;  // signal scale
    double c = 1.0;      // offset
    double p = 1.0;      // degree, not restricted to integers

    bool valid() const noexcept { return sigma > 0.0 && c > 0.0 && p > 0.0; }
    friend bool operator==(const PolyKernelParams&, const PolyKernelParams&) = default;
};

struct ChangepointKernelParams {
    PolyKernelParams before;
    PolyKernelParams after;
    double xc = 0.5;  // changepoint on the scaled input axis

    bool valid() const noexcept { return before.valid() && after.valid() && xc > 0.0 && xc < 1.0; }
    friend bool operator==(const ChangepointKernelParams&, const ChangepointKernelParams&) = default;
};

using KernelSpec = std::variant<PolyKernelParams, ChangepointKernelParams>;

enum class KernelFamily { standard, changepoint };

inline KernelFamily family_of(const KernelSpec& spec) noexcept {
    return std::holds_alternative<PolyKernelParams>(spec) ? KernelFamily::standard
                                                          : KernelFamily::changepoint;
}

inline bool spec_valid(const KernelSpec& spec) noexcept {
    return std::visit([](const auto& p) { return p.valid(); }, spec);
}

// Computed as sigma^2 * exp(p * log(base)). With x, x' >= 0 and c > 0 the
// base is strictly positive, so any real p is well defined.
inline double poly_kernel(double x, double x2, const PolyKernelParams& params) {
    const double base = x * x2 + params.c;
    assert(base > 0.0);
    if (!(base > 0.0)) {
        throw InvalidArgument("poly_kernel: non-positive base " + std::to_string(base));
    }
    return params.sigma * params.sigma * std::exp(params.p * std::log(base));
}

// Points at exactly xc belong to the after-block.
inline double changepoint_kernel(double x, double x2, const ChangepointKernelParams& params) {
    const bool x_after = x >= params.xc;
    const bool x2_after = x2 >= params.xc;
    if (x_after != x2_after) {
        return 0.0;
    }
    return poly_kernel(x, x2, x_after ? params.after : params.before);
}

inline double kernel_value(const KernelSpec& spec, double x, double x2) {
    if (const auto* poly = std::get_if<PolyKernelParams>(&spec)) {
        return poly_kernel(x, x2, *poly);
    }
    return changepoint_kernel(x, x2, std::get<ChangepointKernelParams>(spec));
}

struct CovMatrix {
    Eigen::MatrixXd entries;
    bool shifted = false;
    double shift = 0.0;  // diagonal magnitude actually added

    Eigen::Index rows() const noexcept { return entries.rows(); }
    Eigen::Index cols() const noexcept { return entries.cols(); }
};

namespace detail {
inline bool same_inputs(std::span<const double> a, std::span<const double> b) noexcept {
    if (a.size() != b.size()) {
        return false;
    }
    if (a.data() == b.data()) {
        return true;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) {
            return false;
        }
    }
    return true;
}
}  // namespace detail

// Entry (i, j) = k(xs[i], xs2[j]). When xs and xs2 coincide the result is
// symmetrized as (K + K^T) / 2.
inline CovMatrix build_cov(std::span<const double> xs, std::span<const double> xs2,
                           const KernelSpec& spec) {
    if (!spec_valid(spec)) {
        throw InvalidArgument("build_cov: invalid kernel hyperparameters");
    }
    const auto n = static_cast<Eigen::Index>(xs.size());
    const auto m = static_cast<Eigen::Index>(xs2.size());
    CovMatrix out;
    out.entries.resize(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out.entries(i, j) = kernel_value(spec, xs[i], xs2[j]);
        }
    }
    if (detail::same_inputs(xs, xs2)) {
        out.entries = (0.5 * (out.entries + out.entries.transpose())).eval();
    }
    return out;
}

inline CovMatrix build_cov(std::span<const double> xs, const KernelSpec& spec) {
    return build_cov(xs, xs, spec);
}

struct ShiftOptions {
    double d = 1.0;
    int max_retries = 3;
};

// Returns K + d I. If the Cholesky factorization fails, d is doubled (or set
// to 1 when it was 0) up to max_retries times.
inline CovMatrix apply_shift(CovMatrix k, const ShiftOptions& opts = {}) {
    if (k.rows() != k.cols()) {
        throw InvalidArgument("apply_shift: matrix must be square");
    }
    if (opts.d < 0.0) {
        throw InvalidArgument("apply_shift: negative shift");
    }
    const Eigen::MatrixXd base = k.entries;
    double d = opts.d;
    for (int attempt = 0;; ++attempt) {
        k.entries = base;
        k.entries.diagonal().array() += d;
        Eigen::LLT<Eigen::MatrixXd> llt(k.entries);
        if (llt.info() == Eigen::Success) {
            k.shifted = true;
            k.shift = k.shift + d;
            return k;
        }
        if (attempt == opts.max_retries) {
            throw SingularShift("apply_shift: not positive definite after escalation", d);
        }
        d = d > 0.0 ? 2.0 * d : 1.0;
    }
}

inline CovMatrix apply_shift(CovMatrix k, double d) {
    return apply_shift(std::move(k), ShiftOptions{d, 3});
}

}  // namespace uncon

#endif  // UNCON_KERNEL_HPP

#ifndef UNCON_LIKELIHOOD_HPP
#define UNCON_LIKELIHOOD_HPP

// Poisson observation model with softplus link lambda(f) = log(1 + e^f).
// The model has no likelihood hyperparameters.

#include <cmath>

namespace uncon {

inline double softplus(double f) noexcept {
    return f > 0.0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f));
}

// Inverse of softplus for positive rates.
inline double softplus_inv(double rate) noexcept {
    if (rate > 30.0) {
        return rate + std::log1p(-std::exp(-rate));
    }
    return std::log(std::expm1(rate));
}

inline double sigmoid(double f) noexcept {
    if (f >= 0.0) {
        return 1.0 / (1.0 + std::exp(-f));
    }
    const double e = std::exp(f);
    return e / (1.0 + e);
}

// log(lambda(f)); for very negative f, lambda = e^f (1 - e^f / 2 + ...).
inline double log_softplus(double f) noexcept {
    if (f < -30.0) {
        return f - 0.5 * std::exp(f);
    }
    return std::log(softplus(f));
}

// sigmoid(f) / softplus(f), tends to 1 as f -> -inf.
inline double sigmoid_over_softplus(double f) noexcept {
    if (f < -30.0) {
        const double e = std::exp(f);
        return (1.0 - e) / (1.0 - 0.5 * e);
    }
    return sigmoid(f) / softplus(f);
}

struct PoissonObsModel {
    // y log lambda - lambda - log y!
    static double log_lik(double y, double f) noexcept {
        return y * log_softplus(f) - softplus(f) - std::lgamma(y + 1.0);
    }

    // (y / lambda - 1) s, s = sigmoid(f)
    static double dlog_lik(double y, double f) noexcept {
        const double s = sigmoid(f);
        return y * sigmoid_over_softplus(f) - s;
    }

    // (y / lambda - 1) s (1 - s) - y s^2 / lambda^2
    static double d2log_lik(double y, double f) noexcept {
        const double s = sigmoid(f);
        const double r = sigmoid_over_softplus(f);
        return (y * r - s) * (1.0 - s) - y * r * r;
    }
};

inline double log_lik(double y, double f) noexcept { return PoissonObsModel::log_lik(y, f); }
inline double dlog_lik(double y, double f) noexcept { return PoissonObsModel::dlog_lik(y, f); }
inline double d2log_lik(double y, double f) noexcept { return PoissonObsModel::d2log_lik(y, f); }

}  // namespace uncon

#endif  // UNCON_LIKELIHOOD_HPP

#ifndef UNCON_ERRORS_HPP
#define UNCON_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace uncon {

// Root of every error thrown by the library. Catching this is enough for
// callers that only need a diagnostic.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Cholesky of K + d*I still fails after the shift escalation.
class SingularShift : public Error {
public:
    SingularShift(const std::string& what, double last_shift)
        : Error(what), last_shift_(last_shift) {}
    double last_shift() const noexcept { return last_shift_; }

private:
    double last_shift_;
};

class NumericalBreakdown : public Error {
public:
    using Error::Error;
};

// Newton mode search ran out of iterations.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, int iterations, double grad_norm)
        : Error(what), iterations_(iterations), grad_norm_(grad_norm) {}
    int iterations() const noexcept { return iterations_; }
    double grad_norm() const noexcept { return grad_norm_; }

private:
    int iterations_;
    double grad_norm_;
};

class AllGridPointsFailed : public Error {
public:
    using Error::Error;
};

class NoReferenceCurves : public Error {
public:
    using Error::Error;
};

class TooFewObservations : public Error {
public:
    using Error::Error;
};

class WindowTooLong : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace uncon

#endif  // UNCON_ERRORS_HPP

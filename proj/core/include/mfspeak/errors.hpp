#ifndef MFSPEAK_ERRORS_HPP
#define MFSPEAK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mfspeak {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument or configuration was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// File-system or format-level I/O failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// WAV decoding failure. The kind distinguishes an unreadable/malformed
/// file from a readable file in an encoding we do not decode, and from
/// a file that decodes to zero samples.
class WavError : public IoError {
public:
    enum class Kind { Unreadable, UnsupportedEncoding, EmptyAudio };

    WavError(Kind kind, const std::string& msg) : IoError(msg), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// A window with zero detrended variance makes F_q(s) undefined for
/// q <= 0 (division by zero, or log of zero).
class DegenerateWindowError : public Error {
public:
    DegenerateWindowError(long scale, double q, const std::string& msg)
        : Error(msg), scale_(scale), q_(q) {}
    long scale() const noexcept { return scale_; }
    double q() const noexcept { return q_; }

private:
    long scale_;
    double q_;
};

/// The quadratic fit of the singularity spectrum has no real zero
/// crossings (non-concave fit or complex roots), so the width is
/// undefined. Carries the fitted coefficients for diagnostics.
class WidthUndefinedError : public Error {
public:
    WidthUndefinedError(double a, double b, double c, const std::string& msg)
        : Error(msg), a_(a), b_(b), c_(c) {}
    double coeff_a() const noexcept { return a_; }
    double coeff_b() const noexcept { return b_; }
    double coeff_c() const noexcept { return c_; }

private:
    double a_, b_, c_;
};

/// Spectrum normalization is undefined when no f(alpha) value is
/// positive after flooring negatives to zero.
class NormalizationError : public Error {
public:
    using Error::Error;
};

/// Wraps a failure with the name of the pipeline stage that produced it.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& msg)
        : Error("[" + stage + "] " + msg), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace mfspeak

#endif  // MFSPEAK_ERRORS_HPP

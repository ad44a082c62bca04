#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace balred {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

enum class ErrorCode {
    NonHermitian,
    NonConvergence,
    NearDefective,
    NotPSD,
    Singular,
    BadLength,
    OnImaginaryAxis,
    Unstable,
    NearlyUncontrollable,
    BadOrder,
    PoleHit,
    Overflow,
    PositiveRealPart,
    TokenOutOfRange,
    BadLabel,
    NonFinite,
    ParseError,
    EmptyDataset,
    BadConfig,
};

const char* error_code_name(ErrorCode code);

/// Numerical/validation error carrying a machine-readable code.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// Errors that indicate bad user input rather than a numerical failure.
    bool is_validation() const noexcept {
        switch (code_) {
        case ErrorCode::BadLength:
        case ErrorCode::BadOrder:
        case ErrorCode::TokenOutOfRange:
        case ErrorCode::BadLabel:
        case ErrorCode::ParseError:
        case ErrorCode::EmptyDataset:
        case ErrorCode::BadConfig:
            return true;
        default:
            return false;
        }
    }

  private:
    ErrorCode code_;
};

/// Deterministic RNG: xoshiro-free, plain Mersenne Twister core with
/// hand-rolled distributions so streams are identical on every platform
/// (std::normal_distribution is implementation-defined).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : s_(split_seed(seed)) {}

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller; caches the second variate.
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    /// Deterministic Fisher-Yates shuffle of index vector.
    void shuffle(std::vector<std::size_t>& v);

    /// Derive an independent child stream (for per-component seeding).
    Rng fork(std::uint64_t salt);

  private:
    struct State {
        std::vector<std::uint64_t> mt;
        std::size_t idx = 0;
    };
    static State split_seed(std::uint64_t seed);
    State s_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// SHA-256 of a byte string, lowercase hex. Used for checkpoint provenance
/// chains and run manifests.
std::string sha256_hex(const std::string& bytes);

/// SHA-256 of a file's contents.
std::string sha256_file(const std::string& path);

/// Format a double with 17 significant digits (round-trips bit-exactly).
std::string format_double(double x);

/// Inverse of format_double; throws ParseError on garbage.
double parse_double(const std::string& s);

bool is_finite(cplx z);

/// Number of worker threads resolved from an explicit request and the
/// BALRED_SSM_THREADS environment variable (request wins; default 1).
std::size_t resolve_threads(std::size_t requested);

/// Runs fn(i) for i in [0, n) over `threads` workers in fixed-size chunks.
/// Results must be written to per-index slots; completion order is joined
/// before returning so downstream reads see a consistent, fixed order.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

} // namespace balred

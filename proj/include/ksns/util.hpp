#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ksns {

/// Bad user input: malformed config, inadmissible exponents, missing files.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Solver left its certified envelope: CFL violation, positivity budget
/// exceeded, iteration failed to converge.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Problem size beyond a documented capacity bound.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Print a double with 17 significant digits (enough to round-trip binary64).
std::string fmt_g17(double x);

/// FNV-1a hash, used to stamp output files with their generating config.
std::uint64_t fnv1a64(const std::string& text);
std::string hex16(std::uint64_t v);

/// Write `content` to `path` atomically (temp file + rename).
void atomic_write(const std::string& path, const std::string& content);

/// Uniform double in [0,1) from the top 53 bits of a mt19937_64 draw.
/// Avoids std::uniform_real_distribution, whose output is not pinned by the
/// standard; this keeps seeded artifacts reproducible.
inline double rand_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform in [lo, hi).
inline double rand_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * rand_unit(rng);
}

/// Trapezoidal quadrature of samples y on a uniform grid with spacing dt.
double trapezoid(const std::vector<double>& y, double dt);

/// Cumulative trapezoid: out[i] = integral over [t0, t_i]; out[0] = 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& y, double dt);

}  // namespace ksns

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kernrates/errors.hpp"

namespace kernrates {

inline constexpr double inv_sqrt_2pi = 0.3989422804014326779;

/// Standard normal density.
inline double normal_pdf(double t) { return inv_sqrt_2pi * std::exp(-0.5 * t * t); }

/// Standard normal CDF via erfc.
inline double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

/// Standard normal quantile. Newton refinement on top of a rational initial
/// guess; accurate to ~1e-15 over p in (1e-300, 1 - 1e-16).
double normal_quantile(double p);

/// Neumaier-compensated accumulator. Summation order is the caller's; with a
/// fixed order the result is reproducible bit-for-bit across runs.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }

    double value() const { return sum + comp; }
};

struct QuadratureOutcome {
    double value = 0.0;
    double error_estimate = 0.0;
};

/// Adaptive Gauss–Kronrod integration of f over [a, b].
/// Throws Errc::numerical_failure (naming `label`) if the error estimate does
/// not reach max(abs_tol, rel_tol * |value|).
QuadratureOutcome integrate(const std::function<double(double)>& f, double a, double b,
                            double abs_tol, double rel_tol, const std::string& label);

/// Like integrate, but returns whatever the adaptive rule achieved instead of
/// throwing on a missed tolerance (for integrands with kinks where only a
/// rough value is needed).
QuadratureOutcome integrate_estimate(const std::function<double(double)>& f, double a, double b,
                                     double rel_tol);

/// splitmix64 step; used to derive independent replication seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic seed for a numbered stream of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(0xA5A5A5A5A5A5A5A5ULL + stream));
}

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};

/// Ordinary least squares of y on x (with intercept).
OlsFit ols_fit(std::span<const double> x, std::span<const double> y);

/// Fixed 17-significant-digit formatting used by the canonical JSON writer
/// and the CSV emitter, so identical doubles serialize to identical bytes.
std::string format_double(double v);

/// Run body(i) for i in [0, count) across `workers` threads with a static
/// block partition. Each index must be an independent computation; results
/// are then identical for any worker count. The first exception thrown by a
/// body is rethrown on the calling thread.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

}  // namespace kernrates

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kernrates/estimators.hpp"
#include "kernrates/json_writer.hpp"
#include "kernrates/processes.hpp"
#include "kernrates/risk.hpp"

namespace kernrates {

/// Counting inverse of the mixing sequence: beta^-1(u) = #{j >= 0 : beta_j > u}
/// for u in (0,1). Finite because beta_j -> 0; returned as double since the
/// count exceeds integer range for slowly decaying sequences near u = 0.
double beta_inverse(const MixingSpec& spec, double u);

struct BetaNormResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool diverged = false;
    int levels_used = 0;
};

/// ||f||_{2,beta}^2 = int_0^1 beta^-1(u) Q_f(u)^2 du for a nonincreasing
/// quantile function Q_f. The unit interval splits at the mixing levels
/// beta_j (where the integrand jumps) and dyadically toward u = 0, where
/// beta^-1 and Q_f may blow up. A detected divergence is reported, not
/// returned as a number.
BetaNormResult beta_norm_sq(const MixingSpec& spec,
                            const std::function<double(double)>& quantile_fn,
                            int max_levels = 52);

struct NormCheckReport {
    std::string mixing;
    std::string kernel_name;
    double density_bound = 0.0;
    double kernel_l2 = 0.0;     // int k^2
    double kernel_bound = 0.0;  // sup |k|
    double tail_constant = 0.0; // C = density_bound * int k^2
    std::vector<double> h_grid;
    std::vector<double> norm_sq;
    std::vector<double> ratio;        // norm^2 / h
    double bound_constant = 0.0;      // max ratio over the grid
    double max_over_min_ratio = 0.0;
    bool ratio_monotone_increasing = false;

    Json to_json() const;
};

/// Evaluates the proof's norm object for the kernel class f(x) = k((w-x)/h)
/// under a design density bounded by density_bound: Q_f is built from the
/// Markov tail bound P(|f| > z) <= min(1, C h / z^2) (zero beyond the kernel
/// bound), then ||f||^2_{2,beta} and the ratio norm^2/h are reported per h.
NormCheckReport kernel_class_norm_check(const MixingSpec& spec, const Kernel& kernel,
                                        double density_bound, std::span<const double> h_grid);

/// Exact population smoothing bias int [T(w - h u) - T(w)] K(u) du by
/// adaptive quadrature — E[T-hat] - T with no Monte Carlo noise.
double smoothing_bias(const std::function<double(double)>& target, const Kernel& kernel, double h,
                      double w, double quad_tol);

struct BiasSlopeReport {
    std::string kernel_name;
    int order = 0;
    double w = 0.0;
    std::vector<double> h_grid;
    std::vector<double> abs_bias;
    double fitted_slope = 0.0;

    Json to_json() const;
};

/// |bias| over an h-grid and its log-log slope (should be the kernel order r
/// for an r-smooth target).
BiasSlopeReport bias_slope_check(const std::function<double(double)>& target,
                                 const Kernel& kernel, std::span<const double> h_grid, double w,
                                 double quad_tol);

// ------------------------------------------------------------ rate experiment

enum class RateTarget { density, regression, ces };

struct CesGrids {
    std::vector<double> a_angles;  // unit vectors (cos t, sin t), q = 2
    std::vector<double> b_values;  // scalar single-index directions, p = 1
    std::vector<double> p_levels;
};

struct RateConfig {
    ModelSpec model = Ar1Density{};
    RateTarget target = RateTarget::density;
    Kernel kernel;
    std::vector<std::size_t> n_grid;
    int replications = 20;
    double bandwidth_exponent = 0.2;  // h_n = n^-exponent
    double bandwidth_c_lo = 0.5;      // sweep [c_lo, c_hi] * h_n
    double bandwidth_c_hi = 2.0;
    int bandwidth_count = 7;
    double eval_radius = 2.0;
    std::size_t eval_points = 41;
    double trim_tau = default_trim_tau;
    std::uint64_t seed = 42;
    int workers = 1;
    CesGrids ces;
};

struct RateReport {
    std::string model;
    std::string target;
    std::string kernel_name;
    int kernel_order = 0;
    std::vector<std::size_t> n_grid;
    std::vector<double> sup_errors;           // mean over replications, per n
    std::vector<std::size_t> undefined_by_n;  // trimmed cells summed over reps
    double fitted_slope = 0.0;
    double theoretical_slope = 0.0;
    double slope_ci_lo = 0.0;
    double slope_ci_hi = 0.0;
    int replications = 0;
    bool weighted_average_bound_ok = true;  // ratio targets
    bool quantile_consistent_all = true;    // ces target
    Json config_echo;

    Json to_json() const;
};

/// Monte Carlo reproduction of the uniform rate: per (n, replication),
/// simulate, take the sup over (h-sweep x psi-grid x w-grid) of
/// |estimate - truth|, average over replications, and fit the log-log slope
/// against the theoretical -r/(2r+d). Replications run concurrently on
/// derived seeds; the report is identical for any worker count.
RateReport rate_experiment(const RateConfig& config);

/// -r/(2r+d), the slope balancing the two terms of the rate d_n.
double theoretical_rate_slope(int order_r, std::size_t dim);

/// Throws on any violated precondition of rate_experiment.
void validate_rate_config(const RateConfig& config);

}  // namespace kernrates

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kernrates/estimators.hpp"
#include "kernrates/kernel.hpp"
#include "kernrates/model.hpp"

namespace kernrates {

/// One point of the CES index set: unit portfolio weights a, single-index
/// direction b, threshold function c (plug-in VaR when c is PluggedVar).
struct CesIndex {
    std::vector<double> a;
    std::vector<double> b;
    ThresholdFn threshold = ConstantThreshold{0.0};
};

/// Left-continuous weighted-quantile plug-in for the conditional VaR at w:
/// with weights om_t = K((w - b'X_t)/h) and losses L_t = -a'Y_t,
///   c-hat = inf{ c : sum om_t 1(L_t > c) / sum om_t <= p }.
/// Requires a nonnegative kernel and positive total local weight.
double estimate_conditional_var(const Sample& sample, std::span<const double> a,
                                std::span<const double> b, double p_level, const Kernel& kernel,
                                double h, double w);

/// Kernel CES ratio sum phi1 K / sum phi2 K with phi1, phi2 the shortfall
/// numerator/indicator at the index's threshold. Returns nullopt when the
/// indicator sum, normalized by nh, falls below trim_tau.
std::optional<double> estimate_ces(const Sample& sample, const CesIndex& index,
                                   const Kernel& kernel, double h, double w, double trim_tau);

struct GaussianTailTruth {
    double var = 0.0;
    double ces = 0.0;
};

/// Closed-form oracle when the loss given the index value w is
/// N(mu_fn(w), sigma^2): VaR = mu + sigma z_{1-p}, CES = mu + sigma n(z)/p.
GaussianTailTruth ces_truth_gaussian(const std::function<double(double)>& mu_fn, double sigma,
                                     double p_level, double w);

// ------------------------------------------------------------------ batch path

/// Reusable evaluator for CES experiments: losses are computed and sorted
/// once per portfolio direction, then each (b, h, w, p) cell is a single
/// pass over the sorted order. Pure with respect to the shared sample.
class CesEvaluator {
public:
    CesEvaluator(const Sample& sample, std::span<const double> a);

    struct Cell {
        bool has_var = false;
        double var = 0.0;
        std::optional<double> ces;
        /// Weighted mass strictly above c-hat is <= p * total, and the next
        /// lower loss value would exceed it (the cadlag-inverse property).
        bool quantile_consistent = false;
    };

    /// index_values holds b'X_t in original t order.
    Cell evaluate_plugged(std::span<const double> index_values, const Kernel& kernel, double h,
                          double w, double p_level, double trim_tau) const;

private:
    std::size_t n_;
    std::vector<double> losses_sorted_;   // descending
    std::vector<std::size_t> order_;      // sorted position -> t
};

}  // namespace kernrates

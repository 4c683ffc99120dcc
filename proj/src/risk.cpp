#include "kernrates/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kernrates/numerics.hpp"

namespace kernrates {

namespace {

void check_p_level(double p) {
    if (!(p > 0.0 && p < 1.0)) fail(Errc::invalid_input, "p_level must lie in (0,1)");
}

void check_bandwidth_risk(double h) {
    if (!(h > 0.0) || !std::isfinite(h) || h < min_bandwidth)
        fail(Errc::invalid_bandwidth, "bandwidth must be positive, finite and above 1e-8");
}

double single_index(std::span<const double> b, std::span<const double> x) {
    if (b.size() != x.size()) fail(Errc::invalid_input, "index vector dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) s += b[j] * x[j];
    return s;
}

void check_unit_weights(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    if (std::fabs(std::sqrt(s) - 1.0) > 1e-8)
        fail(Errc::invalid_input, "portfolio weights must have unit norm");
}

struct QuantileScan {
    double var = 0.0;
    bool consistent = false;
    double num = 0.0;          // sum of w * L over losses strictly above var
    double den = 0.0;          // sum of w over losses strictly above var
    double total_weight = 0.0;
};

// Descending scan over tied-loss groups. c-hat is the smallest loss value
// whose strictly-above weighted mass stays within p * total.
QuantileScan scan_sorted(std::span<const double> losses_desc, std::span<const double> weights,
                         double p) {
    CompensatedSum total_acc;
    for (double w : weights) {
        if (w < 0.0)
            fail(Errc::invalid_input,
                 "plug-in quantile needs nonnegative kernel weights (use an order-2 kernel)");
        total_acc.add(w);
    }
    QuantileScan out;
    out.total_weight = total_acc.value();
    if (!(out.total_weight > 0.0)) fail(Errc::no_local_data, "zero total kernel weight at w");

    const double budget = p * out.total_weight;
    const std::size_t n = losses_desc.size();
    CompensatedSum cum;
    std::size_t var_group_begin = 0;  // start of the tie group holding c-hat
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        CompensatedSum group;
        while (j < n && losses_desc[j] == losses_desc[i]) group.add(weights[j++]);
        if (cum.value() > budget) break;  // strictly-above mass would exceed p
        out.var = losses_desc[i];
        var_group_begin = i;
        cum.add(group.value());
        i = j;
    }

    // Prefix strictly above c-hat feeds the shortfall sums.
    CompensatedSum num, den;
    for (std::size_t k = 0; k < var_group_begin; ++k) {
        num.add(weights[k] * losses_desc[k]);
        den.add(weights[k]);
    }
    out.num = num.value();
    out.den = den.value();

    // Certificate: mass strictly above c-hat fits the budget, and the mass
    // above any smaller loss value (i.e. through c-hat's tie group) exceeds
    // it, unless c-hat is already the smallest observed loss.
    bool next_overflows = true;
    if (i < n) next_overflows = cum.value() > budget;
    out.consistent = out.den <= budget && next_overflows;
    return out;
}

}  // namespace

double estimate_conditional_var(const Sample& sample, std::span<const double> a,
                                std::span<const double> b, double p_level, const Kernel& kernel,
                                double h, double w) {
    check_p_level(p_level);
    check_bandwidth_risk(h);
    if (a.size() != sample.q()) fail(Errc::invalid_input, "portfolio dimension mismatch");
    check_unit_weights(a);
    if (b.size() != sample.p()) fail(Errc::invalid_input, "index dimension mismatch");
    const std::size_t n = sample.n();

    std::vector<double> losses(n), weights(n);
    for (std::size_t t = 0; t < n; ++t) {
        double s = 0.0;
        const auto y = sample.y_row(t);
        for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * y[j];
        losses[t] = -s;
        weights[t] = kernel_eval(kernel, (w - single_index(b, sample.x_row(t))) / h);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return losses[i] > losses[j]; });
    std::vector<double> ls(n), ws(n);
    for (std::size_t i = 0; i < n; ++i) {
        ls[i] = losses[order[i]];
        ws[i] = weights[order[i]];
    }
    return scan_sorted(ls, ws, p_level).var;
}

std::optional<double> estimate_ces(const Sample& sample, const CesIndex& index,
                                   const Kernel& kernel, double h, double w, double trim_tau) {
    check_bandwidth_risk(h);
    if (!(trim_tau > 0.0)) fail(Errc::invalid_input, "trim_tau must be > 0");
    if (index.a.size() != sample.q()) fail(Errc::invalid_input, "portfolio dimension mismatch");
    if (index.b.size() != sample.p()) fail(Errc::invalid_input, "index dimension mismatch");
    check_unit_weights(index.a);

    ThresholdFn resolved = index.threshold;
    if (const auto* plug = std::get_if<PluggedVar>(&index.threshold)) {
        const double chat =
            estimate_conditional_var(sample, index.a, index.b, plug->p_level, kernel, h, w);
        resolved = ConstantThreshold{chat};
    }
    const PhiSpec phi1 = ShortfallNumerator{index.a, resolved};
    const PhiSpec phi2 = ShortfallIndicator{index.a, resolved};

    const std::size_t n = sample.n();
    CompensatedSum num, den;
    for (std::size_t t = 0; t < n; ++t) {
        const double weight =
            kernel_eval(kernel, (w - single_index(index.b, sample.x_row(t))) / h);
        if (weight == 0.0) continue;
        num.add(phi_eval(phi1, sample.y_row(t), sample.x_row(t)) * weight);
        den.add(phi_eval(phi2, sample.y_row(t), sample.x_row(t)) * weight);
    }
    const double denominator = den.value() / (static_cast<double>(n) * h);
    if (!(denominator >= trim_tau)) return std::nullopt;
    return num.value() / den.value();
}

GaussianTailTruth ces_truth_gaussian(const std::function<double(double)>& mu_fn, double sigma,
                                     double p_level, double w) {
    if (!(sigma > 0.0)) fail(Errc::invalid_input, "sigma must be positive");
    check_p_level(p_level);
    const double mu = mu_fn(w);
    if (!std::isfinite(mu)) fail(Errc::invalid_input, "mu_fn returned a non-finite value");
    const double z = normal_quantile(1.0 - p_level);
    GaussianTailTruth out;
    out.var = mu + sigma * z;
    out.ces = mu + sigma * normal_pdf(z) / p_level;
    return out;
}

CesEvaluator::CesEvaluator(const Sample& sample, std::span<const double> a) : n_(sample.n()) {
    if (a.size() != sample.q()) fail(Errc::invalid_input, "portfolio dimension mismatch");
    check_unit_weights(a);
    std::vector<double> losses(n_);
    for (std::size_t t = 0; t < n_; ++t) {
        double s = 0.0;
        const auto y = sample.y_row(t);
        for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * y[j];
        losses[t] = -s;
    }
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t i, std::size_t j) { return losses[i] > losses[j]; });
    losses_sorted_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) losses_sorted_[i] = losses[order_[i]];
}

CesEvaluator::Cell CesEvaluator::evaluate_plugged(std::span<const double> index_values,
                                                  const Kernel& kernel, double h, double w,
                                                  double p_level, double trim_tau) const {
    check_p_level(p_level);
    check_bandwidth_risk(h);
    if (index_values.size() != n_) fail(Errc::invalid_input, "index value count mismatch");

    std::vector<double> ws(n_);
    bool any = false;
    for (std::size_t i = 0; i < n_; ++i) {
        ws[i] = kernel_eval(kernel, (w - index_values[order_[i]]) / h);
        any = any || ws[i] != 0.0;
    }
    Cell cell;
    if (!any) return cell;

    const QuantileScan scan = scan_sorted(losses_sorted_, ws, p_level);
    cell.has_var = true;
    cell.var = scan.var;
    cell.quantile_consistent = scan.consistent;
    const double denominator = scan.den / (static_cast<double>(n_) * h);
    if (denominator >= trim_tau) cell.ces = scan.num / scan.den;
    return cell;
}

}  // namespace kernrates

#include "kernrates/verification.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kernrates/numerics.hpp"

namespace kernrates {

double beta_inverse(const MixingSpec& spec, double u) {
    if (!(u > 0.0 && u < 1.0)) fail(Errc::invalid_input, "beta_inverse: u must lie in (0,1)");
    if (std::holds_alternative<IidMixing>(spec)) return 1.0;

    if (const auto* g = std::get_if<GeometricMixing>(&spec)) {
        // Largest j with rho^j > u, located by logarithm then pinned exactly.
        double j = std::floor(std::log(u) / std::log(g->rho));
        while (j >= 1.0 && !(std::pow(g->rho, j) > u)) j -= 1.0;
        while (std::pow(g->rho, j + 1.0) > u) j += 1.0;
        return std::max(0.0, j) + 1.0;
    }

    const auto& p = std::get<PolynomialMixing>(spec);
    // Largest j >= 1 with scale * j^-exponent > u (the min(1, .) cap never
    // binds for u < 1).
    double j = std::floor(std::pow(p.scale / u, 1.0 / p.exponent));
    while (j >= 1.0 && !(p.scale * std::pow(j, -p.exponent) > u)) j -= 1.0;
    while (p.scale * std::pow(j + 1.0, -p.exponent) > u) j += 1.0;
    return std::max(0.0, j) + 1.0;
}

namespace {

struct GkPiece {
    double value = 0.0;
    double error = 0.0;
};

GkPiece gk(const std::function<double(double)>& f, double lo, double hi) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    GkPiece out;
    out.value = GK::integrate(f, lo, hi, 13, 1e-11, &out.error);
    return out;
}

// Distinct mixing levels beta_j strictly inside (lo, hi); nullopt when their
// count exceeds the cap (slowly decaying sequences near zero).
std::optional<std::vector<double>> mixing_levels_in(const MixingSpec& spec, double lo, double hi,
                                                    std::size_t cap) {
    std::vector<double> out;
    if (std::holds_alternative<IidMixing>(spec)) return out;
    auto beta_at = [&](double j) {
        if (const auto* g = std::get_if<GeometricMixing>(&spec))
            return std::pow(g->rho, j);
        const auto& p = std::get<PolynomialMixing>(spec);
        return std::min(1.0, p.scale * std::pow(j, -p.exponent));
    };
    double j_start;
    if (const auto* g = std::get_if<GeometricMixing>(&spec)) {
        j_start = std::max(1.0, std::floor(std::log(hi) / std::log(g->rho)) - 2.0);
    } else {
        const auto& p = std::get<PolynomialMixing>(spec);
        j_start = std::max(1.0, std::floor(std::pow(p.scale / hi, 1.0 / p.exponent)) - 2.0);
    }
    for (double j = j_start;; j += 1.0) {
        const double b = beta_at(j);
        if (b >= hi) continue;
        if (b <= lo) break;
        out.push_back(b);
        if (out.size() > cap) return std::nullopt;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

BetaNormResult beta_norm_sq(const MixingSpec& spec,
                            const std::function<double(double)>& quantile_fn, int max_levels) {
    validate_mixing(spec);
    if (max_levels < 8 || max_levels > 60)
        fail(Errc::invalid_input, "beta_norm_sq: max_levels must lie in [8, 60]");

    // Spot-check the nonincreasing precondition.
    double prev = quantile_fn(1.0 / 128.0);
    if (!std::isfinite(prev)) fail(Errc::invalid_input, "quantile_fn non-finite");
    for (double u = 2.0 / 128.0; u < 1.0; u += 1.0 / 128.0) {
        const double q = quantile_fn(u);
        if (!std::isfinite(q)) fail(Errc::invalid_input, "quantile_fn non-finite");
        if (q > prev + 1e-9 * (std::fabs(prev) + 1.0))
            fail(Errc::invalid_input, "quantile_fn must be nonincreasing on (0,1)");
        prev = q;
    }

    BetaNormResult result;
    CompensatedSum total, err;
    std::vector<double> panel_values;
    int quiet_panels = 0;

    for (int level = 0; level < max_levels; ++level) {
        const double hi = std::ldexp(1.0, -level);
        const double lo = std::ldexp(1.0, -(level + 1));
        auto levels = mixing_levels_in(spec, lo, hi, 64);

        GkPiece panel;
        if (levels) {
            std::vector<double> cuts{lo};
            cuts.insert(cuts.end(), levels->begin(), levels->end());
            cuts.push_back(hi);
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                const double a = cuts[i], b = cuts[i + 1];
                if (!(b > a)) continue;
                const double binv = beta_inverse(spec, 0.5 * (a + b));
                const GkPiece piece =
                    gk([&](double u) { return quantile_fn(u) * quantile_fn(u); }, a, b);
                panel.value += binv * piece.value;
                panel.error += binv * piece.error;
            }
        } else {
            // Too many jumps to split exactly; the relative step height is
            // then tiny and adaptive quadrature over the product suffices.
            panel = gk(
                [&](double u) {
                    const double q = quantile_fn(u);
                    return beta_inverse(spec, u) * q * q;
                },
                lo, hi);
        }

        total.add(panel.value);
        err.add(panel.error);
        panel_values.push_back(panel.value);
        result.levels_used = level + 1;

        const double scale = std::max(std::fabs(total.value()), 1e-300);
        if (std::fabs(panel.value) < 1e-15 * scale) {
            if (++quiet_panels >= 3) break;
        } else {
            quiet_panels = 0;
        }
        if (total.value() > 1e15) {
            result.diverged = true;
            break;
        }
    }

    // Tail beyond the last panel: flag divergence when contributions have
    // stopped decaying, otherwise extrapolate geometrically.
    if (!result.diverged && result.levels_used >= max_levels) {
        const double last = panel_values.back();
        const double prev_panel = panel_values[panel_values.size() - 2];
        const double scale = std::max(std::fabs(total.value()), 1e-300);
        if (last > 1e-9 * scale && last >= 0.95 * prev_panel) {
            result.diverged = true;
        } else if (prev_panel > 0.0 && last > 0.0) {
            // geometric extrapolation of the remaining tail (exact for
            // power-law integrands, conservative error share)
            const double q = std::min(0.95, last / prev_panel);
            const double tail = last * q / (1.0 - q);
            total.add(tail);
            err.add(0.5 * tail);
        }
    }

    result.value = total.value();
    result.error_estimate = err.value();
    return result;
}

NormCheckReport kernel_class_norm_check(const MixingSpec& spec, const Kernel& kernel,
                                        double density_bound, std::span<const double> h_grid) {
    validate_mixing(spec);
    if (!(density_bound > 0.0))
        fail(Errc::invalid_input, "kernel_class_norm_check: density bound must be positive");
    if (h_grid.empty()) fail(Errc::invalid_input, "kernel_class_norm_check: empty h grid");
    for (double h : h_grid)
        if (!(h > 0.0) || !std::isfinite(h))
            fail(Errc::invalid_input, "kernel_class_norm_check: h must be positive");

    NormCheckReport report;
    report.mixing = mixing_name(spec);
    report.kernel_name = kernel.name;
    report.density_bound = density_bound;
    report.kernel_bound = kernel.bound;
    const double L = kernel.support ? *kernel.support : 40.0;
    report.kernel_l2 =
        integrate([&](double t) { const double k = kernel(t); return k * k; }, -L, L, 1e-14,
                  1e-12, "kernel L2 norm")
            .value;
    report.tail_constant = density_bound * report.kernel_l2;
    report.h_grid.assign(h_grid.begin(), h_grid.end());

    const double M = kernel.bound;
    for (double h : report.h_grid) {
        const double C = report.tail_constant;
        // Inverse of the tail bound min(1, C h / z^2), zero beyond the
        // kernel bound M: Q(u) = min(M, sqrt(C h / u)).
        auto q = [C, h, M](double u) { return std::min(M, std::sqrt(C * h / u)); };
        const BetaNormResult r = beta_norm_sq(spec, q);
        if (r.diverged)
            fail(Errc::numerical_failure,
                 "beta norm diverged at h = " + format_double(h));
        report.norm_sq.push_back(r.value);
        report.ratio.push_back(r.value / h);
    }

    // Order by decreasing h for the h -> 0 monotonicity readout.
    std::vector<std::size_t> idx(report.h_grid.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return report.h_grid[a] > report.h_grid[b]; });
    double max_ratio = report.ratio[idx[0]];
    double min_ratio = report.ratio[idx[0]];
    bool monotone = true;
    for (std::size_t k = 1; k < idx.size(); ++k) {
        const double cur = report.ratio[idx[k]];
        const double prev = report.ratio[idx[k - 1]];
        if (!(cur > prev)) monotone = false;
        max_ratio = std::max(max_ratio, cur);
        min_ratio = std::min(min_ratio, cur);
    }
    report.bound_constant = max_ratio;
    report.max_over_min_ratio = max_ratio / min_ratio;
    report.ratio_monotone_increasing = monotone && idx.size() > 1;
    return report;
}

double smoothing_bias(const std::function<double(double)>& target, const Kernel& kernel, double h,
                      double w, double quad_tol) {
    if (!(h > 0.0) || !std::isfinite(h))
        fail(Errc::invalid_bandwidth, "smoothing_bias: h must be positive");
    if (!(quad_tol > 0.0)) fail(Errc::invalid_input, "smoothing_bias: quad_tol must be > 0");
    const double L = kernel.support ? *kernel.support : 40.0;
    const double t_w = target(w);
    return integrate([&](double u) { return (target(w - h * u) - t_w) * kernel(u); }, -L, L,
                     quad_tol, std::min(1e-10, quad_tol), "smoothing bias")
        .value;
}

BiasSlopeReport bias_slope_check(const std::function<double(double)>& target,
                                 const Kernel& kernel, std::span<const double> h_grid, double w,
                                 double quad_tol) {
    if (h_grid.size() < 2) fail(Errc::invalid_input, "bias_slope_check: need at least two h");
    BiasSlopeReport report;
    report.kernel_name = kernel.name;
    report.order = kernel.order;
    report.w = w;
    report.h_grid.assign(h_grid.begin(), h_grid.end());
    std::vector<double> log_h, log_bias;
    for (double h : h_grid) {
        const double b = std::fabs(smoothing_bias(target, kernel, h, w, quad_tol));
        report.abs_bias.push_back(b);
        if (!(b > 0.0))
            fail(Errc::numerical_failure,
                 "bias_slope_check: zero bias at h = " + format_double(h) +
                     "; slope undefined");
        log_h.push_back(std::log(h));
        log_bias.push_back(std::log(b));
    }
    report.fitted_slope = ols_fit(log_h, log_bias).slope;
    return report;
}

double theoretical_rate_slope(int order_r, std::size_t dim) {
    return -static_cast<double>(order_r) / (2.0 * order_r + static_cast<double>(dim));
}

// ------------------------------------------------------------ rate experiment

namespace {

struct TaskResult {
    double sup = 0.0;
    std::size_t undefined = 0;
    bool bounds_ok = true;
    bool quantile_ok = true;
};

TaskResult run_density_or_regression(const RateConfig& cfg, const Sample& sample,
                                     const BandwidthGrid& bands, const EvalGrid& grid) {
    TaskResult res;
    const bool regression = cfg.target == RateTarget::regression;
    PsiIndex psi{regression ? PhiSpec{RawComponent{0}} : PhiSpec{ConstantPhi{1.0}},
                 WSpec{IdentityMap{1}}};
    const EstimateSurface surface = estimate_surface(
        sample, {&psi, 1}, cfg.kernel, bands.values, grid,
        regression ? SurfaceStat::ratio_m : SurfaceStat::density_f, cfg.trim_tau, 1);

    const SupDeviation sup = sup_deviation(surface, [&](std::size_t, std::span<const double> w) {
        return regression ? true_regression(cfg.model, w[0]) : true_density(cfg.model, w[0]);
    });
    res.sup = sup.value;
    res.undefined = sup.skipped;

    if (regression) {
        // Nonnegative kernel weights make m-hat a weighted average of the
        // phi values; check the enclosure at every defined cell.
        double lo = sample.y(0, 0), hi = sample.y(0, 0);
        for (std::size_t t = 1; t < sample.n(); ++t) {
            lo = std::min(lo, sample.y(t, 0));
            hi = std::max(hi, sample.y(t, 0));
        }
        const double slack = 1e-10 * (std::fabs(lo) + std::fabs(hi) + 1.0);
        for (std::size_t c = 0; c < surface.values.size(); ++c) {
            if (!surface.defined[c]) continue;
            if (surface.values[c] < lo - slack || surface.values[c] > hi + slack)
                res.bounds_ok = false;
        }
    }
    return res;
}

TaskResult run_ces(const RateConfig& cfg, const Sample& sample, const BandwidthGrid& bands,
                   const EvalGrid& grid) {
    TaskResult res;
    const auto& model = std::get<GaussianCes>(cfg.model);
    std::vector<double> index_values(sample.n());
    bool any = false;
    for (double angle : cfg.ces.a_angles) {
        const std::vector<double> a{std::cos(angle), std::sin(angle)};
        const CesEvaluator evaluator(sample, a);
        for (double b : cfg.ces.b_values) {
            for (std::size_t t = 0; t < sample.n(); ++t) index_values[t] = b * sample.x(t, 0);
            for (double h : bands.values) {
                for (std::size_t wi = 0; wi < grid.size(); ++wi) {
                    const double w = grid.point(wi)[0];
                    for (double p : cfg.ces.p_levels) {
                        const CesEvaluator::Cell cell =
                            evaluator.evaluate_plugged(index_values, cfg.kernel, h, w, p,
                                                       cfg.trim_tau);
                        if (!cell.has_var || !cell.ces) {
                            ++res.undefined;
                            continue;
                        }
                        res.quantile_ok = res.quantile_ok && cell.quantile_consistent;
                        const GaussianTailTruth truth = ces_truth_gaussian(
                            [&](double v) { return a[0] * mean_fn_eval(model.mu, v / b); },
                            model.sigma_l, p, w);
                        res.sup = std::max(res.sup, std::fabs(*cell.ces - truth.ces));
                        any = true;
                    }
                }
            }
        }
    }
    if (!any) fail(Errc::empty_supremum, "ces rate task: every cell undefined");
    return res;
}

}  // namespace

void validate_rate_config(const RateConfig& cfg) {
    if (cfg.n_grid.empty()) fail(Errc::invalid_input, "rate config: empty n grid");
    for (std::size_t i = 1; i < cfg.n_grid.size(); ++i)
        if (cfg.n_grid[i] <= cfg.n_grid[i - 1])
            fail(Errc::invalid_input, "rate config: n grid must increase strictly");
    if (cfg.replications < 1) fail(Errc::invalid_input, "rate config: replications must be >= 1");
    if (!(cfg.bandwidth_exponent > 0.0 && cfg.bandwidth_exponent < 1.0))
        fail(Errc::invalid_input, "rate config: bandwidth exponent must lie in (0,1)");
    if (!(cfg.bandwidth_c_lo > 0.0 && cfg.bandwidth_c_hi >= cfg.bandwidth_c_lo))
        fail(Errc::invalid_input, "rate config: bad bandwidth sweep multipliers");
    if (cfg.eval_points == 0 || !(cfg.eval_radius > 0.0))
        fail(Errc::invalid_input, "rate config: bad evaluation grid");
    if (!(cfg.trim_tau > 0.0)) fail(Errc::invalid_input, "rate config: trim_tau must be > 0");
    switch (cfg.target) {
        case RateTarget::density:
            break;
        case RateTarget::regression:
            if (!std::holds_alternative<RegressionOnAr1>(cfg.model))
                fail(Errc::no_analytic_truth,
                     "regression target needs the regression-on-ar1 model");
            break;
        case RateTarget::ces:
            if (!std::holds_alternative<GaussianCes>(cfg.model))
                fail(Errc::no_analytic_truth, "ces target needs the gaussian-ces model");
            if (cfg.ces.a_angles.empty() || cfg.ces.b_values.empty() || cfg.ces.p_levels.empty())
                fail(Errc::invalid_input, "ces target: empty index grids");
            for (double b : cfg.ces.b_values)
                if (b == 0.0) fail(Errc::invalid_input, "ces target: b = 0 is degenerate");
            for (double p : cfg.ces.p_levels)
                if (!(p > 0.0 && p < 1.0))
                    fail(Errc::invalid_input, "ces target: p levels must lie in (0,1)");
            if (cfg.kernel.order != 2)
                fail(Errc::invalid_input,
                     "ces target: plug-in quantiles need a nonnegative (order-2) kernel");
            break;
    }
}

namespace {

const char* target_name(RateTarget t) {
    switch (t) {
        case RateTarget::density: return "density";
        case RateTarget::regression: return "regression";
        case RateTarget::ces: return "ces";
    }
    return "?";
}

Json model_echo(const ModelSpec& model) {
    Json j = Json::object();
    j["kind"] = model_name(model);
    j["rho"] = model_rho(model);
    j["sigma_x"] = model_sigma_x(model);
    if (const auto* r = std::get_if<RegressionOnAr1>(&model)) {
        j["m_fn"] = mean_fn_name(r->m);
        j["sigma_u"] = r->sigma_u;
    } else if (const auto* g = std::get_if<GaussianCes>(&model)) {
        j["mu_fn"] = mean_fn_name(g->mu);
        j["sigma_l"] = g->sigma_l;
    }
    return j;
}

}  // namespace

RateReport rate_experiment(const RateConfig& cfg) {
    validate_rate_config(cfg);

    const std::size_t n_count = cfg.n_grid.size();
    const std::size_t reps = static_cast<std::size_t>(cfg.replications);
    std::vector<TaskResult> slots(n_count * reps);

    const EvalGrid grid = line_grid(cfg.eval_radius, cfg.eval_points);

    parallel_for(n_count * reps, cfg.workers, [&](std::size_t task) {
        const std::size_t ni = task / reps;
        const std::size_t rep = task % reps;
        const std::size_t n = cfg.n_grid[ni];
        const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, ni), rep);
        const Sample sample = simulate(cfg.model, n, seed, 0);
        const double h_n = std::pow(static_cast<double>(n), -cfg.bandwidth_exponent);
        const BandwidthGrid bands = bandwidth_grid(cfg.bandwidth_c_lo * h_n,
                                                   cfg.bandwidth_c_hi * h_n, cfg.bandwidth_count);
        slots[task] = cfg.target == RateTarget::ces
                          ? run_ces(cfg, sample, bands, grid)
                          : run_density_or_regression(cfg, sample, bands, grid);
    });

    RateReport report;
    report.model = model_name(cfg.model);
    report.target = target_name(cfg.target);
    report.kernel_name = cfg.kernel.name;
    report.kernel_order = cfg.kernel.order;
    report.n_grid = cfg.n_grid;
    report.replications = cfg.replications;
    report.theoretical_slope = theoretical_rate_slope(cfg.kernel.order, 1);

    std::vector<double> log_n, log_err;
    for (std::size_t ni = 0; ni < n_count; ++ni) {
        CompensatedSum mean;
        std::size_t undefined = 0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const TaskResult& r = slots[ni * reps + rep];
            mean.add(r.sup);
            undefined += r.undefined;
            report.weighted_average_bound_ok &= r.bounds_ok;
            report.quantile_consistent_all &= r.quantile_ok;
        }
        const double mean_sup = mean.value() / static_cast<double>(reps);
        report.sup_errors.push_back(mean_sup);
        report.undefined_by_n.push_back(undefined);
        log_n.push_back(std::log(static_cast<double>(cfg.n_grid[ni])));
        log_err.push_back(std::log(mean_sup));
    }
    const OlsFit fit = ols_fit(log_n, log_err);
    report.fitted_slope = fit.slope;
    report.slope_ci_lo = fit.slope - 1.96 * fit.slope_se;
    report.slope_ci_hi = fit.slope + 1.96 * fit.slope_se;

    Json echo = Json::object();
    echo["model"] = model_echo(cfg.model);
    echo["target"] = target_name(cfg.target);
    Json kj = Json::object();
    kj["name"] = cfg.kernel.name;
    kj["order"] = cfg.kernel.order;
    echo["kernel"] = std::move(kj);
    Json ng = Json::array();
    for (std::size_t n : cfg.n_grid) ng.push_back(static_cast<long long>(n));
    echo["n_grid"] = std::move(ng);
    echo["replications"] = cfg.replications;
    Json bw = Json::object();
    bw["exponent"] = cfg.bandwidth_exponent;
    bw["c_lo"] = cfg.bandwidth_c_lo;
    bw["c_hi"] = cfg.bandwidth_c_hi;
    bw["count"] = cfg.bandwidth_count;
    echo["bandwidth"] = std::move(bw);
    Json ev = Json::object();
    ev["radius"] = cfg.eval_radius;
    ev["points"] = cfg.eval_points;
    echo["eval_grid"] = std::move(ev);
    echo["trim_tau"] = cfg.trim_tau;
    echo["seed"] = static_cast<long long>(cfg.seed);
    if (cfg.target == RateTarget::ces) {
        Json cj = Json::object();
        cj["a_angles"] = Json::array_of(cfg.ces.a_angles);
        cj["b_grid"] = Json::array_of(cfg.ces.b_values);
        cj["p_levels"] = Json::array_of(cfg.ces.p_levels);
        echo["ces"] = std::move(cj);
    }
    report.config_echo = std::move(echo);
    return report;
}

// -------------------------------------------------------------- JSON reports

Json NormCheckReport::to_json() const {
    Json j = Json::object();
    j["mixing"] = mixing;
    j["kernel"] = kernel_name;
    j["density_bound"] = density_bound;
    j["kernel_l2"] = kernel_l2;
    j["kernel_bound"] = kernel_bound;
    j["tail_constant"] = tail_constant;
    j["h_grid"] = Json::array_of(h_grid);
    j["norm_sq"] = Json::array_of(norm_sq);
    j["ratio"] = Json::array_of(ratio);
    j["bound_constant"] = bound_constant;
    j["max_over_min_ratio"] = max_over_min_ratio;
    j["ratio_monotone_increasing"] = ratio_monotone_increasing;
    return j;
}

Json BiasSlopeReport::to_json() const {
    Json j = Json::object();
    j["kernel"] = kernel_name;
    j["order"] = order;
    j["w"] = w;
    j["h_grid"] = Json::array_of(h_grid);
    j["abs_bias"] = Json::array_of(abs_bias);
    j["fitted_slope"] = fitted_slope;
    return j;
}

Json RateReport::to_json() const {
    Json j = Json::object();
    j["config"] = config_echo;
    Json ng = Json::array();
    for (std::size_t n : n_grid) ng.push_back(static_cast<long long>(n));
    j["n_grid"] = std::move(ng);
    j["sup_errors"] = Json::array_of(sup_errors);
    Json undef = Json::array();
    for (std::size_t u : undefined_by_n) undef.push_back(static_cast<long long>(u));
    j["undefined_by_n"] = std::move(undef);
    j["fitted_slope"] = fitted_slope;
    j["theoretical_slope"] = theoretical_slope;
    Json ci = Json::array();
    ci.push_back(slope_ci_lo);
    ci.push_back(slope_ci_hi);
    j["slope_ci"] = std::move(ci);
    j["replications"] = replications;
    j["weighted_average_bound_ok"] = weighted_average_bound_ok;
    j["quantile_consistent_all"] = quantile_consistent_all;
    return j;
}

}  // namespace kernrates

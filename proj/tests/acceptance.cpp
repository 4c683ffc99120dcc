// Acceptance suite: one pass/fail line per criterion, exit code equal to the
// number of failed criteria. Heavy Monte Carlo settings are frozen here; the
// same experiments are reproducible through the CLI configs in configs/.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "kernrates/estimators.hpp"
#include "kernrates/kernel.hpp"
#include "kernrates/model.hpp"
#include "kernrates/numerics.hpp"
#include "kernrates/processes.hpp"
#include "kernrates/risk.hpp"
#include "kernrates/verification.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace kernrates;

namespace {

int g_failures = 0;

class Criterion {
public:
    Criterion(int id, std::string name)
        : id_(id), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass_ = false;
            if (!detail_.empty()) detail_ += "; ";
            detail_ += what;
        }
    }

    void note(const std::string& s) {
        if (!notes_.empty()) notes_ += ", ";
        notes_ += s;
    }

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    ~Criterion() {
        const double secs = elapsed();
        std::printf("[%s] criterion %d: %s (%.1fs)%s%s%s%s\n", pass_ ? "PASS" : "FAIL", id_,
                    name_.c_str(), secs, notes_.empty() ? "" : " — ", notes_.c_str(),
                    detail_.empty() ? "" : " — failed: ", detail_.c_str());
        std::fflush(stdout);
        if (!pass_) ++g_failures;
    }

private:
    int id_;
    std::string name_;
    std::string detail_;
    std::string notes_;
    bool pass_ = true;
    std::chrono::steady_clock::time_point start_;
};

int hw_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

// ------------------------------------------------------------- criterion 1

void criterion_1() {
    Criterion crit(1, "kernel moment validation at 1e-6 with order-6 negative control");
    for (const Kernel& k : {make_epanechnikov(), make_gaussian_kernel(2), make_gaussian_kernel(4),
                            make_gaussian_kernel(6)}) {
        const KernelValidation v = validate_kernel(k, 1e-6);
        crit.check(v.all_passed(), k.name + " failed its own-order validation");
        for (const auto& c : v.checks)
            crit.check(c.residual < 1e-6, k.name + " residual " + c.label);
    }
    const KernelValidation negative = validate_kernel_as_order(make_gaussian_kernel(4), 6, 1e-6);
    crit.check(!negative.all_passed(), "order-4 kernel wrongly passed an order-6 validation");
    crit.check(crit.elapsed() < 1.0, "runtime exceeded 1s");
}

// ------------------------------------------------------------- criterion 2

void criterion_2() {
    Criterion crit(2, "oracle equivalence on 100 random micro-samples at 1e-12");
    std::mt19937_64 rng(20240520);
    std::uniform_real_distribution<double> hu(0.3, 2.0), pu(0.1, 0.9), cu(-1.0, 1.0);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const Sample s = gen::micro_sample(rng);
        const PsiIndex psi{gen::random_phi(rng, s.q(), s.p()), gen::random_wmap(rng, s.p())};
        const Kernel kernel = gen::random_kernel(rng);
        const double h = hu(rng);
        const std::size_t d = w_output_dim(psi.w_map, s.p());
        const std::vector<double> w = gen::random_point(rng, d);

        const double dT =
            std::fabs(estimate_T(s, psi, kernel, h, w) - oracle::estimate_T(s, psi, kernel, h, w));
        const double df = std::fabs(estimate_f(s, psi.w_map, kernel, h, w) -
                                    oracle::estimate_f(s, psi.w_map, kernel, h, w));
        worst = std::max({worst, dT, df});
        crit.check(dT < 1e-12, "estimate_T deviates at rep " + std::to_string(rep));
        crit.check(df < 1e-12, "estimate_f deviates at rep " + std::to_string(rep));

        const auto m = estimate_m(s, psi, kernel, h, w, default_trim_tau);
        const auto mo = oracle::estimate_m(s, psi, kernel, h, w, default_trim_tau);
        crit.check(m.has_value() == mo.has_value(), "trim disagreement (m)");
        if (m && mo) {
            worst = std::max(worst, std::fabs(*m - *mo));
            crit.check(std::fabs(*m - *mo) < 1e-12, "estimate_m deviates");
        }

        // CES with both threshold modes on a q >= 1, p = 1 micro-sample
        const Sample cs = gen::micro_sample_qp(rng, 8, 2, 1);
        const std::vector<double> a = gen::unit_vector(rng, cs.q());
        const Kernel epan = make_epanechnikov();
        const double ch = hu(rng), cw = cu(rng);
        CesIndex index;
        index.a = a;
        index.b = {1.0};
        index.threshold = ConstantThreshold{cu(rng)};
        const auto ces = estimate_ces(cs, index, epan, ch, cw, default_trim_tau);
        const auto ces_ref = oracle::estimate_ces_constant(
            cs, a, {1.0}, std::get<ConstantThreshold>(index.threshold).value, epan, ch, cw,
            default_trim_tau);
        crit.check(ces.has_value() == ces_ref.defined, "ces trim disagreement");
        if (ces && ces_ref.defined) {
            worst = std::max(worst, std::fabs(*ces - ces_ref.ces));
            crit.check(std::fabs(*ces - ces_ref.ces) < 1e-12, "estimate_ces deviates");
        }

        const double p = pu(rng);
        index.threshold = PluggedVar{p};
        bool plug_ok = true;
        try {
            const auto plugged = estimate_ces(cs, index, epan, ch, cw, default_trim_tau);
            const auto plug_ref =
                oracle::estimate_ces_plugged(cs, a, {1.0}, p, epan, ch, cw, default_trim_tau);
            plug_ok = plugged.has_value() == plug_ref.defined;
            if (plugged && plug_ref.defined) {
                worst = std::max(worst, std::fabs(*plugged - plug_ref.ces));
                plug_ok = plug_ok && std::fabs(*plugged - plug_ref.ces) < 1e-12;
            }
        } catch (const Error& e) {
            plug_ok = e.code() == Errc::no_local_data;  // no weight near cw is legitimate
        }
        crit.check(plug_ok, "plugged ces deviates at rep " + std::to_string(rep));
    }
    char wbuf[32];
    std::snprintf(wbuf, sizeof wbuf, "%.2e", worst);
    crit.note(std::string("max |deviation| ") + wbuf);
    crit.check(crit.elapsed() < 5.0, "runtime exceeded 5s");
}

// --------------------------------------------------- criteria 3, 8, 9 shared

RateConfig density_rate_config() {
    RateConfig cfg;
    cfg.model = Ar1Density{0.5, 1.0};
    cfg.target = RateTarget::density;
    cfg.kernel = make_epanechnikov();
    cfg.n_grid = {1000, 2000, 4000, 8000, 16000, 32000};
    cfg.replications = 20;
    cfg.bandwidth_exponent = 0.2;  // h_n = n^{-1/5}
    cfg.bandwidth_c_lo = 0.5;
    cfg.bandwidth_c_hi = 2.0;
    cfg.bandwidth_count = 7;
    cfg.eval_radius = 2.0;
    cfg.eval_points = 41;
    cfg.seed = 42;
    return cfg;
}

RateConfig ces_rate_config() {
    RateConfig cfg;
    cfg.model = GaussianCes{0.5, 1.0, MeanFn::sin_wave, 1.0};
    cfg.target = RateTarget::ces;
    cfg.kernel = make_epanechnikov();
    cfg.n_grid = {2000, 8000, 32000};
    cfg.replications = 20;
    cfg.bandwidth_exponent = 0.2;
    cfg.bandwidth_c_lo = 0.5;
    cfg.bandwidth_c_hi = 2.0;
    cfg.bandwidth_count = 3;
    cfg.eval_radius = 1.0;
    cfg.eval_points = 11;
    cfg.seed = 42;
    for (int k = 0; k < 8; ++k)
        cfg.ces.a_angles.push_back(2.0 * 3.14159265358979323846 * k / 8.0);
    cfg.ces.b_values = {0.6, 0.8, 1.0, 1.25, 1.5};
    cfg.ces.p_levels = {0.1, 0.05};
    return cfg;
}

std::string g_density_json_w8;
std::string g_ces_json_w8;

void criterion_3() {
    Criterion crit(3, "uniform-in-bandwidth density rate, Epanechnikov r=2 (theory -0.4)");
    RateConfig cfg = density_rate_config();
    cfg.workers = 8;
    const RateReport report = rate_experiment(cfg);
    g_density_json_w8 = report.to_json().dump();
    crit.note("fitted slope " + fmt(report.fitted_slope));
    crit.check(report.fitted_slope >= -0.55 && report.fitted_slope <= -0.25,
               "slope " + fmt(report.fitted_slope) + " outside [-0.55, -0.25]");
}

void criterion_4() {
    Criterion crit(4, "higher-order separation, Gaussian r=4 vs r=2 at h=n^{-1/9}");
    RateConfig base = density_rate_config();
    base.bandwidth_exponent = 1.0 / 9.0;
    base.workers = hw_workers();

    int separated = 0;
    double first_slope4 = 0.0;
    std::vector<std::uint64_t> masters{42, 43, 44, 45, 46};
    for (std::size_t i = 0; i < masters.size(); ++i) {
        RateConfig c4 = base;
        c4.kernel = make_gaussian_kernel(4);
        c4.seed = masters[i];
        const RateReport r4 = rate_experiment(c4);
        RateConfig c2 = base;
        c2.kernel = make_gaussian_kernel(2);
        c2.seed = masters[i];
        const RateReport r2 = rate_experiment(c2);
        if (i == 0) {
            first_slope4 = r4.fitted_slope;
            crit.note("slope4 " + fmt(r4.fitted_slope) + ", slope2 " + fmt(r2.fitted_slope));
        }
        if (r4.fitted_slope < r2.fitted_slope) ++separated;
    }
    crit.note(std::to_string(separated) + "/5 seed sets separated");
    crit.check(first_slope4 >= -0.60 && first_slope4 <= -0.30,
               "order-4 slope " + fmt(first_slope4) + " outside [-0.60, -0.30]");
    crit.check(separated >= 4, "separation below 80% of seed sets");
}

void criterion_5() {
    Criterion crit(5, "smoothing bias order by quadrature: slope r within 0.2");
    const double sd = stationary_sd(Ar1Density{0.5, 1.0});
    auto target = [sd](double w) { return normal_pdf(w / sd) / sd; };
    const std::vector<double> hs{0.4, 0.2, 0.1, 0.05};

    const BiasSlopeReport r2 = bias_slope_check(target, make_epanechnikov(), hs, 0.0, 1e-10);
    crit.note("r=2 slope " + fmt(r2.fitted_slope));
    crit.check(std::fabs(r2.fitted_slope - 2.0) <= 0.2,
               "r=2 slope " + fmt(r2.fitted_slope) + " not within 2 +- 0.2");

    const BiasSlopeReport r4 = bias_slope_check(target, make_gaussian_kernel(4), hs, 0.0, 1e-10);
    crit.note("r=4 slope " + fmt(r4.fitted_slope));
    crit.check(std::fabs(r4.fitted_slope - 4.0) <= 0.2,
               "r=4 slope " + fmt(r4.fitted_slope) + " not within 4 +- 0.2");
    crit.check(crit.elapsed() < 1.0, "runtime exceeded 1s");
}

void criterion_6() {
    Criterion crit(6, "beta-norm bound: ratio stability over the h grid plus iid identity");
    const MixingSpec geo = GeometricMixing{0.5, 3.0};
    const Kernel epan = make_epanechnikov();
    const std::vector<double> hs{0.4, 0.2, 0.1, 0.05, 0.02};
    const NormCheckReport report = kernel_class_norm_check(geo, epan, 0.4, hs);

    std::string ratios;
    for (double r : report.ratio) ratios += (ratios.empty() ? "" : " ") + fmt(r);
    crit.note("ratios {" + ratios + "}");
    crit.check(report.max_over_min_ratio < 2.0,
               "ratio varies by " + fmt(report.max_over_min_ratio) + " (factor >= 2)");
    crit.check(!report.ratio_monotone_increasing, "ratio increases monotonically as h -> 0");

    // iid reduction: the norm functional equals the plain L2 integral of the
    // same tail-bound quantile, here in closed form.
    const MixingSpec iid = IidMixing{3.0};
    const double C = report.tail_constant, M = epan.bound, h = 0.1;
    auto q = [&](double u) { return std::min(M, std::sqrt(C * h / u)); };
    const BetaNormResult iid_norm = beta_norm_sq(iid, q);
    const double closed = C * h * (1.0 + std::log(M * M / (C * h)));
    crit.check(!iid_norm.diverged && std::fabs(iid_norm.value - closed) < 1e-8,
               "iid L2 identity off by " + std::to_string(iid_norm.value - closed));
}

void criterion_7() {
    Criterion crit(7, "CES uniform rate with plug-in VaR thresholds (Theorem 2 testbed)");
    RateConfig cfg = ces_rate_config();
    cfg.workers = 8;
    const RateReport report = rate_experiment(cfg);
    g_ces_json_w8 = report.to_json().dump();

    crit.note("fitted slope " + fmt(report.fitted_slope));
    std::string sups;
    for (double s : report.sup_errors) sups += (sups.empty() ? "" : " ") + fmt(s);
    crit.note("sup errors {" + sups + "}");
    for (std::size_t i = 1; i < report.sup_errors.size(); ++i)
        crit.check(report.sup_errors[i] < report.sup_errors[i - 1],
                   "sup error did not decrease from n=" + std::to_string(report.n_grid[i - 1]));
    crit.check(report.fitted_slope >= -0.55 && report.fitted_slope <= -0.15,
               "slope " + fmt(report.fitted_slope) + " outside [-0.55, -0.15]");
    crit.check(report.quantile_consistent_all, "quantile consistency violated in some cell");
}

void criterion_8() {
    Criterion crit(8, "ratio trimming and enclosure on the regression target");
    RateConfig cfg = density_rate_config();
    cfg.model = RegressionOnAr1{0.5, 1.0, MeanFn::sin_wave, 0.5};
    cfg.target = RateTarget::regression;
    cfg.workers = hw_workers();
    const RateReport report = rate_experiment(cfg);

    crit.check(report.weighted_average_bound_ok, "weighted-average bound violated");
    std::string undef;
    for (std::size_t u : report.undefined_by_n) undef += (undef.empty() ? "" : " ") + std::to_string(u);
    crit.note("undefined cells per n {" + undef + "}");
    for (std::size_t i = 0; i < report.n_grid.size(); ++i)
        if (report.n_grid[i] >= 8000)
            crit.check(report.undefined_by_n[i] == 0,
                       "trimmed cells remain at n=" + std::to_string(report.n_grid[i]));
    crit.note("fitted slope " + fmt(report.fitted_slope));
}

void criterion_9() {
    Criterion crit(9, "byte-identical reports across worker counts 1 and 8");
    RateConfig density = density_rate_config();
    density.workers = 1;
    const std::string density_w1 = rate_experiment(density).to_json().dump();
    crit.check(density_w1 == g_density_json_w8, "density report differs between 1 and 8 workers");

    RateConfig ces = ces_rate_config();
    ces.workers = 1;
    const std::string ces_w1 = rate_experiment(ces).to_json().dump();
    crit.check(ces_w1 == g_ces_json_w8, "ces report differs between 1 and 8 workers");
    crit.note("density report " + std::to_string(g_density_json_w8.size()) + " bytes, ces report " +
              std::to_string(g_ces_json_w8.size()) + " bytes");
}

}  // namespace

int main() {
    std::printf("acceptance suite (%d hardware threads)\n", hw_workers());
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures;
}

// Command-line front door: config parsing, subcommand dispatch, CSV/JSON
// report emission. Reports are canonical JSON (sorted keys, 17-significant-
// digit floats, no timestamps), so identical inputs give byte-identical
// files; worker count is orchestration only and never enters a report.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"

#include "kernrates/config.hpp"
#include "kernrates/estimators.hpp"
#include "kernrates/json_writer.hpp"
#include "kernrates/kernel.hpp"
#include "kernrates/model.hpp"
#include "kernrates/processes.hpp"
#include "kernrates/risk.hpp"
#include "kernrates/verification.hpp"

namespace kr = kernrates;

namespace {

int exit_code_for(kr::Errc c) {
    switch (c) {
        case kr::Errc::parse_error:
        case kr::Errc::invalid_input:
        case kr::Errc::invalid_bandwidth:
        case kr::Errc::unsupported_order:
        case kr::Errc::nonstationary_model:
            return 2;
        case kr::Errc::numerical_failure:
            return 3;
        case kr::Errc::no_local_data:
        case kr::Errc::no_analytic_truth:
        case kr::Errc::empty_supremum:
            return 4;
    }
    return 1;
}

int report_config_errors(const std::vector<std::string>& errors) {
    std::cerr << "config validation failed with " << errors.size() << " issue(s):\n";
    for (const std::string& e : errors) std::cerr << "  - " << e << "\n";
    return 2;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) kr::fail(kr::Errc::parse_error, "cannot open output file: " + path);
    out << content;
    if (!out) kr::fail(kr::Errc::parse_error, "failed writing " + path);
}

void write_report(const std::string& path, const kr::Json& body) {
    write_file(path, body.dump() + "\n");
    std::cout << "report written to " << path << "\n";
}

int run_simulate(const std::string& config_path, long long seed_override) {
    std::vector<std::string> errors;
    kr::SimulateJob job = kr::load_simulate_job(config_path, errors);
    if (!errors.empty()) return report_config_errors(errors);
    if (seed_override >= 0) {
        job.seed = static_cast<std::uint64_t>(seed_override);
        job.echo["seed"] = seed_override;
    }
    const kr::Sample sample = kr::simulate(job.model, job.n, job.seed, job.burnin);
    kr::save_sample_csv(sample, job.output);
    std::cout << "simulated " << sample.n() << " rows (q=" << sample.q() << ", p=" << sample.p()
              << ") of " << kr::model_name(job.model) << " into " << job.output << "\n";
    return 0;
}

int run_validate_kernel(const std::string& config_path) {
    std::vector<std::string> errors;
    kr::ValidateKernelJob job = kr::load_validate_kernel_job(config_path, errors);
    if (!errors.empty()) return report_config_errors(errors);
    const kr::KernelValidation result = kr::validate_kernel(job.kernel, job.tol);

    kr::Json body = kr::Json::object();
    body["config"] = job.echo;
    body["order"] = result.order;
    body["integration_halfwidth"] = result.integration_halfwidth;
    kr::Json checks = kr::Json::array();
    for (const auto& c : result.checks) {
        kr::Json cj = kr::Json::object();
        cj["check"] = c.label;
        cj["value"] = c.value;
        cj["target"] = c.target;
        cj["residual"] = c.residual;
        cj["passed"] = c.passed;
        checks.push_back(std::move(cj));
        std::cout << (c.passed ? "  pass  " : "  FAIL  ") << c.label
                  << "  residual=" << kr::format_double(c.residual) << "\n";
    }
    body["checks"] = std::move(checks);
    body["all_passed"] = result.all_passed();
    write_report(job.output, body);
    if (!result.all_passed()) {
        std::cerr << "kernel " << job.kernel.name << " failed validation\n";
        return 3;
    }
    std::cout << "kernel " << job.kernel.name << " passed all checks at tol "
              << kr::format_double(job.tol) << "\n";
    return 0;
}

int run_estimate(const std::string& config_path, int workers) {
    std::vector<std::string> errors;
    kr::EstimateJob job = kr::load_estimate_job(config_path, errors);
    if (!errors.empty()) return report_config_errors(errors);

    const kr::Sample sample = kr::load_sample(job.data_path, job.q, job.p);
    sample.check_finite();
    const kr::BandwidthGrid bands = kr::bandwidth_grid(job.h_lo, job.h_hi, job.h_count);
    const kr::EvalGrid grid = kr::line_grid(job.radius, job.points);
    const kr::PsiIndex psi = job.psi;
    const kr::EstimateSurface surface = kr::estimate_surface(
        sample, {&psi, 1}, job.kernel, bands.values, grid, job.stat, job.trim_tau, workers);

    kr::Json body = kr::Json::object();
    body["config"] = job.echo;
    body["surface"] = surface.to_json();
    write_report(job.output, body);

    std::size_t undefined = 0;
    for (auto d : surface.defined) undefined += d ? 0 : 1;
    std::cout << "estimated " << surface.values.size() << " cells over " << bands.values.size()
              << " bandwidths x " << grid.size() << " points; " << undefined
              << " trimmed cells\n";
    return 0;
}

int run_ces(const std::string& config_path, int workers) {
    std::vector<std::string> errors;
    kr::CesJob job = kr::load_ces_job(config_path, errors);
    if (!errors.empty()) return report_config_errors(errors);

    const kr::Sample sample = kr::load_sample(job.data_path, job.q, job.p);
    sample.check_finite();
    const kr::BandwidthGrid bands = kr::bandwidth_grid(job.h_lo, job.h_hi, job.h_count);
    const kr::EvalGrid grid = kr::line_grid(job.radius, job.points);
    const bool plugged = job.c_constants.empty();
    const std::vector<double>& thresholds = plugged ? job.p_levels : job.c_constants;

    const std::size_t na = job.a_angles.size(), nb = job.b_grid.size(),
                      nc = thresholds.size(), nh = bands.values.size(), nw = grid.size();
    const std::size_t cells = na * nb * nc * nh * nw;
    std::vector<double> var_values(plugged ? cells : 0, 0.0);
    std::vector<double> ces_values(cells, 0.0);
    std::vector<std::uint8_t> defined(cells, 0);
    std::vector<std::uint8_t> quantile_ok_by_a(na, 1);

    // One task per portfolio direction: losses sort once, cells share it.
    kr::parallel_for(na, workers, [&](std::size_t ai) {
        const double angle = job.a_angles[ai];
        const std::vector<double> a{std::cos(angle), std::sin(angle)};
        const kr::CesEvaluator evaluator(sample, a);
        std::vector<double> index_values(sample.n());
        for (std::size_t bi = 0; bi < nb; ++bi) {
            for (std::size_t t = 0; t < sample.n(); ++t)
                index_values[t] = job.b_grid[bi] * sample.x(t, 0);
            for (std::size_t ci = 0; ci < nc; ++ci) {
                for (std::size_t hi = 0; hi < nh; ++hi) {
                    for (std::size_t wi = 0; wi < nw; ++wi) {
                        const std::size_t cell =
                            (((ai * nb + bi) * nc + ci) * nh + hi) * nw + wi;
                        const double w = grid.point(wi)[0];
                        const double h = bands.values[hi];
                        if (plugged) {
                            const auto c = evaluator.evaluate_plugged(
                                index_values, job.kernel, h, w, thresholds[ci], job.trim_tau);
                            if (!c.has_var) continue;
                            var_values[cell] = c.var;
                            if (!c.quantile_consistent) quantile_ok_by_a[ai] = 0;
                            if (c.ces) {
                                ces_values[cell] = *c.ces;
                                defined[cell] = 1;
                            }
                        } else {
                            kr::CesIndex index;
                            index.a = a;
                            index.b = {job.b_grid[bi]};
                            index.threshold = kr::ConstantThreshold{thresholds[ci]};
                            const auto v = kr::estimate_ces(sample, index, job.kernel, h, w,
                                                            job.trim_tau);
                            if (v) {
                                ces_values[cell] = *v;
                                defined[cell] = 1;
                            }
                        }
                    }
                }
            }
        }
    });

    kr::Json body = kr::Json::object();
    body["config"] = job.echo;
    body["n"] = static_cast<long long>(sample.n());
    kr::Json dims = kr::Json::object();
    dims["a"] = static_cast<long long>(na);
    dims["b"] = static_cast<long long>(nb);
    dims["threshold"] = static_cast<long long>(nc);
    dims["h"] = static_cast<long long>(nh);
    dims["w"] = static_cast<long long>(nw);
    body["dims"] = std::move(dims);
    body["h_grid"] = kr::Json::array_of(bands.values);
    body["w_grid"] = kr::Json::array_of(grid.points);
    body["ces"] = kr::Json::array_of(ces_values);
    if (plugged) {
        bool quantile_ok = true;
        for (auto ok : quantile_ok_by_a) quantile_ok = quantile_ok && ok;
        body["var"] = kr::Json::array_of(var_values);
        body["quantile_consistent"] = quantile_ok;
    }
    kr::Json mask = kr::Json::array();
    for (auto d : defined) mask.push_back(static_cast<long long>(d));
    body["defined"] = std::move(mask);
    write_report(job.output, body);

    std::size_t undefined = 0;
    for (auto d : defined) undefined += d ? 0 : 1;
    std::cout << "ces surface over " << cells << " cells (" << undefined << " trimmed)"
              << (plugged ? std::string(", plug-in VaR thresholds") : std::string()) << "\n";
    return 0;
}

int run_rate_check(const std::string& config_path, int workers, long long seed_override) {
    std::vector<std::string> errors;
    kr::RateJob job = kr::load_rate_job(config_path, errors);
    if (!errors.empty()) return report_config_errors(errors);
    job.config.workers = workers;
    if (seed_override >= 0) job.config.seed = static_cast<std::uint64_t>(seed_override);

    const kr::RateReport report = kr::rate_experiment(job.config);
    write_report(job.output, report.to_json());

    std::printf("target %s, kernel %s (r=%d)\n", report.target.c_str(),
                report.kernel_name.c_str(), report.kernel_order);
    std::printf("%10s  %14s  %12s\n", "n", "mean sup err", "undefined");
    for (std::size_t i = 0; i < report.n_grid.size(); ++i)
        std::printf("%10zu  %14.6g  %12zu\n", report.n_grid[i], report.sup_errors[i],
                    report.undefined_by_n[i]);
    std::printf("fitted slope %.4f (theory %.4f), ci [%.4f, %.4f], %d replications\n",
                report.fitted_slope, report.theoretical_slope, report.slope_ci_lo,
                report.slope_ci_hi, report.replications);
    return 0;
}

int run_theory_check(const std::string& config_path) {
    std::vector<std::string> errors;
    kr::TheoryJob job = kr::load_theory_job(config_path, errors);
    if (!errors.empty()) return report_config_errors(errors);

    const double sigma = job.bias_sigma;
    auto target = [sigma](double w) { return kr::normal_pdf(w / sigma) / sigma; };

    kr::Json body = kr::Json::object();
    body["config"] = job.echo;

    kr::Json bias = kr::Json::object();
    for (const kr::Kernel& k : {kr::make_epanechnikov(), kr::make_gaussian_kernel(4)}) {
        const kr::BiasSlopeReport r =
            kr::bias_slope_check(target, k, job.bias_h_grid, job.bias_w, job.quad_tol);
        bias[k.name] = r.to_json();
        std::printf("bias slope %-13s r=%d: fitted %.4f\n", k.name.c_str(), k.order,
                    r.fitted_slope);
    }
    body["bias"] = std::move(bias);

    const kr::NormCheckReport norm =
        kr::kernel_class_norm_check(job.mixing, job.norm_kernel, job.density_bound,
                                    job.norm_h_grid);
    body["norm"] = norm.to_json();
    std::printf("beta-norm ratio over h grid: max/min %.4f, monotone increasing: %s\n",
                norm.max_over_min_ratio, norm.ratio_monotone_increasing ? "yes" : "no");

    write_report(job.output, body);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernrates: kernel estimation for weakly dependent time series"};
    app.require_subcommand(1);

    std::string config_path;
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    long long seed_override = -1;

    auto add_common = [&](CLI::App* sub, bool with_workers, bool with_seed) {
        sub->add_option("--config", config_path, "experiment config file")->required();
        if (with_workers) sub->add_option("--workers", workers, "worker thread count");
        if (with_seed) sub->add_option("--seed", seed_override, "master seed override");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "simulate a mixing process to CSV");
    add_common(simulate, false, true);
    CLI::App* validate = app.add_subcommand("validate-kernel", "check kernel moment conditions");
    add_common(validate, false, false);
    CLI::App* estimate = app.add_subcommand("estimate", "kernel estimates over a grid");
    add_common(estimate, true, false);
    CLI::App* ces = app.add_subcommand("ces", "conditional VaR and expected shortfall surfaces");
    add_common(ces, true, false);
    CLI::App* rate = app.add_subcommand("rate-check", "Monte Carlo convergence-rate experiment");
    add_common(rate, true, true);
    CLI::App* theory = app.add_subcommand("theory-check", "bias order and beta-norm checks");
    add_common(theory, false, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(config_path, seed_override);
        if (validate->parsed()) return run_validate_kernel(config_path);
        if (estimate->parsed()) return run_estimate(config_path, workers);
        if (ces->parsed()) return run_ces(config_path, workers);
        if (rate->parsed()) return run_rate_check(config_path, workers, seed_override);
        if (theory->parsed()) return run_theory_check(config_path);
    } catch (const kr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

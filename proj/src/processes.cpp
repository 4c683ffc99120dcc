#include "kernrates/processes.hpp"

#include <cmath>

#include "kernrates/numerics.hpp"

namespace kernrates {

double mixing_beta(const MixingSpec& spec, std::size_t j) {
    if (j == 0) return 1.0;
    if (std::holds_alternative<IidMixing>(spec)) return 0.0;
    if (const auto* g = std::get_if<GeometricMixing>(&spec))
        return std::pow(g->rho, static_cast<double>(j));
    const auto& p = std::get<PolynomialMixing>(spec);
    return std::min(1.0, p.scale * std::pow(static_cast<double>(j), -p.exponent));
}

double mixing_delta(const MixingSpec& spec) {
    return std::visit([](const auto& s) { return s.delta; }, spec);
}

void validate_mixing(const MixingSpec& spec) {
    const double delta = mixing_delta(spec);
    if (!(delta > 2.0)) fail(Errc::invalid_input, "mixing spec: delta must exceed 2");
    if (const auto* g = std::get_if<GeometricMixing>(&spec)) {
        if (!(g->rho > 0.0 && g->rho < 1.0))
            fail(Errc::invalid_input, "geometric mixing: rho must lie in (0,1)");
    } else if (const auto* p = std::get_if<PolynomialMixing>(&spec)) {
        if (!(p->scale > 0.0 && p->scale <= 1.0))
            fail(Errc::invalid_input, "polynomial mixing: scale must lie in (0,1]");
        if (!(p->exponent > 1.0))
            fail(Errc::invalid_input, "polynomial mixing: exponent must exceed 1");
        if (!(p->exponent > delta / (delta - 2.0)))
            fail(Errc::invalid_input,
                 "polynomial mixing: needs exponent > delta/(delta-2) for the moment/dependence "
                 "trade-off");
    }
}

std::string mixing_name(const MixingSpec& spec) {
    if (std::holds_alternative<IidMixing>(spec)) return "iid";
    if (std::holds_alternative<GeometricMixing>(spec)) return "geometric";
    return "polynomial";
}

double mean_fn_eval(MeanFn fn, double x) {
    switch (fn) {
        case MeanFn::sin_wave: return std::sin(x);
        case MeanFn::linear: return x;
        case MeanFn::quadratic_bump: return std::exp(-x * x);
    }
    return 0.0;
}

const char* mean_fn_name(MeanFn fn) {
    switch (fn) {
        case MeanFn::sin_wave: return "sin";
        case MeanFn::linear: return "linear";
        case MeanFn::quadratic_bump: return "quadratic-bump";
    }
    return "?";
}

MeanFn mean_fn_from_name(const std::string& name) {
    if (name == "sin") return MeanFn::sin_wave;
    if (name == "linear") return MeanFn::linear;
    if (name == "quadratic-bump") return MeanFn::quadratic_bump;
    fail(Errc::parse_error, "unknown mean function: " + name);
}

std::string model_name(const ModelSpec& model) {
    if (std::holds_alternative<Ar1Density>(model)) return "ar1-density";
    if (std::holds_alternative<RegressionOnAr1>(model)) return "regression-on-ar1";
    return "gaussian-ces";
}

double model_rho(const ModelSpec& model) {
    return std::visit([](const auto& m) { return m.rho; }, model);
}

double model_sigma_x(const ModelSpec& model) {
    if (const auto* a = std::get_if<Ar1Density>(&model)) return a->sigma;
    if (const auto* r = std::get_if<RegressionOnAr1>(&model)) return r->sigma_x;
    return std::get<GaussianCes>(model).sigma_x;
}

double stationary_sd(const ModelSpec& model) {
    const double rho = model_rho(model);
    return model_sigma_x(model) / std::sqrt(1.0 - rho * rho);
}

double NormalRng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

namespace {

void validate_model(const ModelSpec& model) {
    const double rho = model_rho(model);
    if (!(std::fabs(rho) < 1.0))
        fail(Errc::nonstationary_model, "|rho| must be below 1 for a stationary AR(1)");
    if (!(model_sigma_x(model) > 0.0))
        fail(Errc::invalid_input, "innovation scale must be positive");
    if (const auto* r = std::get_if<RegressionOnAr1>(&model)) {
        if (!(r->sigma_u > 0.0)) fail(Errc::invalid_input, "sigma_u must be positive");
    } else if (const auto* g = std::get_if<GaussianCes>(&model)) {
        if (!(g->sigma_l > 0.0)) fail(Errc::invalid_input, "sigma_l must be positive");
    }
}

}  // namespace

Sample simulate(const ModelSpec& model, std::size_t n, std::uint64_t seed, std::size_t burnin) {
    validate_model(model);
    if (n == 0) fail(Errc::invalid_input, "simulate: n must be >= 1");

    const double rho = model_rho(model);
    const double sigma = model_sigma_x(model);
    NormalRng rng(seed);

    double state = stationary_sd(model) * rng.normal();
    for (std::size_t t = 0; t < burnin; ++t) state = rho * state + sigma * rng.normal();

    const std::size_t q = std::holds_alternative<GaussianCes>(model) ? 2 : 1;
    Sample s(n, q, 1);
    for (std::size_t t = 0; t < n; ++t) {
        state = rho * state + sigma * rng.normal();
        s.set_x(t, 0, state);
        if (const auto* r = std::get_if<RegressionOnAr1>(&model)) {
            s.set_y(t, 0, mean_fn_eval(r->m, state) + r->sigma_u * rng.normal());
        } else if (const auto* g = std::get_if<GaussianCes>(&model)) {
            s.set_y(t, 0, -mean_fn_eval(g->mu, state) + g->sigma_l * rng.normal());
            s.set_y(t, 1, g->sigma_l * rng.normal());
        } else {
            s.set_y(t, 0, state);
        }
    }
    return s;
}

double true_density(const ModelSpec& model, double w) {
    const double sd = stationary_sd(model);
    return normal_pdf(w / sd) / sd;
}

double true_index_density(const ModelSpec& model, double b, double w) {
    if (b == 0.0) fail(Errc::no_analytic_truth, "degenerate single index b = 0");
    const double sd = std::fabs(b) * stationary_sd(model);
    return normal_pdf(w / sd) / sd;
}

double true_regression(const ModelSpec& model, double w) {
    if (const auto* r = std::get_if<RegressionOnAr1>(&model)) return mean_fn_eval(r->m, w);
    fail(Errc::no_analytic_truth, "true_regression needs the regression-on-ar1 model");
}

}  // namespace kernrates

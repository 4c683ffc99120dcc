#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>

#include "kernrates/model.hpp"

namespace kernrates {

// ------------------------------------------------------------- mixing specs

/// beta_j = 0 for j >= 1 (and beta_0 = 1 by convention, as for all specs).
struct IidMixing {
    double delta = 3.0;
};
/// beta_j = rho^j, the geometric decay of the Gaussian AR(1) testbed.
struct GeometricMixing {
    double rho = 0.5;
    double delta = 3.0;
};
/// beta_j = min(1, scale * j^-exponent) for j >= 1. Admissible only when
/// exponent > delta/(delta - 2); exists for the norm checks, not simulation.
struct PolynomialMixing {
    double exponent = 2.0;
    double scale = 1.0;
    double delta = 3.0;
};
using MixingSpec = std::variant<IidMixing, GeometricMixing, PolynomialMixing>;

double mixing_beta(const MixingSpec& spec, std::size_t j);
double mixing_delta(const MixingSpec& spec);
void validate_mixing(const MixingSpec& spec);
std::string mixing_name(const MixingSpec& spec);

// --------------------------------------------------------------- mean models

enum class MeanFn { sin_wave, linear, quadratic_bump };

double mean_fn_eval(MeanFn fn, double x);
const char* mean_fn_name(MeanFn fn);
MeanFn mean_fn_from_name(const std::string& name);

/// X_t = rho X_{t-1} + e_t, e ~ N(0, sigma^2); sample stores y = x (q = 1).
struct Ar1Density {
    double rho = 0.5;
    double sigma = 1.0;
};

/// Y_t = m(X_t) + u_t over the same AR(1) covariate; u iid N(0, sigma_u^2).
struct RegressionOnAr1 {
    double rho = 0.5;
    double sigma_x = 1.0;
    MeanFn m = MeanFn::sin_wave;
    double sigma_u = 0.5;
};

/// q = 2 testbed for the CES application: Y_t = (-mu(X_t) + sigma_l e1,
/// sigma_l e2), so the loss -a'Y given b X = w is exactly
/// N(a_1 mu(w/b), sigma_l^2) for any unit a and scalar b != 0 — the
/// closed-form oracle of the risk module.
struct GaussianCes {
    double rho = 0.5;
    double sigma_x = 1.0;
    MeanFn mu = MeanFn::sin_wave;
    double sigma_l = 1.0;
};

using ModelSpec = std::variant<Ar1Density, RegressionOnAr1, GaussianCes>;

std::string model_name(const ModelSpec& model);
double model_rho(const ModelSpec& model);
double model_sigma_x(const ModelSpec& model);

/// Stationary standard deviation of the AR(1) covariate.
double stationary_sd(const ModelSpec& model);

/// Simulates n observations after `burnin` discarded steps. The AR(1) state
/// initializes from its exact stationary law, so the output is stationary
/// even with burnin = 0. Same (model, n, seed, burnin) gives a bitwise
/// identical sample.
Sample simulate(const ModelSpec& model, std::size_t n, std::uint64_t seed, std::size_t burnin = 0);

/// Density of W(X_t) = X_t at w (identity map, d = 1).
double true_density(const ModelSpec& model, double w);

/// Density of b * X_t at w (single index, scalar b != 0).
double true_index_density(const ModelSpec& model, double b, double w);

/// m(w) for the regression model with phi = Raw(0).
double true_regression(const ModelSpec& model, double w);

/// Deterministic normal stream: 53-bit uniforms from mt19937_64 through a
/// Box-Muller pair, so sequences do not depend on the standard library's
/// distribution internals.
class NormalRng {
public:
    explicit NormalRng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // in (0, 1]
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal();

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace kernrates

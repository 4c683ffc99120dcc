#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kernrates/errors.hpp"

namespace kernrates {

/// A stationary sample {(Y_t, X_t)}_{t=1..n}, stored row-major. Immutable in
/// normal use after construction; estimators take it by const reference and
/// share it freely across workers.
class Sample {
public:
    Sample(std::size_t n, std::size_t q, std::size_t p);

    std::size_t n() const { return n_; }
    std::size_t q() const { return q_; }
    std::size_t p() const { return p_; }

    std::span<const double> y_row(std::size_t t) const { return {y_.data() + t * q_, q_}; }
    std::span<const double> x_row(std::size_t t) const { return {x_.data() + t * p_, p_}; }

    double y(std::size_t t, std::size_t j) const { return y_[t * q_ + j]; }
    double x(std::size_t t, std::size_t j) const { return x_[t * p_ + j]; }
    void set_y(std::size_t t, std::size_t j, double v) { y_[t * q_ + j] = v; }
    void set_x(std::size_t t, std::size_t j, double v) { x_[t * p_ + j] = v; }

    /// Throws invalid-input if any entry is non-finite.
    void check_finite() const;

private:
    std::size_t n_, q_, p_;
    std::vector<double> y_, x_;
};

/// CSV layout is fixed: header row, then columns y_1..y_q, x_1..x_p.
Sample load_sample(const std::string& path, std::size_t q, std::size_t p);
void save_sample_csv(const Sample& sample, const std::string& path);

// ---------------------------------------------------------------- thresholds

struct ConstantThreshold {
    double value = 0.0;
};
struct AffineThreshold {
    std::vector<double> slope;
    double intercept = 0.0;
};
/// Placeholder for a conditional-VaR plug-in; the risk module resolves it to
/// a constant at each evaluation point before phi evaluation.
struct PluggedVar {
    double p_level = 0.05;
};
using ThresholdFn = std::variant<ConstantThreshold, AffineThreshold, PluggedVar>;

double threshold_eval(const ThresholdFn& c, std::span<const double> x);

// --------------------------------------------------- dependent-variable maps

struct RawComponent {
    std::size_t component = 0;  // index into y
};
struct ShortfallNumerator {
    std::vector<double> a;  // unit portfolio weights
    ThresholdFn threshold;
};
struct ShortfallIndicator {
    std::vector<double> a;
    ThresholdFn threshold;
};
struct ConstantPhi {
    double value = 1.0;
};
using PhiSpec = std::variant<RawComponent, ShortfallNumerator, ShortfallIndicator, ConstantPhi>;

/// phi(z) for z = (y, x). Shortfall variants use the strict inequality
/// -a'y > c(x).
double phi_eval(const PhiSpec& phi, std::span<const double> y, std::span<const double> x);

/// Checked constructors for the shortfall variants (|a| = 1 enforced).
PhiSpec make_shortfall_numerator(std::vector<double> a, ThresholdFn c);
PhiSpec make_shortfall_indicator(std::vector<double> a, ThresholdFn c);

// -------------------------------------------------------------- regressor maps

struct IdentityMap {
    std::size_t dim = 1;  // must equal p
};
struct SingleIndex {
    std::vector<double> b;  // output dim 1
};
struct CoordinateSubset {
    std::vector<std::size_t> indices;
};
using WSpec = std::variant<IdentityMap, SingleIndex, CoordinateSubset>;

std::size_t w_output_dim(const WSpec& w_map, std::size_t p);
void w_eval_into(const WSpec& w_map, std::span<const double> x, std::span<double> out);
std::vector<double> w_eval(const WSpec& w_map, std::span<const double> x);

/// psi = (phi, W), one point of the index set Psi.
struct PsiIndex {
    PhiSpec phi;
    WSpec w_map;
};

}  // namespace kernrates

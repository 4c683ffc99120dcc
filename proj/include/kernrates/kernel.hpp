#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kernrates/errors.hpp"
#include "kernrates/numerics.hpp"

namespace kernrates {

enum class KernelFamily { epanechnikov, gaussian, custom };

/// Which branch of the kernel smoothness condition the kernel satisfies:
/// Lipschitz with truncated support, or differentiable with a polynomially
/// decaying derivative tail.
enum class SmoothnessBranch { lipschitz_truncated, differentiable_tail };

/// A univariate kernel of order r. Immutable after construction; safe for
/// concurrent shared reads. Built-in families evaluate through an inlined
/// switch; `custom` exists so tests can validate arbitrary candidates.
struct Kernel {
    std::string name;
    KernelFamily family = KernelFamily::epanechnikov;
    int order = 2;                          // r
    std::optional<double> support;         // half-width L; nullopt = full line
    SmoothnessBranch branch = SmoothnessBranch::lipschitz_truncated;
    double bound = 0.0;                    // sup_t |k(t)|
    std::function<double(double)> custom_eval;

    double operator()(double t) const {
        switch (family) {
            case KernelFamily::epanechnikov:
                return std::fabs(t) <= 1.0 ? 0.75 * (1.0 - t * t) : 0.0;
            case KernelFamily::gaussian: {
                const double n = normal_pdf(t);
                if (order == 2) return n;
                const double t2 = t * t;
                if (order == 4) return 0.5 * (3.0 - t2) * n;
                return 0.125 * (15.0 - 10.0 * t2 + t2 * t2) * n;
            }
            case KernelFamily::custom:
                return custom_eval(t);
        }
        return 0.0;
    }
};

/// k(t), validating that t is finite. Exactly zero outside truncated support.
double kernel_eval(const Kernel& kernel, double t);

/// Product kernel K(w) = prod_l k(w_l) for a d-vector w, d >= 1.
double product_kernel_eval(const Kernel& kernel, std::span<const double> w);

/// Epanechnikov kernel 0.75(1-t^2) on [-1,1]; order 2, Lipschitz branch.
Kernel make_epanechnikov();

/// Gaussian-polynomial kernel of order r in {2,4,6}:
///   r=2: n(t);  r=4: (3-t^2)n(t)/2;  r=6: (15-10t^2+t^4)n(t)/8.
Kernel make_gaussian_kernel(int order_r);

struct MomentCheck {
    std::string label;
    double value = 0.0;
    double target = 0.0;
    double residual = 0.0;
    bool passed = false;
};

struct KernelValidation {
    std::string kernel_name;
    int order = 0;
    double tolerance = 0.0;
    double integration_halfwidth = 0.0;  // full-line kernels integrate over [-40, 40]
    std::vector<MomentCheck> checks;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return !checks.empty();
    }
};

/// Numerically validates the order-r kernel conditions by adaptive
/// quadrature: unit mass, vanishing moments 0 < l < r, finite absolute
/// r-th moment, symmetry on a grid, boundedness.
KernelValidation validate_kernel(const Kernel& kernel, double quad_tol);

/// Validate against a different order than the kernel's own (negative
/// controls in tests).
KernelValidation validate_kernel_as_order(const Kernel& kernel, int order_r, double quad_tol);

}  // namespace kernrates

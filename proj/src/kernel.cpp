#include "kernrates/kernel.hpp"

#include <algorithm>

namespace kernrates {

namespace {

// Full-line kernels are integrated over [-L40, L40]; Gaussian tails there are
// below 1e-300, far under any validation tolerance.
constexpr double kFullLineHalfwidth = 40.0;

double integration_halfwidth(const Kernel& k) {
    return k.support ? *k.support : kFullLineHalfwidth;
}

}  // namespace

double kernel_eval(const Kernel& kernel, double t) {
    if (!std::isfinite(t)) fail(Errc::invalid_input, "kernel_eval: non-finite argument");
    if (kernel.support && std::fabs(t) > *kernel.support) return 0.0;
    return kernel(t);
}

double product_kernel_eval(const Kernel& kernel, std::span<const double> w) {
    if (w.empty()) fail(Errc::invalid_input, "product_kernel_eval: empty vector");
    double prod = 1.0;
    for (double wl : w) {
        prod *= kernel_eval(kernel, wl);
        if (prod == 0.0) return 0.0;
    }
    return prod;
}

Kernel make_epanechnikov() {
    Kernel k;
    k.name = "epanechnikov";
    k.family = KernelFamily::epanechnikov;
    k.order = 2;
    k.support = 1.0;
    k.branch = SmoothnessBranch::lipschitz_truncated;
    k.bound = 0.75;
    return k;
}

Kernel make_gaussian_kernel(int order_r) {
    if (order_r != 2 && order_r != 4 && order_r != 6)
        fail(Errc::unsupported_order,
             "gaussian kernel order must be 2, 4 or 6; got " + std::to_string(order_r));
    Kernel k;
    k.name = "gaussian" + std::to_string(order_r);
    k.family = KernelFamily::gaussian;
    k.order = order_r;
    k.support = std::nullopt;
    k.branch = SmoothnessBranch::differentiable_tail;
    // Each polynomial factor peaks at the origin.
    k.bound = k(0.0);
    return k;
}

KernelValidation validate_kernel_as_order(const Kernel& kernel, int order_r, double quad_tol) {
    if (!(quad_tol > 0.0)) fail(Errc::invalid_input, "validate_kernel: quad_tol must be > 0");
    if (order_r < 2) fail(Errc::unsupported_order, "validate_kernel: order must be >= 2");

    KernelValidation report;
    report.kernel_name = kernel.name;
    report.order = order_r;
    report.tolerance = quad_tol;
    const double L = integration_halfwidth(kernel);
    report.integration_halfwidth = L;

    const double quad_rel = std::min(1e-10, quad_tol);
    auto moment = [&](int l) {
        return integrate([&](double t) { return std::pow(t, l) * kernel(t); }, -L, L, quad_tol / 16,
                         quad_rel, kernel.name + " moment " + std::to_string(l))
            .value;
    };

    {
        MomentCheck c;
        c.label = "unit-mass";
        c.value = moment(0);
        c.target = 1.0;
        c.residual = std::fabs(c.value - 1.0);
        c.passed = c.residual < quad_tol;
        report.checks.push_back(c);
    }
    for (int l = 1; l < order_r; ++l) {
        MomentCheck c;
        c.label = "moment-" + std::to_string(l);
        c.value = moment(l);
        c.target = 0.0;
        c.residual = std::fabs(c.value);
        c.passed = c.residual < quad_tol;
        report.checks.push_back(c);
    }
    {
        MomentCheck c;
        c.label = "abs-moment-" + std::to_string(order_r);
        // |t^r k(t)| has kinks at the kernel's sign changes; only the
        // finiteness of the value matters here.
        c.value = integrate_estimate(
                      [&](double t) { return std::fabs(std::pow(t, order_r) * kernel(t)); }, -L, L,
                      1e-9)
                      .value;
        c.target = c.value;
        c.residual = 0.0;
        c.passed = std::isfinite(c.value);
        report.checks.push_back(c);
    }
    {
        // Symmetry and boundedness on a dense grid; the grid step is
        // incommensurate with common support endpoints.
        MomentCheck sym, bnd;
        sym.label = "symmetry";
        bnd.label = "bounded";
        double worst = 0.0;
        double maxabs = 0.0;
        bool finite = true;
        const double step = 0.0317;
        for (double t = 0.0; t <= L + 1.0; t += step) {
            const double a = kernel_eval(kernel, t);
            const double b = kernel_eval(kernel, -t);
            worst = std::max(worst, std::fabs(a - b));
            maxabs = std::max(maxabs, std::fabs(a));
            finite = finite && std::isfinite(a) && std::isfinite(b);
        }
        sym.value = worst;
        sym.residual = worst;
        sym.passed = finite && worst <= 1e-14;
        bnd.value = maxabs;
        bnd.target = maxabs;
        bnd.passed = finite && std::isfinite(maxabs);
        report.checks.push_back(sym);
        report.checks.push_back(bnd);
    }
    return report;
}

KernelValidation validate_kernel(const Kernel& kernel, double quad_tol) {
    return validate_kernel_as_order(kernel, kernel.order, quad_tol);
}

}  // namespace kernrates

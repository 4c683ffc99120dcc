#include "kernrates/numerics.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace kernrates {

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) fail(Errc::invalid_input, "normal quantile needs p in (0,1)");
    static const boost::math::normal_distribution<double> dist(0.0, 1.0);
    return boost::math::quantile(dist, p);
}

QuadratureOutcome integrate(const std::function<double(double)>& f, double a, double b,
                            double abs_tol, double rel_tol, const std::string& label) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double err = 0.0;
    double l1 = 0.0;
    double value = 0.0;
    // Driving the recursion below ~1e-11 relative makes the reported error
    // estimate degrade near machine precision; the accuracy budget below
    // still enforces the caller's tolerances.
    const double term_tol = std::max(rel_tol, 1e-11);
    try {
        value = GK::integrate(f, a, b, 15, term_tol, &err, &l1);
    } catch (const std::exception& e) {
        fail(Errc::numerical_failure, "quadrature failed for " + label + ": " + e.what());
    }
    if (!std::isfinite(value))
        fail(Errc::numerical_failure, "quadrature returned non-finite value for " + label);
    const double budget = std::max(abs_tol, rel_tol * std::max(std::fabs(value), l1));
    if (err > budget && err > 1e4 * std::numeric_limits<double>::epsilon() * l1)
        fail(Errc::numerical_failure, "quadrature did not converge for " + label);
    return {value, err};
}

QuadratureOutcome integrate_estimate(const std::function<double(double)>& f, double a, double b,
                                     double rel_tol) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    QuadratureOutcome out;
    out.value = GK::integrate(f, a, b, 15, rel_tol, &out.error_estimate);
    return out;
}

OlsFit ols_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        fail(Errc::invalid_input, "ols_fit needs two same-length series of size >= 2");
    const std::size_t n = x.size();
    CompensatedSum sx, sy;
    for (std::size_t i = 0; i < n; ++i) {
        sx.add(x[i]);
        sy.add(y[i]);
    }
    const double mx = sx.value() / static_cast<double>(n);
    const double my = sy.value() / static_cast<double>(n);
    CompensatedSum sxx, sxy;
    for (std::size_t i = 0; i < n; ++i) {
        sxx.add((x[i] - mx) * (x[i] - mx));
        sxy.add((x[i] - mx) * (y[i] - my));
    }
    if (sxx.value() <= 0.0) fail(Errc::invalid_input, "ols_fit: degenerate x values");
    OlsFit fit;
    fit.slope = sxy.value() / sxx.value();
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        CompensatedSum rss;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            rss.add(r * r);
        }
        fit.slope_se = std::sqrt(rss.value() / (static_cast<double>(n - 2) * sxx.value()));
    }
    return fit;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
    if (count == 0) return;
    const std::size_t nw =
        std::min<std::size_t>(count, workers < 1 ? 1 : static_cast<std::size_t>(workers));
    if (nw <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::mutex mtx;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(nw);
    const std::size_t chunk = (count + nw - 1) / nw;
    for (std::size_t w = 0; w < nw; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> g(mtx);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace kernrates

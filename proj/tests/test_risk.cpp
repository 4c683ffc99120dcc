#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "kernrates/numerics.hpp"
#include "kernrates/processes.hpp"
#include "kernrates/risk.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace kernrates;

namespace {

// q = 1 sample holding prescribed losses (loss = -y) at prescribed x.
Sample loss_sample(const std::vector<double>& losses, const std::vector<double>& xs) {
    Sample s(losses.size(), 1, 1);
    for (std::size_t t = 0; t < losses.size(); ++t) {
        s.set_y(t, 0, -losses[t]);
        s.set_x(t, 0, xs[t]);
    }
    return s;
}

}  // namespace

TEST_CASE("weighted quantile enumeration examples") {
    // x values all at the evaluation point: equal Epanechnikov weights
    const Sample s = loss_sample({1.0, 2.0, 3.0, 4.0}, {0.0, 0.0, 0.0, 0.0});
    const std::vector<double> a{1.0};
    const std::vector<double> b{1.0};
    const Kernel epan = make_epanechnikov();
    CHECK(estimate_conditional_var(s, a, b, 0.5, epan, 1.0, 0.0) == 2.0);
    CHECK(estimate_conditional_var(s, a, b, 0.25, epan, 1.0, 0.0) == 3.0);

    const Sample one = loss_sample({5.0}, {0.0});
    for (double p : {0.1, 0.5, 0.9})
        CHECK(estimate_conditional_var(one, a, b, p, epan, 1.0, 0.0) == 5.0);

    CHECK_THROWS_AS((void)estimate_conditional_var(s, a, b, 1.5, epan, 1.0, 0.0), Error);
    try {  // all observations outside the truncated kernel window
        (void)estimate_conditional_var(s, a, b, 0.5, epan, 0.5, 10.0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::no_local_data);
    }
    try {  // higher-order kernels have negative lobes
        const Sample spread = loss_sample({1.0, 2.0, 3.0, 4.0}, {0.0, 0.0, 2.0, 0.0});
        (void)estimate_conditional_var(spread, a, b, 0.5, make_gaussian_kernel(4), 1.0, 0.0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_input);
    }
}

TEST_CASE("plug-in quantile matches the candidate-scan oracle") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-2.0, 2.0), pu(0.05, 0.95), hu(0.5, 2.0);
    for (int rep = 0; rep < 120; ++rep) {
        const std::size_t n = 1 + rng() % 12;
        std::vector<double> losses(n), xs(n);
        for (std::size_t t = 0; t < n; ++t) {
            losses[t] = u(rng);
            if (rng() % 4 == 0 && t > 0) losses[t] = losses[t - 1];  // exercise ties
            xs[t] = u(rng);
        }
        const Sample s = loss_sample(losses, xs);
        const double p = pu(rng), h = hu(rng), w = u(rng);
        const Kernel epan = make_epanechnikov();
        std::vector<double> weights(n);
        double total = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            weights[t] = oracle::kernel_value(epan, (w - xs[t]) / h);
            total += weights[t];
        }
        if (!(total > 0.0)) continue;
        const std::vector<double> unit{1.0};
        const double mine = estimate_conditional_var(s, unit, unit, p, epan, h, w);
        CHECK(mine == oracle::weighted_var(losses, weights, p));
    }
}

TEST_CASE("quantile consistency certificate holds on random cells") {
    std::mt19937_64 rng(1234);
    const Sample s = simulate(GaussianCes{0.5, 1.0, MeanFn::sin_wave, 1.0}, 400, 5, 0);
    std::vector<double> index_values(s.n());
    for (std::size_t t = 0; t < s.n(); ++t) index_values[t] = s.x(t, 0);
    std::uniform_real_distribution<double> wu(-1.0, 1.0);
    const CesEvaluator eval(s, std::vector<double>{1.0, 0.0});
    for (int rep = 0; rep < 50; ++rep) {
        const auto cell = eval.evaluate_plugged(index_values, make_epanechnikov(), 0.4, wu(rng),
                                                rep % 2 ? 0.1 : 0.05, 1e-3);
        if (cell.has_var) CHECK(cell.quantile_consistent);
    }
}

TEST_CASE("saturated indicator reduces the ces to a kernel average") {
    const Sample s = simulate(GaussianCes{0.4, 1.0, MeanFn::sin_wave, 1.0}, 300, 9, 0);
    CesIndex index;
    index.a = {1.0, 0.0};
    index.b = {1.0};
    index.threshold = ConstantThreshold{-1e6};
    const Kernel epan = make_epanechnikov();
    const auto ces = estimate_ces(s, index, epan, 0.5, 0.2, 1e-6);
    REQUIRE(ces.has_value());

    // equals the Nadaraya-Watson average of losses
    CompensatedSum num, den;
    for (std::size_t t = 0; t < s.n(); ++t) {
        const double k = kernel_eval(epan, (0.2 - s.x(t, 0)) / 0.5);
        num.add(-s.y(t, 0) * k);
        den.add(k);
    }
    CHECK(*ces == doctest::Approx(num.value() / den.value()).epsilon(1e-12));
}

TEST_CASE("ces ratio identity against the estimators module") {
    std::mt19937_64 rng(555);
    std::uniform_real_distribution<double> u(-1.0, 1.0), hu(0.6, 1.8);
    for (int rep = 0; rep < 60; ++rep) {
        const Sample s = gen::micro_sample_qp(rng, 8, 2, 1);
        const std::vector<double> a = gen::unit_vector(rng, 2);
        const double c = u(rng), h = hu(rng), w = u(rng);
        CesIndex index;
        index.a = a;
        index.b = {1.0};
        index.threshold = ConstantThreshold{c};
        const Kernel kernel = make_epanechnikov();
        const auto mine = estimate_ces(s, index, kernel, h, w, 1e-9);

        const PsiIndex num{ShortfallNumerator{a, ConstantThreshold{c}}, SingleIndex{{1.0}}};
        const PsiIndex den{ShortfallIndicator{a, ConstantThreshold{c}}, SingleIndex{{1.0}}};
        const double t1 = estimate_T(s, num, kernel, h, std::vector<double>{w});
        const double t2 = estimate_T(s, den, kernel, h, std::vector<double>{w});
        if (mine) {
            CHECK(std::fabs(*mine - t1 / t2) < 1e-12);
        } else {
            CHECK(t2 < 1e-9);  // the trimming guard fired
        }

        // oracle agreement, constant threshold
        const auto ref = oracle::estimate_ces_constant(s, a, {1.0}, c, kernel, h, w, 1e-9);
        CHECK(mine.has_value() == ref.defined);
        if (mine && ref.defined) CHECK(std::fabs(*mine - ref.ces) < 1e-12);
    }
}

TEST_CASE("plugged ces agrees with the oracle and dominates its VaR") {
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> wu(-0.8, 0.8), hu(0.5, 1.5);
    const Sample s = simulate(GaussianCes{0.5, 1.0, MeanFn::sin_wave, 1.0}, 200, 77, 0);
    std::vector<double> index_values(s.n());
    for (int rep = 0; rep < 40; ++rep) {
        const std::vector<double> a = gen::unit_vector(rng, 2);
        const double b = 0.5 + 0.1 * static_cast<double>(rng() % 10);
        for (std::size_t t = 0; t < s.n(); ++t) index_values[t] = b * s.x(t, 0);
        const double h = hu(rng), w = wu(rng), p = rep % 2 ? 0.1 : 0.25;
        const Kernel epan = make_epanechnikov();

        const CesEvaluator eval(s, a);
        const auto cell = eval.evaluate_plugged(index_values, epan, h, w, p, 1e-6);
        const auto ref = oracle::estimate_ces_plugged(s, a, {b}, p, epan, h, w, 1e-6);
        if (!cell.has_var) continue;
        CHECK(cell.var == ref.var);
        CHECK(cell.ces.has_value() == ref.defined);
        if (cell.ces && ref.defined) {
            CHECK(std::fabs(*cell.ces - ref.ces) < 1e-12);
            CHECK(*cell.ces >= cell.var);
        }

        // the one-shot API resolves the plug-in the same way
        CesIndex index;
        index.a = a;
        index.b = {b};
        index.threshold = PluggedVar{p};
        const auto direct = estimate_ces(s, index, epan, h, w, 1e-6);
        CHECK(direct.has_value() == cell.ces.has_value());
        if (direct && cell.ces) CHECK(*direct == *cell.ces);
    }
}

TEST_CASE("ces is invariant to relabeling the sample order") {
    const Sample s = simulate(GaussianCes{0.5, 1.0, MeanFn::sin_wave, 1.0}, 64, 3, 0);
    Sample reversed(s.n(), s.q(), s.p());
    for (std::size_t t = 0; t < s.n(); ++t) {
        const std::size_t r = s.n() - 1 - t;
        for (std::size_t j = 0; j < s.q(); ++j) reversed.set_y(t, j, s.y(r, j));
        reversed.set_x(t, 0, s.x(r, 0));
    }
    CesIndex index;
    index.a = {std::sqrt(0.5), std::sqrt(0.5)};
    index.b = {1.0};
    index.threshold = PluggedVar{0.2};
    const Kernel epan = make_epanechnikov();
    const auto v1 = estimate_ces(s, index, epan, 0.8, 0.1, 1e-6);
    const auto v2 = estimate_ces(reversed, index, epan, 0.8, 0.1, 1e-6);
    REQUIRE(v1.has_value());
    REQUIRE(v2.has_value());
    CHECK(*v1 == doctest::Approx(*v2).epsilon(1e-12));
}

TEST_CASE("gaussian tail truths") {
    auto zero = [](double) { return 0.0; };
    const GaussianTailTruth mid = ces_truth_gaussian(zero, 1.0, 0.5, 0.0);
    CHECK(mid.var == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(mid.ces == doctest::Approx(0.7978845608028654).epsilon(1e-12));

    // location equivariance
    auto two = [](double) { return 2.0; };
    const GaussianTailTruth shifted = ces_truth_gaussian(two, 1.0, 0.5, 0.0);
    CHECK(shifted.ces == doctest::Approx(2.0 + mid.ces).epsilon(1e-12));

    // numeric integration oracle for the truncated normal mean
    for (double p : {0.5, 0.1, 0.999}) {
        const GaussianTailTruth t = ces_truth_gaussian(zero, 1.0, p, 0.0);
        const double z = normal_quantile(1.0 - p);
        const auto tail = integrate([](double x) { return x * normal_pdf(x); }, z, 40.0, 1e-12,
                                    1e-12, "tail mean");
        CHECK(t.ces == doctest::Approx(tail.value / p).epsilon(1e-9));
    }
    // p -> 1 recovers the unconditional mean
    const GaussianTailTruth nearly = ces_truth_gaussian(two, 1.0, 0.999, 0.0);
    CHECK(std::fabs(nearly.ces - 2.0) < 5e-3);

    CHECK_THROWS_AS((void)ces_truth_gaussian(zero, -1.0, 0.5, 0.0), Error);
    CHECK_THROWS_AS((void)ces_truth_gaussian(zero, 1.0, 1.0, 0.0), Error);
}

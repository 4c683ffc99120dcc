#include "doctest.h"

#include <cmath>
#include <random>

#include "kernrates/estimators.hpp"
#include "kernrates/processes.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace kernrates;

TEST_CASE("bandwidth grids are geometric and validated") {
    const BandwidthGrid g = bandwidth_grid(0.1, 0.4, 3);
    REQUIRE(g.values.size() == 3);
    CHECK(g.values[0] == 0.1);
    CHECK(g.values[1] == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(g.values[2] == 0.4);

    const BandwidthGrid single = bandwidth_grid(0.2, 0.2, 1);
    CHECK(single.values == std::vector<double>{0.2});

    CHECK_THROWS_AS((void)bandwidth_grid(0.4, 0.1, 3), Error);
    CHECK_THROWS_AS((void)bandwidth_grid(0.1, 0.4, 1), Error);
    CHECK_THROWS_AS((void)bandwidth_grid(0.0, 0.4, 2), Error);
}

TEST_CASE("single-term estimate matches the kernel value") {
    Sample s(1, 1, 1);
    s.set_y(0, 0, 1.0);
    s.set_x(0, 0, 0.5);
    const PsiIndex psi{ConstantPhi{1.0}, IdentityMap{1}};
    const Kernel epan = make_epanechnikov();
    const std::vector<double> w{0.0};
    CHECK(estimate_T(s, psi, epan, 1.0, w) == 0.5625);

    const PsiIndex zero{ConstantPhi{0.0}, IdentityMap{1}};
    CHECK(estimate_T(s, zero, epan, 0.7, w) == 0.0);
    CHECK(estimate_T(s, zero, epan, 1.3, std::vector<double>{1.9}) == 0.0);
}

TEST_CASE("estimator errors") {
    Sample s(2, 1, 1);
    const PsiIndex psi{ConstantPhi{1.0}, IdentityMap{1}};
    const Kernel epan = make_epanechnikov();
    const std::vector<double> w{0.0};
    CHECK_THROWS_AS((void)estimate_T(s, psi, epan, -1.0, w), Error);
    try {
        (void)estimate_T(s, psi, epan, 1e-9, w);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_bandwidth);
    }
    CHECK_THROWS_AS((void)estimate_T(s, psi, epan, 0.5, std::vector<double>{0.0, 0.0}), Error);
    CHECK_THROWS_AS((void)estimate_m(s, psi, epan, 0.5, w, 0.0), Error);
}

TEST_CASE("oracle equivalence on random micro-samples") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> hu(0.3, 2.0);
    for (int rep = 0; rep < 40; ++rep) {
        const Sample s = gen::micro_sample(rng);
        const PsiIndex psi{gen::random_phi(rng, s.q(), s.p()), gen::random_wmap(rng, s.p())};
        const Kernel kernel = gen::random_kernel(rng);
        const double h = hu(rng);
        const std::size_t d = w_output_dim(psi.w_map, s.p());
        const std::vector<double> w = gen::random_point(rng, d);

        CHECK(std::fabs(estimate_T(s, psi, kernel, h, w) - oracle::estimate_T(s, psi, kernel, h, w)) <
              1e-12);
        CHECK(std::fabs(estimate_f(s, psi.w_map, kernel, h, w) -
                        oracle::estimate_f(s, psi.w_map, kernel, h, w)) < 1e-12);
        const auto mine = estimate_m(s, psi, kernel, h, w, default_trim_tau);
        const auto ref = oracle::estimate_m(s, psi, kernel, h, w, default_trim_tau);
        CHECK(mine.has_value() == ref.has_value());
        if (mine && ref) CHECK(std::fabs(*mine - *ref) < 1e-12);
    }
}

TEST_CASE("density estimator properties") {
    const ModelSpec model = Ar1Density{0.5, 1.0};
    const Sample s = simulate(model, 5000, 99, 0);
    const Kernel epan = make_epanechnikov();
    const WSpec id = IdentityMap{1};

    // f-hat equals T-hat with phi == 1, bitwise
    const PsiIndex one{ConstantPhi{1.0}, id};
    for (double w : {-1.0, 0.0, 0.7}) {
        const std::vector<double> wv{w};
        CHECK(estimate_f(s, id, epan, 0.3, wv) == estimate_T(s, one, epan, 0.3, wv));
        CHECK(estimate_f(s, id, epan, 0.3, wv) >= 0.0);
    }

    // mass of the smoothed density: trapezoid over a wide fine grid
    const double lo = -6.0, hi = 6.0, step = 0.01;
    double mass = 0.0, prev = estimate_f(s, id, epan, 0.3, std::vector<double>{lo});
    for (double w = lo + step; w <= hi + 1e-12; w += step) {
        const double cur = estimate_f(s, id, epan, 0.3, std::vector<double>{w});
        mass += 0.5 * (prev + cur) * step;
        prev = cur;
    }
    CHECK(std::fabs(mass - 1.0) < 0.02);
}

TEST_CASE("ratio estimator basics") {
    std::mt19937_64 rng(17);
    Sample s = gen::micro_sample(rng, 6, 1, 1);
    const Kernel epan = make_epanechnikov();
    const PsiIndex c3{ConstantPhi{3.0}, IdentityMap{1}};
    const std::vector<double> w{s.x(0, 0)};
    const auto m = estimate_m(s, c3, epan, 0.8, w, default_trim_tau);
    REQUIRE(m.has_value());
    CHECK(*m == 3.0);

    // far outside the data range the truncated kernel sees nothing
    CHECK(!estimate_m(s, c3, epan, 0.5, std::vector<double>{150.0}, default_trim_tau));
}

TEST_CASE("linearity in phi") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Sample a(6, 1, 1), b(6, 1, 1), combo(6, 1, 1);
    const double alpha = 1.7, beta = -0.6;
    for (std::size_t t = 0; t < 6; ++t) {
        const double xv = u(rng), av = u(rng), bv = u(rng);
        a.set_x(t, 0, xv);
        b.set_x(t, 0, xv);
        combo.set_x(t, 0, xv);
        a.set_y(t, 0, av);
        b.set_y(t, 0, bv);
        combo.set_y(t, 0, alpha * av + beta * bv);
    }
    const PsiIndex raw{RawComponent{0}, IdentityMap{1}};
    const Kernel g2 = make_gaussian_kernel(2);
    const std::vector<double> w{0.4};
    const double lhs = estimate_T(combo, raw, g2, 0.6, w);
    const double rhs = alpha * estimate_T(a, raw, g2, 0.6, w) + beta * estimate_T(b, raw, g2, 0.6, w);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("translation and scale equivariance") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Sample s(8, 1, 1);
    for (std::size_t t = 0; t < 8; ++t) {
        s.set_x(t, 0, u(rng));
        s.set_y(t, 0, u(rng));
    }
    const PsiIndex psi{RawComponent{0}, IdentityMap{1}};
    const Kernel epan = make_epanechnikov();
    const double h = 0.7, w = 0.3, shift = 1.9, scale = 2.5;

    Sample shifted = s;
    for (std::size_t t = 0; t < 8; ++t) shifted.set_x(t, 0, s.x(t, 0) + shift);
    CHECK(std::fabs(estimate_T(shifted, psi, epan, h, std::vector<double>{w + shift}) -
                    estimate_T(s, psi, epan, h, std::vector<double>{w})) < 1e-12);

    Sample scaled = s;
    for (std::size_t t = 0; t < 8; ++t) scaled.set_x(t, 0, s.x(t, 0) * scale);
    const double base = estimate_T(s, psi, epan, h, std::vector<double>{w});
    const double moved = estimate_T(scaled, psi, epan, h * scale, std::vector<double>{w * scale});
    CHECK(moved == doctest::Approx(base / scale).epsilon(1e-10));
}

TEST_CASE("weighted-average bound for nonnegative kernels") {
    std::mt19937_64 rng(59);
    for (int rep = 0; rep < 50; ++rep) {
        const Sample s = gen::micro_sample(rng, 8, 1, 1);
        const PsiIndex psi{RawComponent{0}, IdentityMap{1}};
        const auto m = estimate_m(s, psi, make_epanechnikov(), 1.2,
                                  std::vector<double>{s.x(0, 0)}, 1e-6);
        if (!m) continue;
        double lo = s.y(0, 0), hi = s.y(0, 0);
        for (std::size_t t = 1; t < s.n(); ++t) {
            lo = std::min(lo, s.y(t, 0));
            hi = std::max(hi, s.y(t, 0));
        }
        CHECK(*m >= lo - 1e-10);
        CHECK(*m <= hi + 1e-10);
    }
}

TEST_CASE("surfaces agree with per-cell calls and are worker-count invariant") {
    const Sample s = simulate(Ar1Density{0.3, 1.0}, 400, 7, 0);
    const Kernel epan = make_epanechnikov();
    const PsiIndex psi{RawComponent{0}, IdentityMap{1}};
    const std::vector<double> hs{0.2, 0.4, 0.8};
    const EvalGrid grid = line_grid(1.5, 9);

    const EstimateSurface s1 =
        estimate_surface(s, {&psi, 1}, epan, hs, grid, SurfaceStat::ratio_m, 1e-3, 1);
    const EstimateSurface s4 =
        estimate_surface(s, {&psi, 1}, epan, hs, grid, SurfaceStat::ratio_m, 1e-3, 4);
    REQUIRE(s1.values.size() == s4.values.size());
    for (std::size_t i = 0; i < s1.values.size(); ++i) {
        CHECK(s1.values[i] == s4.values[i]);
        CHECK(s1.defined[i] == s4.defined[i]);
    }
    for (std::size_t hi = 0; hi < hs.size(); ++hi)
        for (std::size_t wi = 0; wi < grid.size(); ++wi) {
            const auto direct = estimate_m(s, psi, epan, hs[hi], grid.point(wi), 1e-3);
            const std::size_t cell = s1.index(hi, 0, wi);
            CHECK(direct.has_value() == (s1.defined[cell] == 1));
            if (direct) CHECK(*direct == s1.values[cell]);
        }
    CHECK(s1.to_json().dump() == s4.to_json().dump());
}

TEST_CASE("sup deviation") {
    const Sample s = simulate(Ar1Density{0.5, 1.0}, 200, 3, 0);
    const Kernel epan = make_epanechnikov();
    const PsiIndex psi{ConstantPhi{1.0}, IdentityMap{1}};
    const std::vector<double> hs{0.5};
    const EvalGrid grid = line_grid(1.0, 5);
    EstimateSurface surf =
        estimate_surface(s, {&psi, 1}, epan, hs, grid, SurfaceStat::density_f, 1e-3, 1);

    // against itself the deviation is zero
    const EstimateSurface copy = surf;
    const SupDeviation zero = sup_deviation(surf, [&](std::size_t, std::span<const double> w) {
        for (std::size_t wi = 0; wi < grid.size(); ++wi)
            if (grid.point(wi)[0] == w[0]) return copy.values[copy.index(0, 0, wi)];
        return 0.0;
    });
    CHECK(zero.value == 0.0);

    // single perturbed cell is found
    surf.values[surf.index(0, 0, 2)] += 0.5;
    const SupDeviation dev = sup_deviation(surf, [&](std::size_t, std::span<const double> w) {
        for (std::size_t wi = 0; wi < grid.size(); ++wi)
            if (grid.point(wi)[0] == w[0]) return copy.values[copy.index(0, 0, wi)];
        return 0.0;
    });
    CHECK(dev.value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dev.w_index == 2);

    // refined grid dominates a coarse sub-grid
    const EvalGrid fine = line_grid(1.0, 9);
    const EstimateSurface coarse_surface =
        estimate_surface(s, {&psi, 1}, epan, hs, grid, SurfaceStat::density_f, 1e-3, 1);
    const EstimateSurface fine_surface =
        estimate_surface(s, {&psi, 1}, epan, hs, fine, SurfaceStat::density_f, 1e-3, 1);
    auto truth = [&](std::size_t, std::span<const double> w) {
        return true_density(Ar1Density{0.5, 1.0}, w[0]);
    };
    CHECK(sup_deviation(fine_surface, truth).value >=
          sup_deviation(coarse_surface, truth).value - 1e-15);

    // all-undefined surfaces have no supremum
    EstimateSurface empty = surf;
    std::fill(empty.defined.begin(), empty.defined.end(), 0);
    CHECK_THROWS_AS((void)sup_deviation(empty, truth), Error);
}

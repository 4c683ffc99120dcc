#include "doctest.h"

#include <cmath>
#include <random>

#include "kernrates/kernel.hpp"
#include "oracles.hpp"

using namespace kernrates;

TEST_CASE("kernel evaluation closed forms") {
    const Kernel epan = make_epanechnikov();
    CHECK(kernel_eval(epan, 0.0) == 0.75);
    CHECK(kernel_eval(epan, 2.0) == 0.0);
    CHECK(kernel_eval(epan, 0.3) == kernel_eval(epan, -0.3));

    const Kernel g4 = make_gaussian_kernel(4);
    CHECK(kernel_eval(g4, 0.0) == doctest::Approx(0.5984134206021490).epsilon(1e-13));

    CHECK_THROWS_AS((void)kernel_eval(epan, std::nan("")), Error);
    CHECK_THROWS_AS((void)make_gaussian_kernel(3), Error);
    try {
        (void)make_gaussian_kernel(8);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unsupported_order);
    }
}

TEST_CASE("product kernels") {
    const Kernel epan = make_epanechnikov();
    const std::vector<double> one{0.4};
    CHECK(product_kernel_eval(epan, one) == kernel_eval(epan, 0.4));
    const std::vector<double> origin{0.0, 0.0};
    CHECK(product_kernel_eval(epan, origin) == 0.5625);
    const std::vector<double> outside{0.2, 1.4, 0.1};
    CHECK(product_kernel_eval(epan, outside) == 0.0);
    CHECK_THROWS_AS((void)product_kernel_eval(epan, std::vector<double>{}), Error);

    // symmetry lifts to products; truncated kernels vanish exactly iff some
    // coordinate leaves the support
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.6, 1.6);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> w(1 + rep % 3), neg;
        double maxabs = 0.0;
        for (double& v : w) {
            v = u(rng);
            maxabs = std::max(maxabs, std::fabs(v));
            neg.push_back(-v);
        }
        const double kv = product_kernel_eval(epan, w);
        CHECK(kv == product_kernel_eval(epan, neg));
        CHECK((kv == 0.0) == (maxabs > 1.0));
        CHECK(kv == product_kernel_eval(epan, w));  // pure and bitwise repeatable
    }
}

TEST_CASE("moment identities against an independent Simpson oracle") {
    const Kernel epan = make_epanechnikov();
    CHECK(oracle::simpson_moment(epan, 0, -1, 1, 1 << 12) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(oracle::simpson_moment(epan, 2, -1, 1, 1 << 12) == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(oracle::simpson_moment(epan, 4, -1, 1, 1 << 12) ==
          doctest::Approx(3.0 / 35.0).epsilon(1e-10));

    const Kernel g2 = make_gaussian_kernel(2);
    CHECK(oracle::simpson_moment(g2, 2, -40, 40, 1 << 15) == doctest::Approx(1.0).epsilon(1e-9));

    const Kernel g4 = make_gaussian_kernel(4);
    CHECK(oracle::simpson_moment(g4, 0, -40, 40, 1 << 15) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::fabs(oracle::simpson_moment(g4, 2, -40, 40, 1 << 15)) < 1e-9);
    CHECK(oracle::simpson_moment(g4, 4, -40, 40, 1 << 15) == doctest::Approx(-3.0).epsilon(1e-9));

    const Kernel g6 = make_gaussian_kernel(6);
    CHECK(std::fabs(oracle::simpson_moment(g6, 2, -40, 40, 1 << 15)) < 1e-9);
    CHECK(std::fabs(oracle::simpson_moment(g6, 4, -40, 40, 1 << 15)) < 1e-9);
    CHECK(oracle::simpson_moment(g6, 6, -40, 40, 1 << 15) == doctest::Approx(15.0).epsilon(1e-9));
}

TEST_CASE("every shipped kernel validates at 1e-6") {
    for (const Kernel& k :
         {make_epanechnikov(), make_gaussian_kernel(2), make_gaussian_kernel(4),
          make_gaussian_kernel(6)}) {
        const KernelValidation v = validate_kernel(k, 1e-6);
        CHECK(v.all_passed());
        for (const auto& c : v.checks) CHECK(c.residual < 1e-6);
    }
    CHECK(validate_kernel(make_epanechnikov(), 1e-8).all_passed());
}

TEST_CASE("negative control: order-4 kernel fails an order-6 validation") {
    const KernelValidation v = validate_kernel_as_order(make_gaussian_kernel(4), 6, 1e-6);
    CHECK(!v.all_passed());
    bool found = false;
    for (const auto& c : v.checks) {
        if (c.label == "moment-4") {
            found = true;
            CHECK(c.value == doctest::Approx(-3.0).epsilon(1e-8));
            CHECK(!c.passed);
        }
    }
    CHECK(found);
}

TEST_CASE("negative control: asymmetric candidate fails the symmetry check") {
    Kernel bad;
    bad.name = "half-indicator";
    bad.family = KernelFamily::custom;
    bad.order = 2;
    bad.support = 1.0;
    bad.bound = 1.0;
    bad.custom_eval = [](double t) { return t >= 0.0 && t <= 1.0 ? 1.0 : 0.0; };
    const KernelValidation v = validate_kernel(bad, 1e-6);
    bool symmetry_failed = false;
    for (const auto& c : v.checks)
        if (c.label == "symmetry" && !c.passed) symmetry_failed = true;
    CHECK(symmetry_failed);
}

TEST_CASE("validation rejects bad tolerances") {
    CHECK_THROWS_AS((void)validate_kernel(make_epanechnikov(), 0.0), Error);
}

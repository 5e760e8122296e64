#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "eeatc/eeatc.hpp"

using namespace eeatc;

TEST_CASE("rmse matches hand-computed values") {
    CHECK(rmse(std::vector{0.0, 0.0}, std::vector{3.0, 4.0}) ==
          Catch::Approx(std::sqrt(12.5)).epsilon(0).margin(1e-15));
    CHECK(rmse(std::vector{1.0, 2.0, 3.0}, std::vector{1.0, 2.0, 3.0}) == 0.0);
    CHECK(rmse(std::vector{2.0}, std::vector{-1.0}) == 3.0);
}

TEST_CASE("mae matches hand-computed values") {
    CHECK(mae(std::vector{0.0, 0.0}, std::vector{3.0, -4.0}) == 3.5);
    CHECK(mae(std::vector{1.5}, std::vector{1.5}) == 0.0);
}

TEST_CASE("r2 matches hand-computed values") {
    // ss_res = 14, ss_tot = 2 about the mean 2
    CHECK(r2(std::vector{0.0, 0.0, 0.0}, std::vector{1.0, 2.0, 3.0}) ==
          Catch::Approx(-6.0).epsilon(0).margin(1e-15));
    CHECK(r2(std::vector{1.0, 2.0, 3.0}, std::vector{1.0, 2.0, 3.0}) == 1.0);
    // predicting the mean scores exactly zero
    CHECK(r2(std::vector{2.0, 2.0, 2.0}, std::vector{1.0, 2.0, 3.0}) ==
          Catch::Approx(0.0).epsilon(0).margin(1e-15));
}

TEST_CASE("metric error contracts") {
    const std::vector<double> a{1.0, 2.0}, b{1.0};
    CHECK_THROWS_AS(rmse(a, b), ShapeMismatch);
    CHECK_THROWS_AS(mae(a, b), ShapeMismatch);
    CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), EmptyInput);
    CHECK_THROWS_AS(r2(std::vector{1.0}, std::vector{1.0}), EmptyInput);
    CHECK_THROWS_AS(r2(std::vector{1.0, 2.0}, std::vector{5.0, 5.0}), ConstantTarget);
}

TEST_CASE("metric invariances on random data") {
    SplitMix64 rng(42);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 2 + rng.uniform_index(40);
        std::vector<double> y(n), y_hat(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.uniform(-10.0, 10.0);
            y_hat[i] = y[i] + rng.normal(0.0, 2.0);
        }
        // guard against the measure-zero constant draw
        y[0] += 1e-3;

        const double r = r2(y_hat, y);
        const double e = rmse(y_hat, y);
        CHECK(r <= 1.0 + 1e-12);
        CHECK(e >= 0.0);
        CHECK(mae(y_hat, y) <= e + 1e-12);  // AM-QM inequality

        // shifting both series changes neither metric
        const double shift = rng.uniform(-5.0, 5.0);
        std::vector<double> ys(n), yhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            ys[i] = y[i] + shift;
            yhs[i] = y_hat[i] + shift;
        }
        CHECK(r2(yhs, ys) == Catch::Approx(r).margin(1e-9));
        CHECK(rmse(yhs, ys) == Catch::Approx(e).margin(1e-9));

        // scaling both scales rmse linearly and leaves r2 alone
        const double k = 3.25;
        for (std::size_t i = 0; i < n; ++i) {
            ys[i] = y[i] * k;
            yhs[i] = y_hat[i] * k;
        }
        CHECK(r2(yhs, ys) == Catch::Approx(r).margin(1e-9));
        CHECK(rmse(yhs, ys) == Catch::Approx(e * k).epsilon(1e-9));
    }
}

TEST_CASE("evaluate bundles r2 and rmse") {
    const std::vector<double> y{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y_hat{1.1, 1.9, 3.2, 3.8};
    const MetricPair m = evaluate(y_hat, y);
    CHECK(m.r2 == r2(y_hat, y));
    CHECK(m.rmse == rmse(y_hat, y));
    CHECK(m.n == 4);
}

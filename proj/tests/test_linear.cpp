#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "eeatc/eeatc.hpp"

using namespace eeatc;

namespace {

Matrix random_matrix(std::size_t n, std::size_t p, SplitMix64& rng) {
    Matrix x(n, p);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < p; ++c)
            x(r, c) = rng.uniform(-2.0, 2.0);
    return x;
}

// Least-squares solution of [1 X] b = y via Eigen's SVD, as an independent
// reference for the normal-equation fit.
std::vector<double> svd_solution(const Matrix& x, const std::vector<double>& y) {
    const auto n = static_cast<Eigen::Index>(x.rows());
    const auto p = static_cast<Eigen::Index>(x.cols());
    Eigen::MatrixXd a(n, p + 1);
    Eigen::VectorXd b(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        a(r, 0) = 1.0;
        for (Eigen::Index c = 0; c < p; ++c)
            a(r, c + 1) = x(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        b(r) = y[static_cast<std::size_t>(r)];
    }
    const Eigen::VectorXd sol =
        a.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    return {sol.data(), sol.data() + sol.size()};
}

} // namespace

TEST_CASE("mlr recovers exact linear coefficients") {
    SplitMix64 rng(7);
    const Matrix x = random_matrix(30, 3, rng);
    std::vector<double> y(30);
    for (std::size_t r = 0; r < 30; ++r)
        y[r] = 4.0 + 2.0 * x(r, 0) - 5.0 * x(r, 1) + 0.5 * x(r, 2);

    const LinearModel m = mlr_fit(x, y);
    CHECK(m.intercept == Catch::Approx(4.0).margin(1e-10));
    CHECK(m.coef[0] == Catch::Approx(2.0).margin(1e-10));
    CHECK(m.coef[1] == Catch::Approx(-5.0).margin(1e-10));
    CHECK(m.coef[2] == Catch::Approx(0.5).margin(1e-10));

    const auto pred = mlr_predict(m, x);
    for (std::size_t r = 0; r < 30; ++r)
        CHECK(pred[r] == Catch::Approx(y[r]).margin(1e-9));
}

TEST_CASE("mlr agrees with an SVD least-squares oracle") {
    SplitMix64 rng(21);
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t p = 1 + rng.uniform_index(5);
        const std::size_t n = p + 10 + rng.uniform_index(50);
        const Matrix x = random_matrix(n, p, rng);
        std::vector<double> y(n);
        for (std::size_t r = 0; r < n; ++r) {
            y[r] = rng.uniform(-1.0, 1.0);  // pure noise keeps residuals nonzero
            for (std::size_t c = 0; c < p; ++c)
                y[r] += rng.uniform(-3.0, 3.0) * 0.1 * x(r, c);
        }

        const LinearModel m = mlr_fit(x, y);
        const std::vector<double> oracle = svd_solution(x, y);
        CHECK(m.intercept == Catch::Approx(oracle[0]).margin(1e-8));
        for (std::size_t c = 0; c < p; ++c)
            CHECK(m.coef[c] == Catch::Approx(oracle[c + 1]).margin(1e-8));
    }
}

TEST_CASE("mlr residuals are orthogonal to the design") {
    SplitMix64 rng(33);
    const std::size_t n = 60, p = 4;
    const Matrix x = random_matrix(n, p, rng);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r)
        y[r] = rng.uniform(-10.0, 10.0);

    const LinearModel m = mlr_fit(x, y);
    const auto pred = mlr_predict(m, x);
    double sum_res = 0.0;
    std::vector<double> dot(p, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const double res = y[r] - pred[r];
        sum_res += res;
        for (std::size_t c = 0; c < p; ++c)
            dot[c] += res * x(r, c);
    }
    CHECK(sum_res == Catch::Approx(0.0).margin(1e-8));
    for (std::size_t c = 0; c < p; ++c)
        CHECK(dot[c] == Catch::Approx(0.0).margin(1e-7));
}

TEST_CASE("mlr without intercept solves square systems exactly") {
    Matrix x(2, 2);
    x(0, 0) = 1.0; x(0, 1) = 0.0;
    x(1, 0) = 1.0; x(1, 1) = 1.0;
    const std::vector<double> y{3.0, 5.0};

    const LinearModel m = mlr_fit(x, y, /*fit_intercept=*/false);
    CHECK(m.intercept == 0.0);
    CHECK_FALSE(m.fit_intercept);
    CHECK(m.coef[0] == Catch::Approx(3.0).margin(1e-12));
    CHECK(m.coef[1] == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("mlr rejects rank-deficient designs") {
    SplitMix64 rng(11);
    Matrix x(20, 2);
    for (std::size_t r = 0; r < 20; ++r) {
        x(r, 0) = rng.uniform(-1.0, 1.0);
        x(r, 1) = 3.0 * x(r, 0);  // exact duplicate direction
    }
    std::vector<double> y(20, 1.0);
    for (std::size_t r = 0; r < 20; ++r)
        y[r] = rng.uniform(-1.0, 1.0);
    CHECK_THROWS_AS(mlr_fit(x, y), RankDeficient);

    Matrix zero_col(20, 2);
    for (std::size_t r = 0; r < 20; ++r)
        zero_col(r, 0) = rng.uniform(-1.0, 1.0);
    CHECK_THROWS_AS(mlr_fit(zero_col, y), RankDeficient);

    Matrix constant_col(20, 1);
    for (std::size_t r = 0; r < 20; ++r)
        constant_col(r, 0) = 2.5;  // collides with the implicit intercept
    CHECK_THROWS_AS(mlr_fit(constant_col, y), RankDeficient);
}

TEST_CASE("mlr fit and predict contracts") {
    Matrix x(3, 2);
    SplitMix64 rng(2);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 2; ++c)
            x(r, c) = rng.uniform(-1.0, 1.0);

    CHECK_THROWS_AS(mlr_fit(x, std::vector<double>{1.0, 2.0}), ShapeMismatch);
    CHECK_THROWS_AS(mlr_fit(Matrix{}, std::vector<double>{}), EmptyInput);

    Matrix two_rows(2, 2);
    two_rows(0, 0) = 1.0; two_rows(0, 1) = 2.0;
    two_rows(1, 0) = 3.0; two_rows(1, 1) = 4.0;
    // two rows cannot feed two coefficients plus an intercept
    CHECK_THROWS_AS(mlr_fit(two_rows, std::vector<double>{1.0, 2.0}), TooFewRows);

    LinearModel unfitted;
    CHECK_THROWS_AS(mlr_predict(unfitted, x), NotFitted);

    Matrix x5(3, 5);
    const LinearModel m = mlr_fit(x, std::vector<double>{1.0, 2.0, 3.0},
                                  /*fit_intercept=*/false);
    CHECK_THROWS_AS(mlr_predict(m, x5), ShapeMismatch);
}

// metrics.hpp — scalar evaluation metrics.
//
// rmse: sqrt(mean((y_hat - y)^2))
// r2:   1 - SS_res/SS_tot, SS_tot about the target mean; may be negative
// mae:  mean(|y_hat - y|), used to validate the error-estimation model

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "eeatc/error.hpp"

namespace eeatc {

struct MetricPair {
    double r2 = 0.0;
    double rmse = 0.0;
    std::size_t n = 0;
};

namespace detail {

inline void check_pair(std::span<const double> y_hat, std::span<const double> y) {
    if (y_hat.size() != y.size())
        throw ShapeMismatch("metric inputs differ in length: " +
                            std::to_string(y_hat.size()) + " vs " +
                            std::to_string(y.size()));
    if (y.empty())
        throw EmptyInput("metric inputs are empty");
}

} // namespace detail

inline double rmse(std::span<const double> y_hat, std::span<const double> y) {
    detail::check_pair(y_hat, y);
    double ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y_hat[i] - y[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(y.size()));
}

inline double mae(std::span<const double> y_hat, std::span<const double> y) {
    detail::check_pair(y_hat, y);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        s += std::abs(y_hat[i] - y[i]);
    return s / static_cast<double>(y.size());
}

inline double r2(std::span<const double> y_hat, std::span<const double> y) {
    detail::check_pair(y_hat, y);
    if (y.size() < 2)
        throw EmptyInput("r2 needs at least 2 samples");
    double mean = 0.0;
    for (double v : y)
        mean += v;
    mean /= static_cast<double>(y.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - y_hat[i];
        const double t = y[i] - mean;
        ss_res += r * r;
        ss_tot += t * t;
    }
    if (ss_tot == 0.0)
        throw ConstantTarget("r2 undefined for a constant target");
    return 1.0 - ss_res / ss_tot;
}

inline MetricPair evaluate(std::span<const double> y_hat, std::span<const double> y) {
    return MetricPair{r2(y_hat, y), rmse(y_hat, y), y.size()};
}

} // namespace eeatc

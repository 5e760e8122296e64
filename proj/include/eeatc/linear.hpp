// linear.hpp — multiple linear regression via the normal equations.
//
// Feature counts here are tiny (a handful of columns), so the Gram matrix is
// formed explicitly and factored with an unblocked Cholesky. Ill-conditioned
// systems are rejected outright rather than regularized: a ridge term, even
// a tiny one, perturbs the coefficients enough that an exactly-linear sensor
// no longer fits exactly, and downstream stages rely on that exactness.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eeatc/error.hpp"
#include "eeatc/matrix.hpp"

namespace eeatc {

struct LinearModel {
    std::vector<double> coef;  // one weight per feature column
    double intercept = 0.0;
    bool fit_intercept = true;

    bool fitted() const { return !coef.empty(); }
    std::size_t n_features() const { return coef.size(); }

    bool operator==(const LinearModel&) const = default;
};

namespace detail {

// In-place lower Cholesky of a dense p x p matrix. Returns false when a
// pivot is not strictly positive.
inline bool cholesky(std::vector<double>& g, std::size_t p) {
    for (std::size_t j = 0; j < p; ++j) {
        double d = g[j * p + j];
        for (std::size_t k = 0; k < j; ++k)
            d -= g[j * p + k] * g[j * p + k];
        if (!(d > 0.0))
            return false;
        const double l = std::sqrt(d);
        g[j * p + j] = l;
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = g[i * p + j];
            for (std::size_t k = 0; k < j; ++k)
                s -= g[i * p + k] * g[j * p + k];
            g[i * p + j] = s / l;
        }
    }
    return true;
}

inline void cholesky_solve(const std::vector<double>& l, std::size_t p,
                           std::vector<double>& rhs) {
    for (std::size_t i = 0; i < p; ++i) {
        double s = rhs[i];
        for (std::size_t k = 0; k < i; ++k)
            s -= l[i * p + k] * rhs[k];
        rhs[i] = s / l[i * p + i];
    }
    for (std::size_t ii = p; ii-- > 0;) {
        double s = rhs[ii];
        for (std::size_t k = ii + 1; k < p; ++k)
            s -= l[k * p + ii] * rhs[k];
        rhs[ii] = s / l[ii * p + ii];
    }
}

} // namespace detail

inline constexpr double kMlrMaxCondition = 1e12;

inline LinearModel mlr_fit(const Matrix& x, std::span<const double> y,
                           bool fit_intercept = true) {
    if (x.rows() != y.size())
        throw ShapeMismatch("mlr_fit: " + std::to_string(x.rows()) + " rows vs " +
                            std::to_string(y.size()) + " targets");
    if (x.rows() == 0 || x.cols() == 0)
        throw EmptyInput("mlr_fit: empty design matrix");
    const std::size_t p = x.cols() + (fit_intercept ? 1 : 0);
    if (x.rows() < p)
        throw TooFewRows("mlr_fit: " + std::to_string(x.rows()) + " rows for " +
                         std::to_string(p) + " parameters");

    // Gram matrix and right-hand side of the normal equations. The intercept
    // occupies the leading slot as an implicit all-ones column.
    auto a_entry = [&](std::size_t r, std::size_t j) {
        if (fit_intercept)
            return j == 0 ? 1.0 : x(r, j - 1);
        return x(r, j);
    };
    std::vector<double> gram(p * p, 0.0);
    std::vector<double> rhs(p, 0.0);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t i = 0; i < p; ++i) {
            const double ai = a_entry(r, i);
            for (std::size_t j = 0; j <= i; ++j)
                gram[i * p + j] += ai * a_entry(r, j);
            rhs[i] += ai * y[r];
        }
    }
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j)
            gram[i * p + j] = gram[j * p + i];

    // Condition screen: the squared ratio of the extreme Cholesky pivots is
    // a cheap lower bound for cond(G).
    if (!detail::cholesky(gram, p))
        throw RankDeficient("mlr_fit: design matrix is rank deficient");
    double l_min = gram[0], l_max = gram[0];
    for (std::size_t i = 1; i < p; ++i) {
        l_min = std::min(l_min, gram[i * p + i]);
        l_max = std::max(l_max, gram[i * p + i]);
    }
    const double cond = (l_max / l_min) * (l_max / l_min);
    if (!(cond <= kMlrMaxCondition))
        throw RankDeficient("mlr_fit: condition estimate " + std::to_string(cond) +
                            " exceeds " + std::to_string(kMlrMaxCondition));
    detail::cholesky_solve(gram, p, rhs);

    LinearModel model;
    model.fit_intercept = fit_intercept;
    if (fit_intercept) {
        model.intercept = rhs[0];
        model.coef.assign(rhs.begin() + 1, rhs.end());
    } else {
        model.intercept = 0.0;
        model.coef = std::move(rhs);
    }
    return model;
}

inline std::vector<double> mlr_predict(const LinearModel& model, const Matrix& x) {
    if (!model.fitted())
        throw NotFitted("mlr_predict: model has no coefficients");
    if (x.cols() != model.n_features())
        throw ShapeMismatch("mlr_predict: " + std::to_string(x.cols()) +
                            " columns vs " + std::to_string(model.n_features()) +
                            " coefficients");
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double acc = model.intercept;
        for (std::size_t j = 0; j < x.cols(); ++j)
            acc += model.coef[j] * x(r, j);
        out[r] = acc;
    }
    return out;
}

} // namespace eeatc

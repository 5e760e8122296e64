// nanny.hpp — direct loss estimation: a side model that predicts the
// absolute error of the first calibration phase from the raw features plus
// the first-phase output, without ever seeing the reference value at
// estimation time.

#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "eeatc/error.hpp"
#include "eeatc/forest.hpp"
#include "eeatc/linear.hpp"
#include "eeatc/matrix.hpp"

namespace eeatc {

enum class NannyKind { forest, linear };

inline std::string_view nanny_kind_name(NannyKind k) {
    return k == NannyKind::forest ? "forest" : "linear";
}

struct NannyConfig {
    NannyKind kind = NannyKind::forest;
    ForestParams forest;  // backbone parameters when kind == forest
};

struct NannyModel {
    NannyKind kind = NannyKind::forest;
    ForestModel forest;
    LinearModel linear;
    std::size_t n_features = 0;  // raw feature count, before the output column

    bool fitted() const {
        return kind == NannyKind::forest ? forest.fitted() : linear.fitted();
    }
    bool operator==(const NannyModel&) const = default;
};

// Trains the error model on [x | first-phase output] against the observed
// absolute error of that phase.
inline NannyModel nanny_fit(const Matrix& x, std::span<const double> first_phase,
                            std::span<const double> abs_error,
                            const NannyConfig& cfg = {}, unsigned n_threads = 1) {
    if (x.rows() != first_phase.size() || x.rows() != abs_error.size())
        throw ShapeMismatch("nanny_fit: rows " + std::to_string(x.rows()) +
                            ", outputs " + std::to_string(first_phase.size()) +
                            ", errors " + std::to_string(abs_error.size()));
    if (x.rows() == 0)
        throw EmptyInput("nanny_fit: no rows");
    for (double e : abs_error)
        if (e < 0.0)
            throw NegativeTargets("nanny_fit: absolute errors must be non-negative");

    const Matrix design = with_column(x, first_phase);
    NannyModel model;
    model.kind = cfg.kind;
    model.n_features = x.cols();
    if (cfg.kind == NannyKind::forest)
        model.forest = forest_fit(design, abs_error, cfg.forest, n_threads);
    else
        model.linear = mlr_fit(design, abs_error);
    return model;
}

// Error estimates for new rows; clamped at zero, since an absolute error
// below zero is meaningless and the linear backbone can extrapolate there.
inline std::vector<double> nanny_estimate(const NannyModel& model, const Matrix& x,
                                          std::span<const double> first_phase) {
    if (!model.fitted())
        throw NotFitted("nanny_estimate: model not fitted");
    if (x.rows() != first_phase.size())
        throw ShapeMismatch("nanny_estimate: " + std::to_string(x.rows()) +
                            " rows vs " + std::to_string(first_phase.size()) +
                            " outputs");
    if (x.cols() != model.n_features)
        throw ShapeMismatch("nanny_estimate: " + std::to_string(x.cols()) +
                            " columns vs " + std::to_string(model.n_features) +
                            " expected");
    const Matrix design = with_column(x, first_phase);
    std::vector<double> est = model.kind == NannyKind::forest
                                  ? forest_predict(model.forest, design)
                                  : mlr_predict(model.linear, design);
    for (double& e : est)
        e = std::max(e, 0.0);
    return est;
}

} // namespace eeatc

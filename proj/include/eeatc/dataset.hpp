// dataset.hpp — tabular data model: feature specs, normalization, splitting,
// and assembly of feature matrices from cleaned sample records.
//
// Feature names are drawn from {s, t, rh, s_lag<k>}; the target is always y.
// A lagged feature s_lag<k> is normalized with the statistics of its base
// column s, so the lagged column carries the same affine transform as the
// live one.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eeatc/error.hpp"
#include "eeatc/matrix.hpp"
#include "eeatc/record.hpp"
#include "eeatc/rng.hpp"

namespace eeatc {

inline constexpr std::string_view kTargetName = "y";

// Lag order encoded in a feature name: "s_lag3" -> 3, plain names -> 0.
inline int feature_lag(std::string_view name) {
    constexpr std::string_view prefix = "s_lag";
    if (name.substr(0, prefix.size()) != prefix)
        return 0;
    const std::string_view digits = name.substr(prefix.size());
    if (digits.empty())
        return 0;
    int k = 0;
    for (char c : digits) {
        if (c < '0' || c > '9')
            return 0;
        k = k * 10 + (c - '0');
    }
    return k;
}

// Underlying record field for a feature name ("s_lag1" -> "s").
inline std::string feature_base(std::string_view name) {
    return feature_lag(name) > 0 ? "s" : std::string(name);
}

struct FeatureSpec {
    std::vector<std::string> features;

    std::size_t size() const { return features.size(); }

    void validate() const {
        if (features.empty())
            throw BadConfig("feature spec is empty");
        bool has_s = false;
        for (const auto& f : features) {
            const bool lagged = feature_lag(f) > 0;
            if (!lagged && f != "s" && f != "t" && f != "rh")
                throw BadConfig("unknown feature '" + f + "'");
            if (f == "s")
                has_s = true;
            if (std::count(features.begin(), features.end(), f) != 1)
                throw BadConfig("duplicate feature '" + f + "'");
        }
        if (!has_s)
            throw BadConfig("feature spec must include the sensor reading s");
    }

    int max_lag() const {
        int m = 0;
        for (const auto& f : features)
            m = std::max(m, feature_lag(f));
        return m;
    }

    // Parses a comma-separated list, e.g. "s,t,rh,s_lag1".
    static FeatureSpec parse(std::string_view text) {
        FeatureSpec spec;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t comma = std::min(text.find(',', pos), text.size());
            std::string_view item = text.substr(pos, comma - pos);
            while (!item.empty() && item.front() == ' ')
                item.remove_prefix(1);
            while (!item.empty() && item.back() == ' ')
                item.remove_suffix(1);
            if (!item.empty())
                spec.features.emplace_back(item);
            if (comma == text.size())
                break;
            pos = comma + 1;
        }
        spec.validate();
        return spec;
    }

    std::string to_string() const {
        std::string out;
        for (const auto& f : features) {
            if (!out.empty())
                out += ',';
            out += f;
        }
        return out;
    }

    bool operator==(const FeatureSpec&) const = default;
};

struct ColumnStat {
    std::string column;
    double mean = 0.0;
    double stddev = 1.0;

    bool operator==(const ColumnStat&) const = default;
};

struct NormParams {
    std::vector<ColumnStat> columns;

    bool empty() const { return columns.empty(); }

    const ColumnStat* find(std::string_view column) const {
        for (const auto& c : columns)
            if (c.column == column)
                return &c;
        return nullptr;
    }

    const ColumnStat& at(std::string_view column) const {
        if (const ColumnStat* c = find(column))
            return *c;
        throw MissingColumn("no normalization parameters for column '" +
                            std::string(column) + "'");
    }

    bool operator==(const NormParams&) const = default;
};

// Aligned feature matrix plus (optionally) the target vector. y is empty for
// unlabeled prediction inputs; labeled datasets satisfy y.size() == x.rows().
// source_rows maps each matrix row back to the record it was assembled from.
struct CalDataset {
    Matrix x;
    std::vector<double> y;
    NormParams norm;
    FeatureSpec spec;
    std::vector<std::size_t> source_rows;

    std::size_t n_rows() const { return x.rows(); }
    bool labeled() const { return !y.empty(); }
};

namespace detail {

// Sample mean and std (N-1 divisor). Constant input is detected exactly via
// min == max rather than through the rounded variance.
inline ColumnStat column_stat(std::string column, std::span<const double> values) {
    if (values.size() < 2)
        throw EmptyInput("need at least 2 values to normalize column '" + column + "'");
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    if (*mn == *mx)
        throw ZeroVariance("column '" + column + "' is constant");
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        const double d = v - mean;
        ss += d * d;
    }
    const double stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    if (stddev == 0.0)
        throw ZeroVariance("column '" + column + "' is constant");
    return ColumnStat{std::move(column), mean, stddev};
}

// Unique base fields of a spec, in first-appearance order.
inline std::vector<std::string> base_fields(const FeatureSpec& spec) {
    std::vector<std::string> out;
    for (const auto& f : spec.features) {
        std::string base = feature_base(f);
        if (std::find(out.begin(), out.end(), base) == out.end())
            out.push_back(std::move(base));
    }
    return out;
}

} // namespace detail

// Per-column mean/std over the supplied records (present values only). The
// target column is included whenever any record carries a reference reading.
inline NormParams normalize_fit(const Records& records, const FeatureSpec& spec) {
    spec.validate();
    if (records.size() < 2)
        throw EmptyInput("normalize_fit needs at least 2 records");
    std::vector<std::string> wanted = detail::base_fields(spec);
    const bool any_y = std::any_of(records.begin(), records.end(),
                                   [](const SampleRecord& r) { return r.y.has_value(); });
    if (any_y)
        wanted.emplace_back(kTargetName);

    NormParams norm;
    for (const auto& name : wanted) {
        const auto field = field_from_name(name);
        std::vector<double> values;
        values.reserve(records.size());
        for (const auto& r : records)
            if (const auto& v = r.field(*field))
                values.push_back(*v);
        if (values.empty())
            throw MissingColumn("column '" + name + "' absent from all records");
        norm.columns.push_back(detail::column_stat(name, values));
    }
    return norm;
}

// (value - mean) / std for every spec column (and the target when present).
// Fields outside the spec pass through untouched.
inline Records normalize_apply(const Records& records, const NormParams& norm,
                               const FeatureSpec& spec) {
    spec.validate();
    std::vector<std::string> wanted = detail::base_fields(spec);
    const bool any_y = std::any_of(records.begin(), records.end(),
                                   [](const SampleRecord& r) { return r.y.has_value(); });
    if (any_y)
        wanted.emplace_back(kTargetName);
    for (const auto& name : wanted)
        norm.at(name); // MissingColumn when uncovered

    Records out = records;
    for (const auto& name : wanted) {
        const ColumnStat& st = norm.at(name);
        const Field field = *field_from_name(name);
        for (auto& r : out)
            if (auto& v = r.field(field))
                v = (*v - st.mean) / st.stddev;
    }
    return out;
}

inline double denormalize_value(double value, const NormParams& norm,
                                std::string_view column) {
    const ColumnStat& st = norm.at(column);
    return value * st.stddev + st.mean;
}

inline std::vector<double> denormalize(std::span<const double> values,
                                       const NormParams& norm,
                                       std::string_view column) {
    const ColumnStat& st = norm.at(column);
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = values[i] * st.stddev + st.mean;
    return out;
}

// Builds the feature matrix in spec column order. A lagged feature at row i
// reads the base field of record i-k in the pre-drop sequence; the first
// max_lag rows are dropped, as is any row with a missing required field.
inline CalDataset assemble_features(const Records& records, const FeatureSpec& spec,
                                    bool with_target = true) {
    spec.validate();
    require_time_sorted(records);

    const int max_lag = spec.max_lag();
    if (max_lag > 0 && records.size() > 1) {
        // lagged features only make sense on a uniform time grid
        const double step = records[1].timestamp - records[0].timestamp;
        for (std::size_t i = 1; i < records.size(); ++i) {
            const double d = records[i].timestamp - records[i - 1].timestamp;
            if (step <= 0.0 || std::abs(d - step) > 1e-6 * std::max(1.0, step))
                throw BadConfig("lagged features require uniformly bucketed records");
        }
    }

    CalDataset ds;
    ds.spec = spec;
    Matrix x;
    std::vector<double> row(spec.size());
    for (std::size_t i = static_cast<std::size_t>(max_lag); i < records.size(); ++i) {
        bool complete = true;
        for (std::size_t j = 0; j < spec.size() && complete; ++j) {
            const int lag = feature_lag(spec.features[j]);
            const Field field = *field_from_name(feature_base(spec.features[j]));
            const auto& v = records[i - static_cast<std::size_t>(lag)].field(field);
            if (v)
                row[j] = *v;
            else
                complete = false;
        }
        std::optional<double> target;
        if (with_target) {
            target = records[i].y;
            if (!target)
                complete = false;
        }
        if (!complete)
            continue;
        x.push_row(row);
        ds.source_rows.push_back(i);
        if (with_target)
            ds.y.push_back(*target);
    }
    if (x.rows() == 0)
        throw EmptyAfterDrop("no complete rows after assembling features");
    ds.x = std::move(x);
    return ds;
}

// Uniformly random, seed-deterministic row partition. Train size is
// round(N * fraction), clamped so both parts stay non-empty; row order within
// each part follows the original dataset.
inline std::pair<CalDataset, CalDataset> train_test_split(const CalDataset& ds,
                                                          double train_fraction,
                                                          std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw BadConfig("train fraction must lie in (0, 1)");
    const std::size_t n = ds.n_rows();
    if (n < 4)
        throw TooFewRows("need at least 4 rows to split, got " + std::to_string(n));

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    SplitMix64 rng(seed);
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(idx[i], idx[rng.uniform_index(i + 1)]);

    std::size_t train_n = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * train_fraction));
    train_n = std::clamp<std::size_t>(train_n, 1, n - 1);

    std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(train_n));
    std::vector<std::size_t> test_idx(idx.begin() + static_cast<std::ptrdiff_t>(train_n), idx.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    auto take = [&](const std::vector<std::size_t>& rows) {
        CalDataset part;
        part.norm = ds.norm;
        part.spec = ds.spec;
        part.x = Matrix(rows.size(), ds.x.cols());
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < ds.x.cols(); ++c)
                part.x(r, c) = ds.x(rows[r], c);
        if (ds.labeled()) {
            part.y.resize(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r)
                part.y[r] = ds.y[rows[r]];
        }
        if (!ds.source_rows.empty()) {
            part.source_rows.resize(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r)
                part.source_rows[r] = ds.source_rows[rows[r]];
        }
        return part;
    };
    return {take(train_idx), take(test_idx)};
}

// Column statistics from an already-assembled (raw-unit) dataset. Lagged
// columns share their base column's statistics; the target gets its own.
inline NormParams normalize_fit_dataset(const CalDataset& raw) {
    NormParams norm;
    for (std::size_t j = 0; j < raw.spec.size(); ++j) {
        const std::string base = feature_base(raw.spec.features[j]);
        if (norm.find(base))
            continue;
        if (feature_lag(raw.spec.features[j]) > 0)
            continue; // shares the live column's stats, added when that column is seen
        norm.columns.push_back(detail::column_stat(base, raw.x.column(j)));
    }
    if (raw.labeled())
        norm.columns.push_back(detail::column_stat(std::string(kTargetName), raw.y));
    return norm;
}

inline CalDataset normalize_dataset(const CalDataset& raw, const NormParams& norm) {
    CalDataset out = raw;
    out.norm = norm;
    for (std::size_t j = 0; j < raw.spec.size(); ++j) {
        const ColumnStat& st = norm.at(feature_base(raw.spec.features[j]));
        for (std::size_t r = 0; r < raw.n_rows(); ++r)
            out.x(r, j) = (raw.x(r, j) - st.mean) / st.stddev;
    }
    if (raw.labeled()) {
        const ColumnStat& st = norm.at(kTargetName);
        for (std::size_t r = 0; r < raw.y.size(); ++r)
            out.y[r] = (raw.y[r] - st.mean) / st.stddev;
    }
    return out;
}

// Which rows contribute to the normalization statistics. train_only avoids
// leaking test-set moments into the model; full computes them over the whole
// series before splitting.
enum class NormScope { train_only, full };

inline std::string_view norm_scope_name(NormScope s) {
    return s == NormScope::train_only ? "train_only" : "full";
}

struct SplitConfig {
    double train_fraction = 0.75;
    std::uint64_t seed = 0;
    NormScope scope = NormScope::train_only;
};

// Cleaned records -> normalized train/test datasets: assemble the feature
// matrix, split rows, then fit and apply normalization per the configured
// scope. Both partitions carry the same NormParams.
inline std::pair<CalDataset, CalDataset> prepare_split(const Records& records,
                                                       const FeatureSpec& spec,
                                                       const SplitConfig& cfg = {}) {
    const CalDataset raw = assemble_features(records, spec);
    if (cfg.scope == NormScope::full) {
        const NormParams norm = normalize_fit_dataset(raw);
        return train_test_split(normalize_dataset(raw, norm), cfg.train_fraction,
                                cfg.seed);
    }
    auto [train_raw, test_raw] = train_test_split(raw, cfg.train_fraction, cfg.seed);
    const NormParams norm = normalize_fit_dataset(train_raw);
    return {normalize_dataset(train_raw, norm), normalize_dataset(test_raw, norm)};
}

} // namespace eeatc

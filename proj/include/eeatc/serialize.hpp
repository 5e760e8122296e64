// serialize.hpp — versioned model files and evaluation reports.
//
// Models persist as JSON (format "eeatc-model", version 1). Reports come in
// two flavors: a machine-readable key/value + TSV form that round-trips
// every double bit-exactly, and an aligned human table. Both are emitted
// deterministically, so identical runs produce identical bytes.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "eeatc/error.hpp"
#include "eeatc/format.hpp"
#include "eeatc/pipeline.hpp"

namespace eeatc {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

using nlohmann::json;

inline json linear_to_json(const LinearModel& m) {
    return json{{"coef", m.coef},
                {"intercept", m.intercept},
                {"fit_intercept", m.fit_intercept}};
}

inline LinearModel linear_from_json(const json& j) {
    LinearModel m;
    m.coef = j.at("coef").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.fit_intercept = j.at("fit_intercept").get<bool>();
    return m;
}

inline json forest_to_json(const ForestModel& m) {
    json trees = json::array();
    for (const Tree& t : m.trees) {
        std::vector<std::int32_t> feature, left, right;
        std::vector<double> threshold, value;
        feature.reserve(t.nodes.size());
        for (const TreeNode& n : t.nodes) {
            feature.push_back(n.feature);
            left.push_back(n.left);
            right.push_back(n.right);
            threshold.push_back(n.threshold);
            value.push_back(n.value);
        }
        trees.push_back(json{{"feature", feature},
                             {"left", left},
                             {"right", right},
                             {"threshold", threshold},
                             {"value", value}});
    }
    return json{{"params",
                 json{{"n_trees", m.params.n_trees},
                      {"max_depth", m.params.max_depth},
                      {"min_samples_leaf", m.params.min_samples_leaf},
                      {"min_samples_split", m.params.min_samples_split},
                      {"mtry", m.params.mtry},
                      {"bootstrap", m.params.bootstrap},
                      {"seed", m.params.seed}}},
                {"n_features", m.n_features},
                {"trees", trees}};
}

inline ForestModel forest_from_json(const json& j) {
    ForestModel m;
    const json& p = j.at("params");
    m.params.n_trees = p.at("n_trees").get<std::size_t>();
    m.params.max_depth = p.at("max_depth").get<std::size_t>();
    m.params.min_samples_leaf = p.at("min_samples_leaf").get<std::size_t>();
    m.params.min_samples_split = p.at("min_samples_split").get<std::size_t>();
    m.params.mtry = p.at("mtry").get<std::size_t>();
    m.params.bootstrap = p.at("bootstrap").get<bool>();
    m.params.seed = p.at("seed").get<std::uint64_t>();
    m.n_features = j.at("n_features").get<std::size_t>();
    for (const json& jt : j.at("trees")) {
        const auto feature = jt.at("feature").get<std::vector<std::int32_t>>();
        const auto left = jt.at("left").get<std::vector<std::int32_t>>();
        const auto right = jt.at("right").get<std::vector<std::int32_t>>();
        const auto threshold = jt.at("threshold").get<std::vector<double>>();
        const auto value = jt.at("value").get<std::vector<double>>();
        if (feature.size() != left.size() || feature.size() != right.size() ||
            feature.size() != threshold.size() || feature.size() != value.size())
            throw SerializationError("tree arrays disagree in length");
        Tree t;
        t.nodes.resize(feature.size());
        for (std::size_t i = 0; i < feature.size(); ++i)
            t.nodes[i] = TreeNode{feature[i], left[i], right[i], threshold[i], value[i]};
        m.trees.push_back(std::move(t));
    }
    return m;
}

inline json nanny_to_json(const NannyModel& m) {
    json j{{"kind", std::string(nanny_kind_name(m.kind))},
           {"n_features", m.n_features}};
    if (m.kind == NannyKind::forest)
        j["forest"] = forest_to_json(m.forest);
    else
        j["linear"] = linear_to_json(m.linear);
    return j;
}

inline NannyModel nanny_from_json(const json& j) {
    NannyModel m;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "forest")
        m.kind = NannyKind::forest;
    else if (kind == "linear")
        m.kind = NannyKind::linear;
    else
        throw SerializationError("unknown error-model kind '" + kind + "'");
    m.n_features = j.at("n_features").get<std::size_t>();
    if (m.kind == NannyKind::forest)
        m.forest = forest_from_json(j.at("forest"));
    else
        m.linear = linear_from_json(j.at("linear"));
    return m;
}

inline json norm_to_json(const NormParams& norm) {
    json arr = json::array();
    for (const ColumnStat& c : norm.columns)
        arr.push_back(json{{"column", c.column}, {"mean", c.mean}, {"std", c.stddev}});
    return arr;
}

inline NormParams norm_from_json(const json& j) {
    NormParams norm;
    for (const json& jc : j)
        norm.columns.push_back(ColumnStat{jc.at("column").get<std::string>(),
                                          jc.at("mean").get<double>(),
                                          jc.at("std").get<double>()});
    return norm;
}

} // namespace detail

inline std::string save_model(const CalibrationModel& model) {
    using nlohmann::json;
    json j{{"format", "eeatc-model"},
           {"version", kModelFormatVersion},
           {"kind", std::string(model_kind_name(model.kind))},
           {"features", model.spec.features},
           {"norm", detail::norm_to_json(model.norm)}};
    switch (model.kind) {
    case ModelKind::mlr:
        j["linear"] = detail::linear_to_json(model.linear);
        break;
    case ModelKind::rf:
        j["forest"] = detail::forest_to_json(model.forest);
        break;
    case ModelKind::eeatc:
        j["eeatc"] = nlohmann::json{
            {"first_phase", detail::linear_to_json(model.eeatc.first_phase)},
            {"nanny", detail::nanny_to_json(model.eeatc.nanny)},
            {"second_phase", detail::forest_to_json(model.eeatc.second_phase)}};
        break;
    }
    return j.dump() + "\n";
}

inline CalibrationModel load_model(std::string_view text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SerializationError(std::string("model file is not valid JSON: ") +
                                 e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "eeatc-model")
            throw SerializationError("not a model file");
        if (j.at("version").get<int>() != kModelFormatVersion)
            throw SerializationError("unsupported model version");
        CalibrationModel model;
        const std::string kind = j.at("kind").get<std::string>();
        const auto parsed = model_kind_from_name(kind);
        if (!parsed)
            throw SerializationError("unknown model kind '" + kind + "'");
        model.kind = *parsed;
        model.spec.features = j.at("features").get<std::vector<std::string>>();
        model.spec.validate();
        model.norm = detail::norm_from_json(j.at("norm"));
        switch (model.kind) {
        case ModelKind::mlr:
            model.linear = detail::linear_from_json(j.at("linear"));
            break;
        case ModelKind::rf:
            model.forest = detail::forest_from_json(j.at("forest"));
            break;
        case ModelKind::eeatc: {
            const json& je = j.at("eeatc");
            model.eeatc.first_phase = detail::linear_from_json(je.at("first_phase"));
            model.eeatc.nanny = detail::nanny_from_json(je.at("nanny"));
            model.eeatc.second_phase = detail::forest_from_json(je.at("second_phase"));
            break;
        }
        }
        return model;
    } catch (const json::exception& e) {
        throw SerializationError(std::string("malformed model file: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Machine report: header lines, then one tab-separated line per entry.
// Doubles use shortest round-trip formatting.

inline std::string encode_report(const EvalReport& report) {
    if (report.entries.empty())
        throw EmptyReport("report has no entries");
    std::string out = "eeatc-report\t1\n";
    out += "train_fraction\t" + format_double(report.train_fraction) + "\n";
    out += "seed\t" + std::to_string(report.seed) + "\n";
    out += "scope\t" + std::string(norm_scope_name(report.scope)) + "\n";
    for (const EvalEntry& e : report.entries) {
        out += "entry\t" + e.feature_set + "\t" +
               std::string(model_kind_name(e.kind)) + "\t" +
               format_double(e.train.r2) + "\t" + format_double(e.train.rmse) + "\t" +
               std::to_string(e.train.n) + "\t" + format_double(e.test.r2) + "\t" +
               format_double(e.test.rmse) + "\t" + std::to_string(e.test.n) + "\t" +
               (e.usepa ? "1" : "0") + "\t" + (e.best_of_kind ? "1" : "0") + "\n";
    }
    return out;
}

inline EvalReport decode_report(std::string_view text) {
    auto fail = [](const std::string& why) -> void {
        throw SerializationError("malformed report: " + why);
    };
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t nl = std::min(text.find('\n', pos), text.size());
        if (nl > pos)
            lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    if (lines.empty() || lines[0] != "eeatc-report\t1")
        fail("missing or unsupported header");

    auto split_tabs = [](std::string_view line) {
        std::vector<std::string_view> cells;
        std::size_t p = 0;
        while (true) {
            const std::size_t tab = line.find('\t', p);
            cells.push_back(line.substr(p, std::min(tab, line.size()) - p));
            if (tab == std::string_view::npos)
                return cells;
            p = tab + 1;
        }
    };

    EvalReport report;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_tabs(lines[i]);
        if (cells[0] == "train_fraction" && cells.size() == 2) {
            report.train_fraction = require_double(cells[1], "train_fraction");
        } else if (cells[0] == "seed" && cells.size() == 2) {
            report.seed = std::strtoull(std::string(cells[1]).c_str(), nullptr, 10);
        } else if (cells[0] == "scope" && cells.size() == 2) {
            if (cells[1] == "train_only")
                report.scope = NormScope::train_only;
            else if (cells[1] == "full")
                report.scope = NormScope::full;
            else
                fail("unknown scope");
        } else if (cells[0] == "entry" && cells.size() == 11) {
            EvalEntry e;
            e.feature_set = std::string(cells[1]);
            const auto kind = model_kind_from_name(cells[2]);
            if (!kind)
                fail("unknown model kind");
            e.kind = *kind;
            e.train.r2 = require_double(cells[3], "train r2");
            e.train.rmse = require_double(cells[4], "train rmse");
            e.train.n = static_cast<std::size_t>(
                std::strtoull(std::string(cells[5]).c_str(), nullptr, 10));
            e.test.r2 = require_double(cells[6], "test r2");
            e.test.rmse = require_double(cells[7], "test rmse");
            e.test.n = static_cast<std::size_t>(
                std::strtoull(std::string(cells[8]).c_str(), nullptr, 10));
            e.usepa = cells[9] == "1";
            e.best_of_kind = cells[10] == "1";
            report.entries.push_back(std::move(e));
        } else {
            fail("unrecognized line");
        }
    }
    if (report.entries.empty())
        fail("no entries");
    return report;
}

// ---------------------------------------------------------------------------
// Human table. `*` marks the best feature set per model kind (by test R^2);
// the last column flags entries meeting the US EPA R^2 target.

inline std::string render_report(const EvalReport& report) {
    if (report.entries.empty())
        throw EmptyReport("report has no entries");

    auto fixed3 = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", v);
        return std::string(buf);
    };
    auto kind_label = [](ModelKind k) -> std::string {
        switch (k) {
        case ModelKind::mlr: return "MLR";
        case ModelKind::rf: return "RF";
        default: return "EEATC";
        }
    };

    const std::vector<std::string> head = {"features",  "model",     "train R2",
                                           "train RMSE", "test R2",  "test RMSE",
                                           "USEPA"};
    std::vector<std::vector<std::string>> rows;
    for (const EvalEntry& e : report.entries) {
        rows.push_back({e.feature_set, kind_label(e.kind), fixed3(e.train.r2),
                        fixed3(e.train.rmse),
                        fixed3(e.test.r2) + (e.best_of_kind ? "*" : ""),
                        fixed3(e.test.rmse), e.usepa ? "yes" : ""});
    }

    std::vector<std::size_t> width(head.size());
    for (std::size_t c = 0; c < head.size(); ++c) {
        width[c] = head[c].size();
        for (const auto& row : rows)
            width[c] = std::max(width[c], row[c].size());
    }
    auto emit_row = [&](const std::vector<std::string>& row, std::string& out) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            const bool last = c + 1 == row.size();
            const bool numeric = c >= 2 && c <= 5;
            std::string cell = row[c];
            if (numeric)
                cell.insert(0, width[c] - cell.size(), ' ');
            else if (!last)
                cell.append(width[c] - cell.size(), ' ');
            out += cell;
            if (!last)
                out += "  ";
        }
        while (!out.empty() && out.back() == ' ')
            out.pop_back();
        out += '\n';
    };

    std::string out;
    emit_row(head, out);
    for (const auto& row : rows)
        emit_row(row, out);
    return out;
}

} // namespace eeatc

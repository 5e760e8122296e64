#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include <json.hpp>

#include "eeatc/eeatc.hpp"

using namespace eeatc;

namespace {

CalibrationModel fitted_model(ModelKind kind) {
    const SynthData data = synth_generate(synth_heteroscedastic(150, 51));
    const auto [train, test] =
        prepare_split(data.records, FeatureSpec::parse("s,t,rh"), {0.75, 51});
    EeatcConfig cfg;
    cfg.seed = 51;
    cfg.forest.n_trees = 8;
    cfg.nanny.forest.n_trees = 8;
    return train_model(train, kind, cfg);
}

EvalReport sample_report() {
    EvalReport report;
    report.train_fraction = 0.8;
    report.seed = 1234567890123ULL;
    report.scope = NormScope::full;

    EvalEntry a;
    a.feature_set = "s,t,rh,s_lag2";
    a.kind = ModelKind::eeatc;
    a.train = {0.12345678901234567, 0.987654321,  1500};
    a.test = {1.0 / 3.0, 2.0e-17, 500};
    a.usepa = false;
    a.best_of_kind = true;

    EvalEntry b;
    b.feature_set = "s";
    b.kind = ModelKind::mlr;
    b.train = {0.25, 0.5, 1500};
    b.test = {0.875, 0.125, 500};
    b.usepa = true;

    report.entries = {a, b};
    return report;
}

} // namespace

TEST_CASE("models of every kind survive a save/load round trip") {
    for (ModelKind kind : {ModelKind::mlr, ModelKind::rf, ModelKind::eeatc}) {
        const CalibrationModel model = fitted_model(kind);
        const std::string text = save_model(model);
        const CalibrationModel back = load_model(text);
        CHECK(back == model);
        // serialization itself is deterministic
        CHECK(save_model(back) == text);
    }
}

TEST_CASE("model files are versioned and validated") {
    const std::string text = save_model(fitted_model(ModelKind::mlr));

    auto tampered = [&](auto&& mutate) {
        nlohmann::json j = nlohmann::json::parse(text);
        mutate(j);
        return j.dump();
    };

    CHECK_THROWS_AS(load_model("not json at all"), SerializationError);
    CHECK_THROWS_AS(load_model(text.substr(0, text.size() / 2)), SerializationError);
    CHECK_THROWS_AS(load_model(tampered([](auto& j) { j["format"] = "zip"; })),
                    SerializationError);
    CHECK_THROWS_AS(load_model(tampered([](auto& j) { j["version"] = 2; })),
                    SerializationError);
    CHECK_THROWS_AS(load_model(tampered([](auto& j) { j["kind"] = "boost"; })),
                    SerializationError);
    CHECK_THROWS_AS(load_model(tampered([](auto& j) { j.erase("linear"); })),
                    SerializationError);

    // a forest whose per-node arrays disagree in length is rejected
    const std::string rf_text = save_model(fitted_model(ModelKind::rf));
    nlohmann::json j = nlohmann::json::parse(rf_text);
    j["forest"]["trees"][0]["value"].erase(0);
    CHECK_THROWS_AS(load_model(j.dump()), SerializationError);
}

TEST_CASE("reports round-trip bit-exactly through the machine encoding") {
    const EvalReport report = sample_report();
    const std::string text = encode_report(report);
    const EvalReport back = decode_report(text);

    CHECK(back.train_fraction == report.train_fraction);
    CHECK(back.seed == report.seed);
    CHECK(back.scope == report.scope);
    REQUIRE(back.entries.size() == report.entries.size());
    for (std::size_t i = 0; i < back.entries.size(); ++i) {
        const EvalEntry &x = back.entries[i], &y = report.entries[i];
        CHECK(x.feature_set == y.feature_set);
        CHECK(x.kind == y.kind);
        CHECK(x.train.r2 == y.train.r2);
        CHECK(x.train.rmse == y.train.rmse);
        CHECK(x.train.n == y.train.n);
        CHECK(x.test.r2 == y.test.r2);
        CHECK(x.test.rmse == y.test.rmse);
        CHECK(x.test.n == y.test.n);
        CHECK(x.usepa == y.usepa);
        CHECK(x.best_of_kind == y.best_of_kind);
    }
    CHECK(encode_report(back) == text);
}

TEST_CASE("decode_report rejects malformed input") {
    const std::string good = encode_report(sample_report());

    CHECK_THROWS_AS(decode_report(""), SerializationError);
    CHECK_THROWS_AS(decode_report("eeatc-report\t2\nseed\t1\n"), SerializationError);
    CHECK_THROWS_AS(decode_report("eeatc-report\t1\n"), SerializationError);
    CHECK_THROWS_AS(decode_report("eeatc-report\t1\nscope\tsideways\n"),
                    SerializationError);
    CHECK_THROWS_AS(decode_report("eeatc-report\t1\nwhatever\t1\n"),
                    SerializationError);
    CHECK_THROWS_AS(decode_report(good + "entry\tonly\ttwo\n"), SerializationError);

    // an entry whose numeric cell is garbage
    std::string garbled = good;
    const std::size_t pos = garbled.find("0.25");
    garbled.replace(pos, 4, "zero");
    CHECK_THROWS_AS(decode_report(garbled), BadConfig);
}

TEST_CASE("render_report draws an aligned, deterministic table") {
    const EvalReport report = sample_report();
    const std::string table = render_report(report);
    CHECK(render_report(report) == table);

    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < table.size()) {
        const std::size_t nl = table.find('\n', pos);
        lines.push_back(table.substr(pos, nl - pos));
        pos = nl + 1;
    }
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].starts_with("features"));
    CHECK(lines[0].ends_with("USEPA"));

    // the best-of-kind star rides the test R2 cell; usepa renders as yes
    CHECK(lines[1].find("0.333*") != std::string::npos);
    CHECK(lines[1].find("EEATC") != std::string::npos);
    CHECK(lines[2].ends_with("yes"));
    CHECK(lines[1].find("yes") == std::string::npos);

    // model labels sit in one aligned column
    CHECK(lines[1].find("EEATC") == lines[2].find("MLR"));

    CHECK_THROWS_AS(render_report(EvalReport{}), EmptyReport);
    CHECK_THROWS_AS(encode_report(EvalReport{}), EmptyReport);
}

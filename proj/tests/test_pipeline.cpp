#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "eeatc/eeatc.hpp"

using namespace eeatc;

namespace {

EeatcConfig small_config(std::uint64_t seed) {
    EeatcConfig cfg;
    cfg.seed = seed;
    cfg.forest.n_trees = 30;
    cfg.nanny.forest.n_trees = 30;
    return cfg;
}

} // namespace

TEST_CASE("a perfectly linear sensor leaves the error estimator inert") {
    const SynthData data = synth_generate(synth_noiseless_linear(600, 9));
    const auto [train, test] =
        prepare_split(data.records, FeatureSpec::parse("s,t,rh"), {0.75, 9});
    const EeatcConfig cfg = small_config(9);
    const EeatcModel model = eeatc_train(train.x, train.y, cfg);

    // the first phase nails the response, so estimated errors vanish...
    for (double e : eeatc_error_estimates(model, test.x))
        CHECK(std::abs(e) < 1e-9);

    // ...and the second phase degenerates to a forest whose extra column
    // carries nothing: predictions coincide with a zero-column baseline
    const ForestModel baseline = forest_fit(
        with_column(train.x, std::vector<double>(train.x.rows(), 0.0)), train.y,
        baseline_forest_params(cfg));
    const auto two_phase = eeatc_predict(model, test.x);
    const auto one_phase = forest_predict(
        baseline, with_column(test.x, std::vector<double>(test.x.rows(), 0.0)));
    for (std::size_t i = 0; i < two_phase.size(); ++i)
        CHECK(two_phase[i] == Catch::Approx(one_phase[i]).epsilon(0).margin(1e-12));
}

TEST_CASE("baseline_forest_params hands the baseline the second-phase stream") {
    EeatcConfig cfg;
    cfg.seed = 404;
    cfg.forest.n_trees = 17;
    cfg.forest.seed = 999;  // overwritten: only the pipeline seed matters

    const ForestParams p = baseline_forest_params(cfg);
    CHECK(p.n_trees == 17);
    CHECK(p.seed == derive_seed(404, kSeedSlotSecondPhase));
    CHECK(p.seed != derive_seed(404, kSeedSlotNanny));
}

TEST_CASE("prediction runs without reference values") {
    const SynthData data = synth_generate(synth_heteroscedastic(400, 21));
    const FeatureSpec spec = FeatureSpec::parse("s,t,rh");
    const auto [train, test] = prepare_split(data.records, spec, {0.75, 21});
    const CalibrationModel model = train_model(train, ModelKind::eeatc, small_config(21));

    Records blind = data.records;
    for (SampleRecord& r : blind)
        r.y.reset();
    const RecordPredictions with_ref = predict_records(model, data.records);
    const RecordPredictions without_ref = predict_records(model, blind);
    CHECK(with_ref.timestamps == without_ref.timestamps);
    CHECK(with_ref.values == without_ref.values);
}

TEST_CASE("record predictions are denormalized and track surviving rows") {
    const SynthData data = synth_generate(synth_heteroscedastic(300, 14));
    const FeatureSpec spec = FeatureSpec::parse("s,t,rh");
    const auto [train, test] = prepare_split(data.records, spec, {0.75, 14});
    const CalibrationModel model = train_model(train, ModelKind::mlr, small_config(14));

    Records holey = data.records;
    holey[5].rh.reset();  // this row cannot be assembled
    const RecordPredictions preds = predict_records(model, holey);
    REQUIRE(preds.timestamps.size() == 299);
    CHECK(preds.timestamps[5] == holey[6].timestamp);

    // spot-check the unit conversion against a manual denormalization
    CalDataset ds = assemble_features(data.records, spec, false);
    ds.spec = spec;
    const CalDataset normed = normalize_dataset(ds, model.norm);
    const ColumnStat& ty = model.norm.at(kTargetName);
    const double manual =
        model_predict(model, normed.x)[0] * ty.stddev + ty.mean;
    CHECK(preds.values[0] == Catch::Approx(manual).epsilon(0).margin(1e-12));

    CHECK_THROWS_AS(predict_records(CalibrationModel{}, data.records), NotFitted);
}

TEST_CASE("evaluate_model reports metrics per partition and the usepa flag") {
    const SynthData data = synth_generate(synth_noiseless_linear(200, 8));
    const FeatureSpec spec = FeatureSpec::parse("s,t");
    const auto [train, test] = prepare_split(data.records, spec, {0.75, 8});

    const CalibrationModel good = train_model(train, ModelKind::mlr);
    const EvalEntry e = evaluate_model(good, train, test);
    CHECK(e.feature_set == "s,t");
    CHECK(e.kind == ModelKind::mlr);
    CHECK(e.test.r2 > 0.999);
    CHECK(e.usepa);

    // a model that ignores the sensor entirely cannot reach the threshold
    SplitMix64 rng(3);
    CalDataset scrambled = train;
    for (double& v : scrambled.y)
        v = rng.normal();
    CalDataset scrambled_test = test;
    for (double& v : scrambled_test.y)
        v = rng.normal();
    const CalibrationModel bad = train_model(scrambled, ModelKind::mlr);
    CHECK_FALSE(evaluate_model(bad, scrambled, scrambled_test).usepa);
}

TEST_CASE("model kinds round-trip through their names") {
    for (ModelKind k : {ModelKind::mlr, ModelKind::rf, ModelKind::eeatc})
        CHECK(model_kind_from_name(model_kind_name(k)) == k);
    CHECK_FALSE(model_kind_from_name("boost").has_value());
}

TEST_CASE("mark_best_of_kind prefers r2, then rmse, then entry order") {
    auto entry = [](ModelKind kind, double r2, double rmse) {
        EvalEntry e;
        e.kind = kind;
        e.test.r2 = r2;
        e.test.rmse = rmse;
        e.best_of_kind = true;  // stale flags must be reset
        return e;
    };
    EvalReport report;
    report.entries = {
        entry(ModelKind::mlr, 0.5, 1.0), entry(ModelKind::mlr, 0.7, 1.0),
        entry(ModelKind::rf, 0.9, 2.0),  entry(ModelKind::rf, 0.9, 1.0),
        entry(ModelKind::eeatc, 0.8, 1.0), entry(ModelKind::eeatc, 0.8, 1.0),
    };
    mark_best_of_kind(report);
    const std::vector<bool> flags = {
        report.entries[0].best_of_kind, report.entries[1].best_of_kind,
        report.entries[2].best_of_kind, report.entries[3].best_of_kind,
        report.entries[4].best_of_kind, report.entries[5].best_of_kind,
    };
    CHECK(flags == std::vector<bool>{false, true, false, true, true, false});
}

TEST_CASE("feature_sweep covers every feature set and model kind") {
    const SynthData data = synth_generate(synth_heteroscedastic(240, 33));
    SweepConfig cfg;
    cfg.specs = {FeatureSpec::parse("s"), FeatureSpec::parse("s,t,rh")};
    cfg.split = {0.75, 33};
    cfg.eeatc = small_config(33);

    const EvalReport report = feature_sweep(data.records, cfg);
    REQUIRE(report.entries.size() == 6);
    CHECK(report.seed == 33);
    CHECK(report.scope == NormScope::train_only);

    // spec-major order, kinds cycling fastest
    CHECK(report.entries[0].feature_set == "s");
    CHECK(report.entries[0].kind == ModelKind::mlr);
    CHECK(report.entries[2].kind == ModelKind::eeatc);
    CHECK(report.entries[3].feature_set == "s,t,rh");

    for (ModelKind kind : {ModelKind::mlr, ModelKind::rf, ModelKind::eeatc}) {
        int best = 0;
        for (const EvalEntry& e : report.entries)
            if (e.kind == kind && e.best_of_kind)
                ++best;
        CHECK(best == 1);
    }

    // reruns reproduce the same numbers
    const EvalReport again = feature_sweep(data.records, cfg);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(again.entries[i].test.r2 == report.entries[i].test.r2);
        CHECK(again.entries[i].test.rmse == report.entries[i].test.rmse);
    }

    SweepConfig empty_specs = cfg;
    empty_specs.specs.clear();
    CHECK_THROWS_AS(feature_sweep(data.records, empty_specs), BadConfig);
    SweepConfig empty_kinds = cfg;
    empty_kinds.kinds.clear();
    CHECK_THROWS_AS(feature_sweep(data.records, empty_kinds), BadConfig);
}

TEST_CASE("training contracts") {
    Matrix x(3, 1);
    CHECK_THROWS_AS(eeatc_train(x, std::vector<double>{1.0}), ShapeMismatch);
    CHECK_THROWS_AS(eeatc_train(Matrix{}, std::vector<double>{}), EmptyInput);
    CHECK_THROWS_AS(eeatc_predict(EeatcModel{}, x), NotFitted);

    CalDataset unlabeled;
    unlabeled.x = x;
    CHECK_THROWS_AS(train_model(unlabeled, ModelKind::mlr), EmptyInput);
}

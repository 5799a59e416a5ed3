#include <doctest.h>

#include <fstream>
#include <random>

#include "pbc/io.hpp"
#include "support.hpp"

using namespace pbc;
using nlohmann::json;

TEST_CASE("run config round trip") {
    RunConfig c;
    c.seed = 17;
    c.data.path = "/data/x.csv";
    c.data.format = DataFormat::Series;
    c.features.lags = {1, 5};
    c.features.rolling_stats = {RollingStat::Std};
    c.pbc.k_hat = 4;
    c.pbc.loss = LossKind::AbsoluteError;
    c.pbc.soft_assignment = true;
    c.pbc.regressor.kind = RegressorKind::Mlp;
    c.pbc.regressor.hidden_sizes = {8, 4};
    c.pbc.regressor.activation = Activation::Tanh;
    c.stream.batch_size = 50;
    c.stream.learning_rate = 0.125;
    c.synth.k_hats = {2, 3, 7};
    c.synth.synthetic.noise_std = 0.3;
    const json j = to_json(c);
    const RunConfig back = run_config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.pbc.seed == 17);
    CHECK(back.pbc.regressor == c.pbc.regressor);
    CHECK(back.features.rolling_stats == c.features.rolling_stats);
}

TEST_CASE("config defaults are explicit and paths resolve against the config") {
    const RunConfig c = run_config_from_json(json{{"data", {{"path", "d.csv"}}}}, "/etc/runs");
    CHECK(c.data.path == std::filesystem::path("/etc/runs/d.csv"));
    const json j = to_json(c);
    CHECK(j["pbc"]["k_hat"] == 3);
    CHECK(j["pbc"]["zeta"] == 0.01);
    CHECK(j["stream"]["batch_size"] == 200);
    CHECK(j["regressor"]["kind"] == "ridge_linear");
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(run_config_from_json(json{{"sede", 1}}), InvalidInput);
    CHECK_THROWS_AS(run_config_from_json(json{{"pbc", {{"k", 3}}}}), InvalidInput);
    CHECK_THROWS_AS(run_config_from_json(json{{"pbc", {{"k_hat", "three"}}}}), InvalidInput);
    CHECK_THROWS_AS(run_config_from_json(json{{"pbc", {{"k_hat", 0}}}}), InvalidInput);
    CHECK_THROWS_AS(run_config_from_json(json{{"data", {{"format", "parquet"}}}}), InvalidInput);
    CHECK_THROWS_AS(run_config_from_json(json{{"regressor", {{"kind", "forest"}}}}), InvalidInput);
    CHECK_THROWS_AS(run_config_from_json(json{{"stream", {{"batch_size", 0}}}}), InvalidInput);
    CHECK_THROWS_AS(run_config_from_json(json{{"stream", {{"split", "train"}}}}), InvalidInput);

    const auto dir = test::scratch_dir("io_config");
    std::ofstream(dir / "broken.json") << "{ \"seed\": ";
    CHECK_THROWS_AS(load_run_config(dir / "broken.json"), InvalidInput);
    CHECK_THROWS_AS(load_run_config(dir / "absent.json"), InvalidInput);
}

TEST_CASE("model bundle round trip is bit exact") {
    const auto dir = test::scratch_dir("io_bundle");
    const auto data = test::random_dataset(60, 3, 2);
    RegressorSpec mlp;
    mlp.kind = RegressorKind::Mlp;
    mlp.hidden_sizes = {5, 3};
    mlp.epochs = 5;
    RegressorSpec ridge;
    ridge.ridge_lambda = 0.3;
    ModelBundle bundle{{fit(ridge, data), fit(mlp, data)}, fit(ridge, data), NormalizationParams{-1.5, 2.0 / 3.0},
                       {"a", "b", "c"}};
    save_bundle(dir / "bundle.json", bundle);
    const ModelBundle back = load_bundle(dir / "bundle.json");
    REQUIRE(back.models.size() == 2);
    CHECK(back.feature_names == bundle.feature_names);
    CHECK(back.normalization->max == bundle.normalization->max);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(back.models[k].spec() == bundle.models[k].spec());
        CHECK(back.models[k].parameters() == bundle.models[k].parameters());
    }
    const auto probe = test::random_dataset(1000, 3, 99);
    for (std::size_t i = 0; i < probe.size(); ++i) {
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(back.models[k].predict(probe.features(i)) == bundle.models[k].predict(probe.features(i)));
        }
        CHECK(back.baseline->predict(probe.features(i)) == bundle.baseline->predict(probe.features(i)));
    }
}

TEST_CASE("bundles with another version are refused") {
    const auto dir = test::scratch_dir("io_version");
    ModelBundle bundle{{TrainedModel::linear(std::vector<double>{1.0}, 0.0)}, std::nullopt, std::nullopt, {}};
    save_bundle(dir / "bundle.json", bundle);
    json j;
    std::ifstream(dir / "bundle.json") >> j;
    j["version"] = kBundleVersion + 1;
    write_json(dir / "future.json", j);
    CHECK_THROWS_AS(load_bundle(dir / "future.json"), InvalidInput);
    j["version"] = kBundleVersion;
    j["format"] = "something-else";
    write_json(dir / "other.json", j);
    CHECK_THROWS_AS(load_bundle(dir / "other.json"), InvalidInput);
    j["format"] = "pbc-model-bundle";
    j["models"][0]["parameters"] = {1.0, 2.0, 3.0};
    write_json(dir / "bad_params.json", j);
    CHECK_THROWS_AS(load_bundle(dir / "bad_params.json"), InvalidInput);
}

TEST_CASE("ndjson round trip keeps full precision") {
    const auto dir = test::scratch_dir("io_ndjson");
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<json> records;
    for (int i = 0; i < 100; ++i) records.push_back({{"i", i}, {"v", u(rng) * 1e-7}});
    write_ndjson(dir / "r.ndjson", records);
    CHECK(read_ndjson(dir / "r.ndjson") == records);
}

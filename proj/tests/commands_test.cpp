#include <doctest.h>

#include <fstream>
#include <random>

#include "pbc/commands.hpp"
#include "support.hpp"

using namespace pbc;
using nlohmann::json;

namespace {

const std::filesystem::path fixtures{PBC_FIXTURE_DIR};

RunConfig two_lines_config(std::uint64_t seed) {
    RunConfig c = load_run_config(fixtures / "two_lines_config.json");
    c.seed = seed;
    return c;
}

// Two mechanisms y = x1 and y = x2; the switch happens after `before` rows.
std::filesystem::path write_changepoint(const std::filesystem::path& dir, std::size_t before, std::size_t after) {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < before + after; ++i) {
        const double a = g(rng), b = g(rng);
        x.push_back(a);
        x.push_back(b);
        y.push_back(i < before ? a : b);
    }
    write_feature_csv(dir / "changepoint.csv", Dataset(2, x, y));
    ModelBundle bundle{{TrainedModel::linear(std::vector<double>{1.0, 0.0}, 0.0),
                        TrainedModel::linear(std::vector<double>{0.0, 1.0}, 0.0)},
                       std::nullopt, std::nullopt, {"x1", "x2"}};
    save_bundle(dir / "oracle_bundle.json", bundle);
    return dir / "changepoint.csv";
}

}  // namespace

TEST_CASE("fit recovers the noiseless two-line fixture") {
    const auto dir = test::scratch_dir("cmd_fit");
    const json report = cmd_fit(two_lines_config(3), dir);
    CHECK(report["converged"] == true);
    CHECK(report["final_loss"].get<double>() < 1e-12);
    CHECK(report["misclassification"].get<double>() == 0.0);
    CHECK(report["artifact_version"] == kArtifactVersion);
    CHECK(report["config"]["pbc"]["k_hat"] == 2);
    CHECK(std::filesystem::exists(dir / "bundle.json"));
    CHECK(read_ndjson(dir / "history.ndjson").size() == report["iterations"].get<std::size_t>());
    CHECK(load_bundle(dir / "bundle.json").models.size() == 2);
}

TEST_CASE("fit with one cluster reports the baseline loss") {
    RunConfig c = two_lines_config(0);
    c.pbc.k_hat = 1;
    const json report = cmd_fit(c, test::scratch_dir("cmd_fit_k1"));
    CHECK(report["final_loss"].get<double>() == report["baseline_loss"].get<double>());
}

TEST_CASE("fit is reproducible") {
    const json a = cmd_fit(two_lines_config(9), test::scratch_dir("cmd_fit_a"));
    const json b = cmd_fit(two_lines_config(9), test::scratch_dir("cmd_fit_b"));
    CHECK(numerical_content(a).dump() == numerical_content(b).dump());
    CHECK_FALSE(numerical_content(a).contains("duration_seconds"));
}

TEST_CASE("fit rejects malformed data") {
    RunConfig c = load_run_config(fixtures / "bad_data_config.json");
    CHECK_THROWS_AS(cmd_fit(c, test::scratch_dir("cmd_bad")), ParseError);
    c.data.path.clear();
    CHECK_THROWS_AS(cmd_fit(c, test::scratch_dir("cmd_bad")), InvalidInput);
}

TEST_CASE("stream with frozen weights and a single batch") {
    const auto dir = test::scratch_dir("cmd_stream");
    cmd_fit(two_lines_config(3), dir / "fit");
    RunConfig c = two_lines_config(3);
    c.stream.bundle = dir / "fit" / "bundle.json";
    c.stream.batch_size = 30;
    c.stream.learning_rate = 0.0;
    const json report = cmd_stream(c, dir / "frozen");
    CHECK(report["n_batches"] == 7);
    for (const auto& r : read_ndjson(dir / "frozen" / "trajectory.ndjson")) {
        CHECK(r["weights"] == json::array({0.5, 0.5}));
    }

    c.stream.batch_size = 500;
    c.stream.learning_rate = 0.1;
    cmd_stream(c, dir / "single");
    CHECK(read_ndjson(dir / "single" / "trajectory.ndjson").size() == 1);
}

TEST_CASE("stream trajectory shows the changepoint") {
    const auto dir = test::scratch_dir("cmd_changepoint");
    RunConfig c;
    c.data.path = write_changepoint(dir, 400, 400);
    c.stream.bundle = dir / "oracle_bundle.json";
    c.stream.batch_size = 40;
    c.stream.learning_rate = 0.1;
    const json report = cmd_stream(c, dir / "out");
    const auto records = read_ndjson(dir / "out" / "trajectory.ndjson");
    REQUIRE(records.size() == 20);
    for (std::size_t t = 10; t < 15; ++t) {
        CHECK(records[t]["weights"][1].get<double>() > records[t - 1]["weights"][1].get<double>());
    }
    CHECK(report["final_weights"][1].get<double>() > report["final_weights"][0].get<double>());
}

TEST_CASE("stream refuses a bundle of the wrong dimension") {
    const auto dir = test::scratch_dir("cmd_mismatch");
    RunConfig c;
    c.data.path = write_changepoint(dir, 10, 10);
    ModelBundle wrong{{TrainedModel::linear(std::vector<double>{1.0, 2.0, 3.0}, 0.0)}, std::nullopt, std::nullopt, {}};
    save_bundle(dir / "wrong.json", wrong);
    c.stream.bundle = dir / "wrong.json";
    try {
        cmd_stream(c, dir / "out");
        FAIL("expected a dimension error");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("dimension") != std::string::npos);
    }
    c.stream.bundle.clear();
    CHECK_THROWS_AS(cmd_stream(c, dir / "out"), InvalidInput);
}

TEST_CASE("series fit and stream share normalisation") {
    const auto dir = test::scratch_dir("cmd_series");
    RunConfig c;
    c.seed = 2;
    c.data.path = fixtures / "regime_series.csv";
    c.data.format = DataFormat::Series;
    c.pbc.k_hat = 2;
    const json fit_report = cmd_fit(c, dir / "fit");
    CHECK(fit_report["normalization"]["min"].get<double>() >= 0.0);
    c.stream.bundle = dir / "fit" / "bundle.json";
    const json test_report = cmd_stream(c, dir / "test");
    c.stream.split = "validation";
    const json val_report = cmd_stream(c, dir / "val");
    const auto sizes = split_sizes(2000 - c.features.max_offset(), c.split);
    CHECK(test_report["n_points"] == sizes.test);
    CHECK(val_report["n_points"] == sizes.validation);
    CHECK(test_report["ensemble_mse"] != val_report["ensemble_mse"]);

    // Changing the normalisation behind the bundle's back is caught.
    c.normalize = false;
    CHECK_THROWS_AS(cmd_stream(c, dir / "bad"), InvalidInput);
}

TEST_CASE("synth-bench smoke run") {
    RunConfig c;
    c.seed = 4;
    c.synth.replicates = 3;
    c.synth.k_hats = {3};
    c.synth.synthetic.n_points = 600;
    const auto dir = test::scratch_dir("cmd_synth");
    const json a = cmd_synth_bench(c, dir);
    REQUIRE(a["results"].size() == 2);
    CHECK(a["results"][0]["method"] == "pbc");
    CHECK(a["results"][0]["per_replicate"].size() == 3);
    CHECK(a["results"][0]["mean_misclassification"].get<double>() <
          a["results"][1]["mean_misclassification"].get<double>());
    CHECK_FALSE(read_ndjson(dir / "per_cluster.ndjson").empty());
    CHECK(numerical_content(cmd_synth_bench(c, test::scratch_dir("cmd_synth2"))).dump() == numerical_content(a).dump());
}

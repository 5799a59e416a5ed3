#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pbc/ensemble.hpp"
#include "support.hpp"

using namespace pbc;

namespace {

TrainedModel line(std::vector<double> c, double b = 0.0) { return TrainedModel::linear(c, b); }

// Batches of `size` points; targets follow `coef` with x ~ N(0, 1).
std::vector<Batch> stream_of(std::size_t batches, std::size_t size, const std::vector<double>& coef,
                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Batch> out;
    for (std::size_t b = 0; b < batches; ++b) {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < size; ++i) {
            double t = 0.0;
            for (double c : coef) {
                x.push_back(g(rng));
                t += c * x.back();
            }
            y.push_back(t);
        }
        out.emplace_back(Dataset(coef.size(), x, y));
    }
    return out;
}

double batch_loss_at(const std::vector<double>& w, const std::vector<TrainedModel>& models, const Batch& batch) {
    double s = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto x = batch.points().features(i);
        double y = 0.0;
        for (std::size_t k = 0; k < models.size(); ++k) y += w[k] * models[k].predict(x);
        s += (y - batch.points().target(i)) * (y - batch.points().target(i));
    }
    return s / static_cast<double>(batch.size());
}

}  // namespace

TEST_CASE("uniform initial weights") {
    CHECK(init_weights(1) == std::vector<double>{1.0});
    CHECK(init_weights(4) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
    for (std::size_t k = 1; k < 20; ++k) {
        const auto w = init_weights(k);
        double s = 0.0;
        for (double v : w) s += v;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK_THROWS_AS(init_weights(0), InvalidInput);
}

TEST_CASE("ensemble prediction is the weighted sum of model outputs") {
    EnsembleState state({line({1.0}, 0.5), line({-2.0}, 1.0)}, 0.1);
    state.weights = {1.0, 0.0};
    const std::vector<double> x{3.0};
    CHECK(ensemble_predict(state, x) == state.models[0].predict(x));

    EnsembleState half({line({0.0}, 1.0), line({0.0}, 3.0)}, 0.1);
    CHECK(ensemble_predict(half, x) == 2.0);
    CHECK_THROWS_AS(ensemble_predict(half, std::vector<double>{1.0, 2.0}), InvalidInput);

    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        std::vector<TrainedModel> models;
        for (int k = 0; k < 4; ++k) models.push_back(test::random_linear(3, rng));
        EnsembleState s(models, 0.0);
        for (double& w : s.weights) w = g(rng);
        const std::vector<double> xi{g(rng), g(rng), g(rng)};
        double oracle = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            const auto& p = models[k].parameters();
            oracle += s.weights[k] * (p[0] * xi[0] + p[1] * xi[1] + p[2] * xi[2] + p[3]);
        }
        CHECK(ensemble_predict(s, xi) == doctest::Approx(oracle).epsilon(1e-13));
    }
}

TEST_CASE("batch gradient hand examples") {
    // Models g(x) = [x, 2x], weights [0.5, 0.5], point (1, 2): prediction 1.5.
    EnsembleState state({line({1.0}), line({2.0})}, 0.1);
    const Batch batch(Dataset(1, {1.0}, {2.0}));
    const std::vector<double> predictions{1.5};
    const auto grad = batch_gradient(state, batch, predictions);
    CHECK(grad[0] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(grad[1] == doctest::Approx(-2.0).epsilon(1e-15));

    const Batch exact(Dataset(1, {1.0, 2.0}, {1.5, 3.0}));
    const auto zero = batch_gradient(state, exact, std::vector<double>{1.5, 3.0});
    CHECK(zero == std::vector<double>{0.0, 0.0});

    CHECK_THROWS_AS(batch_gradient(state, batch, predictions, LossKind::AbsoluteError), UnsupportedLoss);
}

TEST_CASE("batch gradient matches central finite differences") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 1 + trial % 5;
        std::vector<TrainedModel> models;
        for (std::size_t m = 0; m < k; ++m) models.push_back(test::random_linear(2, rng));
        EnsembleState state(models, 0.1);
        for (double& w : state.weights) w = g(rng);
        const Batch batch(test::random_dataset(1 + trial % 30, 2, 500 + trial));
        const auto committed = predict_batch(state, batch.features(), 2);
        const auto grad = batch_gradient(state, batch, committed.predictions);
        const double h = 1e-5;
        for (std::size_t c = 0; c < k; ++c) {
            auto plus = state.weights;
            auto minus = state.weights;
            plus[c] += h;
            minus[c] -= h;
            const double fd = (batch_loss_at(plus, models, batch) - batch_loss_at(minus, models, batch)) / (2 * h);
            const double rel = std::abs(fd - grad[c]) / std::max(std::abs(grad[c]), 1e-300);
            CHECK(rel <= 1e-6);
        }
    }
}

TEST_CASE("weight update") {
    EnsembleState state({line({1.0}), line({2.0})}, 0.1);
    CHECK(update_weights(state, std::vector<double>{0.0, 0.0}) == state.weights);
    const auto next = update_weights(state, std::vector<double>{-1.0, -2.0});
    CHECK(next[0] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(next[1] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK_THROWS_AS(update_weights(state, std::vector<double>{std::nan(""), 0.0}), InvalidState);
    CHECK_THROWS_AS(update_weights(state, std::vector<double>{1.0}), InvalidInput);
}

TEST_CASE("simplex projection is opt-in and lands on the simplex") {
    const auto p = project_onto_simplex(std::vector<double>{0.6, 0.7, -0.3});
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-15));
    for (double v : p) CHECK(v >= 0.0);
    CHECK(p[0] == doctest::Approx(0.45));
    CHECK(p[1] == doctest::Approx(0.55));

    EnsembleState state({line({1.0}), line({2.0})}, 0.1);
    CHECK_FALSE(state.project_to_simplex);
    const auto raw = update_weights(state, std::vector<double>{-1.0, -2.0});
    CHECK(raw[0] + raw[1] == doctest::Approx(1.3));
}

TEST_CASE("stationary stream drives the true generator's weight up") {
    const std::vector<TrainedModel> models{line({1.0, 0.0}), line({0.0, 1.0})};
    const auto batches = stream_of(10, 500, {1.0, 0.0}, 3);
    const auto result = stream_evaluate(models, batches, 0.1);
    REQUIRE(result.trajectory.size() == 10);
    double previous_weight = 0.5;
    for (std::size_t t = 0; t < 10; ++t) {
        CHECK(result.trajectory[t].weights[0] > previous_weight);
        previous_weight = result.trajectory[t].weights[0];
        if (t > 0) CHECK(result.batch_losses[t] < result.batch_losses[t - 1]);
    }
}

TEST_CASE("stream edge cases") {
    const auto batches = stream_of(4, 20, {2.0}, 5);
    const std::vector<TrainedModel> single{line({1.5}, 0.2)};
    const auto one = stream_evaluate(single, batches, 0.05);
    // The first batch is predicted with weight 1: the raw model output.
    for (std::size_t i = 0; i < batches[0].size(); ++i) {
        CHECK(one.predictions[i] == single[0].predict(batches[0].points().features(i)));
    }
    // Later predictions are the model scaled by the single weight.
    const double w = one.trajectory[0].weights[0];
    const auto x = batches[1].points().features(0);
    CHECK(one.predictions[batches[0].size()] == doctest::Approx(w * single[0].predict(x)).epsilon(1e-15));

    const std::vector<TrainedModel> pair{line({1.0}), line({3.0})};
    const auto frozen = stream_evaluate(pair, batches, 0.0);
    for (const auto& entry : frozen.trajectory) CHECK(entry.weights == std::vector<double>{0.5, 0.5});

    const auto single_batch = stream_evaluate(pair, std::span(batches).first(1), 0.1);
    CHECK(single_batch.trajectory.size() == 1);

    const std::vector<Batch> wrong{Batch(test::random_dataset(3, 2, 1))};
    CHECK_THROWS_AS(stream_evaluate(pair, wrong, 0.1), InvalidInput);
}

TEST_CASE("changepoint stream shifts weight to the new mechanism") {
    const std::vector<TrainedModel> models{line({1.0, 0.0}), line({0.0, 1.0})};
    auto batches = stream_of(15, 40, {1.0, 0.0}, 8);
    const auto after = stream_of(15, 40, {0.0, 1.0}, 9);
    batches.insert(batches.end(), after.begin(), after.end());
    const auto result = stream_evaluate(models, batches, 0.1);
    for (std::size_t t = 15; t < 30; ++t) {
        CHECK(result.trajectory[t].weights[1] > result.trajectory[t - 1].weights[1]);
    }
}

TEST_CASE("predictions depend only on the previous weights and features") {
    std::mt19937_64 rng(31);
    std::vector<TrainedModel> models;
    for (int k = 0; k < 3; ++k) models.push_back(test::random_linear(2, rng));
    std::vector<Batch> batches;
    for (int b = 0; b < 6; ++b) batches.emplace_back(test::random_dataset(7 + b, 2, 40 + b));
    const auto result = stream_evaluate(models, batches, 0.05);
    REQUIRE(result.trajectory.size() == batches.size());

    // Recompute each batch's predictions from the logged weights.
    std::size_t offset = 0;
    std::vector<double> weights = init_weights(3);
    for (std::size_t t = 0; t < batches.size(); ++t) {
        for (std::size_t i = 0; i < batches[t].size(); ++i) {
            double y = 0.0;
            for (std::size_t k = 0; k < 3; ++k) y += weights[k] * models[k].predict(batches[t].points().features(i));
            CHECK(result.predictions[offset + i] == doctest::Approx(y).epsilon(1e-14));
        }
        offset += batches[t].size();
        weights = result.trajectory[t].weights;
    }

    // Replay reproduces the final weights bit for bit.
    CHECK(stream_evaluate(models, batches, 0.05).final_weights == result.final_weights);

    // Committing predictions never reads targets.
    EnsembleState state(models, 0.05);
    const Dataset& pts = batches[0].points();
    std::vector<double> altered(pts.targets().begin(), pts.targets().end());
    for (double& v : altered) v += 100.0;
    const Batch shifted(Dataset(2, std::vector<double>(pts.feature_data().begin(), pts.feature_data().end()), altered));
    CHECK(predict_batch(state, batches[0].features(), 2).predictions ==
          predict_batch(state, shifted.features(), 2).predictions);
}

#include <doctest.h>

#include <random>

#include "pbc/kernels.hpp"
#include "support.hpp"

using namespace pbc;

TEST_CASE("pairwise_sum agrees with a long-double accumulation") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t n : {0u, 1u, 15u, 16u, 17u, 1000u, 4097u}) {
        std::vector<double> v(n);
        long double ref = 0.0L;
        for (double& x : v) {
            x = u(rng);
            ref += x;
        }
        CHECK(kernels::pairwise_sum(v) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-14));
    }
}

TEST_CASE("parallel kernels reproduce the serial reference bit for bit") {
    std::mt19937_64 rng(3);
    const Dataset data = test::random_dataset(1237, 4, 42);
    std::vector<TrainedModel> models;
    for (int k = 0; k < 5; ++k) models.push_back(test::random_linear(4, rng));
    RegressorSpec mlp;
    mlp.kind = RegressorKind::Mlp;
    mlp.hidden_sizes = {6, 3};
    mlp.activation = Activation::Tanh;
    mlp.train_seed = 8;
    models.emplace_back(mlp, 4, initial_mlp_parameters(mlp, 4));
    const std::size_t n = data.size();
    const std::size_t k = models.size();

    std::vector<double> a(n * k), b(n * k);
    kernels::serial::cost_matrix(data, models, LossKind::SquaredError, a);
    kernels::parallel::cost_matrix(data, models, LossKind::SquaredError, b);
    CHECK(a == b);

    kernels::serial::model_outputs(data.feature_data(), 4, models, a);
    kernels::parallel::model_outputs(data.feature_data(), 4, models, b);
    CHECK(a == b);

    std::vector<std::size_t> la(n), lb(n);
    kernels::serial::row_argmin(a, k, la);
    kernels::parallel::row_argmin(a, k, lb);
    CHECK(la == lb);

    std::vector<double> ea(n), eb(n);
    kernels::serial::assigned_losses(data, la, models, LossKind::AbsoluteError, ea);
    kernels::parallel::assigned_losses(data, la, models, LossKind::AbsoluteError, eb);
    CHECK(ea == eb);

    std::vector<double> centroids(3 * 4);
    for (double& c : centroids) c = std::normal_distribution<double>(0, 1)(rng);
    kernels::serial::nearest_centroid(data.feature_data(), 4, centroids, la, ea);
    kernels::parallel::nearest_centroid(data.feature_data(), 4, centroids, lb, eb);
    CHECK(la == lb);
    CHECK(ea == eb);
}

TEST_CASE("row_argmin breaks ties toward the lowest column") {
    const std::vector<double> values{2.0, 2.0, 5.0, 1.0, 1.0, 1.0};
    std::vector<std::size_t> labels(2);
    kernels::serial::row_argmin(values, 3, labels);
    CHECK(labels == std::vector<std::size_t>{0, 0});
}

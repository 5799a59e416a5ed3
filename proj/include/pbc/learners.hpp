#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbc/core.hpp"

namespace pbc {

enum class RegressorKind { RidgeLinear, Mlp };
enum class Activation { ReLU, Tanh };

std::string to_string(RegressorKind kind);
std::string to_string(Activation activation);
RegressorKind regressor_kind_from_string(const std::string& name);
Activation activation_from_string(const std::string& name);

struct RegressorSpec {
    RegressorKind kind = RegressorKind::RidgeLinear;

    // RidgeLinear
    double ridge_lambda = 0.0;

    // Mlp
    std::vector<std::size_t> hidden_sizes{32};
    Activation activation = Activation::ReLU;
    std::size_t epochs = 200;
    double step_size = 0.01;
    std::size_t batch_size = 32;
    std::uint64_t train_seed = 0;

    void validate() const;

    friend bool operator==(const RegressorSpec&, const RegressorSpec&) = default;
};

// Number of parameters a model of this spec has for inputs of `dimension`.
std::size_t parameter_count(const RegressorSpec& spec, std::size_t dimension);

// Fitted regressor. Linear layout: [c_1 .. c_d, intercept]. MLP layout: for
// each layer in input-to-output order, the row-major (out x in) weight matrix
// followed by the `out` biases; the last layer has a single linear output.
class TrainedModel {
public:
    TrainedModel(RegressorSpec spec, std::size_t dimension, std::vector<double> parameters);

    static TrainedModel linear(std::span<const double> coefficients, double intercept,
                               double ridge_lambda = 0.0);

    const RegressorSpec& spec() const { return spec_; }
    std::size_t dimension() const { return dimension_; }
    const std::vector<double>& parameters() const { return parameters_; }

    double predict(std::span<const double> features) const;

    friend bool operator==(const TrainedModel&, const TrainedModel&) = default;

private:
    double predict_unchecked(std::span<const double> features) const;
    double mlp_forward(std::span<const double> features) const;

    RegressorSpec spec_;
    std::size_t dimension_;
    std::vector<double> parameters_;

    friend double predict_unchecked(const TrainedModel&, std::span<const double>);
};

double predict(const TrainedModel& model, std::span<const double> features);

// Skips the dimension check; for inner loops that validated once up front.
double predict_unchecked(const TrainedModel& model, std::span<const double> features);

TrainedModel fit(const RegressorSpec& spec, const Dataset& points,
                 const std::optional<TrainedModel>& warm_start = std::nullopt);

// Deterministic MLP parameter initialisation used when fit has no warm start.
std::vector<double> initial_mlp_parameters(const RegressorSpec& spec, std::size_t dimension);

}  // namespace pbc

#include "pbc/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pbc/kernels.hpp"

namespace pbc {

Batch::Batch(Dataset points) : points_(std::move(points)) {
    if (points_.empty()) throw InvalidInput("batch must contain at least one point");
}

EnsembleState::EnsembleState(std::vector<TrainedModel> m, double lr)
    : weights(init_weights(m.size())), models(std::move(m)), learning_rate(lr) {
    validate();
}

void EnsembleState::validate() const {
    if (models.empty()) throw InvalidInput("ensemble needs at least one model");
    if (weights.size() != models.size()) throw InvalidState("weight count does not match models");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw InvalidInput("learning rate must be finite and nonnegative");
    }
    for (double w : weights) {
        if (!std::isfinite(w)) throw InvalidState("ensemble weights must be finite");
    }
    for (const auto& model : models) {
        if (model.dimension() != models.front().dimension()) {
            throw InvalidInput("ensemble models disagree on dimension");
        }
    }
}

std::vector<double> init_weights(std::size_t k_hat) {
    if (k_hat == 0) throw InvalidInput("init_weights needs at least one model");
    return std::vector<double>(k_hat, 1.0 / static_cast<double>(k_hat));
}

double ensemble_predict(const EnsembleState& state, std::span<const double> features) {
    double y = 0.0;
    for (std::size_t k = 0; k < state.models.size(); ++k) {
        y += state.weights[k] * predict(state.models[k], features);
    }
    return y;
}

CommittedPredictions predict_batch(const EnsembleState& state, std::span<const double> features,
                                   std::size_t dimension) {
    const std::size_t k_hat = state.models.size();
    if (dimension != state.models.front().dimension()) {
        throw InvalidInput("batch dimension " + std::to_string(dimension) +
                           " does not match model dimension " +
                           std::to_string(state.models.front().dimension()));
    }
    const std::size_t n = features.size() / dimension;
    CommittedPredictions out{std::vector<double>(n), std::vector<double>(n * k_hat)};
    kernels::parallel::model_outputs(features, dimension, state.models, out.model_outputs);
    for (std::size_t i = 0; i < n; ++i) {
        double y = 0.0;
        for (std::size_t k = 0; k < k_hat; ++k) y += state.weights[k] * out.model_outputs[i * k_hat + k];
        out.predictions[i] = y;
    }
    return out;
}

namespace {

std::vector<double> gradient_from_outputs(std::span<const double> outputs, std::size_t k_hat,
                                          std::span<const double> predictions,
                                          std::span<const double> targets) {
    const std::size_t n = targets.size();
    std::vector<double> grad(k_hat, 0.0);
    std::vector<double> terms(n);
    for (std::size_t k = 0; k < k_hat; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            terms[i] = outputs[i * k_hat + k] * (predictions[i] - targets[i]);
        }
        grad[k] = 2.0 / static_cast<double>(n) * kernels::pairwise_sum(terms);
    }
    return grad;
}

double mean_squared(std::span<const double> predictions, std::span<const double> targets) {
    std::vector<double> sq(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double d = predictions[i] - targets[i];
        sq[i] = d * d;
    }
    return kernels::pairwise_sum(sq) / static_cast<double>(targets.size());
}

}  // namespace

std::vector<double> batch_gradient(const EnsembleState& state, const Batch& batch,
                                   std::span<const double> predictions, LossKind loss) {
    if (loss != LossKind::SquaredError) {
        throw UnsupportedLoss("ensemble gradient is defined for squared error only");
    }
    if (predictions.size() != batch.size()) {
        throw InvalidInput("prediction count does not match batch size");
    }
    const auto committed = predict_batch(state, batch.features(), batch.dimension());
    return gradient_from_outputs(committed.model_outputs, state.models.size(), predictions,
                                 batch.targets());
}

std::vector<double> update_weights(const EnsembleState& state, std::span<const double> gradient) {
    if (gradient.size() != state.weights.size()) {
        throw InvalidInput("gradient length does not match weight count");
    }
    std::vector<double> next(state.weights.size());
    for (std::size_t k = 0; k < next.size(); ++k) {
        if (!std::isfinite(gradient[k])) throw InvalidState("non-finite ensemble gradient");
        next[k] = state.weights[k] - state.learning_rate * gradient[k];
    }
    return state.project_to_simplex ? project_onto_simplex(next) : next;
}

std::vector<double> project_onto_simplex(std::span<const double> weights) {
    std::vector<double> sorted(weights.begin(), weights.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double threshold = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        cumulative += sorted[j];
        const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - t > 0.0) threshold = t;
    }
    std::vector<double> out(weights.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::max(weights[k] - threshold, 0.0);
    return out;
}

EnsembleState reveal_targets(const EnsembleState& state, const Batch& batch,
                             const CommittedPredictions& committed) {
    if (committed.predictions.size() != batch.size()) {
        throw InvalidInput("committed predictions do not match batch size");
    }
    const auto grad = gradient_from_outputs(committed.model_outputs, state.models.size(),
                                            committed.predictions, batch.targets());
    EnsembleState next = state;
    next.weights = update_weights(state, grad);
    next.trajectory.push_back(
        {state.trajectory.size(), next.weights, mean_squared(committed.predictions, batch.targets())});
    return next;
}

StreamResult stream_evaluate(std::vector<TrainedModel> models, std::span<const Batch> batches,
                             double learning_rate, bool project_to_simplex) {
    EnsembleState state(std::move(models), learning_rate);
    state.project_to_simplex = project_to_simplex;
    StreamResult result;
    for (const Batch& batch : batches) {
        // Phase one sees features only.
        const auto committed = predict_batch(state, batch.features(), batch.dimension());
        result.predictions.insert(result.predictions.end(), committed.predictions.begin(),
                                  committed.predictions.end());
        state = reveal_targets(state, batch, committed);
        result.batch_losses.push_back(state.trajectory.back().batch_loss);
    }
    result.trajectory = std::move(state.trajectory);
    result.final_weights = std::move(state.weights);
    return result;
}

}  // namespace pbc

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pbc/core.hpp"
#include "pbc/learners.hpp"

namespace pbc {

// A contiguous chunk of the stream. Targets are only read after the ensemble
// has committed its predictions for the batch.
class Batch {
public:
    explicit Batch(Dataset points);

    std::size_t size() const { return points_.size(); }
    std::size_t dimension() const { return points_.dimension(); }
    std::span<const double> features() const { return points_.feature_data(); }
    std::span<const double> targets() const { return points_.targets(); }
    const Dataset& points() const { return points_; }

private:
    Dataset points_;
};

struct TrajectoryEntry {
    std::size_t batch_index = 0;
    std::vector<double> weights;  // weights after the update for this batch
    double batch_loss = 0.0;      // mean squared error of the committed predictions
};

struct EnsembleState {
    std::vector<double> weights;
    std::vector<TrainedModel> models;
    double learning_rate = 0.0;
    std::vector<TrajectoryEntry> trajectory;
    // Euclidean projection onto the probability simplex after each update.
    // Off unless explicitly requested.
    bool project_to_simplex = false;

    EnsembleState(std::vector<TrainedModel> models, double learning_rate);
    void validate() const;
};

// Predictions committed before targets are revealed, plus the per-model
// outputs g(x_i) they were built from (row-major N x K).
struct CommittedPredictions {
    std::vector<double> predictions;
    std::vector<double> model_outputs;
};

std::vector<double> init_weights(std::size_t k_hat);

double ensemble_predict(const EnsembleState& state, std::span<const double> features);

CommittedPredictions predict_batch(const EnsembleState& state, std::span<const double> features,
                                   std::size_t dimension);

std::vector<double> batch_gradient(const EnsembleState& state, const Batch& batch,
                                   std::span<const double> predictions,
                                   LossKind loss = LossKind::SquaredError);

std::vector<double> update_weights(const EnsembleState& state, std::span<const double> gradient);

std::vector<double> project_onto_simplex(std::span<const double> weights);

// Second phase of a batch: scores the committed predictions against the
// revealed targets, takes one gradient step and appends a trajectory entry.
EnsembleState reveal_targets(const EnsembleState& state, const Batch& batch,
                             const CommittedPredictions& committed);

struct StreamResult {
    std::vector<double> batch_losses;
    std::vector<TrajectoryEntry> trajectory;
    std::vector<double> predictions;  // every committed prediction, in stream order
    std::vector<double> final_weights;
};

StreamResult stream_evaluate(std::vector<TrainedModel> models, std::span<const Batch> batches,
                             double learning_rate, bool project_to_simplex = false);

}  // namespace pbc

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pbc/core.hpp"
#include "pbc/learners.hpp"

namespace pbc {

struct PbcConfig {
    std::size_t k_hat = 3;
    LossKind loss = LossKind::SquaredError;
    RegressorSpec regressor{};
    double zeta = 0.01;
    std::size_t max_iterations = 50;
    double init_fraction = 0.3;
    bool soft_assignment = false;
    std::uint64_t seed = 0;

    void validate() const;
    void validate_for(std::size_t n_points) const;
};

// N x K row-major matrix; entry (i, k) is the loss of point i under model k.
class CostMatrix {
public:
    CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t i, std::size_t k) const { return values_[i * cols_ + k]; }
    std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
    std::span<const double> values() const { return values_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

// Row-major N x K matrix of soft-assignment probabilities.
struct ProbabilityMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double operator()(std::size_t i, std::size_t k) const { return values[i * cols + k]; }
};

struct ClusterSeeds {
    // members[k] holds the dataset indices that seeded cluster k.
    std::vector<std::vector<std::size_t>> members;
    std::vector<TrainedModel> models;
};

// Snapshot handed to an observer after every iteration.
struct IterationTrace {
    std::size_t iteration = 0;
    const CostMatrix* costs = nullptr;          // under the previous models
    const Assignment* expectation = nullptr;    // argmin labels of `costs`
    const Assignment* assignment = nullptr;     // labels used for the refit
    std::span<const TrainedModel> models;       // refitted models
    double loss = 0.0;
    double reassigned_fraction = 0.0;
};

using IterationObserver = std::function<void(const IterationTrace&)>;

struct ClusteringResult {
    Assignment assignment;
    std::vector<TrainedModel> models;
    std::vector<double> loss_history;
    std::vector<double> reassignment_history;
    std::size_t iterations = 0;
    bool converged = false;
};

CostMatrix cost_matrix(const Dataset& dataset, std::span<const TrainedModel> models, LossKind loss);

Assignment expectation_step(const CostMatrix& costs);

ProbabilityMatrix soft_assignment_probabilities(const CostMatrix& costs);

// Draws one label per row from the soft-assignment probabilities.
Assignment sample_soft_assignment(const ProbabilityMatrix& probabilities, std::uint64_t seed);

std::vector<TrainedModel> maximization_step(const Dataset& dataset, const Assignment& assignment,
                                            const PbcConfig& config,
                                            std::span<const TrainedModel> previous_models);

double reassignment_fraction(const Assignment& previous, const Assignment& current);

// Moves the highest-cost points into every empty cluster. Returns the labels
// unchanged when no cluster is empty.
Assignment reseed_empty_clusters(const Assignment& assignment, const CostMatrix& costs);

// Indices drawn without replacement with probability proportional to
// `weights` (successive-draw semantics, via exponential keys). Falls back to
// uniform draws when every weight is zero.
std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> weights,
                                                             std::size_t count, std::uint64_t seed);

// Initialisation distance of each point: its lowest loss under `models`.
std::vector<double> seed_distances(const Dataset& pool, std::span<const TrainedModel> models,
                                   LossKind loss);

std::size_t seed_cluster_size(std::size_t n_points, const PbcConfig& config);

ClusterSeeds initialize_clusters(const Dataset& dataset, const PbcConfig& config,
                                 std::uint64_t rng_seed);

ClusteringResult run_pbc(const Dataset& dataset, const PbcConfig& config,
                         const IterationObserver& observer = {});

}  // namespace pbc

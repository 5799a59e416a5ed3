#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pbc/core.hpp"

namespace pbc {

struct SyntheticConfig {
    std::size_t n_points = 5000;
    std::size_t n_relations = 3;
    std::size_t dimension = 3;
    double coefficient_min = -3.0;
    double coefficient_max = 3.0;
    // Coefficient vectors of two relations closer than this are redrawn.
    double min_separation = 0.5;
    double noise_std = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct LabeledSyntheticDataset {
    Dataset dataset;
    std::vector<std::size_t> ground_truth;
    std::vector<std::vector<double>> coefficients;  // one vector per relation
};

// Points are grouped by relation: relation r owns a contiguous block.
LabeledSyntheticDataset generate_synthetic(const SyntheticConfig& config);

// Relabels each predicted cluster with its majority truth label (lowest label
// wins ties) and returns the fraction of points that disagree with the truth.
double misclassification_rate(const Assignment& predicted, const std::vector<std::size_t>& truth);

// For every predicted cluster, the share of its members outside its majority
// truth label; 0 for empty clusters.
std::vector<double> per_cluster_misclassification(const Assignment& predicted,
                                                  const std::vector<std::size_t>& truth);

struct KMeansResult {
    Assignment assignment;
    std::vector<double> centroids;       // row-major k x d
    std::vector<double> inertia_history; // after every assignment step
    std::size_t iterations = 0;
};

// Lloyd's algorithm on the feature vectors only, k-means++ seeding.
KMeansResult kmeans(const Dataset& dataset, std::size_t k_hat, std::uint64_t seed,
                    std::size_t max_iterations = 100);

Assignment kmeans_baseline(const Dataset& dataset, std::size_t k_hat, std::uint64_t seed);

}  // namespace pbc

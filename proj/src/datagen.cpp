#include "pbc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "pbc/kernels.hpp"
#include "pbc/random.hpp"

namespace pbc {

void SyntheticConfig::validate() const {
    if (n_points == 0 || n_relations == 0 || dimension == 0) {
        throw InvalidInput("synthetic config needs positive n_points, n_relations and dimension");
    }
    if (!(coefficient_max > coefficient_min)) throw InvalidInput("empty coefficient interval");
    if (!(noise_std >= 0.0)) throw InvalidInput("noise_std must be nonnegative");
    if (!(min_separation >= 0.0)) throw InvalidInput("min_separation must be nonnegative");
}

LabeledSyntheticDataset generate_synthetic(const SyntheticConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> coefficient(config.coefficient_min, config.coefficient_max);
    std::normal_distribution<double> feature(0.0, 1.0);

    LabeledSyntheticDataset out;
    constexpr int max_attempts = 10000;
    while (out.coefficients.size() < config.n_relations) {
        std::vector<double> beta(config.dimension);
        bool accepted = false;
        for (int attempt = 0; attempt < max_attempts && !accepted; ++attempt) {
            for (double& b : beta) b = coefficient(rng);
            accepted = std::all_of(out.coefficients.begin(), out.coefficients.end(),
                                   [&](const std::vector<double>& other) {
                                       double s = 0.0;
                                       for (std::size_t j = 0; j < beta.size(); ++j) {
                                           s += (beta[j] - other[j]) * (beta[j] - other[j]);
                                       }
                                       return std::sqrt(s) >= config.min_separation;
                                   });
        }
        if (!accepted) throw InvalidInput("could not draw separated coefficient vectors");
        out.coefficients.push_back(std::move(beta));
    }

    const std::size_t n = config.n_points;
    const std::size_t r_count = config.n_relations;
    std::vector<double> features;
    std::vector<double> targets;
    features.reserve(n * config.dimension);
    targets.reserve(n);
    out.ground_truth.reserve(n);
    for (std::size_t r = 0; r < r_count; ++r) {
        const std::size_t count = n / r_count + (r < n % r_count ? 1 : 0);
        for (std::size_t i = 0; i < count; ++i) {
            double y = 0.0;
            for (std::size_t j = 0; j < config.dimension; ++j) {
                const double x = feature(rng);
                features.push_back(x);
                y += out.coefficients[r][j] * x;
            }
            if (config.noise_std > 0.0) y += config.noise_std * feature(rng);
            targets.push_back(y);
            out.ground_truth.push_back(r);
        }
    }
    out.dataset = Dataset(config.dimension, std::move(features), std::move(targets));
    return out;
}

namespace {

// majority[k] = most frequent truth label in predicted cluster k.
std::vector<std::size_t> majority_labels(const Assignment& predicted,
                                         const std::vector<std::size_t>& truth,
                                         std::vector<std::size_t>& cluster_sizes) {
    if (predicted.size() != truth.size()) {
        throw InvalidInput("misclassification_rate: predicted and truth lengths differ");
    }
    const std::size_t truth_labels =
        truth.empty() ? 1 : *std::max_element(truth.begin(), truth.end()) + 1;
    std::vector<std::size_t> counts(predicted.clusters() * truth_labels, 0);
    cluster_sizes.assign(predicted.clusters(), 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++counts[predicted[i] * truth_labels + truth[i]];
        ++cluster_sizes[predicted[i]];
    }
    std::vector<std::size_t> majority(predicted.clusters(), 0);
    for (std::size_t k = 0; k < predicted.clusters(); ++k) {
        const auto begin = counts.begin() + static_cast<std::ptrdiff_t>(k * truth_labels);
        majority[k] = static_cast<std::size_t>(
            std::max_element(begin, begin + static_cast<std::ptrdiff_t>(truth_labels)) - begin);
    }
    return majority;
}

}  // namespace

double misclassification_rate(const Assignment& predicted, const std::vector<std::size_t>& truth) {
    std::vector<std::size_t> sizes;
    const auto majority = majority_labels(predicted, truth, sizes);
    if (truth.empty()) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += majority[predicted[i]] != truth[i];
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

std::vector<double> per_cluster_misclassification(const Assignment& predicted,
                                                  const std::vector<std::size_t>& truth) {
    std::vector<std::size_t> sizes;
    const auto majority = majority_labels(predicted, truth, sizes);
    std::vector<std::size_t> wrong(predicted.clusters(), 0);
    for (std::size_t i = 0; i < truth.size(); ++i) wrong[predicted[i]] += majority[predicted[i]] != truth[i];
    std::vector<double> out(predicted.clusters(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (sizes[k] > 0) out[k] = static_cast<double>(wrong[k]) / static_cast<double>(sizes[k]);
    }
    return out;
}

KMeansResult kmeans(const Dataset& dataset, std::size_t k_hat, std::uint64_t seed,
                    std::size_t max_iterations) {
    const std::size_t n = dataset.size();
    const std::size_t d = dataset.dimension();
    if (k_hat == 0) throw InvalidInput("kmeans needs k_hat >= 1");
    if (n < k_hat) throw InvalidInput("kmeans needs at least k_hat points");
    const auto x = dataset.feature_data();

    std::mt19937_64 rng(seed);
    std::vector<double> centroids;
    centroids.reserve(k_hat * d);
    const std::size_t first = static_cast<std::size_t>(unit_open(rng) * static_cast<double>(n));
    centroids.insert(centroids.end(), x.begin() + static_cast<std::ptrdiff_t>(first * d),
                     x.begin() + static_cast<std::ptrdiff_t>((first + 1) * d));

    std::vector<std::size_t> labels(n);
    std::vector<double> distances(n);
    for (std::size_t c = 1; c < k_hat; ++c) {
        kernels::parallel::nearest_centroid(x, d, centroids, labels, distances);
        const double total = kernels::pairwise_sum(distances);
        std::size_t pick = n - 1;
        if (total > 0.0) {
            const double target = unit_open(rng) * total;
            double cumulative = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cumulative += distances[i];
                if (target < cumulative) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<std::size_t>(unit_open(rng) * static_cast<double>(n));
        }
        centroids.insert(centroids.end(), x.begin() + static_cast<std::ptrdiff_t>(pick * d),
                         x.begin() + static_cast<std::ptrdiff_t>((pick + 1) * d));
    }

    KMeansResult result;
    std::vector<std::size_t> previous;
    for (std::size_t it = 0; it < max_iterations; ++it) {
        kernels::parallel::nearest_centroid(x, d, centroids, labels, distances);
        result.inertia_history.push_back(kernels::pairwise_sum(distances));
        result.iterations = it + 1;
        if (labels == previous) break;

        std::vector<double> sums(k_hat * d, 0.0);
        std::vector<std::size_t> counts(k_hat, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[labels[i]];
            for (std::size_t j = 0; j < d; ++j) sums[labels[i] * d + j] += x[i * d + j];
        }
        for (std::size_t c = 0; c < k_hat; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            for (std::size_t j = 0; j < d; ++j) {
                centroids[c * d + j] = sums[c * d + j] / static_cast<double>(counts[c]);
            }
        }
        previous = labels;
    }
    result.assignment = Assignment(std::move(labels), k_hat);
    result.centroids = std::move(centroids);
    return result;
}

Assignment kmeans_baseline(const Dataset& dataset, std::size_t k_hat, std::uint64_t seed) {
    return kmeans(dataset, k_hat, seed).assignment;
}

}  // namespace pbc

#include "pbc/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "pbc/kernels.hpp"
#include "pbc/random.hpp"

namespace pbc {

void PbcConfig::validate() const {
    if (k_hat == 0) throw InvalidInput("k_hat must be at least 1");
    if (!(zeta > 0.0 && zeta <= 1.0)) throw InvalidInput("zeta must lie in (0, 1]");
    if (max_iterations == 0) throw InvalidInput("max_iterations must be at least 1");
    if (!(init_fraction > 0.0 && init_fraction <= 1.0)) {
        throw InvalidInput("init_fraction must lie in (0, 1]");
    }
    regressor.validate();
}

void PbcConfig::validate_for(std::size_t n_points) const {
    validate();
    if (n_points < k_hat) {
        throw InvalidInput("need at least k_hat=" + std::to_string(k_hat) + " points, got " +
                           std::to_string(n_points));
    }
    if (init_fraction * static_cast<double>(n_points) < static_cast<double>(k_hat)) {
        throw InvalidInput("init_fraction * N must be at least k_hat");
    }
}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (cols_ == 0) throw InvalidInput("cost matrix needs at least one column");
    if (values_.size() != rows_ * cols_) throw InvalidInput("cost matrix storage size mismatch");
    for (double v : values_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InvalidState("cost matrix entries must be finite and nonnegative");
        }
    }
}

CostMatrix cost_matrix(const Dataset& dataset, std::span<const TrainedModel> models, LossKind loss) {
    if (models.empty()) throw InvalidInput("cost_matrix needs at least one model");
    for (const auto& m : models) {
        if (m.dimension() != dataset.dimension()) {
            throw InvalidInput("cost_matrix: model dimension does not match dataset");
        }
    }
    std::vector<double> values(dataset.size() * models.size());
    kernels::parallel::cost_matrix(dataset, models, loss, values);
    return CostMatrix(dataset.size(), models.size(), std::move(values));
}

Assignment expectation_step(const CostMatrix& costs) {
    std::vector<std::size_t> labels(costs.rows());
    kernels::parallel::row_argmin(costs.values(), costs.cols(), labels);
    return Assignment(std::move(labels), costs.cols());
}

ProbabilityMatrix soft_assignment_probabilities(const CostMatrix& costs) {
    ProbabilityMatrix out{costs.rows(), costs.cols(), std::vector<double>(costs.values().size())};
    for (std::size_t i = 0; i < costs.rows(); ++i) {
        const auto row = costs.row(i);
        // Largest of -c is the smallest cost.
        const double shift = *std::min_element(row.begin(), row.end());
        double total = 0.0;
        for (std::size_t k = 0; k < row.size(); ++k) {
            const double e = std::exp(-(row[k] - shift));
            out.values[i * out.cols + k] = e;
            total += e;
        }
        for (std::size_t k = 0; k < row.size(); ++k) out.values[i * out.cols + k] /= total;
    }
    return out;
}

Assignment sample_soft_assignment(const ProbabilityMatrix& probabilities, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> labels(probabilities.rows);
    for (std::size_t i = 0; i < probabilities.rows; ++i) {
        const double u = unit_open(rng);
        double cumulative = 0.0;
        std::size_t label = probabilities.cols - 1;
        for (std::size_t k = 0; k < probabilities.cols; ++k) {
            cumulative += probabilities(i, k);
            if (u < cumulative) {
                label = k;
                break;
            }
        }
        labels[i] = label;
    }
    return Assignment(std::move(labels), probabilities.cols);
}

std::vector<TrainedModel> maximization_step(const Dataset& dataset, const Assignment& assignment,
                                            const PbcConfig& config,
                                            std::span<const TrainedModel> previous_models) {
    if (assignment.size() != dataset.size()) {
        throw InvalidInput("assignment length does not match dataset size");
    }
    if (previous_models.size() != assignment.clusters()) {
        throw InvalidInput("previous model count does not match cluster count");
    }
    const std::size_t k_hat = assignment.clusters();
    std::vector<std::vector<std::size_t>> members(k_hat);
    for (std::size_t i = 0; i < assignment.size(); ++i) members[assignment[i]].push_back(i);

    std::vector<std::optional<TrainedModel>> fitted(k_hat);
    std::vector<std::exception_ptr> errors(k_hat);
    const auto clusters = static_cast<std::int64_t>(k_hat);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t c = 0; c < clusters; ++c) {
        const auto k = static_cast<std::size_t>(c);
        if (members[k].empty()) continue;
        try {
            fitted[k] = fit(config.regressor, dataset.subset(members[k]), previous_models[k]);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::vector<TrainedModel> models;
    models.reserve(k_hat);
    for (std::size_t k = 0; k < k_hat; ++k) {
        // Still empty after reseeding only when N < K; keep the old model.
        models.push_back(fitted[k] ? std::move(*fitted[k]) : previous_models[k]);
    }
    return models;
}

double reassignment_fraction(const Assignment& previous, const Assignment& current) {
    if (previous.size() != current.size()) {
        throw InvalidInput("reassignment_fraction: assignments differ in length");
    }
    if (current.size() == 0) return 0.0;
    std::size_t changed = 0;
    for (std::size_t i = 0; i < current.size(); ++i) changed += previous[i] != current[i];
    return static_cast<double>(changed) / static_cast<double>(current.size());
}

Assignment reseed_empty_clusters(const Assignment& assignment, const CostMatrix& costs) {
    auto sizes = assignment.cluster_sizes();
    if (std::find(sizes.begin(), sizes.end(), 0u) == sizes.end()) return assignment;

    const std::size_t n = assignment.size();
    const std::size_t k_hat = assignment.clusters();
    const std::size_t quota = (n + 10 * k_hat - 1) / (10 * k_hat);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return costs(a, assignment[a]) > costs(b, assignment[b]);
    });

    std::vector<std::size_t> labels = assignment.labels();
    std::vector<bool> moved(n, false);
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < k_hat; ++k) {
        if (sizes[k] != 0) continue;
        std::size_t taken = 0;
        for (; cursor < n && taken < quota; ++cursor) {
            const std::size_t i = order[cursor];
            if (moved[i] || sizes[labels[i]] <= 1) continue;
            --sizes[labels[i]];
            labels[i] = k;
            ++sizes[k];
            moved[i] = true;
            ++taken;
        }
    }
    return Assignment(std::move(labels), k_hat);
}

std::vector<std::size_t> weighted_sample_without_replacement(std::span<const double> weights,
                                                             std::size_t count, std::uint64_t seed) {
    if (count > weights.size()) throw InvalidInput("cannot sample more items than available");
    std::mt19937_64 rng(seed);
    struct Keyed {
        int tier;  // 0: positive weight, 1: zero weight (uniform fill)
        double key;
        std::size_t index;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
            throw InvalidInput("sampling weights must be finite and nonnegative");
        }
        const double log_u = std::log(unit_open(rng));
        if (weights[i] > 0.0) {
            keyed.push_back({0, log_u / weights[i], i});
        } else {
            keyed.push_back({1, log_u, i});
        }
    }
    std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(count), keyed.end(),
                      [](const Keyed& a, const Keyed& b) {
                          if (a.tier != b.tier) return a.tier < b.tier;
                          if (a.key != b.key) return a.key > b.key;
                          return a.index < b.index;
                      });
    std::vector<std::size_t> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = keyed[i].index;
    return out;
}

std::vector<double> seed_distances(const Dataset& pool, std::span<const TrainedModel> models,
                                   LossKind loss) {
    const CostMatrix costs = cost_matrix(pool, models, loss);
    std::vector<double> distances(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto row = costs.row(i);
        distances[i] = *std::min_element(row.begin(), row.end());
    }
    return distances;
}

std::size_t seed_cluster_size(std::size_t n_points, const PbcConfig& config) {
    const double size = std::ceil(config.init_fraction * static_cast<double>(n_points) /
                                  static_cast<double>(config.k_hat));
    return std::max<std::size_t>(1, static_cast<std::size_t>(size));
}

ClusterSeeds initialize_clusters(const Dataset& dataset, const PbcConfig& config,
                                 std::uint64_t rng_seed) {
    config.validate_for(dataset.size());
    const std::size_t n = dataset.size();
    const std::size_t seed_size = seed_cluster_size(n, config);

    ClusterSeeds seeds;
    std::vector<bool> taken(n, false);
    for (std::size_t k = 0; k < config.k_hat; ++k) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < n; ++i) {
            if (!taken[i]) candidates.push_back(i);
        }
        // Leave at least one point for every cluster still to be seeded.
        const std::size_t reserve = config.k_hat - k - 1;
        const std::size_t count = std::min(seed_size, candidates.size() - reserve);

        const std::vector<double> distances =
            k == 0 ? std::vector<double>(candidates.size(), 1.0)
                   : seed_distances(dataset.subset(candidates), seeds.models, config.loss);
        const auto picked =
            weighted_sample_without_replacement(distances, count, stream_seed(rng_seed, k));
        std::vector<std::size_t> members;
        members.reserve(picked.size());
        for (std::size_t p : picked) members.push_back(candidates[p]);
        std::sort(members.begin(), members.end());
        for (std::size_t i : members) taken[i] = true;

        seeds.models.push_back(fit(config.regressor, dataset.subset(members)));
        seeds.members.push_back(std::move(members));
    }
    return seeds;
}

ClusteringResult run_pbc(const Dataset& dataset, const PbcConfig& config,
                         const IterationObserver& observer) {
    config.validate_for(dataset.size());
    const std::size_t n = dataset.size();
    const std::size_t k_hat = config.k_hat;

    ClusterSeeds seeds = initialize_clusters(dataset, config, config.seed);
    std::vector<TrainedModel> models = std::move(seeds.models);

    // Points outside every seed cluster start unlabelled and count as reassigned.
    constexpr std::size_t unlabelled = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> previous(n, unlabelled);
    for (std::size_t k = 0; k < k_hat; ++k) {
        for (std::size_t i : seeds.members[k]) previous[i] = k;
    }

    ClusteringResult result;
    for (std::size_t iteration = 1; iteration <= config.max_iterations; ++iteration) {
        const CostMatrix costs = cost_matrix(dataset, models, config.loss);
        const Assignment hard = expectation_step(costs);
        Assignment labels = hard;
        if (config.soft_assignment) {
            labels = sample_soft_assignment(soft_assignment_probabilities(costs),
                                            stream_seed(config.seed, 1000 + iteration));
        }
        labels = reseed_empty_clusters(labels, costs);

        std::vector<TrainedModel> refit = maximization_step(dataset, labels, config, models);
        const double loss =
            dataset_loss(dataset, config.soft_assignment ? hard : labels, refit, config.loss);

        std::size_t changed = 0;
        for (std::size_t i = 0; i < n; ++i) changed += previous[i] != labels[i];
        const double fraction = static_cast<double>(changed) / static_cast<double>(n);

        result.loss_history.push_back(loss);
        result.reassignment_history.push_back(fraction);
        result.iterations = iteration;
        if (observer) {
            observer(IterationTrace{iteration, &costs, &hard, &labels, refit, loss, fraction});
        }

        previous = labels.labels();
        models = std::move(refit);
        result.assignment = std::move(labels);
        if (fraction < config.zeta) {
            result.converged = true;
            break;
        }
    }
    result.models = std::move(models);
    return result;
}

}  // namespace pbc

#pragma once

// Per-element bodies shared by the serial and OpenMP kernels.

#include <cstddef>
#include <limits>
#include <span>

#include "pbc/core.hpp"
#include "pbc/learners.hpp"

namespace pbc::kernels::detail {

// Non-throwing loss for use inside parallel regions; callers check finiteness.
inline double loss_value(double prediction, double target, LossKind loss) {
    const double diff = prediction - target;
    return loss == LossKind::SquaredError ? diff * diff : (diff < 0.0 ? -diff : diff);
}

inline void cost_row(const Dataset& data, std::size_t i, std::span<const TrainedModel> models,
                     LossKind loss, std::span<double> row) {
    const auto x = data.features(i);
    const double y = data.target(i);
    for (std::size_t k = 0; k < models.size(); ++k) {
        row[k] = loss_value(predict_unchecked(models[k], x), y, loss);
    }
}

inline void output_row(std::span<const double> x, std::span<const TrainedModel> models,
                       std::span<double> row) {
    for (std::size_t k = 0; k < models.size(); ++k) row[k] = predict_unchecked(models[k], x);
}

inline double assigned_loss(const Dataset& data, std::size_t i, const TrainedModel& model,
                            LossKind loss) {
    return loss_value(predict_unchecked(model, data.features(i)), data.target(i), loss);
}

inline std::size_t argmin(std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < row.size(); ++k) {
        if (row[k] < row[best]) best = k;
    }
    return best;
}

inline void nearest(std::span<const double> x, std::span<const double> centroids,
                    std::size_t& label, double& distance) {
    const std::size_t d = x.size();
    const std::size_t k = centroids.size() / d;
    label = 0;
    distance = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = x[j] - centroids[c * d + j];
            s += diff * diff;
        }
        if (s < distance) {
            distance = s;
            label = c;
        }
    }
}

}  // namespace pbc::kernels::detail

#include <cstddef>
#include <span>

#include "kernel_detail.hpp"
#include "pbc/kernels.hpp"

namespace pbc::kernels {

double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t block = 16;
    if (values.size() <= block) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace serial {

void cost_matrix(const Dataset& data, std::span<const TrainedModel> models, LossKind loss,
                 std::span<double> out) {
    const std::size_t k = models.size();
    for (std::size_t i = 0; i < data.size(); ++i) {
        detail::cost_row(data, i, models, loss, out.subspan(i * k, k));
    }
}

void model_outputs(std::span<const double> features, std::size_t dimension,
                   std::span<const TrainedModel> models, std::span<double> out) {
    const std::size_t n = features.size() / dimension;
    const std::size_t k = models.size();
    for (std::size_t i = 0; i < n; ++i) {
        detail::output_row(features.subspan(i * dimension, dimension), models, out.subspan(i * k, k));
    }
}

void assigned_losses(const Dataset& data, std::span<const std::size_t> labels,
                     std::span<const TrainedModel> models, LossKind loss, std::span<double> out) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        out[i] = detail::assigned_loss(data, i, models[labels[i]], loss);
    }
}

void row_argmin(std::span<const double> values, std::size_t cols, std::span<std::size_t> labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels[i] = detail::argmin(values.subspan(i * cols, cols));
    }
}

void nearest_centroid(std::span<const double> features, std::size_t dimension,
                      std::span<const double> centroids, std::span<std::size_t> labels,
                      std::span<double> distances) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        detail::nearest(features.subspan(i * dimension, dimension), centroids, labels[i],
                        distances[i]);
    }
}

}  // namespace serial
}  // namespace pbc::kernels

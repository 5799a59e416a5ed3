#include <cstddef>
#include <cstdint>
#include <span>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kernel_detail.hpp"
#include "pbc/kernels.hpp"

namespace pbc::kernels {

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace parallel {

void cost_matrix(const Dataset& data, std::span<const TrainedModel> models, LossKind loss,
                 std::span<double> out) {
    const std::size_t k = models.size();
    const auto n = static_cast<std::int64_t>(data.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        detail::cost_row(data, row, models, loss, out.subspan(row * k, k));
    }
}

void model_outputs(std::span<const double> features, std::size_t dimension,
                   std::span<const TrainedModel> models, std::span<double> out) {
    const std::size_t k = models.size();
    const auto n = static_cast<std::int64_t>(features.size() / dimension);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        detail::output_row(features.subspan(row * dimension, dimension), models,
                           out.subspan(row * k, k));
    }
}

void assigned_losses(const Dataset& data, std::span<const std::size_t> labels,
                     std::span<const TrainedModel> models, LossKind loss, std::span<double> out) {
    const auto n = static_cast<std::int64_t>(data.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        out[row] = detail::assigned_loss(data, row, models[labels[row]], loss);
    }
}

void row_argmin(std::span<const double> values, std::size_t cols, std::span<std::size_t> labels) {
    const auto n = static_cast<std::int64_t>(labels.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        labels[row] = detail::argmin(values.subspan(row * cols, cols));
    }
}

void nearest_centroid(std::span<const double> features, std::size_t dimension,
                      std::span<const double> centroids, std::span<std::size_t> labels,
                      std::span<double> distances) {
    const auto n = static_cast<std::int64_t>(labels.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto row = static_cast<std::size_t>(i);
        detail::nearest(features.subspan(row * dimension, dimension), centroids, labels[row],
                        distances[row]);
    }
}

}  // namespace parallel
}  // namespace pbc::kernels

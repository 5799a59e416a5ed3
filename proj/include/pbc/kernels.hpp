#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// `kernels::serial` and an OpenMP version in `kernels::parallel`; both write
// the same per-element values, so their outputs are bit-identical. Reductions
// go through pairwise_sum over index order so parallelism never changes a sum.

#include <cstddef>
#include <span>
#include <vector>

#include "pbc/core.hpp"
#include "pbc/learners.hpp"

namespace pbc::kernels {

// Cascaded pairwise summation in index order.
double pairwise_sum(std::span<const double> values);

namespace serial {

// out(i, k) = point_loss(predict(models[k], x_i), y_i); row-major N x K.
void cost_matrix(const Dataset& data, std::span<const TrainedModel> models, LossKind loss,
                 std::span<double> out);

// out(i, k) = predict(models[k], x_i); row-major N x K.
void model_outputs(std::span<const double> features, std::size_t dimension,
                   std::span<const TrainedModel> models, std::span<double> out);

// out[i] = loss of point i under models[labels[i]].
void assigned_losses(const Dataset& data, std::span<const std::size_t> labels,
                     std::span<const TrainedModel> models, LossKind loss, std::span<double> out);

// Per-row argmin; ties go to the lowest column.
void row_argmin(std::span<const double> values, std::size_t cols, std::span<std::size_t> labels);

// Nearest centroid by squared Euclidean distance; ties to the lowest index.
void nearest_centroid(std::span<const double> features, std::size_t dimension,
                      std::span<const double> centroids, std::span<std::size_t> labels,
                      std::span<double> distances);

}  // namespace serial

namespace parallel {

void cost_matrix(const Dataset& data, std::span<const TrainedModel> models, LossKind loss,
                 std::span<double> out);
void model_outputs(std::span<const double> features, std::size_t dimension,
                   std::span<const TrainedModel> models, std::span<double> out);
void assigned_losses(const Dataset& data, std::span<const std::size_t> labels,
                     std::span<const TrainedModel> models, LossKind loss, std::span<double> out);
void row_argmin(std::span<const double> values, std::size_t cols, std::span<std::size_t> labels);
void nearest_centroid(std::span<const double> features, std::size_t dimension,
                      std::span<const double> centroids, std::span<std::size_t> labels,
                      std::span<double> distances);

}  // namespace parallel

// Number of threads the parallel kernels will use (1 without OpenMP).
int max_threads();

}  // namespace pbc::kernels

#include "pbc/core.hpp"

#include <cmath>
#include <string>

#include "pbc/kernels.hpp"
#include "pbc/learners.hpp"

namespace pbc {

namespace {

void require_finite(std::span<const double> values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw InvalidInput(std::string("non-finite ") + what + " at index " + std::to_string(i));
        }
    }
}

}  // namespace

Dataset::Dataset(std::size_t dimension, std::vector<double> features, std::vector<double> targets)
    : dimension_(dimension), features_(std::move(features)), targets_(std::move(targets)) {
    if (dimension_ == 0) throw InvalidInput("dataset dimension must be positive");
    if (features_.size() != targets_.size() * dimension_) {
        throw InvalidInput("feature storage does not match " + std::to_string(targets_.size()) +
                           " points of dimension " + std::to_string(dimension_));
    }
    require_finite(features_, "feature");
    require_finite(targets_, "target");
}

Dataset::Dataset(const std::vector<LabeledPoint>& points) {
    if (points.empty()) return;
    dimension_ = points.front().features.size();
    if (dimension_ == 0) throw InvalidInput("dataset dimension must be positive");
    features_.reserve(points.size() * dimension_);
    targets_.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].features.size() != dimension_) {
            throw InvalidInput("point " + std::to_string(i) + " has dimension " +
                               std::to_string(points[i].features.size()) + ", expected " +
                               std::to_string(dimension_));
        }
        features_.insert(features_.end(), points[i].features.begin(), points[i].features.end());
        targets_.push_back(points[i].target);
    }
    require_finite(features_, "feature");
    require_finite(targets_, "target");
}

LabeledPoint Dataset::point(std::size_t i) const {
    auto x = features(i);
    return {std::vector<double>(x.begin(), x.end()), targets_[i]};
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.dimension_ = dimension_;
    out.features_.reserve(rows.size() * dimension_);
    out.targets_.reserve(rows.size());
    for (std::size_t r : rows) {
        if (r >= size()) throw InvalidInput("row index out of range");
        auto x = features(r);
        out.features_.insert(out.features_.end(), x.begin(), x.end());
        out.targets_.push_back(targets_[r]);
    }
    return out;
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) throw InvalidInput("slice out of range");
    Dataset out;
    out.dimension_ = dimension_;
    out.features_.assign(features_.begin() + static_cast<std::ptrdiff_t>(begin * dimension_),
                         features_.begin() + static_cast<std::ptrdiff_t>(end * dimension_));
    out.targets_.assign(targets_.begin() + static_cast<std::ptrdiff_t>(begin),
                        targets_.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

std::string to_string(LossKind kind) {
    return kind == LossKind::SquaredError ? "squared" : "absolute";
}

LossKind loss_kind_from_string(const std::string& name) {
    if (name == "squared") return LossKind::SquaredError;
    if (name == "absolute") return LossKind::AbsoluteError;
    throw InvalidInput("unknown loss '" + name + "' (expected squared or absolute)");
}

Assignment::Assignment(std::vector<std::size_t> labels, std::size_t clusters)
    : labels_(std::move(labels)), clusters_(clusters) {
    if (clusters_ == 0) throw InvalidInput("assignment needs at least one cluster");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] >= clusters_) {
            throw InvalidInput("label " + std::to_string(labels_[i]) + " at index " +
                               std::to_string(i) + " exceeds cluster count " +
                               std::to_string(clusters_));
        }
    }
}

std::vector<std::size_t> Assignment::cluster_sizes() const {
    std::vector<std::size_t> sizes(clusters_, 0);
    for (std::size_t label : labels_) ++sizes[label];
    return sizes;
}

std::vector<std::size_t> Assignment::members(std::size_t cluster) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == cluster) out.push_back(i);
    }
    return out;
}

double point_loss(double prediction, double target, LossKind kind) {
    if (!std::isfinite(prediction) || !std::isfinite(target)) {
        throw InvalidInput("point_loss requires finite inputs");
    }
    const double diff = prediction - target;
    return kind == LossKind::SquaredError ? diff * diff : std::abs(diff);
}

double dataset_loss(const Dataset& dataset, const Assignment& assignment,
                    std::span<const TrainedModel> models, LossKind kind) {
    if (dataset.empty()) throw InvalidInput("dataset_loss on an empty dataset");
    if (assignment.size() != dataset.size()) {
        throw InvalidInput("assignment length does not match dataset size");
    }
    if (models.size() != assignment.clusters()) {
        throw InvalidInput("model count does not match assignment cluster count");
    }
    for (const auto& m : models) {
        if (m.dimension() != dataset.dimension()) throw InvalidInput("model dimension mismatch");
    }
    std::vector<double> losses(dataset.size());
    kernels::parallel::assigned_losses(dataset, assignment.labels(), models, kind, losses);
    return kernels::pairwise_sum(losses) / static_cast<double>(dataset.size());
}

}  // namespace pbc

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pbc {

class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidState : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnsupportedLoss : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct LabeledPoint {
    std::vector<double> features;
    double target = 0.0;
};

// Row-major feature storage; every point has the same dimension and only
// finite values. Immutable once built.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::size_t dimension, std::vector<double> features, std::vector<double> targets);
    explicit Dataset(const std::vector<LabeledPoint>& points);

    std::size_t size() const { return targets_.size(); }
    bool empty() const { return targets_.empty(); }
    std::size_t dimension() const { return dimension_; }

    std::span<const double> features(std::size_t i) const {
        return {features_.data() + i * dimension_, dimension_};
    }
    double target(std::size_t i) const { return targets_[i]; }
    LabeledPoint point(std::size_t i) const;

    std::span<const double> feature_data() const { return features_; }
    std::span<const double> targets() const { return targets_; }

    // Rows selected by index, in the given order.
    Dataset subset(std::span<const std::size_t> rows) const;
    Dataset slice(std::size_t begin, std::size_t end) const;

private:
    std::size_t dimension_ = 0;
    std::vector<double> features_;
    std::vector<double> targets_;
};

enum class LossKind { SquaredError, AbsoluteError };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

// Cluster labels, one per dataset point, each below `clusters`.
class Assignment {
public:
    Assignment() = default;
    Assignment(std::vector<std::size_t> labels, std::size_t clusters);

    std::size_t size() const { return labels_.size(); }
    std::size_t clusters() const { return clusters_; }
    std::size_t operator[](std::size_t i) const { return labels_[i]; }
    const std::vector<std::size_t>& labels() const { return labels_; }

    std::vector<std::size_t> cluster_sizes() const;
    std::vector<std::size_t> members(std::size_t cluster) const;

    friend bool operator==(const Assignment&, const Assignment&) = default;

private:
    std::vector<std::size_t> labels_;
    std::size_t clusters_ = 0;
};

double point_loss(double prediction, double target, LossKind kind);

class TrainedModel;

double dataset_loss(const Dataset& dataset, const Assignment& assignment,
                    std::span<const TrainedModel> models, LossKind kind);

}  // namespace pbc

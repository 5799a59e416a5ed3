#include "pbc/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace pbc {

std::string to_string(RegressorKind kind) {
    return kind == RegressorKind::RidgeLinear ? "ridge_linear" : "mlp";
}

std::string to_string(Activation activation) {
    return activation == Activation::ReLU ? "relu" : "tanh";
}

RegressorKind regressor_kind_from_string(const std::string& name) {
    if (name == "ridge_linear") return RegressorKind::RidgeLinear;
    if (name == "mlp") return RegressorKind::Mlp;
    throw InvalidInput("unknown regressor kind '" + name + "' (expected ridge_linear or mlp)");
}

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::ReLU;
    if (name == "tanh") return Activation::Tanh;
    throw InvalidInput("unknown activation '" + name + "' (expected relu or tanh)");
}

void RegressorSpec::validate() const {
    if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda)) {
        throw InvalidInput("ridge_lambda must be finite and nonnegative");
    }
    if (kind != RegressorKind::Mlp) return;
    if (hidden_sizes.empty()) throw InvalidInput("mlp needs at least one hidden layer");
    if (std::find(hidden_sizes.begin(), hidden_sizes.end(), 0u) != hidden_sizes.end()) {
        throw InvalidInput("mlp hidden layer sizes must be positive");
    }
    if (epochs == 0) throw InvalidInput("mlp epochs must be positive");
    if (!(step_size > 0.0) || !std::isfinite(step_size)) {
        throw InvalidInput("mlp step_size must be positive");
    }
    if (batch_size == 0) throw InvalidInput("mlp batch_size must be positive");
}

namespace {

std::vector<std::size_t> layer_widths(const RegressorSpec& spec, std::size_t dimension) {
    std::vector<std::size_t> widths{dimension};
    widths.insert(widths.end(), spec.hidden_sizes.begin(), spec.hidden_sizes.end());
    widths.push_back(1);
    return widths;
}

double activate(Activation a, double z) {
    return a == Activation::ReLU ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

// Derivative expressed through the activation output.
double activate_grad(Activation a, double out) {
    return a == Activation::ReLU ? (out > 0.0 ? 1.0 : 0.0) : 1.0 - out * out;
}

}  // namespace

std::size_t parameter_count(const RegressorSpec& spec, std::size_t dimension) {
    if (spec.kind == RegressorKind::RidgeLinear) return dimension + 1;
    const auto widths = layer_widths(spec, dimension);
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) count += widths[l + 1] * (widths[l] + 1);
    return count;
}

TrainedModel::TrainedModel(RegressorSpec spec, std::size_t dimension, std::vector<double> parameters)
    : spec_(std::move(spec)), dimension_(dimension), parameters_(std::move(parameters)) {
    spec_.validate();
    if (dimension_ == 0) throw InvalidInput("model dimension must be positive");
    const std::size_t expected = parameter_count(spec_, dimension_);
    if (parameters_.size() != expected) {
        throw InvalidInput("model expects " + std::to_string(expected) + " parameters, got " +
                           std::to_string(parameters_.size()));
    }
    for (double p : parameters_) {
        if (!std::isfinite(p)) throw InvalidInput("model parameters must be finite");
    }
}

TrainedModel TrainedModel::linear(std::span<const double> coefficients, double intercept,
                                  double ridge_lambda) {
    RegressorSpec spec;
    spec.kind = RegressorKind::RidgeLinear;
    spec.ridge_lambda = ridge_lambda;
    std::vector<double> params(coefficients.begin(), coefficients.end());
    params.push_back(intercept);
    return TrainedModel(spec, coefficients.size(), std::move(params));
}

double TrainedModel::predict(std::span<const double> features) const {
    if (features.size() != dimension_) {
        throw InvalidInput("predict: feature length " + std::to_string(features.size()) +
                           " does not match model dimension " + std::to_string(dimension_));
    }
    return predict_unchecked(features);
}

double TrainedModel::predict_unchecked(std::span<const double> features) const {
    if (spec_.kind == RegressorKind::RidgeLinear) {
        double s = parameters_[dimension_];
        for (std::size_t j = 0; j < dimension_; ++j) s += parameters_[j] * features[j];
        return s;
    }
    return mlp_forward(features);
}

double TrainedModel::mlp_forward(std::span<const double> features) const {
    const auto widths = layer_widths(spec_, dimension_);
    thread_local std::vector<double> current;
    thread_local std::vector<double> next;
    current.assign(features.begin(), features.end());
    const double* p = parameters_.data();
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const std::size_t in = widths[l];
        const std::size_t out = widths[l + 1];
        const bool hidden = l + 2 < widths.size();
        next.assign(out, 0.0);
        const double* bias = p + out * in;
        for (std::size_t o = 0; o < out; ++o) {
            double z = bias[o];
            for (std::size_t i = 0; i < in; ++i) z += p[o * in + i] * current[i];
            next[o] = hidden ? activate(spec_.activation, z) : z;
        }
        p += out * (in + 1);
        current.swap(next);
    }
    return current[0];
}

double predict(const TrainedModel& model, std::span<const double> features) {
    return model.predict(features);
}

double predict_unchecked(const TrainedModel& model, std::span<const double> features) {
    return model.predict_unchecked(features);
}

namespace {

TrainedModel fit_ridge(const RegressorSpec& spec, const Dataset& points) {
    const std::size_t n = points.size();
    const std::size_t d = points.dimension();
    // Design matrix with a trailing column of ones for the unpenalised intercept.
    Eigen::MatrixXd design(n, d + 1);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = points.features(i);
        for (std::size_t j = 0; j < d; ++j) design(i, j) = x[j];
        design(i, d) = 1.0;
        y(i) = points.target(i);
    }
    Eigen::MatrixXd gram = design.transpose() * design;
    const Eigen::VectorXd rhs = design.transpose() * y;
    Eigen::VectorXd theta;
    if (spec.ridge_lambda > 0.0) {
        for (std::size_t j = 0; j < d; ++j) gram(j, j) += spec.ridge_lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(gram);
        theta = llt.info() == Eigen::Success ? Eigen::VectorXd(llt.solve(rhs))
                                             : Eigen::VectorXd(gram.completeOrthogonalDecomposition().solve(rhs));
    } else {
        // Minimum-norm solution; covers singular systems such as one-point clusters.
        theta = gram.completeOrthogonalDecomposition().solve(rhs);
    }
    return TrainedModel(spec, d, std::vector<double>(theta.data(), theta.data() + theta.size()));
}

// Plain mini-batch gradient descent on mean squared error.
class MlpTrainer {
public:
    MlpTrainer(const RegressorSpec& spec, std::size_t dimension)
        : spec_(spec), widths_(layer_widths(spec, dimension)) {
        const std::size_t layers = widths_.size();
        acts_.resize(layers);
        deltas_.resize(layers);
        for (std::size_t l = 0; l < layers; ++l) {
            acts_[l].resize(widths_[l]);
            deltas_[l].resize(widths_[l]);
        }
    }

    void train(const Dataset& data, std::vector<double>& params) {
        std::vector<std::size_t> order(data.size());
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 shuffler(spec_.train_seed ^ 0x9e3779b97f4a7c15ULL);
        std::vector<double> grad(params.size());
        for (std::size_t epoch = 0; epoch < spec_.epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), shuffler);
            for (std::size_t start = 0; start < order.size(); start += spec_.batch_size) {
                const std::size_t stop = std::min(order.size(), start + spec_.batch_size);
                std::fill(grad.begin(), grad.end(), 0.0);
                const double scale = 2.0 / static_cast<double>(stop - start);
                for (std::size_t b = start; b < stop; ++b) {
                    const std::size_t i = order[b];
                    accumulate(params, data.features(i), data.target(i), scale, grad);
                }
                for (std::size_t p = 0; p < params.size(); ++p) params[p] -= spec_.step_size * grad[p];
            }
        }
    }

private:
    void accumulate(const std::vector<double>& params, std::span<const double> x, double y,
                    double scale, std::vector<double>& grad) {
        const std::size_t last = widths_.size() - 1;
        std::copy(x.begin(), x.end(), acts_[0].begin());
        std::size_t offset = 0;
        offsets_.clear();
        for (std::size_t l = 0; l < last; ++l) {
            const std::size_t in = widths_[l];
            const std::size_t out = widths_[l + 1];
            offsets_.push_back(offset);
            const double* w = params.data() + offset;
            const double* bias = w + out * in;
            for (std::size_t o = 0; o < out; ++o) {
                double z = bias[o];
                for (std::size_t i = 0; i < in; ++i) z += w[o * in + i] * acts_[l][i];
                acts_[l + 1][o] = (l + 1 < last) ? activate(spec_.activation, z) : z;
            }
            offset += out * (in + 1);
        }
        deltas_[last][0] = scale * (acts_[last][0] - y);
        for (std::size_t l = last; l-- > 0;) {
            const std::size_t in = widths_[l];
            const std::size_t out = widths_[l + 1];
            const double* w = params.data() + offsets_[l];
            double* gw = grad.data() + offsets_[l];
            double* gb = gw + out * in;
            for (std::size_t o = 0; o < out; ++o) {
                const double delta = deltas_[l + 1][o];
                gb[o] += delta;
                for (std::size_t i = 0; i < in; ++i) gw[o * in + i] += delta * acts_[l][i];
            }
            if (l == 0) break;
            for (std::size_t i = 0; i < in; ++i) {
                double back = 0.0;
                for (std::size_t o = 0; o < out; ++o) back += w[o * in + i] * deltas_[l + 1][o];
                deltas_[l][i] = back * activate_grad(spec_.activation, acts_[l][i]);
            }
        }
    }

    const RegressorSpec& spec_;
    std::vector<std::size_t> widths_;
    std::vector<std::vector<double>> acts_;
    std::vector<std::vector<double>> deltas_;
    std::vector<std::size_t> offsets_;
};

}  // namespace

std::vector<double> initial_mlp_parameters(const RegressorSpec& spec, std::size_t dimension) {
    const auto widths = layer_widths(spec, dimension);
    std::mt19937_64 rng(spec.train_seed);
    std::vector<double> params;
    params.reserve(parameter_count(spec, dimension));
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const std::size_t in = widths[l];
        const std::size_t out = widths[l + 1];
        const double limit = spec.activation == Activation::ReLU
                                 ? std::sqrt(6.0 / static_cast<double>(in))
                                 : std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (std::size_t w = 0; w < out * in; ++w) params.push_back(dist(rng));
        params.insert(params.end(), out, 0.0);
    }
    return params;
}

TrainedModel fit(const RegressorSpec& spec, const Dataset& points,
                 const std::optional<TrainedModel>& warm_start) {
    spec.validate();
    if (points.empty()) throw InvalidInput("fit needs at least one point");
    if (spec.kind == RegressorKind::RidgeLinear) return fit_ridge(spec, points);

    std::vector<double> params;
    if (warm_start) {
        if (warm_start->dimension() != points.dimension() || !(warm_start->spec() == spec)) {
            throw InvalidInput("warm start model does not match spec and dimension");
        }
        params = warm_start->parameters();
    } else {
        params = initial_mlp_parameters(spec, points.dimension());
    }
    MlpTrainer(spec, points.dimension()).train(points, params);
    for (double p : params) {
        if (!std::isfinite(p)) throw InvalidState("mlp training diverged; lower step_size");
    }
    return TrainedModel(spec, points.dimension(), std::move(params));
}

}  // namespace pbc

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pbc/core.hpp"
#include "pbc/learners.hpp"

namespace pbc::test {

inline Dataset random_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x(n * d);
    std::vector<double> y(n);
    for (double& v : x) v = g(rng);
    for (double& v : y) v = g(rng);
    return Dataset(d, std::move(x), std::move(y));
}

inline TrainedModel random_linear(std::size_t d, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> c(d);
    for (double& v : c) v = g(rng);
    return TrainedModel::linear(c, g(rng));
}

enum class LineInputs { StandardNormal, Positive };

// Two noiseless lines through the origin, `per_line` points each: label 0
// follows y = slope_a * x, label 1 follows y = slope_b * x. Inputs are either
// N(0, 1) or U(0.1, 2).
inline Dataset two_lines(std::size_t per_line, double slope_a, double slope_b, std::uint64_t seed,
                         std::vector<std::size_t>* truth = nullptr,
                         LineInputs inputs = LineInputs::StandardNormal) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t line = 0; line < 2; ++line) {
        for (std::size_t i = 0; i < per_line; ++i) {
            const double xi = inputs == LineInputs::StandardNormal ? g(rng) : u(rng);
            x.push_back(xi);
            y.push_back((line == 0 ? slope_a : slope_b) * xi);
            if (truth) truth->push_back(line);
        }
    }
    return Dataset(1, std::move(x), std::move(y));
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("pbc_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace pbc::test

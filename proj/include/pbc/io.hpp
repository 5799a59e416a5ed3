#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pbc/clustering.hpp"
#include "pbc/datagen.hpp"
#include "pbc/learners.hpp"
#include "pbc/pipeline.hpp"

namespace pbc {

inline constexpr const char* kArtifactVersion = "pbc-1.0.0";
inline constexpr int kBundleVersion = 1;

enum class DataFormat { Features, Series };

struct DataConfig {
    std::filesystem::path path;
    DataFormat format = DataFormat::Features;
    std::string series_id;  // empty: first series in the file
    std::string target_column = "y";
    std::string label_column = "label";
};

struct StreamConfig {
    std::size_t batch_size = 200;
    double learning_rate = 0.01;
    bool project_to_simplex = false;
    std::filesystem::path bundle;     // empty: <out>/../fit/bundle.json is not assumed
    std::filesystem::path data_path;  // empty: reuse data.path
    // Series data only: replay the "test" or the "validation" split.
    std::string split = "test";
};

struct SynthBenchConfig {
    std::size_t replicates = 25;
    std::vector<std::size_t> k_hats{3, 5};
    SyntheticConfig synthetic{};  // its seed is replaced per replicate
};

// Every knob of every command. Missing keys take the defaults below and the
// resolved values are written back into each report.
struct RunConfig {
    std::uint64_t seed = 0;
    DataConfig data{};
    FeatureSpec features{};
    bool normalize = true;
    SplitFractions split{};
    PbcConfig pbc{};
    StreamConfig stream{};
    SynthBenchConfig synth{};
};

nlohmann::json to_json(const RunConfig& config);
// Relative paths are resolved against `base_dir`. Unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const RegressorSpec& spec);
RegressorSpec regressor_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrainedModel& model);
TrainedModel trained_model_from_json(const nlohmann::json& j);

struct ModelBundle {
    std::vector<TrainedModel> models;
    std::optional<TrainedModel> baseline;
    std::optional<NormalizationParams> normalization;
    std::vector<std::string> feature_names;

    std::size_t dimension() const { return models.front().dimension(); }
};

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
// Refuses bundles written with a different format version.
ModelBundle load_bundle(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_ndjson(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);
std::vector<nlohmann::json> read_ndjson(const std::filesystem::path& path);

}  // namespace pbc

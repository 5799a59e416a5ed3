#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pbc/core.hpp"
#include "pbc/ensemble.hpp"

namespace pbc {

class ParseError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

// Accepts YYYY-MM-DD, YYYY-MM-DDTHH:MM[:SS] with an optional trailing Z.
Timestamp parse_timestamp(const std::string& text);
std::string format_timestamp(Timestamp t);

struct SeriesFrame {
    std::string series_id;
    std::vector<Timestamp> timestamps;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    void validate() const;
};

enum class RollingStat { Mean, Std };

struct FeatureSpec {
    std::vector<std::size_t> lags{1, 2, 3, 7};
    std::vector<std::size_t> rolling_windows{7, 28};
    std::vector<RollingStat> rolling_stats{RollingStat::Mean, RollingStat::Std};

    std::size_t max_offset() const;
    std::size_t feature_count() const;
    void validate() const;
};

std::string to_string(RollingStat stat);
RollingStat rolling_stat_from_string(const std::string& name);

struct NormalizationParams {
    double min = 0.0;
    double max = 1.0;

    double apply(double v) const { return (v - min) / (max - min); }
    double invert(double u) const { return u * (max - min) + min; }
};

struct SeriesSchema {
    std::string id_column = "series_id";
    std::string time_column = "timestamp";
    std::string value_column = "value";
};

struct FeatureSchema {
    std::string target_column = "y";
    std::string label_column = "label";  // optional in the file
};

struct FeatureTable {
    Dataset dataset;
    std::vector<std::string> feature_names;
    std::optional<std::vector<std::size_t>> labels;
};

// Long format `series_id,timestamp,value`; one frame per id in order of first
// appearance. Row numbers in errors count data rows from 1.
std::vector<SeriesFrame> load_series_csv(const std::filesystem::path& path,
                                         const SeriesSchema& schema = {});

// Wide format `x1,...,xd,y[,label]`; every column other than target and label
// is a feature, in file order.
FeatureTable load_feature_csv(const std::filesystem::path& path, const FeatureSchema& schema = {});

void write_series_csv(const std::filesystem::path& path, const std::vector<SeriesFrame>& frames);
void write_feature_csv(const std::filesystem::path& path, const Dataset& dataset,
                       const std::vector<std::size_t>* labels = nullptr);

// One row per t >= max_offset: lag values, then for each window the
// requested statistics over values[t-w, t). Target is values[t].
Dataset build_features(const SeriesFrame& series, const FeatureSpec& spec);

// Timestamps of the rows build_features produces.
std::vector<Timestamp> feature_row_times(const SeriesFrame& series, const FeatureSpec& spec);

struct NormalizedSeries {
    SeriesFrame series;
    NormalizationParams params;
};

NormalizedSeries normalize_unit_interval(const SeriesFrame& train);
SeriesFrame apply_normalization(const SeriesFrame& series, const NormalizationParams& params);
SeriesFrame invert_normalization(const SeriesFrame& series, const NormalizationParams& params);

struct SplitFractions {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;
};

struct TemporalSplit {
    Dataset train;
    Dataset validation;
    Dataset test;
};

struct SplitSizes {
    std::size_t train;
    std::size_t validation;
    std::size_t test;
};

SplitSizes split_sizes(std::size_t n, const SplitFractions& fractions);
TemporalSplit temporal_split(const Dataset& dataset, const SplitFractions& fractions = {});

std::vector<Batch> make_batches(const Dataset& test, std::size_t batch_size);

// Normalises with training-split statistics only, builds features and splits.
struct PreparedSeries {
    std::optional<NormalizationParams> normalization;
    TemporalSplit split;
    std::vector<Timestamp> row_times;
};

PreparedSeries prepare_series(const SeriesFrame& series, const FeatureSpec& spec,
                              const SplitFractions& fractions, bool normalize);

}  // namespace pbc

#include "pbc/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace pbc {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    for (auto& f : fields) {
        const auto first = f.find_first_not_of(" \t\r");
        const auto last = f.find_last_not_of(" \t\r");
        f = first == std::string::npos ? std::string() : f.substr(first, last - first + 1);
    }
    return fields;
}

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) return false;
    const char* begin = text.data();
    if (*begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

struct CsvFile {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvFile read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    CsvFile csv;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file, expected a header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    csv.header = split_fields(line);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++row;
        auto fields = split_fields(line);
        if (fields.size() != csv.header.size()) {
            throw ParseError(path.string() + ": row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, header has " +
                             std::to_string(csv.header.size()));
        }
        csv.rows.push_back(std::move(fields));
    }
    if (csv.rows.empty()) throw ParseError(path.string() + ": no data rows after header");
    return csv;
}

std::size_t column_index(const CsvFile& csv, const std::string& name, const std::filesystem::path& path) {
    const auto it = std::find(csv.header.begin(), csv.header.end(), name);
    if (it == csv.header.end()) throw ParseError(path.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - csv.header.begin());
}

double rolling_stat(std::span<const double> window, RollingStat stat) {
    double mean = 0.0;
    for (double v : window) mean += v;
    mean /= static_cast<double>(window.size());
    if (stat == RollingStat::Mean) return mean;
    double var = 0.0;
    for (double v : window) var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(window.size()));
}

}  // namespace

Timestamp parse_timestamp(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char tail[8] = {0};
    int consumed = 0;
    const char* c = text.c_str();
    bool ok = false;
    if (std::sscanf(c, "%4d-%2d-%2d%n", &y, &mo, &d, &consumed) == 3 &&
        consumed == static_cast<int>(text.size())) {
        ok = true;
    } else if (std::sscanf(c, "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &s, &consumed) == 6 ||
               std::sscanf(c, "%4d-%2d-%2d %2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &s, &consumed) == 6) {
        ok = consumed == static_cast<int>(text.size()) ||
             (std::sscanf(c + consumed, "%7s", tail) == 1 && std::string(tail) == "Z" &&
              consumed + 1 == static_cast<int>(text.size()));
    } else if (std::sscanf(c, "%4d-%2d-%2dT%2d:%2d%n", &y, &mo, &d, &h, &mi, &consumed) == 5) {
        ok = consumed == static_cast<int>(text.size()) ||
             (text.back() == 'Z' && consumed + 1 == static_cast<int>(text.size()));
    }
    using namespace std::chrono;
    const year_month_day date{year(y), month(static_cast<unsigned>(mo)), day(static_cast<unsigned>(d))};
    if (!ok || !date.ok() || h > 23 || mi > 59 || s > 60 || h < 0 || mi < 0 || s < 0) {
        throw ParseError("invalid ISO-8601 timestamp '" + text + "'");
    }
    return sys_days(date).time_since_epoch().count() * 86400LL + h * 3600LL + mi * 60LL + s;
}

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto days_since = static_cast<int>(std::floor(static_cast<double>(t) / 86400.0));
    const year_month_day date{sys_days(days(days_since))};
    const auto rem = t - static_cast<Timestamp>(days_since) * 86400LL;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                  static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

void SeriesFrame::validate() const {
    if (timestamps.size() != values.size()) throw InvalidInput("series timestamps and values differ in length");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw InvalidInput("series value at index " + std::to_string(i) + " is not finite");
        if (i > 0 && timestamps[i] <= timestamps[i - 1]) {
            throw InvalidInput("series timestamps must be strictly increasing (index " + std::to_string(i) + ")");
        }
    }
}

std::size_t FeatureSpec::max_offset() const {
    std::size_t m = 0;
    for (auto l : lags) m = std::max(m, l);
    for (auto w : rolling_windows) m = std::max(m, w);
    return m;
}

std::size_t FeatureSpec::feature_count() const {
    return lags.size() + rolling_windows.size() * rolling_stats.size();
}

void FeatureSpec::validate() const {
    if (lags.empty() && rolling_windows.empty()) throw InvalidInput("feature spec produces no features");
    if (std::find(lags.begin(), lags.end(), 0u) != lags.end()) throw InvalidInput("lags must be positive");
    if (std::find(rolling_windows.begin(), rolling_windows.end(), 0u) != rolling_windows.end()) {
        throw InvalidInput("rolling windows must be positive");
    }
    if (!rolling_windows.empty() && rolling_stats.empty()) {
        throw InvalidInput("rolling windows given without rolling statistics");
    }
}

std::string to_string(RollingStat stat) { return stat == RollingStat::Mean ? "mean" : "std"; }

RollingStat rolling_stat_from_string(const std::string& name) {
    if (name == "mean") return RollingStat::Mean;
    if (name == "std") return RollingStat::Std;
    throw InvalidInput("unknown rolling statistic '" + name + "' (expected mean or std)");
}

std::vector<SeriesFrame> load_series_csv(const std::filesystem::path& path, const SeriesSchema& schema) {
    const CsvFile csv = read_csv(path);
    const std::size_t id_col = column_index(csv, schema.id_column, path);
    const std::size_t time_col = column_index(csv, schema.time_column, path);
    const std::size_t value_col = column_index(csv, schema.value_column, path);

    std::vector<SeriesFrame> frames;
    std::map<std::string, std::size_t> by_id;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& fields = csv.rows[r];
        const std::string where = path.string() + ": row " + std::to_string(r + 1);
        double value = 0.0;
        if (!parse_double(fields[value_col], value)) {
            throw ParseError(where + ": value '" + fields[value_col] + "' is not a finite number");
        }
        Timestamp t = 0;
        try {
            t = parse_timestamp(fields[time_col]);
        } catch (const ParseError& e) {
            throw ParseError(where + ": " + e.what());
        }
        auto [it, inserted] = by_id.try_emplace(fields[id_col], frames.size());
        if (inserted) frames.push_back(SeriesFrame{fields[id_col], {}, {}});
        SeriesFrame& frame = frames[it->second];
        if (!frame.timestamps.empty() && t <= frame.timestamps.back()) {
            throw ParseError(where + ": timestamp not after the previous one for series '" +
                             frame.series_id + "'");
        }
        frame.timestamps.push_back(t);
        frame.values.push_back(value);
    }
    return frames;
}

FeatureTable load_feature_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
    const CsvFile csv = read_csv(path);
    const std::size_t target_col = column_index(csv, schema.target_column, path);
    const auto label_it = std::find(csv.header.begin(), csv.header.end(), schema.label_column);
    const bool has_labels = label_it != csv.header.end();
    const auto label_col = static_cast<std::size_t>(label_it - csv.header.begin());

    FeatureTable table;
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
        if (c == target_col || (has_labels && c == label_col)) continue;
        feature_cols.push_back(c);
        table.feature_names.push_back(csv.header[c]);
    }
    if (feature_cols.empty()) throw ParseError(path.string() + ": no feature columns");

    std::vector<double> features;
    std::vector<double> targets;
    std::vector<std::size_t> labels;
    features.reserve(csv.rows.size() * feature_cols.size());
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& fields = csv.rows[r];
        const auto bad = [&](std::size_t c) {
            return ParseError(path.string() + ": row " + std::to_string(r + 1) + ", column '" +
                              csv.header[c] + "': '" + fields[c] + "' is not a finite number");
        };
        for (std::size_t c : feature_cols) {
            double v = 0.0;
            if (!parse_double(fields[c], v)) throw bad(c);
            features.push_back(v);
        }
        double y = 0.0;
        if (!parse_double(fields[target_col], y)) throw bad(target_col);
        targets.push_back(y);
        if (has_labels) {
            std::size_t label = 0;
            const auto& text = fields[label_col];
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), label);
            if (ec != std::errc() || ptr != text.data() + text.size()) {
                throw ParseError(path.string() + ": row " + std::to_string(r + 1) +
                                 ": label '" + text + "' is not a nonnegative integer");
            }
            labels.push_back(label);
        }
    }
    table.dataset = Dataset(feature_cols.size(), std::move(features), std::move(targets));
    if (has_labels) table.labels = std::move(labels);
    return table;
}

void write_series_csv(const std::filesystem::path& path, const std::vector<SeriesFrame>& frames) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << "series_id,timestamp,value\n";
    for (const auto& frame : frames) {
        for (std::size_t i = 0; i < frame.size(); ++i) {
            out << frame.series_id << ',' << format_timestamp(frame.timestamps[i]) << ','
                << format_double(frame.values[i]) << '\n';
        }
    }
}

void write_feature_csv(const std::filesystem::path& path, const Dataset& dataset,
                       const std::vector<std::size_t>* labels) {
    if (labels && labels->size() != dataset.size()) throw InvalidInput("label count does not match dataset");
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path.string());
    for (std::size_t j = 0; j < dataset.dimension(); ++j) out << 'x' << j + 1 << ',';
    out << 'y' << (labels ? ",label" : "") << '\n';
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (double v : dataset.features(i)) out << format_double(v) << ',';
        out << format_double(dataset.target(i));
        if (labels) out << ',' << (*labels)[i];
        out << '\n';
    }
}

Dataset build_features(const SeriesFrame& series, const FeatureSpec& spec) {
    spec.validate();
    series.validate();
    const std::size_t start = spec.max_offset();
    if (series.size() <= start) {
        throw InvalidInput("series of length " + std::to_string(series.size()) +
                           " is too short for a maximum lag/window of " + std::to_string(start));
    }
    const std::size_t d = spec.feature_count();
    const std::span<const double> v = series.values;
    std::vector<double> features;
    std::vector<double> targets;
    features.reserve((series.size() - start) * d);
    for (std::size_t t = start; t < series.size(); ++t) {
        for (std::size_t lag : spec.lags) features.push_back(v[t - lag]);
        for (std::size_t w : spec.rolling_windows) {
            for (RollingStat stat : spec.rolling_stats) {
                features.push_back(rolling_stat(v.subspan(t - w, w), stat));
            }
        }
        targets.push_back(v[t]);
    }
    return Dataset(d, std::move(features), std::move(targets));
}

std::vector<Timestamp> feature_row_times(const SeriesFrame& series, const FeatureSpec& spec) {
    const std::size_t start = spec.max_offset();
    if (series.size() <= start) throw InvalidInput("series too short for feature spec");
    return {series.timestamps.begin() + static_cast<std::ptrdiff_t>(start), series.timestamps.end()};
}

NormalizedSeries normalize_unit_interval(const SeriesFrame& train) {
    if (train.values.empty()) throw InvalidInput("cannot normalise an empty series");
    const auto [lo, hi] = std::minmax_element(train.values.begin(), train.values.end());
    if (!(*hi > *lo)) throw InvalidInput("degenerate range: training series is constant");
    NormalizationParams params{*lo, *hi};
    return {apply_normalization(train, params), params};
}

SeriesFrame apply_normalization(const SeriesFrame& series, const NormalizationParams& params) {
    SeriesFrame out = series;
    for (double& v : out.values) v = params.apply(v);
    return out;
}

SeriesFrame invert_normalization(const SeriesFrame& series, const NormalizationParams& params) {
    SeriesFrame out = series;
    for (double& v : out.values) v = params.invert(v);
    return out;
}

SplitSizes split_sizes(std::size_t n, const SplitFractions& fractions) {
    if (fractions.train <= 0.0 || fractions.validation < 0.0 || fractions.test <= 0.0 ||
        fractions.train + fractions.validation + fractions.test > 1.0 + 1e-12) {
        throw InvalidInput("split fractions must be positive and sum to at most 1");
    }
    const auto nd = static_cast<double>(n);
    // The small epsilon keeps products like 0.8 * 10 from flooring to 7.
    const auto train = static_cast<std::size_t>(std::floor(fractions.train * nd + 1e-9));
    const auto validation = static_cast<std::size_t>(std::floor(fractions.validation * nd + 1e-9));
    if (train + validation >= n) throw InvalidInput("temporal split leaves the test split empty");
    return {train, validation, n - train - validation};
}

TemporalSplit temporal_split(const Dataset& dataset, const SplitFractions& fractions) {
    const auto sizes = split_sizes(dataset.size(), fractions);
    if (sizes.train == 0 || sizes.validation == 0 || sizes.test == 0) {
        throw InvalidInput("temporal split of " + std::to_string(dataset.size()) +
                           " rows leaves an empty split");
    }
    const std::size_t a = sizes.train;
    const std::size_t b = a + sizes.validation;
    return {dataset.slice(0, a), dataset.slice(a, b), dataset.slice(b, dataset.size())};
}

std::vector<Batch> make_batches(const Dataset& test, std::size_t batch_size) {
    if (batch_size == 0) throw InvalidInput("batch_size must be at least 1");
    std::vector<Batch> batches;
    for (std::size_t start = 0; start < test.size(); start += batch_size) {
        batches.emplace_back(test.slice(start, std::min(test.size(), start + batch_size)));
    }
    return batches;
}

PreparedSeries prepare_series(const SeriesFrame& series, const FeatureSpec& spec,
                              const SplitFractions& fractions, bool normalize) {
    series.validate();
    spec.validate();
    const std::size_t start = spec.max_offset();
    if (series.size() <= start) throw InvalidInput("series too short for feature spec");
    const auto sizes = split_sizes(series.size() - start, fractions);

    PreparedSeries out;
    SeriesFrame working = series;
    if (normalize) {
        // Every value a training row touches, features and target alike.
        SeriesFrame train_part{series.series_id,
                               {series.timestamps.begin(),
                                series.timestamps.begin() + static_cast<std::ptrdiff_t>(start + sizes.train)},
                               {series.values.begin(),
                                series.values.begin() + static_cast<std::ptrdiff_t>(start + sizes.train)}};
        out.normalization = normalize_unit_interval(train_part).params;
        working = apply_normalization(series, *out.normalization);
    }
    out.split = temporal_split(build_features(working, spec), fractions);
    out.row_times = feature_row_times(working, spec);
    return out;
}

}  // namespace pbc

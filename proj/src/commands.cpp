#include "pbc/commands.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>

#include "pbc/ensemble.hpp"
#include "pbc/kernels.hpp"
#include "pbc/random.hpp"

namespace pbc {

using nlohmann::json;

namespace {

struct TrainingData {
    Dataset train;
    std::optional<std::vector<std::size_t>> labels;
    std::optional<NormalizationParams> normalization;
    std::vector<std::string> feature_names;
};

const SeriesFrame& pick_series(const std::vector<SeriesFrame>& frames, const std::string& id) {
    if (id.empty()) return frames.front();
    for (const auto& f : frames) {
        if (f.series_id == id) return f;
    }
    throw InvalidInput("series '" + id + "' not found");
}

std::vector<std::string> series_feature_names(const FeatureSpec& spec) {
    std::vector<std::string> names;
    for (auto lag : spec.lags) names.push_back("lag_" + std::to_string(lag));
    for (auto w : spec.rolling_windows) {
        for (auto s : spec.rolling_stats) names.push_back("roll" + std::to_string(w) + "_" + to_string(s));
    }
    return names;
}

PreparedSeries prepare_from(const RunConfig& config, const std::filesystem::path& path) {
    const auto frames = load_series_csv(path);
    return prepare_series(pick_series(frames, config.data.series_id), config.features, config.split,
                          config.normalize);
}

TrainingData load_training_data(const RunConfig& config) {
    if (config.data.path.empty()) throw InvalidInput("data.path is required");
    TrainingData out;
    if (config.data.format == DataFormat::Features) {
        auto table = load_feature_csv(config.data.path, {config.data.target_column, config.data.label_column});
        out.train = std::move(table.dataset);
        out.labels = std::move(table.labels);
        out.feature_names = std::move(table.feature_names);
    } else {
        auto prepared = prepare_from(config, config.data.path);
        out.train = std::move(prepared.split.train);
        out.normalization = prepared.normalization;
        out.feature_names = series_feature_names(config.features);
    }
    return out;
}

Dataset load_stream_data(const RunConfig& config, const ModelBundle& bundle) {
    const auto path = config.stream.data_path.empty() ? config.data.path : config.stream.data_path;
    if (path.empty()) throw InvalidInput("stream needs stream.data_path or data.path");
    if (config.data.format == DataFormat::Features) {
        return load_feature_csv(path, {config.data.target_column, config.data.label_column}).dataset;
    }
    auto prepared = prepare_from(config, path);
    if (prepared.normalization.has_value() != bundle.normalization.has_value() ||
        (prepared.normalization && (prepared.normalization->min != bundle.normalization->min ||
                                    prepared.normalization->max != bundle.normalization->max))) {
        throw InvalidInput("normalisation of the stream data does not match the model bundle");
    }
    return config.stream.split == "validation" ? std::move(prepared.split.validation)
                                               : std::move(prepared.split.test);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json base_report(const char* command, const RunConfig& config) {
    return {{"artifact_version", kArtifactVersion}, {"command", command}, {"config", to_json(config)}};
}

double mean_squared_error(std::span<const double> predictions, std::span<const double> targets) {
    std::vector<double> sq(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) sq[i] = (predictions[i] - targets[i]) * (predictions[i] - targets[i]);
    return kernels::pairwise_sum(sq) / static_cast<double>(targets.size());
}

}  // namespace

json numerical_content(json report) {
    report.erase("duration_seconds");
    return report;
}

json cmd_fit(const RunConfig& config, const std::filesystem::path& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    std::filesystem::create_directories(out_dir);
    const TrainingData data = load_training_data(config);

    PbcConfig pbc_config = config.pbc;
    pbc_config.seed = config.seed;
    std::vector<json> history;
    const ClusteringResult result = run_pbc(data.train, pbc_config, [&](const IterationTrace& t) {
        history.push_back({{"iteration", t.iteration},
                           {"loss", t.loss},
                           {"reassigned_fraction", t.reassigned_fraction},
                           {"cluster_sizes", t.assignment->cluster_sizes()}});
    });

    const TrainedModel baseline = fit(pbc_config.regressor, data.train);
    const std::vector<TrainedModel> single{baseline};
    const Assignment all_zero(std::vector<std::size_t>(data.train.size(), 0), 1);
    const double baseline_loss = dataset_loss(data.train, all_zero, single, pbc_config.loss);

    ModelBundle bundle{result.models, baseline, data.normalization, data.feature_names};
    save_bundle(out_dir / "bundle.json", bundle);
    write_ndjson(out_dir / "history.ndjson", history);

    json report = base_report("fit", config);
    report["n_points"] = data.train.size();
    report["dimension"] = data.train.dimension();
    report["converged"] = result.converged;
    report["iterations"] = result.iterations;
    report["final_loss"] = result.loss_history.back();
    report["baseline_loss"] = baseline_loss;
    report["loss_history"] = result.loss_history;
    report["reassignment_history"] = result.reassignment_history;
    report["cluster_sizes"] = result.assignment.cluster_sizes();
    report["assignment"] = result.assignment.labels();
    json models = json::array();
    for (const auto& m : result.models) models.push_back(to_json(m));
    report["models"] = models;
    if (data.labels) {
        report["misclassification"] = misclassification_rate(result.assignment, *data.labels);
    }
    if (data.normalization) {
        report["normalization"] = {{"min", data.normalization->min}, {"max", data.normalization->max}};
    }
    report["duration_seconds"] = seconds_since(start);
    write_json(out_dir / "report.json", report);
    return report;
}

json cmd_stream(const RunConfig& config, const std::filesystem::path& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    if (config.stream.bundle.empty()) throw InvalidInput("stream.bundle is required");
    std::filesystem::create_directories(out_dir);
    const ModelBundle bundle = load_bundle(config.stream.bundle);
    const Dataset data = load_stream_data(config, bundle);
    if (data.dimension() != bundle.dimension()) {
        throw InvalidInput("stream data has dimension " + std::to_string(data.dimension()) +
                           " but the model bundle expects " + std::to_string(bundle.dimension()));
    }
    const auto batches = make_batches(data, config.stream.batch_size);
    const StreamResult stream =
        stream_evaluate(bundle.models, batches, config.stream.learning_rate, config.stream.project_to_simplex);

    std::vector<double> baseline_predictions;
    if (bundle.baseline) {
        baseline_predictions.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            baseline_predictions[i] = predict(*bundle.baseline, data.features(i));
        }
    }

    std::vector<json> records;
    std::size_t offset = 0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
        const auto& entry = stream.trajectory[b];
        json record = {{"batch", entry.batch_index},
                       {"size", batches[b].size()},
                       {"weights", entry.weights},
                       {"batch_loss", entry.batch_loss}};
        if (bundle.baseline) {
            record["baseline_batch_loss"] =
                mean_squared_error(std::span<const double>(baseline_predictions).subspan(offset, batches[b].size()),
                                   batches[b].targets());
        }
        offset += batches[b].size();
        records.push_back(std::move(record));
    }
    write_ndjson(out_dir / "trajectory.ndjson", records);

    json report = base_report("stream", config);
    report["n_points"] = data.size();
    report["n_batches"] = batches.size();
    report["initial_weights"] = init_weights(bundle.models.size());
    report["final_weights"] = stream.final_weights;
    report["batch_losses"] = stream.batch_losses;
    report["ensemble_mse"] = mean_squared_error(stream.predictions, data.targets());
    if (bundle.baseline) report["baseline_mse"] = mean_squared_error(baseline_predictions, data.targets());
    report["duration_seconds"] = seconds_since(start);
    write_json(out_dir / "report.json", report);
    return report;
}

json cmd_synth_bench(const RunConfig& config, const std::filesystem::path& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    std::filesystem::create_directories(out_dir);
    const std::size_t replicates = config.synth.replicates;
    const auto& k_hats = config.synth.k_hats;

    struct Replicate {
        std::vector<double> pbc;     // per k_hat
        std::vector<double> kmeans;  // per k_hat
        std::vector<std::size_t> iterations;
        std::vector<json> per_cluster;
    };
    std::vector<Replicate> reps(replicates);
    std::vector<std::exception_ptr> errors(replicates);

    const auto count = static_cast<std::int64_t>(replicates);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t r = 0; r < count; ++r) {
        const auto rep = static_cast<std::size_t>(r);
        try {
            const std::uint64_t seed = stream_seed(config.seed, rep);
            SyntheticConfig syn = config.synth.synthetic;
            syn.seed = seed;
            const auto data = generate_synthetic(syn);
            Replicate& out = reps[rep];
            for (std::size_t k_hat : k_hats) {
                PbcConfig pbc_config = config.pbc;
                pbc_config.k_hat = k_hat;
                pbc_config.seed = seed;
                const auto result = run_pbc(data.dataset, pbc_config, [&](const IterationTrace& t) {
                    out.per_cluster.push_back(
                        {{"k_hat", k_hat},
                         {"replicate", rep},
                         {"iteration", t.iteration},
                         {"misclassification", misclassification_rate(*t.assignment, data.ground_truth)},
                         {"per_cluster", per_cluster_misclassification(*t.assignment, data.ground_truth)}});
                });
                out.pbc.push_back(misclassification_rate(result.assignment, data.ground_truth));
                out.iterations.push_back(result.iterations);
                out.kmeans.push_back(
                    misclassification_rate(kmeans_baseline(data.dataset, k_hat, seed), data.ground_truth));
            }
        } catch (...) {
            errors[rep] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    json results = json::array();
    std::vector<json> per_cluster;
    for (std::size_t ki = 0; ki < k_hats.size(); ++ki) {
        for (const char* method : {"pbc", "kmeans"}) {
            std::vector<double> rates;
            for (const auto& rep : reps) rates.push_back(std::string(method) == "pbc" ? rep.pbc[ki] : rep.kmeans[ki]);
            const double mean = std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
            results.push_back({{"method", method},
                               {"k_hat", k_hats[ki]},
                               {"mean_misclassification", mean},
                               {"per_replicate", rates}});
        }
    }
    for (const auto& rep : reps) per_cluster.insert(per_cluster.end(), rep.per_cluster.begin(), rep.per_cluster.end());
    write_ndjson(out_dir / "per_cluster.ndjson", per_cluster);

    json report = base_report("synth-bench", config);
    report["results"] = results;
    report["duration_seconds"] = seconds_since(start);
    write_json(out_dir / "report.json", report);
    return report;
}

}  // namespace pbc

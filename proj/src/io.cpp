#include "pbc/io.hpp"

#include <fstream>
#include <set>

namespace pbc {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw InvalidInput(where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) throw InvalidInput("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (const auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw InvalidInput(std::string("config key '") + key + "': " + e.what());
        }
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

json to_json(const RegressorSpec& spec) {
    return {{"kind", to_string(spec.kind)},
            {"ridge_lambda", spec.ridge_lambda},
            {"hidden_sizes", spec.hidden_sizes},
            {"activation", to_string(spec.activation)},
            {"epochs", spec.epochs},
            {"step_size", spec.step_size},
            {"batch_size", spec.batch_size},
            {"train_seed", spec.train_seed}};
}

RegressorSpec regressor_spec_from_json(const json& j) {
    reject_unknown(j,
                   {"kind", "ridge_lambda", "hidden_sizes", "activation", "epochs", "step_size",
                    "batch_size", "train_seed"},
                   "regressor");
    RegressorSpec spec;
    std::string kind = to_string(spec.kind);
    std::string activation = to_string(spec.activation);
    read(j, "kind", kind);
    read(j, "activation", activation);
    spec.kind = regressor_kind_from_string(kind);
    spec.activation = activation_from_string(activation);
    read(j, "ridge_lambda", spec.ridge_lambda);
    read(j, "hidden_sizes", spec.hidden_sizes);
    read(j, "epochs", spec.epochs);
    read(j, "step_size", spec.step_size);
    read(j, "batch_size", spec.batch_size);
    read(j, "train_seed", spec.train_seed);
    spec.validate();
    return spec;
}

json to_json(const TrainedModel& model) {
    return {{"spec", to_json(model.spec())},
            {"dimension", model.dimension()},
            {"parameters", model.parameters()}};
}

TrainedModel trained_model_from_json(const json& j) {
    reject_unknown(j, {"spec", "dimension", "parameters"}, "model");
    return TrainedModel(regressor_spec_from_json(j.at("spec")), j.at("dimension").get<std::size_t>(),
                        j.at("parameters").get<std::vector<double>>());
}

json to_json(const RunConfig& c) {
    std::vector<std::string> stats;
    for (auto s : c.features.rolling_stats) stats.push_back(to_string(s));
    const auto& syn = c.synth.synthetic;
    return {
        {"seed", c.seed},
        {"data",
         {{"path", c.data.path.string()},
          {"format", c.data.format == DataFormat::Features ? "features" : "series"},
          {"series_id", c.data.series_id},
          {"target_column", c.data.target_column},
          {"label_column", c.data.label_column}}},
        {"features",
         {{"lags", c.features.lags},
          {"rolling_windows", c.features.rolling_windows},
          {"rolling_stats", stats}}},
        {"normalize", c.normalize},
        {"split", {{"train", c.split.train}, {"validation", c.split.validation}, {"test", c.split.test}}},
        {"pbc",
         {{"k_hat", c.pbc.k_hat},
          {"loss", to_string(c.pbc.loss)},
          {"zeta", c.pbc.zeta},
          {"max_iterations", c.pbc.max_iterations},
          {"init_fraction", c.pbc.init_fraction},
          {"soft_assignment", c.pbc.soft_assignment}}},
        {"regressor", to_json(c.pbc.regressor)},
        {"stream",
         {{"batch_size", c.stream.batch_size},
          {"learning_rate", c.stream.learning_rate},
          {"project_to_simplex", c.stream.project_to_simplex},
          {"bundle", c.stream.bundle.string()},
          {"data_path", c.stream.data_path.string()},
          {"split", c.stream.split}}},
        {"synth",
         {{"replicates", c.synth.replicates},
          {"k_hats", c.synth.k_hats},
          {"n_points", syn.n_points},
          {"n_relations", syn.n_relations},
          {"dimension", syn.dimension},
          {"coefficient_min", syn.coefficient_min},
          {"coefficient_max", syn.coefficient_max},
          {"min_separation", syn.min_separation},
          {"noise_std", syn.noise_std}}},
    };
}

RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    reject_unknown(j, {"seed", "data", "features", "normalize", "split", "pbc", "regressor", "stream", "synth"},
                   "config");
    RunConfig c;
    read(j, "seed", c.seed);
    read(j, "normalize", c.normalize);

    if (j.contains("data")) {
        const auto& d = j["data"];
        reject_unknown(d, {"path", "format", "series_id", "target_column", "label_column"}, "data");
        std::string path;
        std::string format = "features";
        read(d, "path", path);
        read(d, "format", format);
        if (format != "features" && format != "series") {
            throw InvalidInput("data.format must be 'features' or 'series'");
        }
        c.data.path = resolve(base_dir, path);
        c.data.format = format == "features" ? DataFormat::Features : DataFormat::Series;
        read(d, "series_id", c.data.series_id);
        read(d, "target_column", c.data.target_column);
        read(d, "label_column", c.data.label_column);
    }
    if (j.contains("features")) {
        const auto& f = j["features"];
        reject_unknown(f, {"lags", "rolling_windows", "rolling_stats"}, "features");
        read(f, "lags", c.features.lags);
        read(f, "rolling_windows", c.features.rolling_windows);
        if (f.contains("rolling_stats")) {
            c.features.rolling_stats.clear();
            for (const auto& s : f["rolling_stats"]) {
                c.features.rolling_stats.push_back(rolling_stat_from_string(s.get<std::string>()));
            }
        }
        c.features.validate();
    }
    if (j.contains("split")) {
        const auto& s = j["split"];
        reject_unknown(s, {"train", "validation", "test"}, "split");
        read(s, "train", c.split.train);
        read(s, "validation", c.split.validation);
        read(s, "test", c.split.test);
    }
    if (j.contains("pbc")) {
        const auto& p = j["pbc"];
        reject_unknown(p, {"k_hat", "loss", "zeta", "max_iterations", "init_fraction", "soft_assignment"}, "pbc");
        read(p, "k_hat", c.pbc.k_hat);
        std::string loss = to_string(c.pbc.loss);
        read(p, "loss", loss);
        c.pbc.loss = loss_kind_from_string(loss);
        read(p, "zeta", c.pbc.zeta);
        read(p, "max_iterations", c.pbc.max_iterations);
        read(p, "init_fraction", c.pbc.init_fraction);
        read(p, "soft_assignment", c.pbc.soft_assignment);
    }
    if (j.contains("regressor")) c.pbc.regressor = regressor_spec_from_json(j["regressor"]);
    c.pbc.seed = c.seed;
    c.pbc.validate();

    if (j.contains("stream")) {
        const auto& s = j["stream"];
        reject_unknown(s, {"batch_size", "learning_rate", "project_to_simplex", "bundle", "data_path", "split"},
                       "stream");
        read(s, "batch_size", c.stream.batch_size);
        read(s, "learning_rate", c.stream.learning_rate);
        read(s, "project_to_simplex", c.stream.project_to_simplex);
        std::string bundle;
        std::string data_path;
        read(s, "bundle", bundle);
        read(s, "data_path", data_path);
        read(s, "split", c.stream.split);
        if (c.stream.split != "test" && c.stream.split != "validation") {
            throw InvalidInput("stream.split must be 'test' or 'validation'");
        }
        c.stream.bundle = resolve(base_dir, bundle);
        c.stream.data_path = resolve(base_dir, data_path);
        if (c.stream.batch_size == 0) throw InvalidInput("stream.batch_size must be at least 1");
        if (!(c.stream.learning_rate >= 0.0)) throw InvalidInput("stream.learning_rate must be nonnegative");
    }
    if (j.contains("synth")) {
        const auto& s = j["synth"];
        reject_unknown(s,
                       {"replicates", "k_hats", "n_points", "n_relations", "dimension", "coefficient_min",
                        "coefficient_max", "min_separation", "noise_std"},
                       "synth");
        auto& syn = c.synth.synthetic;
        read(s, "replicates", c.synth.replicates);
        read(s, "k_hats", c.synth.k_hats);
        read(s, "n_points", syn.n_points);
        read(s, "n_relations", syn.n_relations);
        read(s, "dimension", syn.dimension);
        read(s, "coefficient_min", syn.coefficient_min);
        read(s, "coefficient_max", syn.coefficient_max);
        read(s, "min_separation", syn.min_separation);
        read(s, "noise_std", syn.noise_std);
        syn.validate();
        if (c.synth.replicates == 0 || c.synth.k_hats.empty()) {
            throw InvalidInput("synth needs at least one replicate and one k_hat");
        }
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput("config " + path.string() + ": " + e.what());
    }
    return run_config_from_json(j, path.parent_path());
}

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
    json models = json::array();
    for (const auto& m : bundle.models) models.push_back(to_json(m));
    json j = {{"format", "pbc-model-bundle"},
              {"version", kBundleVersion},
              {"dimension", bundle.dimension()},
              {"feature_names", bundle.feature_names},
              {"models", models},
              {"baseline", bundle.baseline ? to_json(*bundle.baseline) : json(nullptr)},
              {"normalization", bundle.normalization
                                    ? json{{"min", bundle.normalization->min}, {"max", bundle.normalization->max}}
                                    : json(nullptr)}};
    write_json(path, j);
}

ModelBundle load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open model bundle " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput("model bundle " + path.string() + ": " + e.what());
    }
    if (j.value("format", "") != "pbc-model-bundle") throw InvalidInput(path.string() + " is not a model bundle");
    const int version = j.value("version", -1);
    if (version != kBundleVersion) {
        throw InvalidInput("model bundle version " + std::to_string(version) + " is not supported (expected " +
                           std::to_string(kBundleVersion) + ")");
    }
    ModelBundle bundle;
    for (const auto& m : j.at("models")) bundle.models.push_back(trained_model_from_json(m));
    if (bundle.models.empty()) throw InvalidInput("model bundle holds no models");
    const auto dimension = j.at("dimension").get<std::size_t>();
    for (const auto& m : bundle.models) {
        if (m.dimension() != dimension) throw InvalidInput("model bundle dimensions are inconsistent");
    }
    if (!j.at("baseline").is_null()) bundle.baseline = trained_model_from_json(j["baseline"]);
    if (!j.at("normalization").is_null()) {
        bundle.normalization = NormalizationParams{j["normalization"].at("min").get<double>(),
                                                   j["normalization"].at("max").get<double>()};
    }
    bundle.feature_names = j.value("feature_names", std::vector<std::string>{});
    return bundle;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void write_ndjson(const std::filesystem::path& path, const std::vector<json>& records) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path.string());
    for (const auto& r : records) out << r.dump() << '\n';
}

std::vector<json> read_ndjson(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path.string());
    std::vector<json> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(json::parse(line));
    }
    return out;
}

}  // namespace pbc

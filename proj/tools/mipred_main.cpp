// Command-line front end: prepare, train, evaluate, gridsearch, ablate,
// explain, report. Flags override config-file values which override defaults;
// every artifact embeds {format_version, seed, config_hash} and re-running
// with the same config reproduces the bytes.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mipred/artifact.hpp"
#include "mipred/beeswarm.hpp"
#include "mipred/datagen.hpp"
#include "mipred/error.hpp"
#include "mipred/eval.hpp"
#include "mipred/explain.hpp"
#include "mipred/gbdt.hpp"
#include "mipred/preprocess.hpp"
#include "mipred/rng.hpp"
#include "mipred/table.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mipred;

namespace {

struct RunConfig {
    std::string data_path;
    std::string schema_path;
    std::string target_column = "LET_IS";
    std::string pipeline = "preprocessed";  // or "raw"
    std::string out_dir = "out";
    std::string model_path;  // evaluate/explain; defaults to <out>/model.json
    double alpha = 0.5;
    std::size_t k = 50;
    std::uint64_t seed = 17;
    double test_fraction = 0.2;
    std::size_t cv_folds = 10;    // ablate: 10-fold comparison
    std::size_t grid_folds = 5;   // gridsearch: 5-fold selection
    gbdt::GbdtParams gbdt;

    std::vector<std::size_t> grid_n_trees{100, 300};
    std::vector<double> grid_learning_rate{0.05, 0.1};
    std::vector<std::size_t> grid_max_leaves{15, 31, 63};
    std::vector<std::size_t> grid_min_samples_leaf{5, 20};
    std::vector<std::size_t> grid_k{15, 35, 50};

    preprocess::PipelineMode mode() const {
        if (pipeline == "preprocessed") return preprocess::PipelineMode::preprocessed;
        if (pipeline == "raw") return preprocess::PipelineMode::raw;
        throw ParamError("pipeline must be 'preprocessed' or 'raw'");
    }

    preprocess::PipelineConfig pipeline_config() const {
        preprocess::PipelineConfig config;
        config.mode = mode();
        config.alpha = alpha;
        config.k = k;
        config.seed = seed;
        return config;
    }

    // Canonical key=value dump; its hash stamps every artifact.
    std::string canonical() const {
        std::string text;
        auto kv = [&text](const std::string& key, const std::string& value) {
            text += key + "=" + value + "\n";
        };
        kv("alpha", std::to_string(alpha));
        kv("cv_folds", std::to_string(cv_folds));
        kv("data", data_path);
        kv("gbdt.gamma", std::to_string(gbdt.gamma));
        kv("gbdt.lambda_l2", std::to_string(gbdt.lambda_l2));
        kv("gbdt.learning_rate", std::to_string(gbdt.learning_rate));
        kv("gbdt.max_bins", std::to_string(gbdt.max_bins));
        kv("gbdt.max_depth", std::to_string(gbdt.max_depth));
        kv("gbdt.max_leaves", std::to_string(gbdt.max_leaves));
        kv("gbdt.min_hessian_leaf", std::to_string(gbdt.min_hessian_leaf));
        kv("gbdt.min_samples_leaf", std::to_string(gbdt.min_samples_leaf));
        kv("gbdt.n_trees", std::to_string(gbdt.n_trees));
        kv("grid_folds", std::to_string(grid_folds));
        kv("k", std::to_string(k));
        kv("pipeline", pipeline);
        kv("schema", schema_path);
        kv("seed", std::to_string(seed));
        kv("target", target_column);
        kv("test_fraction", std::to_string(test_fraction));
        return text;
    }

    std::string config_hash() const { return artifact::hex64(rng::fnv1a64(canonical())); }
};

// Adds the reproducibility stamp to a JSON artifact string.
std::string stamp(const std::string& text, const RunConfig& config) {
    json j = json::parse(text);
    j["seed"] = config.seed;
    j["config_hash"] = config.config_hash();
    return j.dump(2) + "\n";
}

std::string stamp(json j, const RunConfig& config) {
    j["seed"] = config.seed;
    j["config_hash"] = config.config_hash();
    if (!j.contains("format_version")) j["format_version"] = 1;
    return j.dump(2) + "\n";
}

std::string out_path(const RunConfig& config, const std::string& name) {
    return (fs::path(config.out_dir) / name).string();
}

// ---------------------------------------------------------------------------
// Shared orchestration

struct LoadedData {
    tabular::Table table;
    tabular::BinaryTarget target;
    tabular::SplitIndices split;
};

LoadedData load_and_split(const RunConfig& config) {
    if (config.data_path.empty()) throw ParamError("--data is required");
    if (config.schema_path.empty()) throw ParamError("--schema is required");
    LoadedData data;
    const auto schema = tabular::load_schema(config.schema_path);
    data.table = tabular::load_table(config.data_path, schema);
    data.target = tabular::binarize_target(data.table, config.target_column);
    data.split = tabular::stratified_split(data.target, config.test_fraction, config.seed);
    return data;
}

tabular::BinaryTarget subset(const tabular::BinaryTarget& target,
                             const std::vector<std::size_t>& rows) {
    tabular::BinaryTarget out;
    out.values.reserve(rows.size());
    for (auto r : rows) out.values.push_back(target.values[r]);
    return out;
}

// Feature matrix + labels for a row subset under the configured pipeline;
// fits the pipeline on the training rows when asked to.
struct PipelineRun {
    FeatureMatrix train_x;
    tabular::BinaryTarget train_y;
    preprocess::PipelineFitState state;
};

PipelineRun fit_pipeline(const RunConfig& config, const LoadedData& data) {
    PipelineRun run;
    const auto train_y = subset(data.target, data.split.train);
    if (config.mode() == preprocess::PipelineMode::preprocessed) {
        auto [cleaned, report] = preprocess::clean(data.table, config.target_column);
        const auto train_table = cleaned.select_rows(data.split.train);
        auto fitted = preprocess::fit_transform(train_table, train_y,
                                                config.pipeline_config());
        run.train_x = std::move(fitted.matrix);
        run.train_y = subset(train_y, fitted.sampled_rows);
        run.state = std::move(fitted.state);
    } else {
        const auto raw = preprocess::raw_matrix(data.table);
        run.train_x = raw.select_rows(data.split.train);
        run.train_y = train_y;
        run.state = preprocess::raw_state(config.pipeline_config());
    }
    return run;
}

FeatureMatrix features_for_rows(const RunConfig& config, const LoadedData& data,
                                const preprocess::PipelineFitState& state,
                                const std::vector<std::size_t>& rows) {
    if (state.mode == preprocess::PipelineMode::preprocessed) {
        auto [cleaned, report] = preprocess::clean(data.table, config.target_column);
        return preprocess::transform(cleaned.select_rows(rows), state);
    }
    return preprocess::raw_matrix(data.table).select_rows(rows);
}

json metrics_json(const eval::MetricsReport& m) {
    json j;
    j["accuracy"] = m.accuracy;
    j["weighted_precision"] = m.weighted_precision;
    j["weighted_recall"] = m.weighted_recall;
    j["weighted_f1"] = m.weighted_f1;
    j["confusion"] = {{"tp", m.confusion.tp},
                      {"fp", m.confusion.fp},
                      {"fn", m.confusion.fn},
                      {"tn", m.confusion.tn}};
    for (int c = 0; c < 2; ++c) {
        json pc;
        pc["precision"] = m.per_class[c].precision;
        pc["recall"] = m.per_class[c].recall;
        pc["f1"] = m.per_class[c].f1;
        pc["support"] = m.per_class[c].support;
        pc["undefined_precision"] = m.per_class[c].undefined_precision;
        j[c == 0 ? "class_0" : "class_1"] = pc;
    }
    return j;
}

std::string fixed3(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.3f", v);
    return std::string(buffer);
}

// Aligned text table in the study's column layout.
std::string metrics_table(const std::vector<std::array<std::string, 6>>& rows) {
    static const std::array<std::string, 6> header = {"Model",   "Pipeline", "wF1",
                                                      "wPrecision", "wRecall",  "Accuracy"};
    std::array<std::size_t, 6> width{};
    for (std::size_t c = 0; c < 6; ++c) width[c] = header[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < 6; ++c) width[c] = std::max(width[c], row[c].size());
    std::string text;
    auto emit = [&](const std::array<std::string, 6>& row) {
        for (std::size_t c = 0; c < 6; ++c) {
            text += row[c];
            text += std::string(width[c] - row[c].size() + 2, ' ');
        }
        while (!text.empty() && text.back() == ' ') text.pop_back();
        text += "\n";
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    return text;
}

std::array<std::string, 6> metrics_row(const std::string& model, const std::string& pipeline,
                                       double f1, double precision, double recall,
                                       double accuracy) {
    return {model, pipeline, fixed3(f1), fixed3(precision), fixed3(recall), fixed3(accuracy)};
}

// ---------------------------------------------------------------------------
// Commands

void cmd_prepare(const RunConfig& config) {
    const auto data = load_and_split(config);
    auto [cleaned, report] = preprocess::clean(data.table, config.target_column);

    fs::create_directories(config.out_dir);
    tabular::save_table(cleaned.select_rows(data.split.train), out_path(config, "train.csv"));
    tabular::save_table(cleaned.select_rows(data.split.test), out_path(config, "test.csv"));
    tabular::save_schema(cleaned.schema, out_path(config, "schema_prepared.txt"));
    artifact::write_file(out_path(config, "cleaning_report.json"),
                         stamp(preprocess::cleaning_report_to_json(report), config));

    std::string state_json;
    if (config.mode() == preprocess::PipelineMode::preprocessed) {
        const auto train_table = cleaned.select_rows(data.split.train);
        const auto train_y = subset(data.target, data.split.train);
        const auto fitted =
            preprocess::fit_transform(train_table, train_y, config.pipeline_config());
        state_json = fitted.state.to_json();
    } else {
        state_json = preprocess::raw_state(config.pipeline_config()).to_json();
    }
    artifact::write_file(out_path(config, "pipeline_state.json"), stamp(state_json, config));

    std::cout << "prepared " << data.split.train.size() << " train / "
              << data.split.test.size() << " test rows; "
              << report.surviving_features.size() << " features survive cleaning\n";
}

void cmd_train(const RunConfig& config) {
    const auto data = load_and_split(config);
    const auto run = fit_pipeline(config, data);
    const auto model = gbdt::fit(run.train_x, run.train_y, config.gbdt);

    fs::create_directories(config.out_dir);
    artifact::write_file(out_path(config, "model.json"), stamp(model.to_json(), config));
    artifact::write_file(out_path(config, "pipeline_state.json"),
                         stamp(run.state.to_json(), config));

    // Training-set metrics, on the unsampled training rows.
    const auto train_x_full = features_for_rows(config, data, run.state, data.split.train);
    const auto labels = gbdt::predict_label(model, train_x_full);
    const auto m = eval::metrics(labels, subset(data.target, data.split.train));
    json j;
    j["format_version"] = 1;
    j["kind"] = "mipred.train_report";
    j["pipeline"] = config.pipeline;
    j["n_train_rows"] = run.train_x.n_rows;
    j["n_features"] = run.train_x.n_cols;
    j["train_metrics"] = metrics_json(m);
    artifact::write_file(out_path(config, "train_report.json"), stamp(j, config));
    std::cout << "trained " << model.trees.size() << " trees on " << run.train_x.n_rows
              << " rows x " << run.train_x.n_cols << " features\n";
}

void cmd_evaluate(const RunConfig& config) {
    const auto data = load_and_split(config);
    const auto model_file =
        config.model_path.empty() ? out_path(config, "model.json") : config.model_path;
    const auto model = gbdt::Forest::load(model_file);
    const auto state = preprocess::PipelineFitState::from_json(
        artifact::read_file(out_path(config, "pipeline_state.json")));

    const auto test_x = features_for_rows(config, data, state, data.split.test);
    const auto labels = gbdt::predict_label(model, test_x);
    const auto m = eval::metrics(labels, subset(data.target, data.split.test));

    json j;
    j["format_version"] = 1;
    j["kind"] = "mipred.evaluation";
    j["pipeline"] = config.pipeline;
    j["n_test_rows"] = test_x.n_rows;
    j["test_metrics"] = metrics_json(m);
    fs::create_directories(config.out_dir);
    artifact::write_file(out_path(config, "evaluation.json"), stamp(j, config));

    const auto table_text = metrics_table({metrics_row(
        "gbdt", config.pipeline == "raw" ? "2" : "1", m.weighted_f1, m.weighted_precision,
        m.weighted_recall, m.accuracy)});
    artifact::write_file(out_path(config, "evaluation.txt"), table_text);
    std::cout << table_text;
}

void cmd_gridsearch(const RunConfig& config) {
    const auto data = load_and_split(config);
    const auto train_table = data.table.select_rows(data.split.train);
    const auto views = eval::DatasetViews::prepare(train_table, config.target_column);

    eval::GridSpec spec;
    spec.cv_folds = config.grid_folds;
    const bool preprocessed = config.mode() == preprocess::PipelineMode::preprocessed;
    const auto k_choices = preprocessed ? config.grid_k : std::vector<std::size_t>{config.k};
    for (std::size_t n_trees : config.grid_n_trees)
        for (double lr : config.grid_learning_rate)
            for (std::size_t leaves : config.grid_max_leaves)
                for (std::size_t msl : config.grid_min_samples_leaf)
                    for (std::size_t k : k_choices) {
                        eval::Candidate candidate;
                        candidate.params = config.gbdt;
                        candidate.params.n_trees = n_trees;
                        candidate.params.learning_rate = lr;
                        candidate.params.max_leaves = leaves;
                        candidate.params.min_samples_leaf = msl;
                        candidate.pipeline = config.pipeline_config();
                        candidate.pipeline.k = k;
                        spec.candidates.push_back(candidate);
                    }

    const auto result = eval::grid_search(views, spec, config.seed);

    json candidates = json::array();
    for (const auto& r : result.results) {
        json c;
        c["n_trees"] = r.candidate.params.n_trees;
        c["learning_rate"] = r.candidate.params.learning_rate;
        c["max_leaves"] = r.candidate.params.max_leaves;
        c["min_samples_leaf"] = r.candidate.params.min_samples_leaf;
        c["k"] = r.candidate.pipeline.k;
        c["failed"] = r.failed;
        if (r.failed) {
            c["error"] = r.error;
        } else {
            c["weighted_f1_mean"] = r.cv.f1.mean;
            c["weighted_f1_sd"] = r.cv.f1.sd;
            c["accuracy_mean"] = r.cv.accuracy.mean;
        }
        candidates.push_back(c);
    }
    json j;
    j["format_version"] = 1;
    j["kind"] = "mipred.gridsearch";
    j["pipeline"] = config.pipeline;
    j["cv_folds"] = spec.cv_folds;
    j["best_index"] = result.best_index;
    j["candidates"] = candidates;
    fs::create_directories(config.out_dir);
    artifact::write_file(out_path(config, "gridsearch.json"), stamp(j, config));

    const auto& best = result.results[result.best_index];
    std::cout << "best candidate #" << result.best_index << ": n_trees="
              << best.candidate.params.n_trees
              << " learning_rate=" << best.candidate.params.learning_rate
              << " max_leaves=" << best.candidate.params.max_leaves
              << " min_samples_leaf=" << best.candidate.params.min_samples_leaf;
    if (preprocessed) std::cout << " k=" << best.candidate.pipeline.k;
    std::cout << "  (weighted F1 " << fixed3(best.cv.f1.mean) << ")\n";
}

void cmd_ablate(const RunConfig& config) {
    const auto data = load_and_split(config);
    const auto train_table = data.table.select_rows(data.split.train);
    const auto views = eval::DatasetViews::prepare(train_table, config.target_column);

    auto p1 = config.pipeline_config();
    p1.mode = preprocess::PipelineMode::preprocessed;
    const auto result =
        eval::run_ablation(views, p1, config.gbdt, config.cv_folds, config.seed);

    auto cv_json = [&](const eval::CvResult& cv) {
        json j;
        j["weighted_f1_mean"] = cv.f1.mean;
        j["weighted_f1_sd"] = cv.f1.sd;
        j["weighted_precision_mean"] = cv.precision.mean;
        j["weighted_recall_mean"] = cv.recall.mean;
        j["accuracy_mean"] = cv.accuracy.mean;
        json folds = json::array();
        for (const auto& m : cv.fold_metrics) folds.push_back(metrics_json(m));
        j["folds"] = folds;
        return j;
    };
    json j;
    j["format_version"] = 1;
    j["kind"] = "mipred.ablation";
    j["cv_folds"] = config.cv_folds;
    j["partition_hash"] = artifact::hex64(result.partition_hash);
    j["pipeline_1"] = cv_json(result.preprocessed);
    j["pipeline_2"] = cv_json(result.raw);
    j["t_test"] = {{"t_statistic", result.f1_ttest.t_statistic},
                   {"degrees_of_freedom", result.f1_ttest.degrees_of_freedom},
                   {"p_value", result.f1_ttest.p_value},
                   {"mean_difference", result.f1_ttest.mean_difference},
                   {"zero_variance", result.f1_ttest.zero_variance}};
    fs::create_directories(config.out_dir);
    artifact::write_file(out_path(config, "ablation.json"), stamp(j, config));

    std::string text = metrics_table(
        {metrics_row("gbdt", "1", result.preprocessed.f1.mean,
                     result.preprocessed.precision.mean, result.preprocessed.recall.mean,
                     result.preprocessed.accuracy.mean),
         metrics_row("gbdt", "2", result.raw.f1.mean, result.raw.precision.mean,
                     result.raw.recall.mean, result.raw.accuracy.mean)});
    char line[160];
    std::snprintf(line, sizeof(line),
                  "paired t-test on fold-wise weighted F1: t=%.4f df=%zu p=%.4f\n",
                  result.f1_ttest.t_statistic, result.f1_ttest.degrees_of_freedom,
                  result.f1_ttest.p_value);
    text += line;
    std::snprintf(line, sizeof(line), "seed=%llu partition_hash=%s\n",
                  static_cast<unsigned long long>(config.seed),
                  artifact::hex64(result.partition_hash).c_str());
    text += line;
    artifact::write_file(out_path(config, "ablation.txt"), text);
    std::cout << text;
}

void cmd_explain(const RunConfig& config) {
    const auto data = load_and_split(config);
    const auto model_file =
        config.model_path.empty() ? out_path(config, "model.json") : config.model_path;
    const auto model = gbdt::Forest::load(model_file);
    const auto state = preprocess::PipelineFitState::from_json(
        artifact::read_file(out_path(config, "pipeline_state.json")));

    const auto test_x = features_for_rows(config, data, state, data.split.test);
    const auto shap = explain::tree_shap(model, test_x);
    const auto importance = explain::global_importance(shap);

    fs::create_directories(config.out_dir);
    artifact::write_file(out_path(config, "shap_values.json"), stamp(shap.to_json(), config));
    shap.save_csv(out_path(config, "shap_values.csv"));

    std::string ranking;
    for (std::size_t i = 0; i < importance.ranking.size(); ++i) {
        char line[160];
        std::snprintf(line, sizeof(line), "%3zu  %-24s %.6f\n", i + 1,
                      importance.ranking[i].c_str(), importance.mean_abs_shap[i]);
        ranking += line;
    }
    artifact::write_file(out_path(config, "importance_ranking.txt"), ranking);

    explain::BeeswarmOptions options;
    options.seed = config.seed;
    explain::save_beeswarm_svg(shap, test_x, importance,
                               out_path(config, "beeswarm.svg"), options);

    std::cout << "explained " << test_x.n_rows << " rows; top features:\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, importance.ranking.size()); ++i)
        std::cout << "  " << (i + 1) << ". " << importance.ranking[i] << "\n";
}

void cmd_report(const RunConfig& config) {
    std::string text;
    const auto ablation_path = out_path(config, "ablation.json");
    const auto evaluation_path = out_path(config, "evaluation.json");
    const auto grid_path = out_path(config, "gridsearch.json");
    std::vector<std::array<std::string, 6>> rows;
    std::string tail;

    if (fs::exists(ablation_path)) {
        const json j = json::parse(artifact::read_file(ablation_path));
        rows.push_back(metrics_row("gbdt", "1", j["pipeline_1"]["weighted_f1_mean"],
                                   j["pipeline_1"]["weighted_precision_mean"],
                                   j["pipeline_1"]["weighted_recall_mean"],
                                   j["pipeline_1"]["accuracy_mean"]));
        rows.push_back(metrics_row("gbdt", "2", j["pipeline_2"]["weighted_f1_mean"],
                                   j["pipeline_2"]["weighted_precision_mean"],
                                   j["pipeline_2"]["weighted_recall_mean"],
                                   j["pipeline_2"]["accuracy_mean"]));
        char line[160];
        std::snprintf(line, sizeof(line),
                      "ablation t-test: t=%.4f p=%.4f (10-fold weighted F1)\n",
                      j["t_test"]["t_statistic"].get<double>(),
                      j["t_test"]["p_value"].get<double>());
        tail += line;
    }
    if (fs::exists(evaluation_path)) {
        const json j = json::parse(artifact::read_file(evaluation_path));
        const auto& m = j["test_metrics"];
        rows.push_back(metrics_row(
            "gbdt (test)", j["pipeline"] == "raw" ? "2" : "1", m["weighted_f1"],
            m["weighted_precision"], m["weighted_recall"], m["accuracy"]));
    }
    if (fs::exists(grid_path)) {
        const json j = json::parse(artifact::read_file(grid_path));
        const auto& best = j["candidates"][j["best_index"].get<std::size_t>()];
        char line[200];
        std::snprintf(line, sizeof(line),
                      "grid search best: n_trees=%zu lr=%.3f leaves=%zu msl=%zu k=%zu "
                      "(weighted F1 %.3f)\n",
                      best["n_trees"].get<std::size_t>(),
                      best["learning_rate"].get<double>(),
                      best["max_leaves"].get<std::size_t>(),
                      best["min_samples_leaf"].get<std::size_t>(),
                      best["k"].get<std::size_t>(), best["weighted_f1_mean"].get<double>());
        tail += line;
    }
    if (rows.empty() && tail.empty())
        throw DataError("no artifacts found in '" + config.out_dir +
                        "'; run ablate/evaluate/gridsearch first");
    if (!rows.empty()) text += metrics_table(rows);
    text += tail;
    artifact::write_file(out_path(config, "report.txt"), text);
    std::cout << text;
}

// Plain-text `key = value` config with [section] headers; sections prefix the
// key ("[gbdt] n_trees" is "gbdt.n_trees"). Values here override defaults and
// are themselves overridden by command-line flags.
void apply_config_file(RunConfig& config, const std::string& path) {
    std::istringstream in(artifact::read_file(path));
    std::string line, section;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    };
    auto parse_list_sizes = [&](const std::string& value) {
        std::vector<std::size_t> out;
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stoull(trim(item)));
        return out;
    };
    auto parse_list_doubles = [&](const std::string& value) {
        std::vector<double> out;
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stod(trim(item)));
        return out;
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParamError(path + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!section.empty()) key = section + "." + key;
        try {
            if (key == "data") config.data_path = value;
            else if (key == "schema") config.schema_path = value;
            else if (key == "target") config.target_column = value;
            else if (key == "pipeline") config.pipeline = value;
            else if (key == "out") config.out_dir = value;
            else if (key == "model") config.model_path = value;
            else if (key == "alpha") config.alpha = std::stod(value);
            else if (key == "k") config.k = std::stoull(value);
            else if (key == "seed") config.seed = std::stoull(value);
            else if (key == "test_fraction") config.test_fraction = std::stod(value);
            else if (key == "cv_folds") config.cv_folds = std::stoull(value);
            else if (key == "grid_folds") config.grid_folds = std::stoull(value);
            else if (key == "gbdt.n_trees") config.gbdt.n_trees = std::stoull(value);
            else if (key == "gbdt.learning_rate") config.gbdt.learning_rate = std::stod(value);
            else if (key == "gbdt.max_leaves") config.gbdt.max_leaves = std::stoull(value);
            else if (key == "gbdt.max_depth") config.gbdt.max_depth = std::stoull(value);
            else if (key == "gbdt.min_samples_leaf")
                config.gbdt.min_samples_leaf = std::stoull(value);
            else if (key == "gbdt.min_hessian_leaf")
                config.gbdt.min_hessian_leaf = std::stod(value);
            else if (key == "gbdt.lambda_l2") config.gbdt.lambda_l2 = std::stod(value);
            else if (key == "gbdt.gamma") config.gbdt.gamma = std::stod(value);
            else if (key == "gbdt.max_bins") config.gbdt.max_bins = std::stoull(value);
            else if (key == "grid.n_trees") config.grid_n_trees = parse_list_sizes(value);
            else if (key == "grid.learning_rate")
                config.grid_learning_rate = parse_list_doubles(value);
            else if (key == "grid.max_leaves") config.grid_max_leaves = parse_list_sizes(value);
            else if (key == "grid.min_samples_leaf")
                config.grid_min_samples_leaf = parse_list_sizes(value);
            else if (key == "grid.k") config.grid_k = parse_list_sizes(value);
            else
                throw ParamError(path + ":" + std::to_string(line_no) + ": unknown key '" +
                                 key + "'");
        } catch (const std::invalid_argument&) {
            throw ParamError(path + ":" + std::to_string(line_no) + ": bad value for '" +
                             key + "'");
        } catch (const std::out_of_range&) {
            throw ParamError(path + ":" + std::to_string(line_no) + ": bad value for '" +
                             key + "'");
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig config;

    // The config file seeds new defaults; flags parsed afterwards win.
    std::string config_path;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) config_path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0) config_path = arg.substr(9);
    }
    if (!config_path.empty()) {
        try {
            apply_config_file(config, config_path);
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }

    CLI::App app{"Mortality-risk GBDT toolkit: preprocessing ablation and attribution"};
    app.fallthrough(true);
    app.add_option("--config", config_path, "Plain-text key = value config with [gbdt] sections");

    app.add_option("--data", config.data_path, "Dataset CSV path");
    app.add_option("--schema", config.schema_path, "Schema file path");
    app.add_option("--target", config.target_column, "Lethal-outcome target column")
        ->capture_default_str();
    app.add_option("--pipeline", config.pipeline, "preprocessed | raw")
        ->capture_default_str();
    app.add_option("--out", config.out_dir, "Output directory")->capture_default_str();
    app.add_option("--model", config.model_path, "Model file (evaluate/explain)");
    app.add_option("--alpha", config.alpha, "Undersampling ratio n_min/n_maj")
        ->capture_default_str();
    app.add_option("--k", config.k, "Selected feature count")->capture_default_str();
    app.add_option("--seed", config.seed, "Master seed")->capture_default_str();
    app.add_option("--test-fraction", config.test_fraction, "Held-out fraction")
        ->capture_default_str();
    app.add_option("--cv-folds", config.cv_folds, "Ablation fold count")
        ->capture_default_str();
    app.add_option("--grid-folds", config.grid_folds, "Grid-search fold count")
        ->capture_default_str();

    app.add_option("--gbdt.n_trees", config.gbdt.n_trees)->capture_default_str();
    app.add_option("--gbdt.learning_rate", config.gbdt.learning_rate)->capture_default_str();
    app.add_option("--gbdt.max_leaves", config.gbdt.max_leaves)->capture_default_str();
    app.add_option("--gbdt.max_depth", config.gbdt.max_depth)->capture_default_str();
    app.add_option("--gbdt.min_samples_leaf", config.gbdt.min_samples_leaf)
        ->capture_default_str();
    app.add_option("--gbdt.min_hessian_leaf", config.gbdt.min_hessian_leaf)
        ->capture_default_str();
    app.add_option("--gbdt.lambda_l2", config.gbdt.lambda_l2)->capture_default_str();
    app.add_option("--gbdt.gamma", config.gbdt.gamma)->capture_default_str();
    app.add_option("--gbdt.max_bins", config.gbdt.max_bins)->capture_default_str();

    app.add_option("--grid.n_trees", config.grid_n_trees)->capture_default_str();
    app.add_option("--grid.learning_rate", config.grid_learning_rate)->capture_default_str();
    app.add_option("--grid.max_leaves", config.grid_max_leaves)->capture_default_str();
    app.add_option("--grid.min_samples_leaf", config.grid_min_samples_leaf)
        ->capture_default_str();
    app.add_option("--grid.k", config.grid_k)->capture_default_str();

    app.require_subcommand(1);
    auto* prepare = app.add_subcommand("prepare", "Clean, split and fit the pipeline");
    auto* train = app.add_subcommand("train", "Train the boosted ensemble");
    auto* evaluate = app.add_subcommand("evaluate", "Score the held-out split");
    auto* gridsearch = app.add_subcommand("gridsearch", "5-fold grid search on the train split");
    auto* ablate = app.add_subcommand("ablate", "Pipeline 1 vs 2 shared-fold comparison");
    auto* explain_cmd = app.add_subcommand("explain", "Attributions, ranking and beeswarm");
    auto* report = app.add_subcommand("report", "Summarize artifacts in the output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        config.gbdt.seed = config.seed;
        if (prepare->parsed()) cmd_prepare(config);
        if (train->parsed()) cmd_train(config);
        if (evaluate->parsed()) cmd_evaluate(config);
        if (gridsearch->parsed()) cmd_gridsearch(config);
        if (ablate->parsed()) cmd_ablate(config);
        if (explain_cmd->parsed()) cmd_explain(config);
        if (report->parsed()) cmd_report(config);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
